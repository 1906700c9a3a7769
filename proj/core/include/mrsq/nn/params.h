#ifndef MRSQ_NN_PARAMS_H_
#define MRSQ_NN_PARAMS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mrsq/common/rng.h"
#include "mrsq/common/types.h"

namespace mrsq::nn {

struct Parameter {
  std::string name;
  Matrix value;
  // AdamW moments, same shape as value.
  Matrix m;
  Matrix v;
};

// Named trainable tensors of one network plus their optimizer state.
// Layers hold integer ids into a store, so copying a store copies the network.
class ParameterStore {
 public:
  int Add(std::string name, int rows, int cols);

  int size() const { return static_cast<int>(params_.size()); }
  Parameter& operator[](int id) { return params_[id]; }
  const Parameter& operator[](int id) const { return params_[id]; }
  Matrix& value(int id) { return params_[id].value; }
  const Matrix& value(int id) const { return params_[id].value; }

  // -1 when absent.
  int Find(const std::string& name) const;

  int64_t step() const { return step_; }
  void set_step(int64_t step) { step_ = step; }

  int64_t num_scalars() const;

  // Copies values only (used for target-network refresh).
  void CopyValuesFrom(const ParameterStore& other);
  bool ValuesEqual(const ParameterStore& other) const;

  std::vector<double> FlatValues() const;
  void SetFlatValues(const std::vector<double>& flat);

 private:
  std::vector<Parameter> params_;
  int64_t step_ = 0;
};

class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterStore& store);

  int size() const { return static_cast<int>(grads_.size()); }
  Matrix& operator[](int id) { return grads_[id]; }
  const Matrix& operator[](int id) const { return grads_[id]; }

  void SetZero();
  double SquaredNorm() const;
  double Norm() const;
  void Scale(double s);
  bool AllFinite() const;
  std::vector<double> Flat() const;

 private:
  std::vector<Matrix> grads_;
};

void XavierUniform(Matrix& w, Rng& rng);

}  // namespace mrsq::nn

#endif  // MRSQ_NN_PARAMS_H_
