#ifndef MRSQ_NN_LAYERS_H_
#define MRSQ_NN_LAYERS_H_

#include <string>

#include "mrsq/common/rng.h"
#include "mrsq/common/types.h"
#include "mrsq/nn/params.h"

namespace mrsq::nn {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kEluAlpha = 1.0;
inline constexpr int kSemGroupSize = 8;

enum class Activation { kNone, kElu, kRelu, kTanh };
enum class Norm { kNone, kLayerNorm, kLayerNormAffine };

const char* ToString(Activation a);
const char* ToString(Norm n);

// Affine map applied row-wise. Weight is (out, in), bias is (1, out).
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, int in, int out, Rng& rng);

  Matrix Forward(const ParameterStore& store, const Matrix& x) const;
  // Accumulates parameter gradients into `grads` (skipped when null) and
  // returns the gradient with respect to `x`.
  Matrix Backward(const ParameterStore& store, const Matrix& x, const Matrix& dy,
                  Gradients* grads) const;

  int in() const { return in_; }
  int out() const { return out_; }
  int weight_id() const { return weight_; }
  int bias_id() const { return bias_; }

 private:
  int weight_ = -1;
  int bias_ = -1;
  int in_ = 0;
  int out_ = 0;
};

// Free-function form of Linear::Forward, for tests and oracles.
Matrix DenseForward(const Matrix& x, const Matrix& weight, const RowVector& bias);

struct LayerNormCache {
  Matrix xhat;
  Vector inv_std;
};

// Normalizes each row to zero mean and unit (biased) variance.
Matrix LayerNorm(const Matrix& x, LayerNormCache* cache = nullptr);
Matrix LayerNormBackward(const LayerNormCache& cache, const Matrix& dy);

Matrix Activate(Activation a, const Matrix& x);
// `x` is the activation input, `y` its output.
Matrix ActivateBackward(Activation a, const Matrix& x, const Matrix& y,
                        const Matrix& dy);

// Softmax over consecutive groups of `group` columns.
Matrix Sem(const Matrix& x, int group = kSemGroupSize);
Matrix SemBackward(const Matrix& y, const Matrix& dy, int group = kSemGroupSize);

Matrix SoftmaxRows(const Matrix& x);
Matrix LogSoftmaxRows(const Matrix& x);
double Sigmoid(double x);

}  // namespace mrsq::nn

#endif  // MRSQ_NN_LAYERS_H_
