#ifndef MRSQ_VALUE_Q_ENSEMBLE_H_
#define MRSQ_VALUE_Q_ENSEMBLE_H_

#include <vector>

#include "mrsq/common/rng.h"
#include "mrsq/common/types.h"
#include "mrsq/nn/mlp.h"
#include "mrsq/nn/params.h"

namespace mrsq::value {

enum class Reduction { kMin, kMean };

struct QEnsembleDims {
  int zsa_dim = 512;
  int hidden_dim = 512;
  int size = 10;

  void Validate() const;
};

// Independent Q heads over zsa. Targets are a lagged copy of the online
// parameters, refreshed on demand.
class QEnsemble {
 public:
  QEnsemble() = default;
  QEnsemble(const QEnsembleDims& dims, Rng& rng);

  int size() const { return dims_.size; }
  const QEnsembleDims& dims() const { return dims_; }

  // (B, size) matrix of member outputs.
  Matrix Forward(const Matrix& zsa, bool use_targets = false,
                 std::vector<nn::Mlp::Cache>* caches = nullptr) const;
  // dq is (B, 1). Returns the gradient with respect to zsa.
  Matrix MemberBackward(int member, const nn::Mlp::Cache& cache, const Matrix& dq,
                        nn::Gradients* grads) const;

  void RefreshTargets() { target_.CopyValuesFrom(online_); }

  nn::ParameterStore& params() { return online_; }
  const nn::ParameterStore& params() const { return online_; }
  nn::ParameterStore& target_params() { return target_; }
  const nn::ParameterStore& target_params() const { return target_; }

 private:
  QEnsembleDims dims_;
  nn::ParameterStore online_;
  nn::ParameterStore target_;
  std::vector<nn::Mlp> members_;
};

Vector Reduce(const Matrix& q, Reduction reduction);

}  // namespace mrsq::value

#endif  // MRSQ_VALUE_Q_ENSEMBLE_H_
