#include "mrsq/value/q_ensemble.h"

#include "mrsq/common/errors.h"

namespace mrsq::value {

void QEnsembleDims::Validate() const {
  if (zsa_dim <= 0 || hidden_dim < 2) throw ConfigError("Q ensemble: bad widths");
  if (size < 1) throw ConfigError("Q ensemble: size must be >= 1");
}

QEnsemble::QEnsemble(const QEnsembleDims& dims, Rng& rng) : dims_(dims) {
  dims_.Validate();
  nn::MlpSpec spec;
  spec.input_dim = dims_.zsa_dim;
  const int h = dims_.hidden_dim;
  spec.layers = {{h, nn::Norm::kLayerNorm, nn::Activation::kElu},
                 {h, nn::Norm::kLayerNorm, nn::Activation::kElu},
                 {h, nn::Norm::kLayerNorm, nn::Activation::kElu},
                 {1, nn::Norm::kNone, nn::Activation::kNone}};
  for (int k = 0; k < dims_.size; ++k) {
    members_.emplace_back(online_, "q" + std::to_string(k), spec, rng);
  }
  target_ = online_;
}

Matrix QEnsemble::Forward(const Matrix& zsa, bool use_targets,
                          std::vector<nn::Mlp::Cache>* caches) const {
  const nn::ParameterStore& store = use_targets ? target_ : online_;
  Matrix q(zsa.rows(), dims_.size);
  if (caches != nullptr) caches->assign(dims_.size, {});
  for (int k = 0; k < dims_.size; ++k) {
    q.col(k) = members_[k]
                   .Forward(store, zsa, caches != nullptr ? &(*caches)[k] : nullptr)
                   .col(0);
  }
  return q;
}

Matrix QEnsemble::MemberBackward(int member, const nn::Mlp::Cache& cache, const Matrix& dq,
                                 nn::Gradients* grads) const {
  return members_.at(member).Backward(online_, cache, dq, grads);
}

Vector Reduce(const Matrix& q, Reduction reduction) {
  if (q.cols() == 0) throw ConfigError("Reduce: empty ensemble");
  return reduction == Reduction::kMin ? Vector(q.rowwise().minCoeff())
                                      : Vector(q.rowwise().mean());
}

}  // namespace mrsq::value
