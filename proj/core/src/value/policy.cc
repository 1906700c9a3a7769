#include "mrsq/value/policy.h"

#include "mrsq/common/errors.h"

namespace mrsq::value {

PolicyNet::PolicyNet(int zs_dim, int action_dim, int hidden_dim, Rng& rng)
    : action_dim_(action_dim) {
  if (zs_dim <= 0 || action_dim <= 0 || hidden_dim < 2) {
    throw ConfigError("policy: bad widths");
  }
  nn::MlpSpec spec;
  spec.input_dim = zs_dim;
  spec.layers = {{hidden_dim, nn::Norm::kLayerNorm, nn::Activation::kRelu},
                 {hidden_dim, nn::Norm::kLayerNorm, nn::Activation::kRelu},
                 {action_dim, nn::Norm::kNone, nn::Activation::kTanh}};
  mlp_ = nn::Mlp(store_, "policy", spec, rng);
}

Matrix PolicyNet::Forward(const Matrix& zs, nn::Mlp::Cache* cache) const {
  return mlp_.Forward(store_, zs, cache);
}

Matrix PolicyNet::Backward(const nn::Mlp::Cache& cache, const Matrix& da,
                           nn::Gradients* grads) const {
  return mlp_.Backward(store_, cache, da, grads);
}

}  // namespace mrsq::value
