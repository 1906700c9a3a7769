#ifndef MRSQ_VALUE_POLICY_H_
#define MRSQ_VALUE_POLICY_H_

#include "mrsq/common/rng.h"
#include "mrsq/common/types.h"
#include "mrsq/nn/mlp.h"
#include "mrsq/nn/params.h"

namespace mrsq::value {

// Deterministic latent policy with tanh output in [-1, 1].
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(int zs_dim, int action_dim, int hidden_dim, Rng& rng);

  Matrix Forward(const Matrix& zs, nn::Mlp::Cache* cache = nullptr) const;
  Matrix Backward(const nn::Mlp::Cache& cache, const Matrix& da, nn::Gradients* grads) const;

  int action_dim() const { return action_dim_; }
  nn::ParameterStore& params() { return store_; }
  const nn::ParameterStore& params() const { return store_; }

 private:
  int action_dim_ = 0;
  nn::ParameterStore store_;
  nn::Mlp mlp_;
};

}  // namespace mrsq::value

#endif  // MRSQ_VALUE_POLICY_H_
