#ifndef MRSQ_ANALYSIS_NCHAIN_ORACLE_H_
#define MRSQ_ANALYSIS_NCHAIN_ORACLE_H_

#include "mrsq/env/nchain.h"
#include "mrsq/plan/planning_model.h"

namespace mrsq::analysis {

// Ground-truth N-chain dynamics and Q* exposed as a planning model. The
// latent state is the one-hot observation. The policy always picks a_0.
class NChainOracleModel : public plan::PlanningModel {
 public:
  explicit NChainOracleModel(env::NChainSpec spec);

  int action_dim() const override { return spec_.actions; }
  Matrix Encode(const Matrix& obs) const override;
  plan::LatentStep Step(const Matrix& z, const Matrix& actions) const override;
  Matrix Policy(const Matrix& z) const override;
  Vector Value(const Matrix& z, const Matrix& actions,
               plan::ValueReduction reduction) const override;

  const env::NChainSpec& spec() const { return spec_; }

 private:
  env::NChainSpec spec_;
};

}  // namespace mrsq::analysis

#endif  // MRSQ_ANALYSIS_NCHAIN_ORACLE_H_
