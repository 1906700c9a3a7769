#include "mrsq/analysis/nchain_oracle.h"

#include "mrsq/common/errors.h"

namespace mrsq::analysis {

namespace {

int RowArgmax(const Matrix& m, Eigen::Index r) {
  Eigen::Index best = 0;
  m.row(r).maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

NChainOracleModel::NChainOracleModel(env::NChainSpec spec) : spec_(spec) { spec_.Validate(); }

Matrix NChainOracleModel::Encode(const Matrix& obs) const {
  if (obs.cols() != spec_.num_states()) throw ConfigError("oracle: observation width mismatch");
  return obs;
}

plan::LatentStep NChainOracleModel::Step(const Matrix& z, const Matrix& actions) const {
  plan::LatentStep out;
  out.z_next = Matrix::Zero(z.rows(), z.cols());
  out.reward.resize(z.rows());
  out.terminal_prob.resize(z.rows());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const env::NChainTransition t =
        env::NChainStep(spec_, RowArgmax(z, r), RowArgmax(actions, r));
    out.z_next(r, t.next_state) = 1.0;
    out.reward(r) = t.reward;
    out.terminal_prob(r) = t.terminated ? 1.0 : 0.0;
  }
  return out;
}

Matrix NChainOracleModel::Policy(const Matrix& z) const {
  Matrix a = Matrix::Constant(z.rows(), spec_.actions, -1.0);
  a.col(0).setOnes();
  return a;
}

Vector NChainOracleModel::Value(const Matrix& z, const Matrix& actions,
                                plan::ValueReduction) const {
  Vector v(z.rows());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    v(r) = env::NChainOptimalQ(spec_, RowArgmax(z, r), RowArgmax(actions, r));
  }
  return v;
}

}  // namespace mrsq::analysis
