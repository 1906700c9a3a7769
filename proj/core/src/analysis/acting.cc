#include "mrsq/analysis/acting.h"

namespace mrsq::analysis {

Vector RandomActor::Act(const Vector&, Rng& rng) {
  Vector a(action_dim_);
  if (discrete_) {
    a.setConstant(-1.0);
    a(rng.UniformInt(action_dim_)) = 1.0;
  } else {
    for (int i = 0; i < action_dim_; ++i) a(i) = rng.Uniform(-1.0, 1.0);
  }
  return a;
}

Vector NChainOracleActor::Act(const Vector&, Rng&) {
  Vector a = Vector::Constant(spec_.actions, -1.0);
  a(0) = 1.0;
  return a;
}

double NChainOracleActor::ValueEstimate(const Vector& obs, const Vector& action) const {
  return env::NChainOptimalQ(spec_, env::Argmax(obs), env::Argmax(action));
}

}  // namespace mrsq::analysis
