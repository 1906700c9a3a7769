#include "mrsq/env/env.h"

#include <algorithm>

#include "mrsq/common/errors.h"

namespace mrsq::env {

std::vector<double> Environment::SaveState() const {
  throw UnsupportedFeature(name() + ": state save/restore not supported");
}

void Environment::RestoreState(const std::vector<double>&) {
  throw UnsupportedFeature(name() + ": state save/restore not supported");
}

void Environment::FinishStep(StepResult& result) {
  ++episode_step_;
  result.truncated = !result.terminated && episode_step_ >= max_episode_steps();
}

Vector ClipAction(const Vector& action) { return action.cwiseMax(-1.0).cwiseMin(1.0); }

int Argmax(const Vector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

Vector OneHotArgmax(const Vector& relaxed) {
  Vector out = Vector::Zero(relaxed.size());
  out(Argmax(relaxed)) = 1.0;
  return out;
}

}  // namespace mrsq::env
