#include "mrsq/env/nchain.h"

#include <cmath>

#include "mrsq/common/errors.h"

namespace mrsq::env {

void NChainSpec::Validate() const {
  if (n < 2) throw ConfigError("nchain: n must be >= 2");
  if (actions < 1) throw ConfigError("nchain: actions must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("nchain: gamma must be in (0,1)");
  if (max_episode_steps < 0) throw ConfigError("nchain: max_episode_steps must be >= 0");
}

NChainTransition NChainStep(const NChainSpec& spec, int state, int action) {
  if (action < 0 || action >= spec.actions) {
    throw InputError("nchain: action " + std::to_string(action) + " out of range");
  }
  if (state < 0 || state > spec.absorbing_state()) {
    throw InputError("nchain: state " + std::to_string(state) + " out of range");
  }
  NChainTransition t;
  if (state < spec.n - 1 && action == 0) {
    t.next_state = state + 1;
    if (t.next_state == spec.n - 1) {
      t.reward = 1.0;
      t.terminated = true;
    }
  } else {
    t.next_state = spec.absorbing_state();
  }
  return t;
}

double NChainOptimalQ(const NChainSpec& spec, int state, int action) {
  if (state >= spec.n - 1 || action != 0) return 0.0;
  return std::pow(spec.gamma, spec.n - 2 - state);
}

NChainEnv::NChainEnv(NChainSpec spec) : spec_(spec) { spec_.Validate(); }

Vector NChainEnv::Reset(Rng&) {
  state_ = 0;
  episode_step_ = 0;
  return Observe();
}

StepResult NChainEnv::Step(const Vector& action) {
  if (action.size() != spec_.actions) {
    throw InputError("nchain: action vector has wrong size");
  }
  if (!action.allFinite()) throw InputError("nchain: non-finite action");
  return StepIndex(Argmax(action));
}

StepResult NChainEnv::StepIndex(int action) {
  const NChainTransition t = NChainStep(spec_, state_, action);
  state_ = t.next_state;
  StepResult r;
  r.reward = t.reward;
  r.terminated = t.terminated;
  r.observation = Observe();
  FinishStep(r);
  return r;
}

Vector NChainEnv::Observe() const {
  Vector obs = Vector::Zero(spec_.num_states());
  obs(state_) = 1.0;
  return obs;
}

std::vector<double> NChainEnv::SaveState() const {
  return {static_cast<double>(state_), static_cast<double>(episode_step_)};
}

void NChainEnv::RestoreState(const std::vector<double>& state) {
  if (state.size() != 2) throw InputError("nchain: bad saved state");
  state_ = static_cast<int>(state[0]);
  episode_step_ = static_cast<int>(state[1]);
}

std::unique_ptr<Environment> NChainEnv::Clone() const {
  return std::make_unique<NChainEnv>(*this);
}

}  // namespace mrsq::env
