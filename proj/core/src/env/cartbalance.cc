#include "mrsq/env/cartbalance.h"

#include <algorithm>
#include <cmath>

#include "mrsq/common/errors.h"

namespace mrsq::env {

bool CartBalanceStep(const CartBalanceParams& p, CartBalanceState& s, double action) {
  if (!std::isfinite(s.x) || !std::isfinite(s.x_dot) || !std::isfinite(s.theta) ||
      !std::isfinite(s.theta_dot)) {
    throw EnvironmentFault("cartbalance: non-finite state");
  }
  const double force = std::clamp(action, -1.0, 1.0) * p.force_mag;
  const double total_mass = p.cart_mass + p.pole_mass;
  const double pole_ml = p.pole_mass * p.half_length;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);
  const double temp = (force + pole_ml * s.theta_dot * s.theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (p.gravity * sin_t - cos_t * temp) /
      (p.half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_ml * theta_acc * cos_t / total_mass;
  s.x += p.dt * s.x_dot;
  s.x_dot += p.dt * x_acc;
  s.theta += p.dt * s.theta_dot;
  s.theta_dot += p.dt * theta_acc;
  return std::abs(s.x) > p.position_limit || std::abs(s.theta) > p.angle_limit;
}

CartBalanceEnv::CartBalanceEnv(CartBalanceParams params) : params_(params) {
  if (params_.max_episode_steps <= 0) throw ConfigError("cartbalance: max steps must be > 0");
}

Vector CartBalanceEnv::Reset(Rng& rng) {
  state_.x = rng.Uniform(-0.05, 0.05);
  state_.x_dot = rng.Uniform(-0.05, 0.05);
  state_.theta = rng.Uniform(-0.05, 0.05);
  state_.theta_dot = rng.Uniform(-0.05, 0.05);
  episode_step_ = 0;
  return Observe();
}

StepResult CartBalanceEnv::Step(const Vector& action) {
  if (action.size() != 1) throw InputError("cartbalance: action must be 1-dim");
  StepResult r;
  r.terminated =
      CartBalanceStep(params_, state_, std::isfinite(action(0)) ? action(0) : 0.0);
  r.reward = 1.0;
  r.observation = Observe();
  if (!r.observation.allFinite()) throw EnvironmentFault("cartbalance: non-finite state");
  FinishStep(r);
  return r;
}

Vector CartBalanceEnv::Observe() const {
  Vector obs(4);
  obs << state_.x, state_.x_dot, state_.theta, state_.theta_dot;
  return obs;
}

std::vector<double> CartBalanceEnv::SaveState() const {
  return {state_.x, state_.x_dot, state_.theta, state_.theta_dot,
          static_cast<double>(episode_step_)};
}

void CartBalanceEnv::RestoreState(const std::vector<double>& state) {
  if (state.size() != 5) throw InputError("cartbalance: bad saved state");
  state_ = {state[0], state[1], state[2], state[3]};
  episode_step_ = static_cast<int>(state[4]);
}

std::unique_ptr<Environment> CartBalanceEnv::Clone() const {
  return std::make_unique<CartBalanceEnv>(*this);
}

}  // namespace mrsq::env
