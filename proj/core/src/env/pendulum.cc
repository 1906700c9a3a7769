#include "mrsq/env/pendulum.h"

#include <algorithm>
#include <cmath>

#include "mrsq/common/errors.h"

namespace mrsq::env {

namespace {

double Accel(const PendulumParams& p, double theta, double torque) {
  return 3.0 * p.gravity / (2.0 * p.length) * std::sin(theta) +
         3.0 / (p.mass * p.length * p.length) * torque;
}

}  // namespace

double AngleNormalize(double theta) {
  double t = std::fmod(theta + M_PI, 2.0 * M_PI);
  if (t < 0.0) t += 2.0 * M_PI;
  return t - M_PI;
}

double PendulumStep(const PendulumParams& p, PendulumState& s, double action) {
  if (!std::isfinite(s.theta) || !std::isfinite(s.theta_dot)) {
    throw EnvironmentFault("pendulum: non-finite state");
  }
  const double u = std::clamp(action, -1.0, 1.0) * p.max_torque;
  const double th = AngleNormalize(s.theta);
  const double cost_scale = M_PI * M_PI + 0.1 * p.max_speed * p.max_speed +
                            0.001 * p.max_torque * p.max_torque;
  const double reward =
      -(th * th + 0.1 * s.theta_dot * s.theta_dot + 0.001 * u * u) / cost_scale;

  // Classic RK4 on (theta, theta_dot).
  const double h = p.dt;
  const double k1x = s.theta_dot;
  const double k1v = Accel(p, s.theta, u);
  const double k2x = s.theta_dot + 0.5 * h * k1v;
  const double k2v = Accel(p, s.theta + 0.5 * h * k1x, u);
  const double k3x = s.theta_dot + 0.5 * h * k2v;
  const double k3v = Accel(p, s.theta + 0.5 * h * k2x, u);
  const double k4x = s.theta_dot + h * k3v;
  const double k4v = Accel(p, s.theta + h * k3x, u);
  s.theta += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  s.theta_dot += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  s.theta_dot = std::clamp(s.theta_dot, -p.max_speed, p.max_speed);
  s.theta = AngleNormalize(s.theta);
  return reward;
}

double PendulumEnergy(const PendulumParams& p, const PendulumState& s) {
  return 0.5 * s.theta_dot * s.theta_dot +
         3.0 * p.gravity / (2.0 * p.length) * std::cos(s.theta);
}

PendulumEnv::PendulumEnv(PendulumParams params) : params_(params) {
  if (params_.max_episode_steps <= 0) throw ConfigError("pendulum: max steps must be > 0");
}

Vector PendulumEnv::Reset(Rng& rng) {
  state_.theta = rng.Uniform(-M_PI, M_PI);
  state_.theta_dot = rng.Uniform(-1.0, 1.0);
  episode_step_ = 0;
  return Observe();
}

StepResult PendulumEnv::Step(const Vector& action) {
  if (action.size() != 1) throw InputError("pendulum: action must be 1-dim");
  StepResult r;
  r.reward = PendulumStep(params_, state_, std::isfinite(action(0)) ? action(0) : 0.0);
  r.observation = Observe();
  if (!r.observation.allFinite()) throw EnvironmentFault("pendulum: non-finite state");
  FinishStep(r);
  return r;
}

Vector PendulumEnv::Observe() const {
  Vector obs(3);
  obs << std::cos(state_.theta), std::sin(state_.theta),
      state_.theta_dot / params_.max_speed;
  return obs;
}

std::vector<double> PendulumEnv::SaveState() const {
  return {state_.theta, state_.theta_dot, static_cast<double>(episode_step_)};
}

void PendulumEnv::RestoreState(const std::vector<double>& state) {
  if (state.size() != 3) throw InputError("pendulum: bad saved state");
  state_.theta = state[0];
  state_.theta_dot = state[1];
  episode_step_ = static_cast<int>(state[2]);
}

std::unique_ptr<Environment> PendulumEnv::Clone() const {
  return std::make_unique<PendulumEnv>(*this);
}

}  // namespace mrsq::env
