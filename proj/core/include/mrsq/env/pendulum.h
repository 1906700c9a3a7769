#ifndef MRSQ_ENV_PENDULUM_H_
#define MRSQ_ENV_PENDULUM_H_

#include "mrsq/env/env.h"

namespace mrsq::env {

// Swing-up pendulum; theta = 0 is upright. Observation is
// (cos theta, sin theta, theta_dot / max_speed).
struct PendulumParams {
  double gravity = 9.8;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double max_speed = 8.0;
  double max_torque = 2.0;
  int max_episode_steps = 200;
};

struct PendulumState {
  double theta = 0.0;
  double theta_dot = 0.0;
};

// One RK4 step under torque `action * max_torque`; returns the reward for
// the pre-step state, normalized to [-1, 0].
double PendulumStep(const PendulumParams& p, PendulumState& s, double action);
// Conserved quantity of the unforced dynamics.
double PendulumEnergy(const PendulumParams& p, const PendulumState& s);
double AngleNormalize(double theta);

class PendulumEnv : public Environment {
 public:
  explicit PendulumEnv(PendulumParams params = {});

  std::string name() const override { return "pendulum"; }
  int obs_dim() const override { return 3; }
  int action_dim() const override { return 1; }
  int max_episode_steps() const override { return params_.max_episode_steps; }

  Vector Reset(Rng& rng) override;
  StepResult Step(const Vector& action) override;
  Vector Observe() const override;

  bool supports_save_restore() const override { return true; }
  std::vector<double> SaveState() const override;
  void RestoreState(const std::vector<double>& state) override;

  std::unique_ptr<Environment> Clone() const override;

  const PendulumState& state() const { return state_; }
  void set_state(const PendulumState& s) { state_ = s; }

 private:
  PendulumParams params_;
  PendulumState state_;
};

}  // namespace mrsq::env

#endif  // MRSQ_ENV_PENDULUM_H_
