#ifndef MRSQ_ENV_CARTBALANCE_H_
#define MRSQ_ENV_CARTBALANCE_H_

#include "mrsq/env/env.h"

namespace mrsq::env {

// Cart-pole balancing with a continuous force. +1 per step alive; the
// episode terminates when the pole falls or the cart leaves the track.
struct CartBalanceParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double force_mag = 10.0;
  double dt = 0.02;
  double angle_limit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  double position_limit = 2.4;
  int max_episode_steps = 500;
};

struct CartBalanceState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
};

// Explicit Euler step; returns true when the new state is terminal.
bool CartBalanceStep(const CartBalanceParams& p, CartBalanceState& s, double action);

class CartBalanceEnv : public Environment {
 public:
  explicit CartBalanceEnv(CartBalanceParams params = {});

  std::string name() const override { return "cartbalance"; }
  int obs_dim() const override { return 4; }
  int action_dim() const override { return 1; }
  int max_episode_steps() const override { return params_.max_episode_steps; }

  Vector Reset(Rng& rng) override;
  StepResult Step(const Vector& action) override;
  Vector Observe() const override;

  bool supports_save_restore() const override { return true; }
  std::vector<double> SaveState() const override;
  void RestoreState(const std::vector<double>& state) override;

  std::unique_ptr<Environment> Clone() const override;

  const CartBalanceState& state() const { return state_; }
  void set_state(const CartBalanceState& s) { state_ = s; }

 private:
  CartBalanceParams params_;
  CartBalanceState state_;
};

}  // namespace mrsq::env

#endif  // MRSQ_ENV_CARTBALANCE_H_
