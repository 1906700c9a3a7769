#ifndef MRSQ_ENV_NCHAIN_H_
#define MRSQ_ENV_NCHAIN_H_

#include "mrsq/env/env.h"

namespace mrsq::env {

// Chain s_0..s_{n-1} plus an absorbing state (index n). Action 0 advances;
// every other action, and every action in the absorbing state, leads to the
// absorbing state. Entering s_{n-1} pays 1 and terminates.
struct NChainSpec {
  int n = 5;
  int actions = 2;
  double gamma = 0.99;
  // 0 means 2 * n.
  int max_episode_steps = 0;

  void Validate() const;
  int absorbing_state() const { return n; }
  int num_states() const { return n + 1; }
  int time_limit() const { return max_episode_steps > 0 ? max_episode_steps : 2 * n; }
};

struct NChainTransition {
  int next_state = 0;
  double reward = 0.0;
  bool terminated = false;
};

NChainTransition NChainStep(const NChainSpec& spec, int state, int action);

// Q*(s_i, a_0) = gamma^(n-2-i); zero for every other action and for the
// absorbing state.
double NChainOptimalQ(const NChainSpec& spec, int state, int action);

class NChainEnv : public Environment {
 public:
  explicit NChainEnv(NChainSpec spec);

  std::string name() const override { return "nchain"; }
  int obs_dim() const override { return spec_.num_states(); }
  int action_dim() const override { return spec_.actions; }
  bool discrete() const override { return true; }
  int max_episode_steps() const override { return spec_.time_limit(); }

  Vector Reset(Rng& rng) override;
  StepResult Step(const Vector& action) override;
  StepResult StepIndex(int action);
  Vector Observe() const override;

  bool supports_save_restore() const override { return true; }
  std::vector<double> SaveState() const override;
  void RestoreState(const std::vector<double>& state) override;

  std::unique_ptr<Environment> Clone() const override;

  int state() const { return state_; }
  void set_state(int s) { state_ = s; }
  const NChainSpec& spec() const { return spec_; }

 private:
  NChainSpec spec_;
  int state_ = 0;
};

}  // namespace mrsq::env

#endif  // MRSQ_ENV_NCHAIN_H_
