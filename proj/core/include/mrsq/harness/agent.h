#ifndef MRSQ_HARNESS_AGENT_H_
#define MRSQ_HARNESS_AGENT_H_

#include <memory>

#include "mrsq/analysis/acting.h"
#include "mrsq/harness/config.h"
#include "mrsq/model/model_loss.h"
#include "mrsq/model/world_model.h"
#include "mrsq/plan/mppi.h"
#include "mrsq/value/policy.h"
#include "mrsq/value/q_ensemble.h"
#include "mrsq/value/replay.h"
#include "mrsq/value/updates.h"

namespace mrsq::harness {

struct TrainStats {
  model::ModelLossTerms model;
  double value_loss = 0.0;
  double policy_loss = 0.0;
  double mean_priority = 0.0;
};

// World model, value ensemble and policy of one run.
class Agent : public plan::PlanningModel {
 public:
  Agent(const RunConfig& config, int obs_dim, int action_dim, bool discrete, Rng& init_rng);

  int action_dim() const override { return action_dim_; }
  Matrix Encode(const Matrix& obs) const override { return model_.Encode(obs); }
  plan::LatentStep Step(const Matrix& z, const Matrix& actions) const override;
  Matrix Policy(const Matrix& z) const override { return policy_.Forward(z); }
  Vector Value(const Matrix& z, const Matrix& actions,
               plan::ValueReduction reduction) const override;

  // One model, value and policy update on a prioritized batch.
  TrainStats TrainStep(value::LapReplayBuffer& replay, Rng& replay_rng, Rng& noise_rng);
  void RefreshTargets() { q_.RefreshTargets(); }

  plan::PlannerConfig planner_config() const;
  bool discrete() const { return discrete_; }
  int obs_dim() const { return obs_dim_; }
  const RunConfig& config() const { return config_; }

  model::WorldModel& world_model() { return model_; }
  const model::WorldModel& world_model() const { return model_; }
  value::PolicyNet& policy() { return policy_; }
  const value::PolicyNet& policy() const { return policy_; }
  value::QEnsemble& ensemble() { return q_; }
  const value::QEnsemble& ensemble() const { return q_; }

 private:
  RunConfig config_;
  int obs_dim_;
  int action_dim_;
  bool discrete_;
  model::WorldModel model_;
  value::PolicyNet policy_;
  value::QEnsemble q_;
};

struct ActorOptions {
  bool use_mpc = true;
  double exploration_noise = 0.0;
  bool deterministic = false;
};

// Acting policy over a shared agent: MPPI or the raw policy, plus optional
// Gaussian exploration noise.
class AgentActor : public analysis::ActingAgent {
 public:
  AgentActor(std::shared_ptr<const Agent> agent, ActorOptions options);

  void BeginEpisode() override { warm_.Reset(); }
  Vector Act(const Vector& obs, Rng& rng) override;
  // Minimum-ensemble Q at (obs, action).
  double ValueEstimate(const Vector& obs, const Vector& action) const override;
  std::unique_ptr<analysis::ActingAgent> Clone() const override {
    return std::make_unique<AgentActor>(*this);
  }
  const plan::PlanningModel* planning_model() const override { return agent_.get(); }

  const plan::PlanStats& last_stats() const { return last_stats_; }
  bool planned() const { return planned_; }
  plan::WarmStart& warm_start() { return warm_; }
  const plan::WarmStart& warm_start() const { return warm_; }
  const ActorOptions& options() const { return options_; }

 private:
  std::shared_ptr<const Agent> agent_;
  ActorOptions options_;
  plan::WarmStart warm_;
  plan::PlanStats last_stats_;
  bool planned_ = false;
};

}  // namespace mrsq::harness

#endif  // MRSQ_HARNESS_AGENT_H_
