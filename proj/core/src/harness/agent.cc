#include "mrsq/harness/agent.h"

#include <algorithm>
#include <limits>

#include "mrsq/nn/layers.h"

namespace mrsq::harness {

namespace {

model::WorldModelDims ModelDims(const RunConfig& c, int obs_dim, int action_dim) {
  model::WorldModelDims d;
  d.obs_dim = obs_dim;
  d.action_dim = action_dim;
  d.zs_dim = c.zs_dim;
  d.za_dim = c.za_dim;
  d.zsa_dim = c.zsa_dim;
  d.hidden_dim = c.encoder_hidden_dim;
  d.reward_bins = c.reward_bins;
  d.reward_lo = c.reward_range_low;
  d.reward_hi = c.reward_range_high;
  d.sem = c.sem_enabled;
  d.sem_group = c.sem_group;
  return d;
}

}  // namespace

Agent::Agent(const RunConfig& config, int obs_dim, int action_dim, bool discrete, Rng& init_rng)
    : config_(config), obs_dim_(obs_dim), action_dim_(action_dim), discrete_(discrete) {
  config_.Validate();
  Rng model_rng = init_rng.Derive("worldmodel");
  Rng policy_rng = init_rng.Derive("policy");
  Rng q_rng = init_rng.Derive("ensemble");
  model_ = model::WorldModel(ModelDims(config_, obs_dim, action_dim), model_rng);
  policy_ = value::PolicyNet(config_.zs_dim, action_dim, config_.policy_hidden_dim, policy_rng);
  value::QEnsembleDims qd;
  qd.zsa_dim = config_.zsa_dim;
  qd.hidden_dim = config_.value_hidden_dim;
  qd.size = config_.ensemble_size;
  q_ = value::QEnsemble(qd, q_rng);
}

plan::LatentStep Agent::Step(const Matrix& z, const Matrix& actions) const {
  const model::ModelPrediction p =
      model_.Predict(z, value::ToModelAction(actions, discrete_));
  plan::LatentStep s;
  s.z_next = p.z_next;
  s.reward = model_.DecodeReward(p.reward_logits);
  s.terminal_prob.resize(p.terminal_logit.size());
  for (Eigen::Index i = 0; i < s.terminal_prob.size(); ++i) {
    s.terminal_prob(i) = nn::Sigmoid(p.terminal_logit(i));
  }
  return s;
}

Vector Agent::Value(const Matrix& z, const Matrix& actions,
                    plan::ValueReduction reduction) const {
  const Matrix zsa = model_.StateAction(z, value::ToModelAction(actions, discrete_));
  return value::Reduce(q_.Forward(zsa), reduction == plan::ValueReduction::kMin
                                            ? value::Reduction::kMin
                                            : value::Reduction::kMean);
}

plan::PlannerConfig Agent::planner_config() const {
  plan::PlannerConfig p;
  p.horizon = config_.mpc_horizon;
  p.iterations = config_.mpc_iterations;
  p.num_samples = config_.mpc_samples;
  p.num_policy = config_.mpc_policy_samples;
  p.num_elites = config_.mpc_elites;
  p.policy_std = config_.mpc_policy_std;
  p.max_std = config_.mpc_max_std;
  p.min_std = config_.mpc_min_std;
  p.temperature = config_.mpc_temperature;
  p.gamma = config_.discount;
  p.reduction = config_.min_in_mpc ? plan::ValueReduction::kMin : plan::ValueReduction::kMean;
  p.deterministic = false;
  return p;
}

TrainStats Agent::TrainStep(value::LapReplayBuffer& replay, Rng& replay_rng, Rng& noise_rng) {
  TrainStats stats;
  const std::vector<int64_t> slots = replay.Sample(config_.batch_size, replay_rng);
  value::TdConfig td;
  td.gamma = config_.discount;
  td.horizon = config_.multistep_horizon;
  td.target_noise_std = config_.target_policy_noise;
  td.target_noise_clip = config_.target_policy_noise_clip;
  td.target_update_period = config_.target_update_frequency;
  const value::TrainingBatch batch =
      value::BuildTrainingBatch(replay, slots, config_.encoder_horizon, td);

  model::ModelLossWeights w;
  w.dynamics = config_.dynamics_loss_weight;
  w.reward = config_.reward_loss_weight;
  w.terminal = config_.terminal_loss_weight;
  w.pre_activation = config_.pre_activation_loss_weight;
  w.horizon = config_.encoder_horizon;
  nn::AdamWOptions enc_opt;
  enc_opt.lr = config_.encoder_lr;
  enc_opt.weight_decay = config_.encoder_weight_decay;
  stats.model = model::ModelUpdate(model_, batch.model, w, enc_opt);

  value::TargetOptions topt;
  topt.discrete = discrete_;
  topt.reduction = config_.target_random_pair_min ? value::TargetReduction::kRandomPairMin
                                                  : value::TargetReduction::kFullMin;
  const Vector targets =
      value::TdTargets(model_, policy_, q_, batch.value, td, topt, noise_rng);

  value::ValueUpdateOptions vopt;
  vopt.adam.lr = config_.value_lr;
  vopt.adam.weight_decay = config_.value_weight_decay;
  vopt.grad_clip = config_.value_grad_clip;
  vopt.min_priority = config_.minimum_priority;
  const value::ValueLossResult vres =
      value::ValueUpdate(model_, q_, batch.value.obs, batch.value.action, targets, vopt);
  stats.value_loss = vres.loss;
  replay.UpdatePriorities(slots, vres.priorities);
  double psum = 0.0;
  for (double p : vres.priorities) psum += p;
  stats.mean_priority = psum / static_cast<double>(vres.priorities.size());

  nn::AdamWOptions popt;
  popt.lr = config_.policy_lr;
  popt.weight_decay = config_.policy_weight_decay;
  const Matrix zs = model_.Encode(batch.value.obs);
  stats.policy_loss = value::PolicyUpdate(model_, policy_, q_, zs, value::Reduction::kMin, popt,
                                          std::numeric_limits<double>::infinity());
  return stats;
}

AgentActor::AgentActor(std::shared_ptr<const Agent> agent, ActorOptions options)
    : agent_(std::move(agent)), options_(options) {}

Vector AgentActor::Act(const Vector& obs, Rng& rng) {
  Vector a;
  planned_ = false;
  if (options_.use_mpc) {
    plan::PlannerConfig pc = agent_->planner_config();
    pc.deterministic = options_.deterministic;
    plan::PlanResult r = plan::MppiPlan(*agent_, obs, warm_, rng, pc);
    last_stats_ = std::move(r.stats);
    planned_ = true;
    a = std::move(r.action);
  } else {
    a = agent_->Policy(agent_->Encode(obs.transpose())).row(0).transpose();
  }
  if (options_.exploration_noise > 0.0) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a(i) = std::clamp(a(i) + options_.exploration_noise * rng.Normal(), -1.0, 1.0);
    }
  }
  return a;
}

double AgentActor::ValueEstimate(const Vector& obs, const Vector& action) const {
  const Matrix z = agent_->Encode(obs.transpose());
  return agent_->Value(z, action.transpose(), plan::ValueReduction::kMin)(0);
}

}  // namespace mrsq::harness
