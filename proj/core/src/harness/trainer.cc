#include "mrsq/harness/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "mrsq/analysis/acting.h"
#include "mrsq/common/errors.h"
#include "mrsq/env/registry.h"

namespace mrsq::harness {

namespace {

constexpr int kProbeSpacing = 50;
constexpr int kMaxConsecutiveFaults = 3;

std::shared_ptr<Agent> BuildAgent(const RunConfig& config, const env::Environment& env) {
  Rng init(config.seed, "init");
  return std::make_shared<Agent>(config, env.obs_dim(), env.action_dim(), env.discrete(), init);
}

ActorOptions TrainingActorOptions(const RunConfig& c) {
  ActorOptions o;
  o.use_mpc = c.use_mpc_for_acting;
  o.exploration_noise = c.exploration_noise;
  o.deterministic = false;
  return o;
}

Vector StoredAction(const Vector& a, bool discrete) {
  if (discrete) return env::OneHotArgmax(a);
  return env::ClipAction(a);
}

nlohmann::json JsonOrNull(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

Trainer::Trainer(const RunConfig& config) : Trainer(config, true) {}

Trainer::Trainer(const RunConfig& config, bool open_metrics)
    : config_(config),
      env_(env::MakeEnvironment(config.env, config.env_params)),
      replay_(env_->obs_dim(), env_->action_dim(),
              config.replay_capacity, config.probability_smoothing, config.minimum_priority),
      env_rng_(config.seed, "env"),
      act_rng_(config.seed, "act"),
      replay_rng_(config.seed, "replay"),
      noise_rng_(config.seed, "target_noise") {
  config_.Validate();
  agent_ = BuildAgent(config_, *env_);
  actor_ = std::make_unique<AgentActor>(agent_, TrainingActorOptions(config_));
  probes_.resize(0, env_->obs_dim());
  if (open_metrics) {
    std::filesystem::create_directories(config_.output_dir);
    metrics_.Open(OutPath("metrics.jsonl"), false);
    std::ofstream(OutPath("config.yaml")) << ToYaml(config_);
    obs_ = env_->Reset(env_rng_);
    actor_->BeginEpisode();
  }
}

std::string Trainer::OutPath(const std::string& name) const {
  return (std::filesystem::path(config_.output_dir) / name).string();
}

void Trainer::RunUntil(int64_t until) {
  const auto wall0 = std::chrono::steady_clock::now();
  const std::clock_t cpu0 = std::clock();
  while (step_ < until) Step();
  metrics_.Flush();
  wall_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  cpu_seconds_ += static_cast<double>(std::clock() - cpu0) / CLOCKS_PER_SEC;
}

void Trainer::Step() {
  nlohmann::json rec;
  const bool warmup = step_ < config_.initial_random_steps;

  if (probes_.rows() < config_.policy_change_probes && step_ % kProbeSpacing == 0) {
    probes_.conservativeResize(probes_.rows() + 1, Eigen::NoChange);
    probes_.row(probes_.rows() - 1) = obs_.transpose();
  }

  Vector action;
  if (warmup) {
    analysis::RandomActor random(env_->action_dim(), env_->discrete());
    action = random.Act(obs_, act_rng_);
  } else {
    action = actor_->Act(obs_, act_rng_);
    if (actor_->planned()) {
      const plan::PlanStats& ps = actor_->last_stats();
      if (!ps.elite_mean.empty()) rec["elite_mean"] = JsonOrNull(ps.elite_mean.back());
      rec["elite_max"] = JsonOrNull(ps.elite_max);
      rec["planner_std"] = ps.mean_std;
    }
  }

  const env::StepResult r = env_->Step(action);
  value::Transition t;
  t.obs = obs_;
  t.action = StoredAction(action, env_->discrete());
  t.reward = r.reward;
  t.next_obs = r.observation;
  t.terminated = r.terminated;
  t.truncated = r.truncated;
  replay_.Add(t);
  episode_return_ += r.reward;
  ++episode_length_;
  ++step_;

  rec["step"] = step_;
  rec["reward"] = r.reward;
  if (r.terminated || r.truncated) {
    rec["episode_return"] = episode_return_;
    rec["episode_length"] = episode_length_;
    ++episodes_;
    episode_return_ = 0.0;
    episode_length_ = 0;
    obs_ = env_->Reset(env_rng_);
    actor_->BeginEpisode();
  } else {
    obs_ = r.observation;
  }

  if (step_ > config_.initial_random_steps && replay_.size() >= config_.batch_size) {
    try {
      const TrainStats s = agent_->TrainStep(replay_, replay_rng_, noise_rng_);
      consecutive_faults_ = 0;
      ++grad_steps_;
      rec["model_loss"] = s.model.total;
      rec["dynamics_loss"] = s.model.dynamics;
      rec["reward_loss"] = s.model.reward;
      rec["terminal_loss"] = s.model.terminal;
      rec["pre_activation_loss"] = s.model.pre_activation;
      rec["value_loss"] = s.value_loss;
      rec["policy_loss"] = s.policy_loss;
      rec["mean_priority"] = s.mean_priority;
    } catch (const TrainingFault& e) {
      ++consecutive_faults_;
      rec["fault"] = e.what();
      if (consecutive_faults_ >= kMaxConsecutiveFaults) {
        rec["aborted"] = true;
        metrics_.Write(rec);
        metrics_.Flush();
        throw TrainingFault("training aborted after " + std::to_string(consecutive_faults_) +
                            " consecutive non-finite losses at step " + std::to_string(step_));
      }
    }
    if (grad_steps_ > 0 && grad_steps_ % config_.target_update_frequency == 0 &&
        consecutive_faults_ == 0) {
      agent_->RefreshTargets();
    }
  }

  if (config_.eval_interval > 0 && config_.eval_episodes > 0 &&
      step_ % config_.eval_interval == 0) {
    ActorOptions o;
    o.use_mpc = config_.use_mpc_for_acting;
    o.deterministic = config_.eval_deterministic;
    AgentActor eval_actor(agent_, o);
    Rng eval_rng = Rng(config_.seed, "eval").Derive(static_cast<uint64_t>(step_));
    const EvalResult er = Evaluate(eval_actor, *env_, config_.eval_episodes, eval_rng);
    EvalRecord e;
    e.step = step_;
    e.mean_return = er.mean_return;
    e.mean_length = er.mean_length;
    e.min_return = *std::min_element(er.returns.begin(), er.returns.end());
    e.max_return = *std::max_element(er.returns.begin(), er.returns.end());
    evals_.push_back(e);
    rec["eval_return"] = e.mean_return;
    rec["eval_length"] = e.mean_length;
  }

  if (config_.policy_change_interval > 0 && step_ % config_.policy_change_interval == 0 &&
      step_ >= config_.initial_random_steps && probes_.rows() > 0) {
    TakeSnapshots(rec);
  }

  metrics_.Write(rec);

  if (config_.checkpoint_interval > 0 && step_ % config_.checkpoint_interval == 0) {
    metrics_.Flush();
    SaveCheckpoint(OutPath("checkpoints/step_" + std::to_string(step_) + ".ckpt"));
  }
}

void Trainer::TakeSnapshots(nlohmann::json& rec) {
  const Matrix z = agent_->Encode(probes_);
  snap_policy_.push_back(agent_->Policy(z));
  Matrix mpc(probes_.rows(), env_->action_dim());
  const Rng base = Rng(config_.seed, "probe_plan").Derive(static_cast<uint64_t>(step_));
  const plan::PlannerConfig pc = agent_->planner_config();
  for (Eigen::Index i = 0; i < probes_.rows(); ++i) {
    plan::WarmStart warm;
    Rng r = base.Derive(static_cast<uint64_t>(i));
    mpc.row(i) = plan::MppiPlan(*agent_, probes_.row(i).transpose(), warm, r, pc).action.transpose();
  }
  snap_mpc_.push_back(mpc);
  const size_t n = snap_mpc_.size();
  if (n >= 2) {
    auto change = [](const Matrix& a, const Matrix& b) {
      return (a - b).squaredNorm() / static_cast<double>(a.size());
    };
    rec["policy_change_mpc"] = change(snap_mpc_[n - 1], snap_mpc_[n - 2]);
    rec["policy_change_policy"] = change(snap_policy_[n - 1], snap_policy_[n - 2]);
  }
}

CheckpointData Trainer::MakeCheckpoint() const {
  CheckpointData d;
  d.manifest["config"] = ToJson(config_);
  d.manifest["step"] = step_;
  d.manifest["grad_steps"] = grad_steps_;
  d.manifest["consecutive_faults"] = consecutive_faults_;
  d.manifest["episode_return"] = episode_return_;
  d.manifest["episode_length"] = episode_length_;
  d.manifest["episodes"] = episodes_;
  d.manifest["rng"] = {{"env", env_rng_.Serialize()},
                       {"act", act_rng_.Serialize()},
                       {"replay", replay_rng_.Serialize()},
                       {"target_noise", noise_rng_.Serialize()}};
  d.manifest["warm_valid"] = actor_->warm_start().valid;
  d.manifest["evals"] = evals_;
  d.manifest["snapshots"] = snap_mpc_.size();
  d.manifest["replay_transitions"] = config_.checkpoint_replay;
  d.manifest["architecture"] = {{"obs_dim", env_->obs_dim()},
                                {"action_dim", env_->action_dim()},
                                {"discrete", env_->discrete()}};

  SaveStore(d, "worldmodel", agent_->world_model().params());
  SaveStore(d, "policy", agent_->policy().params());
  SaveStore(d, "ensemble", agent_->ensemble().params());
  SaveStore(d, "ensemble_target", agent_->ensemble().target_params());

  const std::vector<double> es = env_->SaveState();
  d.Add("env_state", 1, static_cast<int64_t>(es.size()), es);
  d.AddMatrix("obs", obs_.transpose());
  d.AddMatrix("warm_mean", actor_->warm_start().mean);
  d.AddMatrix("probes", probes_);
  for (size_t k = 0; k < snap_mpc_.size(); ++k) {
    d.AddMatrix("snapshots/mpc/" + std::to_string(k), snap_mpc_[k]);
    d.AddMatrix("snapshots/policy/" + std::to_string(k), snap_policy_[k]);
  }
  const std::vector<double> meta = replay_.SaveMeta();
  d.Add("replay_meta", 1, static_cast<int64_t>(meta.size()), meta);
  if (config_.checkpoint_replay) {
    const std::vector<double> data = replay_.SaveTransitions();
    d.Add("replay_data", 1, static_cast<int64_t>(data.size()), data);
  }
  return d;
}

void Trainer::SaveCheckpoint(const std::string& path) const {
  WriteCheckpointFile(path, MakeCheckpoint());
}

namespace {

RunConfig CheckpointConfig(const CheckpointData& d) {
  if (!d.manifest.contains("config")) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, "checkpoint: missing config");
  }
  return FromJson(d.manifest.at("config"));
}

void CheckArchitecture(const CheckpointData& d, const env::Environment& env) {
  const auto& a = d.manifest.at("architecture");
  if (a.at("obs_dim").get<int>() != env.obs_dim() ||
      a.at("action_dim").get<int>() != env.action_dim()) {
    throw CheckpointError(CheckpointErrorKind::kShapeMismatch,
                          "checkpoint: environment dimensions do not match");
  }
}

void RestoreAgentState(const CheckpointData& d, Agent& agent) {
  // Load into copies first so a failure leaves the agent untouched.
  nn::ParameterStore wm = agent.world_model().params();
  nn::ParameterStore pol = agent.policy().params();
  nn::ParameterStore ens = agent.ensemble().params();
  nn::ParameterStore tgt = agent.ensemble().target_params();
  LoadStore(d, "worldmodel", wm);
  LoadStore(d, "policy", pol);
  LoadStore(d, "ensemble", ens);
  LoadStore(d, "ensemble_target", tgt);
  agent.world_model().params() = std::move(wm);
  agent.policy().params() = std::move(pol);
  agent.ensemble().params() = std::move(ens);
  agent.ensemble().target_params() = std::move(tgt);
}

}  // namespace

LoadedAgent LoadAgent(const std::string& checkpoint_path) {
  const CheckpointData d = ReadCheckpointFile(checkpoint_path);
  LoadedAgent out;
  out.config = CheckpointConfig(d);
  auto env = env::MakeEnvironment(out.config.env, out.config.env_params);
  CheckArchitecture(d, *env);
  out.agent = BuildAgent(out.config, *env);
  RestoreAgentState(d, *out.agent);
  return out;
}

std::unique_ptr<Trainer> Trainer::Resume(const std::string& checkpoint_path,
                                         const std::string& output_dir) {
  const CheckpointData d = ReadCheckpointFile(checkpoint_path);
  RunConfig config = CheckpointConfig(d);
  if (!output_dir.empty()) config.output_dir = output_dir;
  std::unique_ptr<Trainer> t(new Trainer(config, false));
  CheckArchitecture(d, *t->env_);
  RestoreAgentState(d, *t->agent_);

  const auto& m = d.manifest;
  t->step_ = m.at("step").get<int64_t>();
  t->grad_steps_ = m.at("grad_steps").get<int64_t>();
  t->consecutive_faults_ = m.at("consecutive_faults").get<int>();
  t->episode_return_ = m.at("episode_return").get<double>();
  t->episode_length_ = m.at("episode_length").get<int64_t>();
  t->episodes_ = m.at("episodes").get<int64_t>();
  t->env_rng_.Deserialize(m.at("rng").at("env").get<std::string>());
  t->act_rng_.Deserialize(m.at("rng").at("act").get<std::string>());
  t->replay_rng_.Deserialize(m.at("rng").at("replay").get<std::string>());
  t->noise_rng_.Deserialize(m.at("rng").at("target_noise").get<std::string>());
  t->evals_ = m.at("evals").get<std::vector<EvalRecord>>();

  t->env_->RestoreState(d.Get("env_state").data);
  t->obs_ = SectionMatrix(d.Get("obs")).row(0).transpose();
  t->actor_->warm_start().mean = SectionMatrix(d.Get("warm_mean"));
  t->actor_->warm_start().valid = m.at("warm_valid").get<bool>();
  t->probes_ = SectionMatrix(d.Get("probes"));
  const auto snaps = m.at("snapshots").get<size_t>();
  for (size_t k = 0; k < snaps; ++k) {
    t->snap_mpc_.push_back(SectionMatrix(d.Get("snapshots/mpc/" + std::to_string(k))));
    t->snap_policy_.push_back(SectionMatrix(d.Get("snapshots/policy/" + std::to_string(k))));
  }
  if (m.at("replay_transitions").get<bool>()) {
    t->replay_.RestoreMeta(d.Get("replay_meta").data);
    t->replay_.RestoreTransitions(d.Get("replay_data").data);
  }

  std::filesystem::create_directories(config.output_dir);
  t->metrics_.Open(t->OutPath("metrics.jsonl"), true);
  std::ofstream(t->OutPath("config.yaml")) << ToYaml(config);
  return t;
}

void Trainer::Finish() {
  metrics_.Flush();
  WriteSummaryCsv(OutPath("summary.csv"), evals_);
  SaveCheckpoint(OutPath("final.ckpt"));
  nlohmann::json timing = {{"steps", step_},
                           {"gradient_steps", grad_steps_},
                           {"wall_seconds", wall_seconds_},
                           {"cpu_seconds", cpu_seconds_}};
  std::ofstream(OutPath("timing.json")) << timing.dump(2) << "\n";
}

EvalResult EvaluateCheckpoint(const std::string& checkpoint_path, int episodes, uint64_t seed,
                              bool deterministic) {
  const LoadedAgent la = LoadAgent(checkpoint_path);
  auto env = env::MakeEnvironment(la.config.env, la.config.env_params);
  ActorOptions o;
  o.use_mpc = la.config.use_mpc_for_acting;
  o.deterministic = deterministic;
  AgentActor actor(la.agent, o);
  Rng rng(seed, "eval");
  return Evaluate(actor, *env, episodes, rng);
}

}  // namespace mrsq::harness
