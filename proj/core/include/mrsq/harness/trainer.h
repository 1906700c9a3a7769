#ifndef MRSQ_HARNESS_TRAINER_H_
#define MRSQ_HARNESS_TRAINER_H_

#include <memory>
#include <string>
#include <vector>

#include "mrsq/env/env.h"
#include "mrsq/harness/agent.h"
#include "mrsq/harness/checkpoint.h"
#include "mrsq/harness/config.h"
#include "mrsq/harness/evaluate.h"
#include "mrsq/harness/metrics.h"
#include "mrsq/value/replay.h"

namespace mrsq::harness {

// Single-threaded training loop. Every environment step appends one line
// to <output_dir>/metrics.jsonl.
class Trainer {
 public:
  explicit Trainer(const RunConfig& config);
  // Continues a run; metrics are appended under `output_dir` (the stored
  // config's directory when empty). Exact continuation needs a checkpoint
  // written with checkpoint_replay=true; otherwise replay restarts empty.
  static std::unique_ptr<Trainer> Resume(const std::string& checkpoint_path,
                                         const std::string& output_dir = "");

  void Run() { RunUntil(config_.total_steps); }
  void RunUntil(int64_t step);
  // Writes summary.csv, timing.json and final.ckpt.
  void Finish();

  CheckpointData MakeCheckpoint() const;
  void SaveCheckpoint(const std::string& path) const;

  int64_t step() const { return step_; }
  int64_t gradient_steps() const { return grad_steps_; }
  const RunConfig& config() const { return config_; }
  const Agent& agent() const { return *agent_; }
  std::shared_ptr<const Agent> shared_agent() const { return agent_; }
  const value::LapReplayBuffer& replay() const { return replay_; }
  const env::Environment& environment() const { return *env_; }
  const std::vector<EvalRecord>& evals() const { return evals_; }
  const Matrix& probes() const { return probes_; }
  const std::vector<Matrix>& mpc_snapshots() const { return snap_mpc_; }
  const std::vector<Matrix>& policy_snapshots() const { return snap_policy_; }

 private:
  Trainer(const RunConfig& config, bool open_metrics);
  void Step();
  void TakeSnapshots(nlohmann::json& record);
  std::string OutPath(const std::string& name) const;

  RunConfig config_;
  std::unique_ptr<env::Environment> env_;
  std::shared_ptr<Agent> agent_;
  std::unique_ptr<AgentActor> actor_;
  value::LapReplayBuffer replay_;
  Rng env_rng_;
  Rng act_rng_;
  Rng replay_rng_;
  Rng noise_rng_;

  Vector obs_;
  int64_t step_ = 0;
  int64_t grad_steps_ = 0;
  int consecutive_faults_ = 0;
  double episode_return_ = 0.0;
  int64_t episode_length_ = 0;
  int64_t episodes_ = 0;

  Matrix probes_;
  std::vector<Matrix> snap_mpc_;
  std::vector<Matrix> snap_policy_;
  std::vector<EvalRecord> evals_;

  MetricWriter metrics_;
  double wall_seconds_ = 0.0;
  double cpu_seconds_ = 0.0;
};

// Agent and config stored in a checkpoint.
struct LoadedAgent {
  RunConfig config;
  std::shared_ptr<Agent> agent;
};
LoadedAgent LoadAgent(const std::string& checkpoint_path);

EvalResult EvaluateCheckpoint(const std::string& checkpoint_path, int episodes, uint64_t seed,
                              bool deterministic = false);

}  // namespace mrsq::harness

#endif  // MRSQ_HARNESS_TRAINER_H_
