#ifndef MRSQ_HARNESS_CONFIG_H_
#define MRSQ_HARNESS_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mrsq/env/registry.h"

namespace mrsq::harness {

// Every knob of a training run. Field names double as config-file keys.
struct RunConfig {
  std::string env = "pendulum";
  env::EnvParams env_params;
  uint64_t seed = 0;
  int64_t total_steps = 1'000'000;
  std::string output_dir = "runs/default";

  // Model loss
  double dynamics_loss_weight = 20.0;
  double reward_loss_weight = 0.1;
  double terminal_loss_weight = 1.0;
  double pre_activation_loss_weight = 1e-5;
  int encoder_horizon = 5;
  int multistep_horizon = 3;

  // TD3
  double target_policy_noise = 0.2;
  double target_policy_noise_clip = 0.3;

  // LAP
  double probability_smoothing = 0.4;
  double minimum_priority = 1.0;

  // Exploration
  int64_t initial_random_steps = 10'000;
  double exploration_noise = 0.0;

  // Common
  double discount = 0.99;
  int64_t replay_capacity = 1'000'000;
  int batch_size = 256;
  int target_update_frequency = 250;
  int replay_ratio = 1;

  // Encoder
  double encoder_lr = 1e-4;
  double encoder_weight_decay = 1e-4;
  int zs_dim = 512;
  int za_dim = 256;
  int zsa_dim = 512;
  int encoder_hidden_dim = 512;
  int reward_bins = 65;
  double reward_range_low = -10.0;
  double reward_range_high = 10.0;
  int sem_group = 8;

  // Value
  double value_lr = 3e-4;
  double value_weight_decay = 1e-4;
  int value_hidden_dim = 512;
  double value_grad_clip = 20.0;
  int ensemble_size = 10;

  // Policy
  double policy_lr = 3e-4;
  double policy_weight_decay = 1e-4;
  int policy_hidden_dim = 512;

  // MPC
  int mpc_horizon = 3;
  int mpc_iterations = 6;
  int mpc_samples = 512;
  int mpc_policy_samples = 24;
  int mpc_elites = 64;
  double mpc_policy_std = 0.1;
  double mpc_max_std = 2.0;
  double mpc_min_std = 0.05;
  double mpc_temperature = 0.5;

  // Ablations
  bool min_in_mpc = true;
  bool sem_enabled = true;
  bool use_mpc_for_acting = true;
  bool target_random_pair_min = false;

  // Evaluation and outputs
  int64_t eval_interval = 5'000;
  int eval_episodes = 10;
  bool eval_deterministic = false;
  int64_t checkpoint_interval = 0;
  bool checkpoint_replay = false;
  int64_t policy_change_interval = 1'000;
  int policy_change_probes = 16;

  void Validate() const;
};

// Visits (key, field) for every scalar field except env_params.
template <typename Config, typename Visitor>
void ForEachField(Config& c, Visitor&& v);

// Flat YAML mapping of keys to scalars; `env_params` is a nested mapping.
RunConfig LoadConfigFile(const std::string& path);
RunConfig ConfigFromYaml(const std::string& text);

// "key=value"; env parameters use "env_params.<name>=value".
void ApplyOverride(RunConfig& config, const std::string& assignment);

nlohmann::json ToJson(const RunConfig& config);
RunConfig FromJson(const nlohmann::json& j);
std::string ToYaml(const RunConfig& config);
// Stable hex digest of the canonical JSON form.
std::string ConfigHash(const RunConfig& config);

// MRSQ_THREADS, default 1.
int WorkerThreads();

}  // namespace mrsq::harness

#include "mrsq/harness/config_fields.inc"

#endif  // MRSQ_HARNESS_CONFIG_H_
