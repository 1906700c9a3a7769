#ifndef MRSQ_VALUE_UPDATES_H_
#define MRSQ_VALUE_UPDATES_H_

#include <cstdint>
#include <vector>

#include "mrsq/common/rng.h"
#include "mrsq/model/model_loss.h"
#include "mrsq/model/world_model.h"
#include "mrsq/nn/optim.h"
#include "mrsq/value/policy.h"
#include "mrsq/value/q_ensemble.h"
#include "mrsq/value/replay.h"
#include "mrsq/value/td.h"

namespace mrsq::value {

struct ValueBatch {
  Matrix obs;                  // (B, obs_dim) s_t
  Matrix action;               // (B, action_dim) a_t
  Vector return_sum;           // sum_j gamma^j r_{t+j}
  Vector bootstrap_discount;   // gamma^J, or 0 after termination
  Matrix bootstrap_obs;        // (B, obs_dim) s_{t+J}
};

struct TrainingBatch {
  std::vector<int64_t> slots;
  model::ModelBatch model;
  ValueBatch value;
};

TrainingBatch BuildTrainingBatch(const LapReplayBuffer& replay,
                                 const std::vector<int64_t>& slots, int model_horizon,
                                 const TdConfig& td);

// How the target reduces the ensemble: the full minimum, or the minimum of
// one random pair of members per call.
enum class TargetReduction { kFullMin, kRandomPairMin };

struct TargetOptions {
  TargetReduction reduction = TargetReduction::kFullMin;
  // Discrete actions are replaced by the one-hot of their argmax.
  bool discrete = false;
  // Disables target policy noise (tests).
  bool zero_noise = false;
};

// Bootstrapped targets for each batch row. Encoder, target ensemble and
// policy are read-only.
Vector TdTargets(const model::WorldModel& model, const PolicyNet& policy,
                 const QEnsemble& q, const ValueBatch& batch, const TdConfig& td,
                 const TargetOptions& options, Rng& rng);

struct ValueLossResult {
  double loss = 0.0;
  std::vector<double> priorities;
};

// Sum over members of the batch-mean Huber loss of each member against the
// shared targets. Priority per row is the largest member |TD error|, floored
// at min_priority. zsa is a fixed input.
ValueLossResult ValueLoss(const QEnsemble& q, const Matrix& zsa, const Vector& targets,
                          double min_priority, nn::Gradients* grads);

struct ValueUpdateOptions {
  nn::AdamWOptions adam;
  double grad_clip = 20.0;
  double min_priority = 1.0;
};

ValueLossResult ValueUpdate(const model::WorldModel& model, QEnsemble& q,
                            const Matrix& obs, const Matrix& action, const Vector& targets,
                            const ValueUpdateOptions& options);

// -mean over the batch of reduce_i Q_i(g(zs, pi(zs))). Gradients reach only
// the policy.
double PolicyLoss(const model::WorldModel& model, const PolicyNet& policy, const QEnsemble& q,
                  const Matrix& zs, Reduction reduction, nn::Gradients* grads);

double PolicyUpdate(const model::WorldModel& model, PolicyNet& policy, const QEnsemble& q,
                    const Matrix& zs, Reduction reduction, const nn::AdamWOptions& adam,
                    double grad_clip);

Matrix ToModelAction(const Matrix& actions, bool discrete);

}  // namespace mrsq::value

#endif  // MRSQ_VALUE_UPDATES_H_
