#ifndef MRSQ_MODEL_MODEL_LOSS_H_
#define MRSQ_MODEL_MODEL_LOSS_H_

#include <vector>

#include "mrsq/model/world_model.h"
#include "mrsq/nn/optim.h"

namespace mrsq::model {

struct ModelLossWeights {
  double dynamics = 20.0;
  double reward = 0.1;
  double terminal = 1.0;
  double pre_activation = 1e-5;
  int horizon = 5;

  void Validate() const;
};

// A batch of trajectory segments. Step j of row b is a real transition iff
// mask(b, j) == 1; masked steps still need finite placeholder inputs.
struct ModelBatch {
  std::vector<Matrix> obs;      // horizon + 1 entries of (B, obs_dim)
  std::vector<Matrix> actions;  // horizon entries of (B, action_dim)
  Matrix rewards;               // (B, horizon)
  Matrix terminated;            // (B, horizon), 0 or 1
  Matrix mask;                  // (B, horizon)

  int batch_size() const { return static_cast<int>(rewards.rows()); }
  int horizon() const { return static_cast<int>(actions.size()); }
  void Validate(const WorldModelDims& dims) const;
};

struct ModelLossTerms {
  double total = 0.0;
  double dynamics = 0.0;
  double reward = 0.0;
  double terminal = 0.0;
  double pre_activation = 0.0;
};

// Multi-step latent rollout loss. Targets are encodings of the observed next
// states under the current encoder, with gradients stopped. Terms are summed
// over the horizon and averaged over the batch. Gradients are accumulated
// into `grads` when non-null.
// `fixed_targets` replaces those encodings (one (B, zs) matrix per step).
ModelLossTerms ModelLoss(const WorldModel& model, const ModelBatch& batch,
                         const ModelLossWeights& weights, nn::Gradients* grads,
                         const std::vector<Matrix>* fixed_targets = nullptr);
// Encodings of obs[1..horizon] under the current encoder.
std::vector<Matrix> EncodeTargets(const WorldModel& model, const ModelBatch& batch);

// One optimizer step. Throws TrainingFault (without touching parameters) on
// a non-finite loss or gradient.
ModelLossTerms ModelUpdate(WorldModel& model, const ModelBatch& batch,
                           const ModelLossWeights& weights, const nn::AdamWOptions& opt);

}  // namespace mrsq::model

#endif  // MRSQ_MODEL_MODEL_LOSS_H_
