#ifndef MRSQ_MODEL_WORLD_MODEL_H_
#define MRSQ_MODEL_WORLD_MODEL_H_

#include "mrsq/common/rng.h"
#include "mrsq/common/types.h"
#include "mrsq/nn/layers.h"
#include "mrsq/nn/mlp.h"
#include "mrsq/nn/params.h"
#include "mrsq/nn/two_hot.h"

namespace mrsq::model {

struct WorldModelDims {
  int obs_dim = 0;
  int action_dim = 0;
  int zs_dim = 512;
  int za_dim = 256;
  int zsa_dim = 512;
  int hidden_dim = 512;
  int reward_bins = 65;
  double reward_lo = -10.0;
  double reward_hi = 10.0;
  // Off: the encoder ends in ELU and the dynamics head is a plain linear map.
  bool sem = true;
  int sem_group = nn::kSemGroupSize;

  void Validate() const;
};

struct ModelPrediction {
  Matrix z_next;
  Matrix reward_logits;
  Vector terminal_logit;
  Matrix zsa;
};

// State encoder f plus state-action encoder g with dynamics, reward and
// terminal heads. Owns its parameters.
class WorldModel {
 public:
  struct EncodeCache {
    nn::Mlp::Cache mlp;
  };
  struct PredictCache {
    Matrix zs;
    Matrix action;
    nn::Mlp::Cache za;
    nn::Mlp::Cache trunk;
    Matrix zsa;
    nn::Mlp::Cache dynamics;
  };

  WorldModel() = default;
  WorldModel(const WorldModelDims& dims, Rng& rng);

  Matrix Encode(const Matrix& obs, EncodeCache* cache = nullptr) const;
  // Output of the encoder's last linear layer, i.e. the input of its final
  // LayerNorm.
  static const Matrix& PreActivation(const EncodeCache& cache) {
    return cache.mlp.layers.back().linear;
  }
  // Returns the gradient with respect to the observation.
  Matrix EncodeBackward(const EncodeCache& cache, const Matrix& dz,
                        nn::Gradients* grads, const Matrix* dpre = nullptr) const;

  Matrix StateAction(const Matrix& zs, const Matrix& action,
                     PredictCache* cache = nullptr) const;
  ModelPrediction Predict(const Matrix& zs, const Matrix& action,
                          PredictCache* cache = nullptr) const;

  // Any head gradient may be null. Outputs that are null are not computed.
  void PredictBackward(const PredictCache& cache, const Matrix* dz_next,
                       const Matrix* dreward_logits, const Vector* dterminal,
                       const Matrix* dzsa, nn::Gradients* grads, Matrix* dzs,
                       Matrix* daction) const;

  // Decoded reward and sigmoid terminal probability.
  Vector DecodeReward(const Matrix& reward_logits) const;

  nn::ParameterStore& params() { return store_; }
  const nn::ParameterStore& params() const { return store_; }
  const WorldModelDims& dims() const { return dims_; }
  const nn::TwoHot& two_hot() const { return two_hot_; }

 private:
  WorldModelDims dims_;
  nn::ParameterStore store_;
  nn::Mlp encoder_;
  nn::Mlp za_;
  nn::Mlp trunk_;
  nn::Mlp dynamics_;
  nn::Linear reward_;
  nn::Linear terminal_;
  nn::TwoHot two_hot_;
};

}  // namespace mrsq::model

#endif  // MRSQ_MODEL_WORLD_MODEL_H_
