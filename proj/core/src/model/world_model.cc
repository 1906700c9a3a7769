#include "mrsq/model/world_model.h"

#include "mrsq/common/errors.h"

namespace mrsq::model {

using nn::Activation;
using nn::LayerSpec;
using nn::MlpSpec;
using nn::Norm;

void WorldModelDims::Validate() const {
  if (obs_dim <= 0 || action_dim <= 0) throw ConfigError("world model: bad obs/action dim");
  if (zs_dim < 2 || za_dim <= 0 || zsa_dim <= 0 || hidden_dim < 2) {
    throw ConfigError("world model: widths must be positive");
  }
  if (sem && zs_dim % sem_group != 0) {
    throw ConfigError("world model: zs_dim must be divisible by the SEM group size");
  }
  if (reward_bins < 2) throw ConfigError("world model: need at least 2 reward bins");
}

WorldModel::WorldModel(const WorldModelDims& dims, Rng& rng)
    : dims_(dims), two_hot_(dims.reward_bins, dims.reward_lo, dims.reward_hi) {
  dims_.Validate();
  const int h = dims_.hidden_dim;

  MlpSpec enc;
  enc.input_dim = dims_.obs_dim;
  enc.layers = {{h, Norm::kLayerNorm, Activation::kElu},
                {h, Norm::kLayerNorm, Activation::kElu},
                {dims_.zs_dim, Norm::kLayerNormAffine,
                 dims_.sem ? Activation::kNone : Activation::kElu}};
  enc.sem_output = dims_.sem;
  enc.sem_group = dims_.sem_group;
  encoder_ = nn::Mlp(store_, "encoder", enc, rng);

  MlpSpec za;
  za.input_dim = dims_.action_dim;
  za.layers = {{dims_.za_dim, Norm::kNone, Activation::kElu}};
  za_ = nn::Mlp(store_, "sa.za", za, rng);

  MlpSpec trunk;
  trunk.input_dim = dims_.zs_dim + dims_.za_dim;
  trunk.layers = {{h, Norm::kLayerNorm, Activation::kElu},
                  {h, Norm::kLayerNorm, Activation::kElu},
                  {dims_.zsa_dim, Norm::kNone, Activation::kNone}};
  trunk_ = nn::Mlp(store_, "sa.trunk", trunk, rng);

  MlpSpec dyn;
  dyn.input_dim = dims_.zsa_dim;
  dyn.layers = {{dims_.zs_dim, dims_.sem ? Norm::kLayerNormAffine : Norm::kNone,
                 Activation::kNone}};
  dyn.sem_output = dims_.sem;
  dyn.sem_group = dims_.sem_group;
  dynamics_ = nn::Mlp(store_, "sa.dynamics", dyn, rng);

  reward_ = nn::Linear(store_, "sa.reward", dims_.zsa_dim, dims_.reward_bins, rng);
  terminal_ = nn::Linear(store_, "sa.terminal", dims_.zsa_dim, 1, rng);
}

Matrix WorldModel::Encode(const Matrix& obs, EncodeCache* cache) const {
  if (obs.cols() != dims_.obs_dim) {
    throw ConfigError("world model: observation width " + std::to_string(obs.cols()) +
                      " != " + std::to_string(dims_.obs_dim));
  }
  return encoder_.Forward(store_, obs, cache != nullptr ? &cache->mlp : nullptr);
}

Matrix WorldModel::EncodeBackward(const EncodeCache& cache, const Matrix& dz,
                                  nn::Gradients* grads, const Matrix* dpre) const {
  return encoder_.Backward(store_, cache.mlp, dz, grads, dpre);
}

Matrix WorldModel::StateAction(const Matrix& zs, const Matrix& action,
                               PredictCache* cache) const {
  if (action.cols() != dims_.action_dim) {
    throw ConfigError("world model: action width mismatch");
  }
  if (zs.rows() != action.rows()) throw ConfigError("world model: batch mismatch");
  const Matrix za = za_.Forward(store_, action, cache != nullptr ? &cache->za : nullptr);
  Matrix cat(zs.rows(), zs.cols() + za.cols());
  cat << zs, za;
  Matrix zsa = trunk_.Forward(store_, cat, cache != nullptr ? &cache->trunk : nullptr);
  if (cache != nullptr) {
    cache->zs = zs;
    cache->action = action;
    cache->zsa = zsa;
  }
  return zsa;
}

ModelPrediction WorldModel::Predict(const Matrix& zs, const Matrix& action,
                                    PredictCache* cache) const {
  ModelPrediction p;
  p.zsa = StateAction(zs, action, cache);
  p.z_next = dynamics_.Forward(store_, p.zsa, cache != nullptr ? &cache->dynamics : nullptr);
  p.reward_logits = reward_.Forward(store_, p.zsa);
  p.terminal_logit = terminal_.Forward(store_, p.zsa).col(0);
  return p;
}

void WorldModel::PredictBackward(const PredictCache& cache, const Matrix* dz_next,
                                 const Matrix* dreward_logits, const Vector* dterminal,
                                 const Matrix* dzsa, nn::Gradients* grads, Matrix* dzs,
                                 Matrix* daction) const {
  Matrix d = dzsa != nullptr ? *dzsa : Matrix::Zero(cache.zsa.rows(), cache.zsa.cols());
  if (dz_next != nullptr) d += dynamics_.Backward(store_, cache.dynamics, *dz_next, grads);
  if (dreward_logits != nullptr) {
    d += reward_.Backward(store_, cache.zsa, *dreward_logits, grads);
  }
  if (dterminal != nullptr) {
    d += terminal_.Backward(store_, cache.zsa, Matrix(*dterminal), grads);
  }
  const Matrix dcat = trunk_.Backward(store_, cache.trunk, d, grads);
  if (dzs != nullptr) *dzs = dcat.leftCols(dims_.zs_dim);
  const Matrix dza = dcat.rightCols(dims_.za_dim);
  const Matrix da = za_.Backward(store_, cache.za, dza, grads);
  if (daction != nullptr) *daction = da;
}

Vector WorldModel::DecodeReward(const Matrix& reward_logits) const {
  return two_hot_.DecodeRows(reward_logits);
}

}  // namespace mrsq::model
