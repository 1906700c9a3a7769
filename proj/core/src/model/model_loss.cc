#include "mrsq/model/model_loss.h"

#include <cmath>

#include "mrsq/common/errors.h"
#include "mrsq/nn/layers.h"

namespace mrsq::model {

void ModelLossWeights::Validate() const {
  if (horizon < 1) throw ConfigError("model loss: horizon must be >= 1");
  if (dynamics < 0 || reward < 0 || terminal < 0 || pre_activation < 0) {
    throw ConfigError("model loss: weights must be non-negative");
  }
}

void ModelBatch::Validate(const WorldModelDims& dims) const {
  const int h = horizon();
  const int b = batch_size();
  if (h < 1 || static_cast<int>(obs.size()) != h + 1) {
    throw ConfigError("model batch: need horizon + 1 observation slices");
  }
  if (rewards.cols() != h || terminated.rows() != b || terminated.cols() != h ||
      mask.rows() != b || mask.cols() != h) {
    throw ConfigError("model batch: reward/terminal/mask shape mismatch");
  }
  for (const Matrix& o : obs) {
    if (o.rows() != b || o.cols() != dims.obs_dim) throw ConfigError("model batch: obs shape");
  }
  for (const Matrix& a : actions) {
    if (a.rows() != b || a.cols() != dims.action_dim) {
      throw ConfigError("model batch: action shape");
    }
  }
}

std::vector<Matrix> EncodeTargets(const WorldModel& model, const ModelBatch& batch) {
  std::vector<Matrix> targets(batch.horizon());
  for (int j = 0; j < batch.horizon(); ++j) targets[j] = model.Encode(batch.obs[j + 1]);
  return targets;
}

ModelLossTerms ModelLoss(const WorldModel& model, const ModelBatch& batch,
                         const ModelLossWeights& weights, nn::Gradients* grads,
                         const std::vector<Matrix>* fixed_targets) {
  weights.Validate();
  batch.Validate(model.dims());
  const int h = batch.horizon();
  if (h != weights.horizon) throw ConfigError("model loss: batch horizon != weights.horizon");
  const int b = batch.batch_size();
  const int zs = model.dims().zs_dim;
  const double inv_b = 1.0 / b;

  std::vector<Matrix> own;
  if (fixed_targets == nullptr) own = EncodeTargets(model, batch);
  const std::vector<Matrix>& targets = fixed_targets ? *fixed_targets : own;
  if (static_cast<int>(targets.size()) != h) throw ConfigError("model loss: target count");

  WorldModel::EncodeCache enc_cache;
  const Matrix z0 = model.Encode(batch.obs[0], &enc_cache);

  std::vector<WorldModel::PredictCache> caches(grads != nullptr ? h : 0);
  std::vector<Matrix> dz_next(h);
  std::vector<Matrix> dlogits(h);
  std::vector<Vector> dterm(h);

  ModelLossTerms terms;
  Matrix z = z0;
  for (int j = 0; j < h; ++j) {
    ModelPrediction p =
        model.Predict(z, batch.actions[j], grads != nullptr ? &caches[j] : nullptr);
    const Vector m = batch.mask.col(j);

    const Matrix diff = p.z_next - targets[j];
    const Vector mse = diff.rowwise().squaredNorm() / zs;
    terms.dynamics += m.dot(mse) * inv_b;

    const Matrix logp = nn::LogSoftmaxRows(p.reward_logits);
    const Matrix target_probs = model.two_hot().EncodeBatch(batch.rewards.col(j));
    const Vector ce = -(target_probs.cwiseProduct(logp)).rowwise().sum();
    terms.reward += m.dot(ce) * inv_b;

    Vector bce(b);
    Vector sig(b);
    for (int r = 0; r < b; ++r) {
      const double x = p.terminal_logit(r);
      const double y = batch.terminated(r, j);
      // log(1 + e^-|x|) form keeps large logits finite.
      bce(r) = std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
      sig(r) = nn::Sigmoid(x);
    }
    terms.terminal += m.dot(bce) * inv_b;

    if (grads != nullptr) {
      dz_next[j] = (m.asDiagonal() * diff) * (weights.dynamics * 2.0 * inv_b / zs);
      dlogits[j] = (m.asDiagonal() * (nn::SoftmaxRows(p.reward_logits) - target_probs)) *
                   (weights.reward * inv_b);
      dterm[j] = m.cwiseProduct(sig - batch.terminated.col(j)) * (weights.terminal * inv_b);
    }
    z = std::move(p.z_next);
  }

  const Matrix& pre = WorldModel::PreActivation(enc_cache);
  terms.pre_activation = pre.squaredNorm() / static_cast<double>(pre.size());

  terms.total = weights.dynamics * terms.dynamics + weights.reward * terms.reward +
                weights.terminal * terms.terminal +
                weights.pre_activation * terms.pre_activation;

  if (grads != nullptr) {
    Matrix carry = Matrix::Zero(b, zs);
    for (int j = h - 1; j >= 0; --j) {
      const Matrix dz = dz_next[j] + carry;
      Matrix dzs;
      model.PredictBackward(caches[j], &dz, &dlogits[j], &dterm[j], nullptr, grads, &dzs,
                            nullptr);
      carry = std::move(dzs);
    }
    const Matrix dpre =
        pre * (2.0 * weights.pre_activation / static_cast<double>(pre.size()));
    model.EncodeBackward(enc_cache, carry, grads, &dpre);
  }
  return terms;
}

ModelLossTerms ModelUpdate(WorldModel& model, const ModelBatch& batch,
                           const ModelLossWeights& weights, const nn::AdamWOptions& opt) {
  nn::Gradients grads(model.params());
  const ModelLossTerms terms = ModelLoss(model, batch, weights, &grads);
  if (!std::isfinite(terms.total)) throw TrainingFault("model loss is not finite");
  nn::AdamWStep(model.params(), grads, opt);
  return terms;
}

}  // namespace mrsq::model
