#include "mrsq/value/updates.h"

#include <algorithm>
#include <cmath>

#include "mrsq/common/errors.h"

namespace mrsq::value {

Matrix ToModelAction(const Matrix& actions, bool discrete) {
  if (!discrete) return actions;
  Matrix out = Matrix::Zero(actions.rows(), actions.cols());
  for (Eigen::Index r = 0; r < actions.rows(); ++r) {
    Eigen::Index best = 0;
    actions.row(r).maxCoeff(&best);
    out(r, best) = 1.0;
  }
  return out;
}

TrainingBatch BuildTrainingBatch(const LapReplayBuffer& replay,
                                 const std::vector<int64_t>& slots, int model_horizon,
                                 const TdConfig& td) {
  td.Validate();
  if (model_horizon < 1) throw ConfigError("batch: model horizon must be >= 1");
  const int b = static_cast<int>(slots.size());
  const int od = replay.obs_dim();
  const int ad = replay.action_dim();
  TrainingBatch out;
  out.slots = slots;

  model::ModelBatch& mb = out.model;
  mb.obs.assign(model_horizon + 1, Matrix(b, od));
  mb.actions.assign(model_horizon, Matrix::Zero(b, ad));
  mb.rewards = Matrix::Zero(b, model_horizon);
  mb.terminated = Matrix::Zero(b, model_horizon);
  mb.mask = Matrix::Zero(b, model_horizon);

  ValueBatch& vb = out.value;
  vb.obs.resize(b, od);
  vb.action.resize(b, ad);
  vb.return_sum.resize(b);
  vb.bootstrap_discount.resize(b);
  vb.bootstrap_obs.resize(b, od);

  for (int r = 0; r < b; ++r) {
    const int64_t s = slots[r];
    const int len = replay.SegmentLength(s, model_horizon);
    for (int j = 0; j < len; ++j) {
      const int64_t sj = replay.Offset(s, j);
      mb.obs[j].row(r) = replay.obs(sj);
      mb.actions[j].row(r) = replay.action(sj);
      mb.rewards(r, j) = replay.reward(sj);
      mb.terminated(r, j) = replay.terminated(sj) ? 1.0 : 0.0;
      mb.mask(r, j) = 1.0;
    }
    const auto last_next = replay.next_obs(replay.Offset(s, len - 1));
    for (int j = len; j <= model_horizon; ++j) mb.obs[j].row(r) = last_next;

    const int jq = replay.SegmentLength(s, td.horizon);
    double g = 1.0;
    double ret = 0.0;
    for (int j = 0; j < jq; ++j) {
      ret += g * replay.reward(replay.Offset(s, j));
      g *= td.gamma;
    }
    const int64_t last = replay.Offset(s, jq - 1);
    vb.obs.row(r) = replay.obs(s);
    vb.action.row(r) = replay.action(s);
    vb.return_sum(r) = ret;
    vb.bootstrap_discount(r) = replay.terminated(last) ? 0.0 : g;
    vb.bootstrap_obs.row(r) = replay.next_obs(last);
  }
  return out;
}

Vector TdTargets(const model::WorldModel& model, const PolicyNet& policy, const QEnsemble& q,
                 const ValueBatch& batch, const TdConfig& td, const TargetOptions& options,
                 Rng& rng) {
  const Matrix zs = model.Encode(batch.bootstrap_obs);
  Matrix a = policy.Forward(zs);
  if (!options.zero_noise && td.target_noise_std > 0.0) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double eps = std::clamp(td.target_noise_std * rng.Normal(), -td.target_noise_clip,
                                    td.target_noise_clip);
      a.data()[i] = std::clamp(a.data()[i] + eps, -1.0, 1.0);
    }
  }
  a = ToModelAction(a, options.discrete);
  const Matrix zsa = model.StateAction(zs, a);
  const Matrix qs = q.Forward(zsa, /*use_targets=*/true);
  Vector next;
  if (options.reduction == TargetReduction::kRandomPairMin && q.size() >= 2) {
    const int i = static_cast<int>(rng.UniformInt(q.size()));
    int j = static_cast<int>(rng.UniformInt(q.size() - 1));
    if (j >= i) ++j;
    next = qs.col(i).cwiseMin(qs.col(j));
  } else {
    next = Reduce(qs, Reduction::kMin);
  }
  return batch.return_sum + batch.bootstrap_discount.cwiseProduct(next);
}

ValueLossResult ValueLoss(const QEnsemble& q, const Matrix& zsa, const Vector& targets,
                          double min_priority, nn::Gradients* grads) {
  if (zsa.rows() != targets.size()) throw ConfigError("value loss: batch mismatch");
  const Eigen::Index b = zsa.rows();
  std::vector<nn::Mlp::Cache> caches;
  const Matrix qs = q.Forward(zsa, false, grads != nullptr ? &caches : nullptr);
  ValueLossResult res;
  res.priorities.assign(b, 0.0);
  for (int k = 0; k < q.size(); ++k) {
    Matrix dq(b, 1);
    double loss = 0.0;
    for (Eigen::Index r = 0; r < b; ++r) {
      const double d = qs(r, k) - targets(r);
      const double ad = std::abs(d);
      loss += ad <= 1.0 ? 0.5 * d * d : ad - 0.5;
      dq(r, 0) = std::clamp(d, -1.0, 1.0) / static_cast<double>(b);
      res.priorities[r] = std::max(res.priorities[r], ad);
    }
    res.loss += loss / static_cast<double>(b);
    if (grads != nullptr) q.MemberBackward(k, caches[k], dq, grads);
  }
  for (double& p : res.priorities) p = std::isnan(p) ? p : std::max(p, min_priority);
  return res;
}

ValueLossResult ValueUpdate(const model::WorldModel& model, QEnsemble& q, const Matrix& obs,
                            const Matrix& action, const Vector& targets,
                            const ValueUpdateOptions& options) {
  const Matrix zs = model.Encode(obs);
  const Matrix zsa = model.StateAction(zs, action);
  nn::Gradients grads(q.params());
  ValueLossResult res = ValueLoss(q, zsa, targets, options.min_priority, &grads);
  if (!std::isfinite(res.loss)) throw TrainingFault("value loss is not finite");
  nn::ClipGradNorm(grads, options.grad_clip);
  nn::AdamWStep(q.params(), grads, options.adam);
  return res;
}

double PolicyLoss(const model::WorldModel& model, const PolicyNet& policy, const QEnsemble& q,
                  const Matrix& zs, Reduction reduction, nn::Gradients* grads) {
  const Eigen::Index b = zs.rows();
  nn::Mlp::Cache pcache;
  const Matrix a = policy.Forward(zs, &pcache);
  model::WorldModel::PredictCache mcache;
  const Matrix zsa = model.StateAction(zs, a, grads != nullptr ? &mcache : nullptr);
  std::vector<nn::Mlp::Cache> qcaches;
  const Matrix qs = q.Forward(zsa, false, grads != nullptr ? &qcaches : nullptr);
  const Vector red = Reduce(qs, reduction);
  const double loss = -red.mean();
  if (grads == nullptr) return loss;

  Matrix dzsa = Matrix::Zero(b, zsa.cols());
  for (int k = 0; k < q.size(); ++k) {
    Matrix dq = Matrix::Zero(b, 1);
    bool any = false;
    for (Eigen::Index r = 0; r < b; ++r) {
      if (reduction == Reduction::kMean) {
        dq(r, 0) = -1.0 / (static_cast<double>(b) * q.size());
        any = true;
      } else {
        Eigen::Index best = 0;
        qs.row(r).minCoeff(&best);
        if (best == k) {
          dq(r, 0) = -1.0 / static_cast<double>(b);
          any = true;
        }
      }
    }
    if (any) dzsa += q.MemberBackward(k, qcaches[k], dq, nullptr);
  }
  Matrix da;
  model.PredictBackward(mcache, nullptr, nullptr, nullptr, &dzsa, nullptr, nullptr, &da);
  policy.Backward(pcache, da, grads);
  return loss;
}

double PolicyUpdate(const model::WorldModel& model, PolicyNet& policy, const QEnsemble& q,
                    const Matrix& zs, Reduction reduction, const nn::AdamWOptions& adam,
                    double grad_clip) {
  nn::Gradients grads(policy.params());
  const double loss = PolicyLoss(model, policy, q, zs, reduction, &grads);
  if (!std::isfinite(loss)) throw TrainingFault("policy loss is not finite");
  nn::ClipGradNorm(grads, grad_clip);
  nn::AdamWStep(policy.params(), grads, adam);
  return loss;
}

}  // namespace mrsq::value
