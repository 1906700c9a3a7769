#include "mrsq/plan/mppi.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mrsq/common/errors.h"

namespace mrsq::plan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Matrix Replicate(const Matrix& z0, Eigen::Index n) {
  if (z0.rows() == n) return z0;
  if (z0.rows() != 1) throw ConfigError("planner: latent batch mismatch");
  return z0.replicate(n, 1);
}

void ClipUnit(Matrix& m) { m = m.cwiseMax(-1.0).cwiseMin(1.0); }

}  // namespace

void PlannerConfig::Validate() const {
  if (horizon < 0) throw ConfigError("planner: horizon must be >= 0");
  if (iterations < 0) throw ConfigError("planner: iterations must be >= 0");
  if (num_samples < 1) throw ConfigError("planner: num_samples must be >= 1");
  if (num_policy < 0 || num_policy >= num_samples) {
    throw ConfigError("planner: need 0 <= num_policy < num_samples");
  }
  if (num_elites < 1 || num_elites > num_samples) {
    throw ConfigError("planner: need 1 <= num_elites <= num_samples");
  }
  if (!(min_std > 0.0) || min_std > max_std) throw ConfigError("planner: need 0 < min_std <= max_std");
  if (policy_std < 0.0) throw ConfigError("planner: policy_std must be >= 0");
  if (!(temperature > 0.0)) throw ConfigError("planner: temperature must be > 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("planner: gamma must be in [0, 1]");
}

Vector EstimateValue(const PlanningModel& model, const Matrix& z0, const ActionSequences& actions,
                     double gamma, ValueReduction reduction) {
  const Eigen::Index n = actions.empty() ? z0.rows() : actions[0].rows();
  Matrix z = Replicate(z0, n);
  Vector ret = Vector::Zero(n);
  Vector alive = Vector::Ones(n);
  double g = 1.0;
  for (const Matrix& a : actions) {
    if (a.rows() != n) throw ConfigError("planner: ragged candidate set");
    LatentStep s = model.Step(z, a);
    ret += g * alive.cwiseProduct(s.reward);
    for (Eigen::Index i = 0; i < n; ++i) alive(i) *= 1.0 - std::round(s.terminal_prob(i));
    g *= gamma;
    z = std::move(s.z_next);
  }
  const Vector tail = model.Value(z, model.Policy(z), reduction);
  ret += g * alive.cwiseProduct(tail);
  return ret;
}

std::vector<int> TopK(const Vector& values, int k) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min<int>(k, static_cast<int>(idx.size()));
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&values](int a, int b) {
    return values(a) > values(b) || (values(a) == values(b) && a < b);
  });
  idx.resize(k);
  return idx;
}

Refit ScoreAndRefit(const Vector& elite_values, const ActionSequences& elite_actions,
                    double temperature, double min_std, double max_std) {
  const Eigen::Index k = elite_values.size();
  if (k == 0) throw PreconditionError("refit: no elites");
  const double vmax = elite_values.maxCoeff();
  if (!std::isfinite(vmax)) throw TrainingFault("refit: no finite elite value");
  Refit out;
  out.scores = (temperature * (elite_values.array() - vmax)).exp().matrix();
  out.scores /= out.scores.sum();
  const auto h = static_cast<Eigen::Index>(elite_actions.size());
  const Eigen::Index a = h > 0 ? elite_actions[0].cols() : 0;
  out.mean.resize(h, a);
  out.std.resize(h, a);
  for (Eigen::Index t = 0; t < h; ++t) {
    const Matrix& at = elite_actions[t];
    const RowVector mu = out.scores.transpose() * at;
    const RowVector var =
        out.scores.transpose() * (at.rowwise() - mu).array().square().matrix();
    out.mean.row(t) = mu;
    out.std.row(t) = var.array().sqrt().max(min_std).min(max_std).matrix();
  }
  return out;
}

PlanResult MppiPlan(const PlanningModel& model, const Vector& obs, WarmStart& warm, Rng& rng,
                    const PlannerConfig& config) {
  config.Validate();
  if (config.horizon < 1) throw ConfigError("planner: mppi needs horizon >= 1");
  const int h = config.horizon;
  const int ad = model.action_dim();
  const int n = config.num_samples;
  const int np = config.num_policy;
  const Matrix z0 = model.Encode(obs.transpose());

  ActionSequences policy_seqs(h, Matrix(np, ad));
  if (np > 0) {
    Matrix z = Replicate(z0, np);
    for (int t = 0; t < h; ++t) {
      Matrix a = model.Policy(z);
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] += config.policy_std * rng.Normal();
      ClipUnit(a);
      policy_seqs[t] = a;
      if (t + 1 < h) z = model.Step(z, a).z_next;
    }
  }

  Matrix mean = Matrix::Zero(h, ad);
  if (warm.valid && warm.mean.rows() == h && warm.mean.cols() == ad) {
    mean.topRows(h - 1) = warm.mean.bottomRows(h - 1);
  }
  Matrix std = Matrix::Constant(h, ad, config.max_std);

  PlanResult result;
  ActionSequences elites;
  Vector scores;
  if (config.iterations == 0) {
    if (np > 0) {
      elites.resize(h);
      for (int t = 0; t < h; ++t) elites[t] = policy_seqs[t].topRows(1);
    } else {
      elites.resize(h);
      for (int t = 0; t < h; ++t) elites[t] = mean.row(t);
    }
    scores = Vector::Ones(1);
  }

  for (int it = 0; it < config.iterations; ++it) {
    ActionSequences cand(h, Matrix(n, ad));
    for (int t = 0; t < h; ++t) {
      Matrix& c = cand[t];
      if (np > 0) c.topRows(np) = policy_seqs[t];
      for (int r = np; r < n; ++r) {
        for (int j = 0; j < ad; ++j) c(r, j) = mean(t, j) + std(t, j) * rng.Normal();
      }
      ClipUnit(c);
    }
    Vector values = EstimateValue(model, z0, cand, config.gamma, config.reduction);
    int finite = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (std::isnan(values(i)) || values(i) == std::numeric_limits<double>::infinity()) {
        values(i) = kNegInf;
      }
      if (std::isfinite(values(i))) {
        ++finite;
      } else {
        ++result.stats.discarded;
      }
    }
    if (finite == 0) throw TrainingFault("planner: all candidate values are non-finite");

    const std::vector<int> top = TopK(values, config.num_elites);
    Vector ev(top.size());
    elites.assign(h, Matrix(static_cast<Eigen::Index>(top.size()), ad));
    for (size_t e = 0; e < top.size(); ++e) {
      ev(e) = values(top[e]);
      for (int t = 0; t < h; ++t) elites[t].row(e) = cand[t].row(top[e]);
    }
    Refit refit = ScoreAndRefit(ev, elites, config.temperature, config.min_std, config.max_std);
    mean = refit.mean;
    std = refit.std;
    scores = refit.scores;

    double sum = 0.0;
    int cnt = 0;
    for (Eigen::Index e = 0; e < ev.size(); ++e) {
      if (std::isfinite(ev(e))) {
        sum += ev(e);
        ++cnt;
      }
    }
    result.stats.elite_mean.push_back(sum / cnt);
    result.stats.elite_max = ev(0);
  }

  int chosen = 0;
  if (config.deterministic) {
    scores.maxCoeff(&chosen);
  } else {
    double best = kNegInf;
    for (Eigen::Index e = 0; e < scores.size(); ++e) {
      const double g = rng.Gumbel();
      if (scores(e) <= 0.0) continue;
      const double key = std::log(scores(e)) + g;
      if (key > best) {
        best = key;
        chosen = static_cast<int>(e);
      }
    }
  }
  result.stats.chosen_elite = chosen;
  result.stats.mean_std = std.mean();
  result.sequence.resize(h, ad);
  for (int t = 0; t < h; ++t) result.sequence.row(t) = elites[t].row(chosen);
  result.action = result.sequence.row(0).transpose().cwiseMax(-1.0).cwiseMin(1.0);

  warm.mean = mean;
  warm.valid = true;
  return result;
}

}  // namespace mrsq::plan
