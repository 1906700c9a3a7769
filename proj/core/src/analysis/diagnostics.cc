#include "mrsq/analysis/diagnostics.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "mrsq/common/errors.h"
#include "mrsq/plan/mppi.h"

namespace mrsq::analysis {

void DiagnosticConfig::Validate() const {
  if (probe_pairs < 1 || probe_spacing < 1 || rollouts_per_pair < 1 ||
      policy_change_interval < 1) {
    throw ConfigError("diagnostics: counts must be positive");
  }
  if (!(percent_floor > 0.0)) throw ConfigError("diagnostics: percent floor must be > 0");
  if (rollout_horizon < 0 || threads < 1) throw ConfigError("diagnostics: bad horizon/threads");
}

double PercentError(double estimate, double truth, double floor) {
  return 100.0 * (estimate - truth) / std::max(std::abs(truth), floor);
}

namespace {

struct Probe {
  std::vector<double> state;
  Vector obs;
  Vector action;
};

// Probe states visited by the acting policy every `spacing` steps.
std::vector<Probe> CollectProbes(const ActingAgent& agent, const env::Environment& env,
                                 const DiagnosticConfig& config, Rng& rng) {
  if (!env.supports_save_restore()) {
    throw UnsupportedFeature(env.name() + ": diagnostics need state save/restore");
  }
  auto e = env.Clone();
  auto actor = agent.Clone();
  Rng env_rng = rng.Derive("probe_env");
  Rng act_rng = rng.Derive("probe_act");
  std::vector<Probe> probes;
  Vector obs = e->Reset(env_rng);
  actor->BeginEpisode();
  for (int64_t k = 0; static_cast<int>(probes.size()) < config.probe_pairs; ++k) {
    const Vector a = actor->Act(obs, act_rng);
    if (k % config.probe_spacing == 0) probes.push_back({e->SaveState(), obs, a});
    const env::StepResult r = e->Step(a);
    if (r.terminated || r.truncated) {
      obs = e->Reset(env_rng);
      actor->BeginEpisode();
    } else {
      obs = r.observation;
    }
  }
  return probes;
}

// Discounted return from a restored state; the first action is forced when
// given. Stops at termination or after `horizon` steps.
double Rollout(ActingAgent& actor, env::Environment& e, const std::vector<double>& state,
               const Vector* first_action, int horizon, double gamma, Rng& rng) {
  e.RestoreState(state);
  actor.BeginEpisode();
  Vector obs = e.Observe();
  double g = 1.0;
  double ret = 0.0;
  for (int t = 0; t < horizon; ++t) {
    const Vector a = (t == 0 && first_action != nullptr) ? *first_action : actor.Act(obs, rng);
    const env::StepResult r = e.Step(a);
    ret += g * r.reward;
    g *= gamma;
    if (r.terminated) break;
    obs = r.observation;
  }
  return ret;
}

double MonteCarlo(ActingAgent& actor, env::Environment& e, const std::vector<double>& state,
                  const Vector* first_action, const DiagnosticConfig& config, int horizon,
                  double gamma, Rng& rng) {
  double sum = 0.0;
  for (int r = 0; r < config.rollouts_per_pair; ++r) {
    sum += Rollout(actor, e, state, first_action, horizon, gamma, rng);
  }
  return sum / config.rollouts_per_pair;
}

// Runs fn(i, actor, env) for each i on up to config.threads workers. Each
// worker owns its clones; results must be written by index.
template <typename Fn>
void ParallelFor(int count, const ActingAgent& agent, const env::Environment& env, int threads,
                 Fn fn) {
  std::atomic<int> next{0};
  auto worker = [&]() {
    auto actor = agent.Clone();
    auto e = env.Clone();
    for (int i = next++; i < count; i = next++) fn(i, *actor, *e);
  };
  const int n = std::min(threads, count);
  if (n <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex mu;
  for (int t = 0; t < n; ++t) {
    pool.emplace_back([&]() {
      try {
        worker();
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

ValueErrorReport ValueErrorPercent(const ActingAgent& agent, const env::Environment& env,
                                   const DiagnosticConfig& config, double gamma, Rng& rng) {
  config.Validate();
  const std::vector<Probe> probes = CollectProbes(agent, env, config, rng);
  const int horizon = config.rollout_horizon > 0 ? config.rollout_horizon : env.max_episode_steps();
  const Rng rollout_root = rng.Derive("rollout");
  const int n = static_cast<int>(probes.size());
  ValueErrorReport rep;
  rep.estimates.resize(n);
  rep.returns.resize(n);
  rep.percent_errors.resize(n);
  ParallelFor(n, agent, env, config.threads,
              [&](int i, ActingAgent& actor, env::Environment& e) {
                Rng prng = rollout_root.Derive(static_cast<uint64_t>(i));
                rep.estimates[i] = actor.ValueEstimate(probes[i].obs, probes[i].action);
                rep.returns[i] = MonteCarlo(actor, e, probes[i].state, &probes[i].action, config,
                                            horizon, gamma, prng);
                rep.percent_errors[i] =
                    PercentError(rep.estimates[i], rep.returns[i], config.percent_floor);
              });
  double sum = 0.0;
  for (double p : rep.percent_errors) sum += p;
  rep.mean_percent = n > 0 ? sum / n : 0.0;
  return rep;
}

std::vector<double> PolicyChangeMetric(const std::vector<Matrix>& snapshots) {
  std::vector<double> out;
  for (size_t k = 0; k + 1 < snapshots.size(); ++k) {
    const Matrix& a = snapshots[k];
    const Matrix& b = snapshots[k + 1];
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw InputError("policy change: snapshot shapes differ");
    }
    out.push_back(a.size() == 0 ? 0.0 : (a - b).squaredNorm() / static_cast<double>(a.size()));
  }
  return out;
}

SegmentCollection CollectProbeSegments(const ActingAgent& agent, const env::Environment& env,
                                       const DiagnosticConfig& config, double gamma, Rng& rng,
                                       int length) {
  config.Validate();
  const std::vector<Probe> probes = CollectProbes(agent, env, config, rng);
  const int horizon = config.rollout_horizon > 0 ? config.rollout_horizon : env.max_episode_steps();
  const Rng root = rng.Derive("segment");
  const int n = static_cast<int>(probes.size());
  std::vector<ProbeSegment> segs(n);
  std::vector<char> ok(n, 0);
  ParallelFor(n, agent, env, config.threads,
              [&](int i, ActingAgent& actor, env::Environment& e) {
                Rng prng = root.Derive(static_cast<uint64_t>(i));
                ProbeSegment s;
                e.RestoreState(probes[i].state);
                actor.BeginEpisode();
                s.obs.push_back(probes[i].obs);
                for (int j = 0; j < length; ++j) {
                  const Vector a = j == 0 ? probes[i].action : actor.Act(s.obs.back(), prng);
                  const env::StepResult r = e.Step(a);
                  s.actions.push_back(a);
                  s.rewards.push_back(r.reward);
                  s.obs.push_back(r.observation);
                  if (r.terminated) {
                    if (j + 1 < length) return;
                    s.tail_return = 0.0;
                    segs[i] = std::move(s);
                    ok[i] = 1;
                    return;
                  }
                }
                s.tail_return =
                    MonteCarlo(actor, e, e.SaveState(), nullptr, config, horizon, gamma, prng);
                segs[i] = std::move(s);
                ok[i] = 1;
              });
  SegmentCollection out;
  for (int i = 0; i < n; ++i) {
    if (ok[i]) {
      out.segments.push_back(std::move(segs[i]));
    } else {
      ++out.skipped;
    }
  }
  return out;
}

ErrorSummary DynamicsError(const plan::PlanningModel& model,
                           const std::vector<ProbeSegment>& segments, double gamma,
                           int horizon) {
  ErrorSummary out;
  double total = 0.0;
  for (const ProbeSegment& s : segments) {
    if (static_cast<int>(s.actions.size()) < horizon) {
      ++out.skipped;
      continue;
    }
    Matrix z = model.Encode(s.obs[0].transpose());
    double err = 0.0;
    double g = 1.0;
    for (int j = 0; j < horizon; ++j) {
      z = model.Step(z, s.actions[j].transpose()).z_next;
      g *= gamma;
      const Matrix target = model.Encode(s.obs[j + 1].transpose());
      err += g * (z - target).squaredNorm() / static_cast<double>(z.size());
    }
    total += err;
    ++out.used;
  }
  out.mean = out.used > 0 ? total / out.used : 0.0;
  return out;
}

ErrorSummary UnrollError(const plan::PlanningModel& model,
                         const std::vector<ProbeSegment>& segments, double gamma,
                         plan::ValueReduction reduction, int horizon) {
  ErrorSummary out;
  double total = 0.0;
  for (const ProbeSegment& s : segments) {
    if (static_cast<int>(s.actions.size()) < horizon) {
      ++out.skipped;
      continue;
    }
    plan::ActionSequences seq;
    double truth = 0.0;
    double g = 1.0;
    for (int j = 0; j < horizon; ++j) {
      seq.push_back(s.actions[j].transpose());
      truth += g * s.rewards[j];
      g *= gamma;
    }
    truth += g * s.tail_return;
    const Matrix z0 = model.Encode(s.obs[0].transpose());
    const double est = plan::EstimateValue(model, z0, seq, gamma, reduction)(0);
    total += std::abs(est - truth);
    ++out.used;
  }
  out.mean = out.used > 0 ? total / out.used : 0.0;
  return out;
}

}  // namespace mrsq::analysis
