#ifndef MRSQ_ANALYSIS_DIAGNOSTICS_H_
#define MRSQ_ANALYSIS_DIAGNOSTICS_H_

#include <vector>

#include "mrsq/analysis/acting.h"
#include "mrsq/common/rng.h"
#include "mrsq/env/env.h"
#include "mrsq/plan/planning_model.h"

namespace mrsq::analysis {

struct DiagnosticConfig {
  int probe_pairs = 50;
  int probe_spacing = 20;
  int rollouts_per_pair = 100;
  int policy_change_interval = 1000;
  double percent_floor = 1e-3;
  // Steps per ground-truth rollout; 0 means the environment's time limit.
  // Rollouts ignore the time limit itself since they start mid-episode.
  int rollout_horizon = 0;
  int threads = 1;

  void Validate() const;
};

// 100 * (estimate - truth) / max(|truth|, floor). Positive means
// overestimation.
double PercentError(double estimate, double truth, double floor = 1e-3);

struct ValueErrorReport {
  std::vector<double> estimates;
  std::vector<double> returns;
  std::vector<double> percent_errors;
  double mean_percent = 0.0;
};

ValueErrorReport ValueErrorPercent(const ActingAgent& agent, const env::Environment& env,
                                   const DiagnosticConfig& config, double gamma, Rng& rng);

// Mean over probes (and action dims) of the squared change between
// consecutive snapshots. Each snapshot is (probes, action_dim).
std::vector<double> PolicyChangeMetric(const std::vector<Matrix>& snapshots);

struct ProbeSegment {
  std::vector<Vector> obs;      // s_0 .. s_3
  std::vector<Vector> actions;  // a_0 .. a_2
  std::vector<double> rewards;
  double tail_return = 0.0;     // Monte-Carlo value of s_3
};

struct SegmentCollection {
  std::vector<ProbeSegment> segments;
  int skipped = 0;
};

// Segments of `length` real steps starting at the probe points. Probes whose
// episode terminates earlier are skipped and counted.
SegmentCollection CollectProbeSegments(const ActingAgent& agent, const env::Environment& env,
                                       const DiagnosticConfig& config, double gamma, Rng& rng,
                                       int length = 3);

struct ErrorSummary {
  double mean = 0.0;
  int used = 0;
  int skipped = 0;
};

// sum_{j=1..horizon} gamma^j * MSE(predicted z_j, encode(s_j)).
ErrorSummary DynamicsError(const plan::PlanningModel& model,
                           const std::vector<ProbeSegment>& segments, double gamma,
                           int horizon = 3);

// |planner value of the stored actions - observed discounted value|.
ErrorSummary UnrollError(const plan::PlanningModel& model,
                         const std::vector<ProbeSegment>& segments, double gamma,
                         plan::ValueReduction reduction, int horizon = 3);

}  // namespace mrsq::analysis

#endif  // MRSQ_ANALYSIS_DIAGNOSTICS_H_
