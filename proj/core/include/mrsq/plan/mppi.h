#ifndef MRSQ_PLAN_MPPI_H_
#define MRSQ_PLAN_MPPI_H_

#include <vector>

#include "mrsq/common/rng.h"
#include "mrsq/common/types.h"
#include "mrsq/plan/planning_model.h"

namespace mrsq::plan {

struct PlannerConfig {
  int horizon = 3;
  int iterations = 6;
  int num_samples = 512;
  int num_policy = 24;
  int num_elites = 64;
  double policy_std = 0.1;
  double max_std = 2.0;
  double min_std = 0.05;
  double temperature = 0.5;
  double gamma = 0.99;
  ValueReduction reduction = ValueReduction::kMin;
  // Pick the highest-scoring elite instead of drawing one.
  bool deterministic = false;

  void Validate() const;
};

// Mean action sequence (horizon, action_dim) carried between steps.
struct WarmStart {
  Matrix mean;
  bool valid = false;
  void Reset() { valid = false; mean.resize(0, 0); }
};

// Candidate sequences are stored time-major: actions[t] is (n, action_dim).
using ActionSequences = std::vector<Matrix>;

// Discounted predicted return of each sequence from z0 (1, zs), including
// the reduced terminal value at the policy action. Termination is
// accumulated, so a predicted terminal masks all later terms.
Vector EstimateValue(const PlanningModel& model, const Matrix& z0, const ActionSequences& actions,
                     double gamma, ValueReduction reduction);

struct Refit {
  Vector scores;
  Matrix mean;  // (horizon, action_dim)
  Matrix std;
};

Refit ScoreAndRefit(const Vector& elite_values, const ActionSequences& elite_actions,
                    double temperature, double min_std, double max_std);

// Indices of the k largest values in descending order; ties keep index order.
std::vector<int> TopK(const Vector& values, int k);

struct PlanStats {
  std::vector<double> elite_mean;  // per iteration
  double elite_max = 0.0;
  double mean_std = 0.0;
  int chosen_elite = -1;
  int discarded = 0;
};

struct PlanResult {
  Vector action;
  Matrix sequence;  // chosen elite, (horizon, action_dim)
  PlanStats stats;
};

PlanResult MppiPlan(const PlanningModel& model, const Vector& obs, WarmStart& warm, Rng& rng,
                    const PlannerConfig& config);

}  // namespace mrsq::plan

#endif  // MRSQ_PLAN_MPPI_H_
