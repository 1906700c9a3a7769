#ifndef MRSQ_ANALYSIS_SEARCH_FAILURE_H_
#define MRSQ_ANALYSIS_SEARCH_FAILURE_H_

#include <cstdint>

#include "mrsq/common/rng.h"

namespace mrsq::analysis {

struct SearchFailureQuery {
  int actions = 2;
  int horizon = 1;
  int64_t samples = 1;
  int64_t trials = 1000;

  void Validate() const;
};

// 1 - (1 - A^-n)^m, evaluated in log space.
double SearchSuccessProbability(int actions, int horizon, int64_t samples);

struct SearchSimulation {
  int64_t successes = 0;
  int64_t trials = 0;
  double rate = 0.0;
  double closed_form = 0.0;
  // Binomial standard deviation of the rate under the closed form.
  double sigma = 0.0;
  // Wilson 95% interval of the empirical rate.
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Random shooting on the true chain of length n + 1 from s_0: a trial
// succeeds if any of its m uniformly drawn action sequences earns reward.
// In exhaustive mode the m sequences of a trial are distinct.
SearchSimulation SimulateRandomSearch(const SearchFailureQuery& query, Rng& rng,
                                      bool exhaustive = false);

}  // namespace mrsq::analysis

#endif  // MRSQ_ANALYSIS_SEARCH_FAILURE_H_
