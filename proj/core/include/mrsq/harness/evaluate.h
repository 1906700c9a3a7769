#ifndef MRSQ_HARNESS_EVALUATE_H_
#define MRSQ_HARNESS_EVALUATE_H_

#include <vector>

#include "mrsq/analysis/acting.h"
#include "mrsq/common/rng.h"
#include "mrsq/env/env.h"

namespace mrsq::harness {

struct EvalResult {
  std::vector<double> returns;
  std::vector<int> lengths;
  double mean_return = 0.0;
  double mean_length = 0.0;
};

// Runs full episodes on a clone of `env`; nothing is learned or stored.
EvalResult Evaluate(analysis::ActingAgent& actor, const env::Environment& env, int episodes,
                    Rng& rng);

}  // namespace mrsq::harness

#endif  // MRSQ_HARNESS_EVALUATE_H_
