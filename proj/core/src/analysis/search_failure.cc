#include "mrsq/analysis/search_failure.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <vector>

#include "mrsq/common/errors.h"
#include "mrsq/env/nchain.h"

namespace mrsq::analysis {

void SearchFailureQuery::Validate() const {
  if (actions < 1 || horizon < 0 || samples < 1 || trials < 1) {
    throw ConfigError("search query: need A >= 1, n >= 0, m >= 1, trials >= 1");
  }
}

double SearchSuccessProbability(int actions, int horizon, int64_t samples) {
  if (actions < 1 || horizon < 0 || samples < 1) {
    throw ConfigError("search probability: need A >= 1, n >= 0, m >= 1");
  }
  const double p_one = std::exp(-static_cast<double>(horizon) * std::log(actions));
  if (p_one >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(samples) * std::log1p(-p_one));
}

namespace {

bool RollOut(const env::NChainSpec& spec, const std::vector<int>& seq) {
  int s = 0;
  for (int a : seq) {
    const env::NChainTransition t = env::NChainStep(spec, s, a);
    if (t.reward > 0.0) return true;
    if (t.terminated) return false;
    s = t.next_state;
  }
  return false;
}

// A^n if it fits in int64, else -1.
int64_t SequenceCount(int actions, int horizon) {
  int64_t c = 1;
  for (int i = 0; i < horizon; ++i) {
    if (c > (int64_t{1} << 62) / actions) return -1;
    c *= actions;
  }
  return c;
}

}  // namespace

SearchSimulation SimulateRandomSearch(const SearchFailureQuery& query, Rng& rng,
                                      bool exhaustive) {
  query.Validate();
  SearchSimulation out;
  out.trials = query.trials;
  out.closed_form = SearchSuccessProbability(query.actions, query.horizon, query.samples);

  if (query.horizon == 0) {
    // The empty sequence is the rewarding one by convention.
    out.successes = query.trials;
  } else {
    env::NChainSpec spec;
    spec.n = query.horizon + 1;
    spec.actions = query.actions;
    spec.Validate();
    const int64_t count = SequenceCount(query.actions, query.horizon);
    std::vector<int> seq(query.horizon);
    for (int64_t t = 0; t < query.trials; ++t) {
      bool found = false;
      if (exhaustive && count > 0 && query.samples >= count) {
        found = true;  // every sequence is tried, including all-a_0
      } else if (exhaustive && count > 0) {
        // Floyd's sampling of distinct sequence indices.
        std::unordered_set<int64_t> chosen;
        for (int64_t j = count - query.samples; j < count && !found; ++j) {
          int64_t v = rng.UniformInt(j + 1);
          if (!chosen.insert(v).second) {
            v = j;
            chosen.insert(v);
          }
          int64_t code = v;
          for (int i = 0; i < query.horizon; ++i) {
            seq[i] = static_cast<int>(code % query.actions);
            code /= query.actions;
          }
          found = RollOut(spec, seq);
        }
      } else {
        for (int64_t j = 0; j < query.samples && !found; ++j) {
          for (int i = 0; i < query.horizon; ++i) {
            seq[i] = static_cast<int>(rng.UniformInt(query.actions));
          }
          found = RollOut(spec, seq);
        }
      }
      if (found) ++out.successes;
    }
  }

  const double n = static_cast<double>(out.trials);
  out.rate = static_cast<double>(out.successes) / n;
  out.sigma = std::sqrt(out.closed_form * (1.0 - out.closed_form) / n);
  const double z = 1.959963984540054;
  const double denom = 1.0 + z * z / n;
  const double center = (out.rate + z * z / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(out.rate * (1.0 - out.rate) / n + z * z / (4.0 * n * n)) / denom;
  out.ci_low = std::max(0.0, center - half);
  out.ci_high = std::min(1.0, center + half);
  return out;
}

}  // namespace mrsq::analysis
