#include "mrsq/harness/evaluate.h"

#include "mrsq/common/errors.h"

namespace mrsq::harness {

EvalResult Evaluate(analysis::ActingAgent& actor, const env::Environment& env, int episodes,
                    Rng& rng) {
  if (episodes < 1) throw ConfigError("evaluate: episodes must be >= 1");
  auto e = env.Clone();
  Rng env_rng = rng.Derive("env");
  Rng act_rng = rng.Derive("act");
  EvalResult out;
  for (int ep = 0; ep < episodes; ++ep) {
    Vector obs = e->Reset(env_rng);
    actor.BeginEpisode();
    double ret = 0.0;
    int len = 0;
    while (true) {
      const env::StepResult r = e->Step(actor.Act(obs, act_rng));
      ret += r.reward;
      ++len;
      if (r.terminated || r.truncated) break;
      obs = r.observation;
    }
    out.returns.push_back(ret);
    out.lengths.push_back(len);
    out.mean_return += ret;
    out.mean_length += len;
  }
  out.mean_return /= episodes;
  out.mean_length /= episodes;
  return out;
}

}  // namespace mrsq::harness
