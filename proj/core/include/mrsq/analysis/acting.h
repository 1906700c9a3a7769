#ifndef MRSQ_ANALYSIS_ACTING_H_
#define MRSQ_ANALYSIS_ACTING_H_

#include <memory>

#include "mrsq/common/rng.h"
#include "mrsq/common/types.h"
#include "mrsq/env/nchain.h"
#include "mrsq/plan/planning_model.h"

namespace mrsq::analysis {

// An acting policy with a value estimate, as seen by evaluation and the
// diagnostics. Clones are independent (own planner state).
class ActingAgent {
 public:
  virtual ~ActingAgent() = default;
  // Clears per-episode state such as the planner warm start.
  virtual void BeginEpisode() {}
  virtual Vector Act(const Vector& obs, Rng& rng) = 0;
  virtual double ValueEstimate(const Vector& obs, const Vector& action) const = 0;
  virtual std::unique_ptr<ActingAgent> Clone() const = 0;
  // Null when the agent has no latent model.
  virtual const plan::PlanningModel* planning_model() const { return nullptr; }
};

class RandomActor : public ActingAgent {
 public:
  RandomActor(int action_dim, bool discrete) : action_dim_(action_dim), discrete_(discrete) {}
  Vector Act(const Vector& obs, Rng& rng) override;
  double ValueEstimate(const Vector&, const Vector&) const override { return 0.0; }
  std::unique_ptr<ActingAgent> Clone() const override {
    return std::make_unique<RandomActor>(*this);
  }

 private:
  int action_dim_;
  bool discrete_;
};

// Always advances; reports Q* as its value estimate.
class NChainOracleActor : public ActingAgent {
 public:
  explicit NChainOracleActor(env::NChainSpec spec) : spec_(spec) {}
  Vector Act(const Vector& obs, Rng& rng) override;
  double ValueEstimate(const Vector& obs, const Vector& action) const override;
  std::unique_ptr<ActingAgent> Clone() const override {
    return std::make_unique<NChainOracleActor>(*this);
  }

 private:
  env::NChainSpec spec_;
};

}  // namespace mrsq::analysis

#endif  // MRSQ_ANALYSIS_ACTING_H_
