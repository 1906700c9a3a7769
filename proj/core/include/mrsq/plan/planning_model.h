#ifndef MRSQ_PLAN_PLANNING_MODEL_H_
#define MRSQ_PLAN_PLANNING_MODEL_H_

#include "mrsq/common/types.h"

namespace mrsq::plan {

enum class ValueReduction { kMin, kMean };

struct LatentStep {
  Matrix z_next;
  Vector reward;
  Vector terminal_prob;
};

// What the planner needs from an agent. Actions are relaxed vectors in
// [-1, 1]^A; discrete implementations act on their argmax.
class PlanningModel {
 public:
  virtual ~PlanningModel() = default;
  virtual int action_dim() const = 0;
  virtual Matrix Encode(const Matrix& obs) const = 0;
  virtual LatentStep Step(const Matrix& z, const Matrix& actions) const = 0;
  virtual Matrix Policy(const Matrix& z) const = 0;
  // Ensemble-reduced Q at (z, actions).
  virtual Vector Value(const Matrix& z, const Matrix& actions, ValueReduction reduction) const = 0;
};

}  // namespace mrsq::plan

#endif  // MRSQ_PLAN_PLANNING_MODEL_H_
