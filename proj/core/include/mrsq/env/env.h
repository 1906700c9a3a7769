#ifndef MRSQ_ENV_ENV_H_
#define MRSQ_ENV_ENV_H_

#include <memory>
#include <string>
#include <vector>

#include "mrsq/common/rng.h"
#include "mrsq/common/types.h"

namespace mrsq::env {

// Targets bootstrap iff !terminated. An environment never reports both flags.
struct StepResult {
  Vector observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  // Discrete environments take a relaxed action vector and execute its argmax.
  virtual bool discrete() const { return false; }
  virtual int max_episode_steps() const = 0;

  virtual Vector Reset(Rng& rng) = 0;
  // Actions are clipped to [-1, 1] per dimension.
  virtual StepResult Step(const Vector& action) = 0;
  virtual Vector Observe() const = 0;
  int episode_step() const { return episode_step_; }

  // Simulator snapshot (physical state plus episode step). The base class
  // throws UnsupportedFeature.
  virtual bool supports_save_restore() const { return false; }
  virtual std::vector<double> SaveState() const;
  virtual void RestoreState(const std::vector<double>& state);

  virtual std::unique_ptr<Environment> Clone() const = 0;

 protected:
  // Advances the step counter and sets `truncated` at the time limit.
  void FinishStep(StepResult& result);
  int episode_step_ = 0;
};

Vector ClipAction(const Vector& action);
// One-hot of the argmax (first index on ties).
Vector OneHotArgmax(const Vector& relaxed);
int Argmax(const Vector& v);

}  // namespace mrsq::env

#endif  // MRSQ_ENV_ENV_H_
