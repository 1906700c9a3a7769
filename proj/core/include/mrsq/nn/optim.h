#ifndef MRSQ_NN_OPTIM_H_
#define MRSQ_NN_OPTIM_H_

#include "mrsq/nn/params.h"

namespace mrsq::nn {

struct AdamWOptions {
  double lr = 3e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Decoupled weight decay Adam. Throws TrainingFault and leaves the store
// untouched if any gradient is non-finite.
void AdamWStep(ParameterStore& store, const Gradients& grads, const AdamWOptions& opt);

// Rescales so the global L2 norm is at most `max_norm`. Returns the norm
// before clipping.
double ClipGradNorm(Gradients& grads, double max_norm);

}  // namespace mrsq::nn

#endif  // MRSQ_NN_OPTIM_H_
