#include "mrsq/nn/optim.h"

#include <cmath>

#include "mrsq/common/errors.h"

namespace mrsq::nn {

void AdamWStep(ParameterStore& store, const Gradients& grads, const AdamWOptions& opt) {
  if (grads.size() != store.size()) throw ConfigError("AdamWStep: gradient count mismatch");
  if (!grads.AllFinite()) throw TrainingFault("AdamWStep: non-finite gradient");
  const int64_t t = store.step() + 1;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(t));
  for (int i = 0; i < store.size(); ++i) {
    Parameter& p = store[i];
    const Matrix& g = grads[i];
    p.value *= 1.0 - opt.lr * opt.weight_decay;
    p.m = opt.beta1 * p.m + (1.0 - opt.beta1) * g;
    p.v = opt.beta2 * p.v + (1.0 - opt.beta2) * g.cwiseAbs2();
    p.value.array() -= opt.lr * (p.m.array() / bc1) /
                       ((p.v.array() / bc2).sqrt() + opt.eps);
  }
  store.set_step(t);
}

double ClipGradNorm(Gradients& grads, double max_norm) {
  const double norm = grads.Norm();
  if (norm > max_norm) grads.Scale(max_norm / norm);
  return norm;
}

}  // namespace mrsq::nn
