#ifndef MRSQ_NN_FINITE_DIFF_H_
#define MRSQ_NN_FINITE_DIFF_H_

#include <functional>

#include "mrsq/nn/params.h"

namespace mrsq::nn {

using ScalarFn = std::function<double(const ParameterStore&)>;

// Central differences, one parameter scalar at a time. Test oracle only:
// cost is two evaluations of `f` per scalar.
Gradients FiniteDiffGradient(const ScalarFn& f, const ParameterStore& store,
                             double eps = 1e-5);

// ||a - b|| / max(||a||, ||b||), with 0 when both vanish.
double RelativeError(const Gradients& a, const Gradients& b);
double RelativeError(const Matrix& a, const Matrix& b);

}  // namespace mrsq::nn

#endif  // MRSQ_NN_FINITE_DIFF_H_
