#include "mrsq/nn/finite_diff.h"

#include <algorithm>
#include <cmath>

namespace mrsq::nn {

Gradients FiniteDiffGradient(const ScalarFn& f, const ParameterStore& store, double eps) {
  ParameterStore work = store;
  Gradients g(store);
  for (int id = 0; id < work.size(); ++id) {
    Matrix& v = work.value(id);
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      const double saved = v.data()[k];
      v.data()[k] = saved + eps;
      const double up = f(work);
      v.data()[k] = saved - eps;
      const double down = f(work);
      v.data()[k] = saved;
      g[id].data()[k] = (up - down) / (2.0 * eps);
    }
  }
  return g;
}

double RelativeError(const Gradients& a, const Gradients& b) {
  double diff = 0.0;
  for (int i = 0; i < a.size(); ++i) diff += (a[i] - b[i]).squaredNorm();
  const double scale = std::max(a.Norm(), b.Norm());
  if (scale == 0.0) return std::sqrt(diff);
  return std::sqrt(diff) / scale;
}

double RelativeError(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  const double diff = (a - b).norm();
  return scale == 0.0 ? diff : diff / scale;
}

}  // namespace mrsq::nn
