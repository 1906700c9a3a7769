#include "mrsq/nn/two_hot.h"

#include <algorithm>
#include <cmath>

#include "mrsq/common/errors.h"
#include "mrsq/nn/layers.h"

namespace mrsq::nn {

double Symlog(double x) { return std::copysign(std::log1p(std::abs(x)), x); }
double Symexp(double x) { return std::copysign(std::expm1(std::abs(x)), x); }

TwoHot::TwoHot(int bins, double lo, double hi) : bins_(bins), lo_(lo), hi_(hi) {
  if (bins < 2 || !(hi > lo)) throw ConfigError("TwoHot: need bins >= 2 and hi > lo");
  step_ = (hi - lo) / (bins - 1);
  centers_.resize(bins);
  for (int i = 0; i < bins; ++i) centers_(i) = lo + i * step_;
}

RowVector TwoHot::Encode(double reward) const {
  if (!std::isfinite(reward)) throw InputError("TwoHot: non-finite reward");
  const double y = std::clamp(Symlog(reward), lo_, hi_);
  const double pos = (y - lo_) / step_;
  const int low = std::min(static_cast<int>(std::floor(pos)), bins_ - 2);
  const double upper_weight = pos - low;
  RowVector p = RowVector::Zero(bins_);
  p(low) = 1.0 - upper_weight;
  p(low + 1) = upper_weight;
  return p;
}

Matrix TwoHot::EncodeBatch(const Vector& rewards) const {
  Matrix out(rewards.size(), bins_);
  for (Eigen::Index i = 0; i < rewards.size(); ++i) out.row(i) = Encode(rewards(i));
  return out;
}

double TwoHot::DecodeProbs(const RowVector& probs) const {
  return Symexp(probs.dot(centers_));
}

double TwoHot::Decode(const RowVector& logits) const {
  return DecodeProbs(SoftmaxRows(logits));
}

Vector TwoHot::DecodeRows(const Matrix& logits) const {
  const Matrix p = SoftmaxRows(logits);
  Vector out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out(i) = Symexp(p.row(i).dot(centers_));
  return out;
}

double TwoHot::LocalQuantum(double reward) const {
  const double y = std::clamp(Symlog(reward), lo_, hi_);
  const double a = std::max(lo_, y - step_);
  const double b = std::min(hi_, y + step_);
  return std::max(std::abs(Symexp(y) - Symexp(a)), std::abs(Symexp(b) - Symexp(y)));
}

}  // namespace mrsq::nn
