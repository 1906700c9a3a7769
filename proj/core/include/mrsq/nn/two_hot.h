#ifndef MRSQ_NN_TWO_HOT_H_
#define MRSQ_NN_TWO_HOT_H_

#include "mrsq/common/types.h"

namespace mrsq::nn {

double Symlog(double x);
double Symexp(double x);

// Categorical reward encoding: bins are evenly spaced in symlog space, so a
// [-10, 10] bin range covers rewards of roughly +-22k.
class TwoHot {
 public:
  explicit TwoHot(int bins = 65, double lo = -10.0, double hi = 10.0);

  // Two adjacent bins share the mass; rewards beyond the range are clamped.
  // Throws InputError for non-finite rewards.
  RowVector Encode(double reward) const;
  Matrix EncodeBatch(const Vector& rewards) const;

  double DecodeProbs(const RowVector& probs) const;
  double Decode(const RowVector& logits) const;
  Vector DecodeRows(const Matrix& logits) const;

  int bins() const { return bins_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const RowVector& centers() const { return centers_; }
  // Width of a bin in reward space around `reward`.
  double LocalQuantum(double reward) const;

 private:
  int bins_;
  double lo_;
  double hi_;
  double step_;
  RowVector centers_;
};

}  // namespace mrsq::nn

#endif  // MRSQ_NN_TWO_HOT_H_
