#ifndef MRSQ_COMMON_TYPES_H_
#define MRSQ_COMMON_TYPES_H_

#include <Eigen/Core>

namespace mrsq {

// Batched values are row-major: one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

}  // namespace mrsq

#endif  // MRSQ_COMMON_TYPES_H_
