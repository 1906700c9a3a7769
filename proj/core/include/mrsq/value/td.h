#ifndef MRSQ_VALUE_TD_H_
#define MRSQ_VALUE_TD_H_

#include <span>

namespace mrsq::value {

struct TdConfig {
  double gamma = 0.99;
  int horizon = 3;
  double target_noise_std = 0.2;
  double target_noise_clip = 0.3;
  int target_update_period = 250;

  void Validate() const;
};

// sum_j gamma^j r_j, plus gamma^J * bootstrap_value unless terminated.
double NStepTarget(std::span<const double> rewards, bool terminated, double gamma,
                   double bootstrap_value);

}  // namespace mrsq::value

#endif  // MRSQ_VALUE_TD_H_
