#include "mrsq/value/td.h"

#include "mrsq/common/errors.h"

namespace mrsq::value {

void TdConfig::Validate() const {
  if (horizon < 1) throw ConfigError("td: horizon must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("td: gamma must be in [0, 1]");
  if (target_noise_std < 0 || target_noise_clip < 0) {
    throw ConfigError("td: target noise parameters must be non-negative");
  }
  if (target_update_period < 1) throw ConfigError("td: target update period must be >= 1");
}

double NStepTarget(std::span<const double> rewards, bool terminated, double gamma,
                   double bootstrap_value) {
  double g = 1.0;
  double total = 0.0;
  for (double r : rewards) {
    total += g * r;
    g *= gamma;
  }
  if (!terminated) total += g * bootstrap_value;
  return total;
}

}  // namespace mrsq::value
