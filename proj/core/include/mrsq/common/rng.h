#ifndef MRSQ_COMMON_RNG_H_
#define MRSQ_COMMON_RNG_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "mrsq/common/types.h"

namespace mrsq {

// Seeded 64-bit generator. Independent streams are derived from a master
// seed and a stream name, so adding a consumer never shifts another stream.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0);
  Rng(uint64_t master_seed, std::string_view stream);

  // Derives a child stream; does not advance this generator.
  Rng Derive(std::string_view stream) const;
  Rng Derive(uint64_t index) const;

  uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n).
  int64_t UniformInt(int64_t n);
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }
  double Gumbel();

  Matrix NormalMatrix(int rows, int cols);

  uint64_t seed() const { return seed_; }

  // Full engine state as text; round-trips bitwise.
  std::string Serialize() const;
  void Deserialize(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_;
  }

 private:
  uint64_t seed_ = 0;
  std::mt19937_64 engine_;
};

uint64_t MixSeed(uint64_t seed, std::string_view stream);

}  // namespace mrsq

#endif  // MRSQ_COMMON_RNG_H_
