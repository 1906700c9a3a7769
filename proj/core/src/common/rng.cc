#include "mrsq/common/rng.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "mrsq/common/errors.h"

namespace mrsq {

namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

uint64_t MixSeed(uint64_t seed, std::string_view stream) {
  // FNV-1a over the name, then mixed with the seed.
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return SplitMix64(SplitMix64(seed) ^ h);
}

Rng::Rng(uint64_t seed) : seed_(seed) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

Rng::Rng(uint64_t master_seed, std::string_view stream)
    : Rng(MixSeed(master_seed, stream)) {}

Rng Rng::Derive(std::string_view stream) const {
  return Rng(MixSeed(seed_, stream));
}

Rng Rng::Derive(uint64_t index) const {
  return Rng(SplitMix64(seed_ ^ SplitMix64(index + 1)));
}

double Rng::Uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int64_t Rng::UniformInt(int64_t n) {
  if (n <= 0) throw InputError("UniformInt: n must be positive");
  const uint64_t un = static_cast<uint64_t>(n);
  const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                         std::numeric_limits<uint64_t>::max() % un;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<int64_t>(x % un);
}

double Rng::Normal() {
  // Box-Muller without caching, so the state is just the engine.
  double u1 = Uniform();
  while (u1 <= 0.0) u1 = Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::Gumbel() {
  double u = Uniform();
  while (u <= 0.0) u = Uniform();
  return -std::log(-std::log(u));
}

Matrix Rng::NormalMatrix(int rows, int cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Normal();
  return m;
}

std::string Rng::Serialize() const {
  std::ostringstream os;
  os << seed_ << ' ' << engine_;
  return os.str();
}

void Rng::Deserialize(const std::string& state) {
  std::istringstream is(state);
  uint64_t seed = 0;
  std::mt19937_64 engine;
  is >> seed >> engine;
  if (!is) throw InputError("Rng::Deserialize: malformed state");
  seed_ = seed;
  engine_ = engine;
}

}  // namespace mrsq
