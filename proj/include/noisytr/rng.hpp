#pragma once

#include <cstdint>
#include <random>

#include "noisytr/core.hpp"

namespace noisytr {

// Substream indices used to derive per-component seeds from a master seed.
// Changing these breaks bit-reproducibility of stored results.
enum class Stream : std::uint64_t {
  kZeroth = 1,
  kFirst = 2,
  kSecond = 3,
  kAdversary = 4,
  kMisc = 5,
};

// Seed for substream `index` of `master` (splitmix64 finalizer of a keyed
// combination). Replication r of an experiment uses
// derive_seed(master, kReplicationBase + r).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);
inline std::uint64_t derive_seed(std::uint64_t master, Stream s) {
  return derive_seed(master, static_cast<std::uint64_t>(s));
}
inline constexpr std::uint64_t kReplicationBase = 1000;

// mt19937_64 with hand-written variate generation, so draws do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  // +1 or -1 with equal probability.
  double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }
  double exponential(double rate);
  double normal();
  Vector normal_vector(int n);
  // Uniform on the unit sphere in R^n.
  Vector unit_vector(int n);
  // Uniform in the ball of radius `radius` in R^n.
  Vector ball_vector(int n, double radius);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace noisytr
