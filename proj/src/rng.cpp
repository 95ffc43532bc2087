#include "noisytr/rng.hpp"

#include <cmath>
#include <numbers>

namespace noisytr {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; 1 - u avoids log(0).
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  spare_ = rad * std::sin(ang);
  has_spare_ = true;
  return rad * std::cos(ang);
}

Vector Rng::normal_vector(int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = normal();
  return v;
}

Vector Rng::unit_vector(int n) {
  for (;;) {
    Vector v = normal_vector(n);
    const double nv = v.norm();
    if (nv > 1e-300) return v / nv;
  }
}

Vector Rng::ball_vector(int n, double radius) {
  const Vector dir = unit_vector(n);
  return radius * std::pow(uniform(), 1.0 / n) * dir;
}

}  // namespace noisytr
