// Seeded random streams. Every trial or sample gets its own generator derived
// from a root seed, so results never depend on scheduling.
#pragma once

#include "squeeze_lab/core.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace squeeze {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed number `index` of `root`.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return splitmix64(splitmix64(root) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// SplitMix64 as a UniformRandomBitGenerator; tiny state, cheap to create per sample.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
template <typename Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Rng>
double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Standard normal by Box-Muller (one draw per call, deterministic).
template <typename Rng>
double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

template <typename Rng>
Vector gaussian_vector(Rng& rng, Eigen::Index dim) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = standard_normal(rng);
  return v;
}

template <typename Rng>
Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = standard_normal(rng);
  return m;
}

/// Uniform point of the open ball B^dim(radius): Gaussian direction, radius U^(1/dim).
template <typename Rng>
Vector uniform_ball_point(Rng& rng, Eigen::Index dim, double radius = 1.0) {
  Vector g = gaussian_vector(rng, dim);
  double n = g.norm();
  while (n == 0.0) {
    g = gaussian_vector(rng, dim);
    n = g.norm();
  }
  const double r = radius * std::pow(uniform01(rng), 1.0 / static_cast<double>(dim));
  return g * (r / n);
}

}  // namespace squeeze
