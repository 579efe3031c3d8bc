#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace polynet {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent streams from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix_seed(seed, index));
}

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng, double mean = 0.0, double stddev = 1.0) {
  return std::normal_distribution<double>(mean, stddev)(rng);
}

inline Eigen::VectorXd uniform_in_box(Rng& rng, const Eigen::VectorXd& lo,
                                      const Eigen::VectorXd& hi) {
  Eigen::VectorXd x(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) x[i] = uniform(rng, lo[i], hi[i]);
  return x;
}

inline Eigen::VectorXd random_unit_vector(Rng& rng, int dim) {
  Eigen::VectorXd u(dim);
  do {
    for (int i = 0; i < dim; ++i) u[i] = gaussian(rng);
  } while (u.norm() < 1e-12);
  return u.normalized();
}

}  // namespace polynet
