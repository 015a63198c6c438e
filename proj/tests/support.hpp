#pragma once

// Shared test scaffolding: closed-form Gaussian moments, seeded generators
// and a cache of spectral operators so each binary pays for a given
// eigendecomposition once.

#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <tuple>

#include "bilab/grid.hpp"
#include "bilab/params.hpp"

namespace bilab::test {

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// ∫_0^∞ r^k e^{-c r²} dr
inline double half_moment(double k, double c) { return std::tgamma((k + 1) / 2) / (2 * std::pow(c, (k + 1) / 2)); }

inline double sphere_area(int N) { return 2 * std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0); }

// Moments of u = e^{-a r²} in R^N, computed from Γ only.
struct GaussianMoments {
  int N;
  double a;

  double mass() const { return sphere_area(N) * half_moment(N - 1, 2 * a); }
  // u' = -2ar u
  double grad2() const { return sphere_area(N) * 4 * a * a * half_moment(N + 1, 2 * a); }
  // Δu = (4a²r² - 2aN) u
  double lap2() const {
    const double c = 2 * a;
    return sphere_area(N) * (16 * std::pow(a, 4) * half_moment(N + 3, c) -
                             16 * std::pow(a, 3) * N * half_moment(N + 1, c) +
                             4 * a * a * N * N * half_moment(N - 1, c));
  }
  double source(double b, double q) const { return sphere_area(N) * half_moment(N - 1 + b, a * (1 + q)); }
  // ‖r^{-1}u‖²
  double inverse_r2() const { return sphere_area(N) * half_moment(N - 3, 2 * a); }
};

inline const SpectralLaplacian& cached_op(int N, double R, int M,
                                          BasisAccuracy accuracy = BasisAccuracy::Refined) {
  using Key = std::tuple<int, double, int, int>;
  static std::map<Key, std::unique_ptr<SpectralLaplacian>> cache;
  auto& slot = cache[{N, R, M, static_cast<int>(accuracy)}];
  if (!slot) slot = std::make_unique<SpectralLaplacian>(build_grid(N, R, M), accuracy);
  return *slot;
}

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }
inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

// p/q with q in [1, max_den]
inline Scalar random_rational(int num_lo, int num_hi, int max_den) {
  const int den = uniform_int(1, max_den);
  return Scalar::ratio(uniform_int(num_lo * den, num_hi * den), den);
}

// White noise, deliberately rough: exercises every eigenmode.
inline RadialField random_field(const GridPtr& grid) {
  std::normal_distribution<double> n;
  RadialField u = RadialField::zeros(grid);
  for (int j = 0; j < u.size(); ++j) u.values[j] = Complex(n(rng()), n(rng()));
  return u;
}

// Smooth random data: a few Gaussians with random widths, centres and phases.
inline RadialField random_smooth_field(const GridPtr& grid, double scale = 1.0) {
  RadialField u = RadialField::zeros(grid);
  const double R = grid->radius();
  for (int k = 0; k < 3; ++k) {
    const double c = uniform(0.0, R / 4);
    const double w = uniform(0.5, 1.5) * R / 24;
    const Complex amp = scale * std::polar(uniform(0.2, 1.0), uniform(0.0, 2 * std::numbers::pi));
    for (int j = 0; j < u.size(); ++j) {
      const double x = (grid->nodes()[j] - c) / w;
      u.values[j] += amp * std::exp(-x * x);
    }
  }
  return u;
}

inline double l2(const RadialField& u) { return std::sqrt(mass(u)); }
inline double l2_diff(const RadialField& a, const RadialField& b) { return l2(a - b); }

} // namespace bilab::test
