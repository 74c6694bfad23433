#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library routine it is used to check.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dopsim/polcore.hpp"
#include "dopsim/random.hpp"

namespace oracle {

using C = std::complex<double>;
using M2 = std::array<std::array<C, 2>, 2>;
using M4 = std::array<std::array<C, 4>, 4>;

inline M2 pauli(int j) {
  switch (j) {
    case 1: return {{{0.0, 1.0}, {1.0, 0.0}}};
    case 2: return {{{C{0, 0}, C{0, -1}}, {C{0, 1}, C{0, 0}}}};
    default: return {{{1.0, 0.0}, {0.0, -1.0}}};
  }
}

/// (1 + M.sigma)/2 assembled from explicit Pauli matrices.
inline M2 density(double m1, double m2, double m3) {
  M2 rho{};
  const double m[3] = {m1, m2, m3};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      C acc = r == c ? 1.0 : 0.0;
      for (int j = 1; j <= 3; ++j) acc += m[j - 1] * pauli(j)[r][c];
      rho[r][c] = 0.5 * acc;
    }
  }
  return rho;
}

inline M2 as_m2(const dopsim::DensityMatrix& d) { return {{{d(0, 0), d(0, 1)}, {d(1, 0), d(1, 1)}}}; }

/// <psi| rho_a (x) rho_b |psi> with psi_{ij} amplitudes over {H,V}x{H,V}.
inline double sandwich(const M2& a, const M2& b, const std::array<std::array<C, 2>, 2>& psi) {
  C acc = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) acc += std::conj(psi[i][j]) * a[i][k] * b[j][l] * psi[k][l];
  return acc.real();
}

inline double singlet_sandwich(const M2& a, const M2& b) {
  const double s = 1.0 / std::numbers::sqrt2;
  return sandwich(a, b, {{{0.0, s}, {-s, 0.0}}});
}

/// Uniform point in the unit ball.
inline dopsim::Vec3 random_ball(dopsim::Rng& rng) {
  while (true) {
    dopsim::Vec3 v{2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
    if (dopsim::dot(v, v) <= 1.0) return v;
  }
}

/// Uniform point on the unit sphere (normalized Gaussian).
inline dopsim::Vec3 random_unit(dopsim::Rng& rng) {
  while (true) {
    dopsim::Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = std::sqrt(dopsim::dot(v, v));
    if (n > 1e-6) return (1.0 / n) * v;
  }
}

/// Haar-ish random SU(2) element from a random unit quaternion.
inline std::array<C, 4> random_su2(dopsim::Rng& rng) {
  double q[4];
  double n = 0;
  for (double& x : q) {
    x = rng.normal();
    n += x * x;
  }
  n = std::sqrt(n);
  for (double& x : q) x /= n;
  return {C{q[0], q[1]}, C{q[2], q[3]}, C{-q[2], q[3]}, C{q[0], -q[1]}};
}

/// Asymptotic Kolmogorov p-value for statistic D on n samples.
inline double ks_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(p, 0.0, 1.0);
}

inline double normal_cdf(double x, double mean, double sigma) {
  return 0.5 * std::erfc(-(x - mean) / (sigma * std::numbers::sqrt2));
}

}  // namespace oracle
