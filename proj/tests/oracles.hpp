#pragma once

// Reference computations used only by the tests. Deliberately naive: dense
// long-double Gauss-Jordan inversion, explicit series and exhaustive sign
// enumeration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<long double>>;

inline long double factorial(int n) {
  long double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// M_{ij} = mu_i^j / j!
inline Matrix photon_matrix(std::span<const double> mu) {
  const std::size_t n = mu.size();
  Matrix m(n, std::vector<long double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = std::pow(static_cast<long double>(mu[i]), j) / factorial(j);
  return m;
}

inline Matrix invert(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<long double>(n, 0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0) throw std::runtime_error("singular");
    std::swap(a[col], a[piv]);
    std::swap(inv[col], inv[piv]);
    const long double d = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const long double f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

// Coefficient of Y_j (j >= n) in the inverted estimate of Y_m.
inline long double truncation(std::span<const double> mu, int m, int j) {
  const Matrix inv = invert(photon_matrix(mu));
  long double c = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    c -= inv[m][i] * std::pow(static_cast<long double>(mu[i]), j) / factorial(j);
  return c;
}

// Worst case of the inverted estimate over every sign pattern of the
// observation errors and every unknown Y_j in [0, 1] for n <= j < 80.
// `mu` and `observed`, `delta` are the subset actually inverted.
inline long double worst_case(std::span<const double> mu, std::span<const double> observed,
                              std::span<const double> delta, int m, bool lower) {
  const std::size_t n = mu.size();
  const Matrix inv = invert(photon_matrix(mu));
  long double best = lower ? std::numeric_limits<long double>::infinity()
                           : -std::numeric_limits<long double>::infinity();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    long double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double q = observed[i] + (((mask >> i) & 1u) ? delta[i] : -delta[i]);
      s += inv[m][i] * q * std::exp(static_cast<long double>(mu[i]));
    }
    best = lower ? std::min(best, s) : std::max(best, s);
  }
  for (int j = static_cast<int>(n); j < 80; ++j) {
    long double c = 0;
    for (std::size_t i = 0; i < n; ++i)
      c -= inv[m][i] * std::pow(static_cast<long double>(mu[i]), j) / factorial(j);
    best += lower ? std::min<long double>(c, 0) : std::max<long double>(c, 0);
  }
  return best;
}

}  // namespace oracle
