#include "decoy/polymath.hpp"

#include <array>
#include <cmath>
#include <string>

#include "decoy/error.hpp"

namespace decoy {
namespace {

constexpr int kExactFactorialLimit = 20;

constexpr std::array<double, kExactFactorialLimit + 1> make_factorials() {
  std::array<double, kExactFactorialLimit + 1> f{};
  f[0] = 1.0;
  for (int n = 1; n <= kExactFactorialLimit; ++n) f[n] = f[n - 1] * n;
  return f;
}

constexpr auto kFactorials = make_factorials();

void check_row(std::span<const double> intensities, int m) {
  const auto k = static_cast<int>(intensities.size());
  require(k >= 1, "at least one intensity is required");
  require(m >= 0 && m < k, "photon number m=" + std::to_string(m) + " outside [0, " +
                                std::to_string(k - 1) + "]");
}

}  // namespace

double binary_entropy(double x) {
  require(x >= 0.0 && x <= 1.0, "binary_entropy argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double elementary_symmetric(std::span<const double> values, int degree) {
  require(degree >= 0, "negative polynomial degree");
  const auto n = static_cast<int>(values.size());
  if (degree > n) return 0.0;
  std::vector<double> e(static_cast<std::size_t>(degree) + 1, 0.0);
  e[0] = 1.0;
  int seen = 0;
  for (double x : values) {
    ++seen;
    for (int d = std::min(degree, seen); d >= 1; --d) e[d] += x * e[d - 1];
  }
  return e[degree];
}

double complete_homogeneous(std::span<const double> values, int degree) {
  require(degree >= 0, "negative polynomial degree");
  // h_d(x_1..x_n) = h_d(x_1..x_{n-1}) + x_n h_{d-1}(x_1..x_n)
  std::vector<double> h(static_cast<std::size_t>(degree) + 1, 0.0);
  h[0] = 1.0;
  for (double x : values) {
    for (int d = 1; d <= degree; ++d) h[d] += x * h[d - 1];
  }
  return h[degree];
}

double factorial(int n) {
  require(n >= 0, "factorial of a negative number");
  if (n <= kExactFactorialLimit) return kFactorials[n];
  return std::exp(log_factorial(n));
}

double log_factorial(int n) {
  require(n >= 0, "factorial of a negative number");
  if (n <= kExactFactorialLimit) return std::log(kFactorials[n]);
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double s_im(std::span<const double> intensities, std::size_t i, int m) {
  check_row(intensities, m);
  require(i < intensities.size(), "intensity index out of range");
  std::vector<double> others;
  others.reserve(intensities.size() - 1);
  for (std::size_t t = 0; t < intensities.size(); ++t) {
    if (t != i) others.push_back(intensities[t]);
  }
  const int k = static_cast<int>(intensities.size());
  return elementary_symmetric(others, k - m - 1);
}

double m_inverse_entry(std::span<const double> intensities, int m, std::size_t i) {
  const double s = s_im(intensities, i, m);
  const int k = static_cast<int>(intensities.size());
  double denominator = 1.0;
  for (std::size_t t = 0; t < intensities.size(); ++t) {
    if (t == i) continue;
    const double gap = intensities[i] - intensities[t];
    if (gap == 0.0) {
      fail(ErrorKind::Degenerate, "intensities " + std::to_string(i) + " and " + std::to_string(t) +
                                      " coincide; the inversion is singular");
    }
    denominator *= gap;
  }
  const double sign = ((k - m - 1) % 2 == 0) ? 1.0 : -1.0;
  return sign * s * factorial(m) / denominator;
}

std::vector<double> m_inverse_row(std::span<const double> intensities, int m) {
  check_row(intensities, m);
  std::vector<double> row(intensities.size());
  for (std::size_t i = 0; i < intensities.size(); ++i) row[i] = m_inverse_entry(intensities, m, i);
  return row;
}

double c_coefficient(std::span<const double> intensities, int m, int j) {
  check_row(intensities, m);
  const int k = static_cast<int>(intensities.size());
  require(j >= k, "truncation coefficients are defined for j >= k");
  const double log_jf = log_factorial(j);
  double sum = 0.0;
  for (std::size_t i = 0; i < intensities.size(); ++i) {
    const double mu = intensities[i];
    const double power = (mu == 0.0) ? 0.0 : std::exp(j * std::log(mu) - log_jf);
    sum += m_inverse_entry(intensities, m, i) * power;
  }
  return -sum;
}

double c1_closed_form(std::span<const double> intensities, int j) {
  const int k = static_cast<int>(intensities.size());
  require(k >= 1, "at least one intensity is required");
  require(j >= k, "truncation coefficients are defined for j >= k");
  double product = 1.0;
  for (double mu : intensities) product *= mu;
  if (product == 0.0) return 0.0;
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * product * complete_homogeneous(intensities, j - k) / factorial(j);
}

double poisson_weight(double mu, int m) {
  require(mu >= 0.0, "negative mean photon number");
  require(m >= 0, "negative photon count");
  if (mu == 0.0) return m == 0 ? 1.0 : 0.0;
  if (m <= kExactFactorialLimit) return std::pow(mu, m) * std::exp(-mu) / kFactorials[m];
  return std::exp(m * std::log(mu) - mu - log_factorial(m));
}

double exp_tail(double mu, int n) {
  require(mu >= 0.0, "negative mean photon number");
  require(n >= 0, "negative photon count");
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  // Summed upward from the first term; the ratio mu/(j+1) < 1 once j >= mu,
  // so the series converges geometrically for the intensities used here.
  double term = std::exp(n * std::log(mu) - log_factorial(n));
  double sum = 0.0;
  for (int j = n; j < n + 200; ++j) {
    sum += term;
    if (term < 1e-18 * sum) break;
    term *= mu / (j + 1);
  }
  return sum;
}

}  // namespace decoy
