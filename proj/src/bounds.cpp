#include "decoy/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "decoy/error.hpp"
#include "decoy/polymath.hpp"

namespace decoy {
namespace {

enum class Sense { Lower, Upper };

double sign_of(double x) { return (x > 0.0) - (x < 0.0); }

// Sign family of C_{m,j} (j >= n) for an n-element subset: C_{0,j} >= 0 and
// C_{1,j} < 0 when n is even, the reverse when n is odd.
double truncation_sign(std::size_t n, int m) {
  const bool even = (n % 2 == 0);
  if (m == 0) return even ? 1.0 : -1.0;
  return even ? -1.0 : 1.0;
}

// Bound on Y_m (or Y_m e_m) from the n smallest intensities. Fluctuations are
// charged against the sign of each inverse-matrix weight; the unknown
// high-photon terms are set to 0 when C_{m,j} already points in the bound's
// direction and to 1 otherwise.
double inversion_bound(std::span<const double> observed, std::span<const double> delta,
                       const IntensitySet& intensities, std::size_t n, int m, Sense sense) {
  const IntensitySet subset = intensities.smallest(n);
  const std::size_t offset = intensities.size() - n;
  const std::vector<double> row = m_inverse_row(subset.values(), m);
  const double against = (sense == Sense::Lower) ? -1.0 : 1.0;

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double worst = observed[offset + i] + against * sign_of(row[i]) * delta[offset + i];
    sum += row[i] * worst * std::exp(subset[i]);
  }

  const double c_sign = truncation_sign(n, m);
  const bool zero_fill_valid = (sense == Sense::Lower) ? c_sign > 0.0 : c_sign < 0.0;
  if (!zero_fill_valid) {
    // sum_{j >= n} C_{m,j} * 1 = -sum_i (M^{-1})_{m,i} sum_{j >= n} mu_i^j / j!
    for (std::size_t i = 0; i < n; ++i) sum -= row[i] * exp_tail(subset[i], static_cast<int>(n));
  }
  return sum;
}

void check_stats(const BasisStats& stats, std::size_t k) {
  require(stats.gain.size() == k && stats.error_gain.size() == k && stats.delta_gain.size() == k &&
              stats.delta_error_gain.size() == k,
          "observed statistics do not match the number of intensities");
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

double hoeffding_delta_gain(const IntensityProfile& profile, double mean_gain, std::size_t i, double s_b,
                            double failure_prob) {
  require(i < profile.size(), "intensity index out of range");
  require(s_b > 0.0, "sample count must be positive");
  require(failure_prob > 0.0 && failure_prob < 1.0, "failure probability must lie in (0, 1)");
  const double p = profile.probability(i);
  require(p > 0.0, "intensity has zero probability");
  return mean_gain / p * std::sqrt(std::log(1.0 / failure_prob) / (2.0 * s_b));
}

double hoeffding_delta_error_gain(const IntensityProfile& profile, double mean_gain, double mean_error_gain,
                                  std::size_t i, double s_z, double failure_prob) {
  require(i < profile.size(), "intensity index out of range");
  require(s_z > 0.0, "sample count must be positive");
  require(failure_prob > 0.0 && failure_prob < 1.0, "failure probability must lie in (0, 1)");
  require(mean_error_gain <= mean_gain, "mean error gain exceeds mean gain");
  const double p = profile.probability(i);
  require(p > 0.0, "intensity has zero probability");
  return std::sqrt(mean_gain * mean_error_gain * std::log(1.0 / failure_prob) / (2.0 * s_z)) / p;
}

ObservedStats with_fluctuations(ObservedStats gains, const IntensityProfile& profile, const ProtocolParams& params,
                                double eps_sec) {
  const std::size_t k = profile.size();
  for (auto& b : gains.basis) {
    require(b.gain.size() == k && b.error_gain.size() == k, "gains do not match the number of intensities");
    b.delta_gain.assign(k, 0.0);
    b.delta_error_gain.assign(k, 0.0);
  }
  if (params.mode == KeyMode::Asymptotic) {
    gains.s_x = gains.s_z = INFINITY;
    return gains;
  }
  require(eps_sec > 0.0 && eps_sec < 1.0, "eps_sec must lie in (0, 1)");
  const double p_x = profile.p_x();
  gains.s_x = params.s_x;
  gains.s_z = (1.0 - p_x) * (1.0 - p_x) / (p_x * p_x) * params.s_x;
  const double failure = eps_sec / chi(static_cast<int>(k), params.chi_policy);

  auto& x = gains[Basis::X];
  auto& z = gains[Basis::Z];
  const double mean_qx = profile.average(x.gain);
  const double mean_qz = profile.average(z.gain);
  const double mean_qex = profile.average(x.error_gain);
  const double mean_qez = profile.average(z.error_gain);
  for (std::size_t i = 0; i < k; ++i) {
    x.delta_gain[i] = hoeffding_delta_gain(profile, mean_qx, i, gains.s_x, failure);
    z.delta_gain[i] = hoeffding_delta_gain(profile, mean_qz, i, gains.s_z, failure);
    x.delta_error_gain[i] = hoeffding_delta_error_gain(profile, mean_qx, mean_qex, i, gains.s_x, failure);
    z.delta_error_gain[i] = hoeffding_delta_error_gain(profile, mean_qz, mean_qez, i, gains.s_z, failure);
  }
  return gains;
}

BaselineBounds baseline_bounds(const BasisStats& stats, const IntensitySet& intensities) {
  require(intensities.size() == 3, "the baseline estimator needs exactly three intensities");
  check_stats(stats, 3);
  const double mu1 = intensities[0], mu2 = intensities[1], mu3 = intensities[2];
  if (!(mu1 > mu2 + mu3)) {
    fail(ErrorKind::Configuration, "the baseline estimator requires mu_1 > mu_2 + mu_3");
  }
  const auto& q = stats.gain;
  const auto& dq = stats.delta_gain;
  const auto& qe = stats.error_gain;
  const auto& dqe = stats.delta_error_gain;

  const double y0 = (mu2 * (q[2] - dq[2]) * std::exp(mu3) - mu3 * (q[1] + dq[1]) * std::exp(mu2)) / (mu2 - mu3);
  const double y1e1 = ((qe[1] + dqe[1]) * std::exp(mu2) - (qe[2] - dqe[2]) * std::exp(mu3)) / (mu2 - mu3);
  const double y1 = mu1 / (mu1 * (mu2 - mu3) - mu2 * mu2 + mu3 * mu3) *
                    ((q[1] - dq[1]) * std::exp(mu2) - (q[2] + dq[2]) * std::exp(mu3) +
                     (mu2 * mu2 - mu3 * mu3) / (mu1 * mu1) * (y0 - (q[0] + dq[0]) * std::exp(mu1)));

  return {clamp01(y0), clamp01(y1), std::clamp(y1e1, 0.0, 0.5)};
}

std::size_t yield_subset_size(std::size_t k, int m) {
  require(k >= 2, "at least two intensities are required");
  require(m == 0 || m == 1, "only Y_0 and Y_1 are bounded");
  if (m == 0) return 2 * (k / 2);
  const std::size_t odd = 2 * ((k - 1) / 2) + 1;
  return odd >= 2 ? odd : 2;
}

std::size_t error_product_subset_size(std::size_t k) {
  require(k >= 2, "at least two intensities are required");
  return 2 * (k / 2);
}

double inversion_estimate(std::span<const double> gains, const IntensitySet& intensities, std::size_t n, int m,
                          double fill) {
  require(gains.size() == intensities.size(), "gains do not match the number of intensities");
  const IntensitySet subset = intensities.smallest(n);
  const std::size_t offset = intensities.size() - n;
  const std::vector<double> row = m_inverse_row(subset.values(), m);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += row[i] * (gains[offset + i] * std::exp(subset[i]) - fill * exp_tail(subset[i], static_cast<int>(n)));
  }
  return sum;
}

double generalized_yield_lower(const ObservedStats& stats, const IntensitySet& intensities, int m, Basis basis) {
  const std::size_t k = intensities.size();
  if (k < 2) fail(ErrorKind::Configuration, "the generalized estimator needs at least two intensities");
  const BasisStats& b = stats[basis];
  check_stats(b, k);
  const std::size_t n = yield_subset_size(k, m);
  return clamp01(inversion_bound(b.gain, b.delta_gain, intensities, n, m, Sense::Lower));
}

double generalized_error_product_upper(const ObservedStats& stats, const IntensitySet& intensities) {
  const std::size_t k = intensities.size();
  if (k < 2) fail(ErrorKind::Configuration, "the generalized estimator needs at least two intensities");
  const BasisStats& z = stats[Basis::Z];
  check_stats(z, k);
  const std::size_t n = error_product_subset_size(k);
  return std::clamp(inversion_bound(z.error_gain, z.delta_error_gain, intensities, n, 1, Sense::Upper), 0.0, 0.5);
}

std::optional<double> gamma_bar(double a, double b, double c, double d) {
  require(a > 0.0 && a < 1.0, "gamma: failure probability must lie in (0, 1)");
  require(b > 0.0 && b < 1.0, "gamma: error rate must lie in (0, 1)");
  require(c > 0.0 && d > 0.0, "gamma: counts must be positive");
  const double spread = (1.0 - b) * b;
  const double argument = (c + d) / (2.0 * std::numbers::pi * c * d * spread * a * a);
  if (!(argument > 1.0)) return std::nullopt;
  return std::sqrt((c + d) * spread / (c * d) * std::log(argument));
}

std::optional<double> phase_error_upper(const BoundSet& partial, const IntensityProfile& profile,
                                        const ObservedStats& stats, double failure_prob, KeyMode mode) {
  // No single-photon evidence: assume the worst phase error.
  if (!(partial.y_z1_lower > 0.0)) return 0.5;
  const double e_z1 = std::min(0.5, partial.y1e1_z_upper / partial.y_z1_lower);
  if (mode == KeyMode::Asymptotic) return e_z1;
  // gamma -> 0 as b -> 0, so an error-free single-photon estimate is not inflated.
  if (e_z1 <= 0.0) return 0.0;

  const double single = profile.expectation([](double mu) { return mu * std::exp(-mu); });
  const double mean_qz = profile.average(stats[Basis::Z].gain);
  const double mean_qx = profile.average(stats[Basis::X].gain);
  if (!(mean_qz > 0.0 && mean_qx > 0.0)) return 0.5;
  const double c = stats.s_z * partial.y_z1_lower * single / mean_qz;
  const double d = stats.s_x * partial.y_x1_lower * single / mean_qx;
  if (!(c > 0.0 && d > 0.0)) return 0.5;
  const auto gamma = gamma_bar(failure_prob, e_z1, c, d);
  if (!gamma) return std::nullopt;
  return std::min(0.5, e_z1 + *gamma);
}

BoundSet compute_bounds(const ObservedStats& stats, const IntensityProfile& profile, const ProtocolParams& params,
                        double eps_sec) {
  const IntensitySet& mu = profile.intensities();
  const int k = static_cast<int>(mu.size());
  BoundSet out;
  if (params.bound_method == BoundMethod::Baseline) {
    const BaselineBounds x = baseline_bounds(stats[Basis::X], mu);
    const BaselineBounds z = baseline_bounds(stats[Basis::Z], mu);
    out.y_x0_lower = x.y0_lower;
    out.y_x1_lower = x.y1_lower;
    out.y_z0_lower = z.y0_lower;
    out.y_z1_lower = z.y1_lower;
    out.y1e1_z_upper = z.y1e1_upper;
  } else {
    out.y_x0_lower = generalized_yield_lower(stats, mu, 0, Basis::X);
    out.y_x1_lower = generalized_yield_lower(stats, mu, 1, Basis::X);
    out.y_z0_lower = generalized_yield_lower(stats, mu, 0, Basis::Z);
    out.y_z1_lower = generalized_yield_lower(stats, mu, 1, Basis::Z);
    out.y1e1_z_upper = generalized_error_product_upper(stats, mu);
  }
  out.e_z1_upper = out.y_z1_lower > 0.0 ? std::min(0.5, out.y1e1_z_upper / out.y_z1_lower) : 0.5;
  const double failure = params.mode == KeyMode::Asymptotic ? 0.5 : eps_sec / chi(k, params.chi_policy);
  out.e_p_upper = phase_error_upper(out, profile, stats, failure, params.mode);
  return out;
}

}  // namespace decoy
