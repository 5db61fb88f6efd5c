#pragma once

#include <array>
#include <optional>
#include <vector>

#include "decoy/protocol.hpp"

namespace decoy {

/// Per-intensity observations for one basis, aligned with the IntensitySet.
struct BasisStats {
  std::vector<double> gain;              ///< Q_{B,mu_i}
  std::vector<double> error_gain;        ///< Q_{B,mu_i} E_{B,mu_i}
  std::vector<double> delta_gain;        ///< Hoeffding half-width on Q
  std::vector<double> delta_error_gain;  ///< Hoeffding half-width on QE
};

struct ObservedStats {
  std::array<BasisStats, 2> basis;
  double s_x = 0.0;  ///< bits measured in X (= raw key length)
  double s_z = 0.0;

  BasisStats& operator[](Basis b) { return basis[static_cast<int>(b)]; }
  const BasisStats& operator[](Basis b) const { return basis[static_cast<int>(b)]; }
  std::size_t size() const { return basis[0].gain.size(); }
};

/// Estimated channel quantities consumed by the key rate.
struct BoundSet {
  double y_x0_lower = 0.0;
  double y_x1_lower = 0.0;
  double y_z0_lower = 0.0;
  double y_z1_lower = 0.0;
  double y1e1_z_upper = 0.0;
  double e_z1_upper = 0.5;
  /// Empty when the finite-size phase-error inflation is ill-defined.
  std::optional<double> e_p_upper;
};

/// Delta Q_{B,mu_i} = (<Q_B> / p_i) sqrt(ln(1/failure_prob) / (2 s_B)).
double hoeffding_delta_gain(const IntensityProfile& profile, double mean_gain, std::size_t i, double s_b,
                            double failure_prob);

/// Delta(QE)_{Z,mu_i} = (1 / p_i) sqrt(<Q_Z><QE_Z> ln(1/failure_prob) / (2 s_Z)).
double hoeffding_delta_error_gain(const IntensityProfile& profile, double mean_gain, double mean_error_gain,
                                  std::size_t i, double s_z, double failure_prob);

/// Attach s_X, s_Z and the Hoeffding half-widths to exact gains, charging
/// each observable eps_sec / chi(k). Asymptotic mode zeroes every delta.
ObservedStats with_fluctuations(ObservedStats gains, const IntensityProfile& profile, const ProtocolParams& params,
                                double eps_sec);

/// The classic three-intensity estimates for one basis. Requires k = 3 and
/// mu_1 > mu_2 + mu_3. The Y_1 bound uses the Y_0 lower bound in place of Y_0.
struct BaselineBounds {
  double y0_lower = 0.0;
  double y1_lower = 0.0;
  double y1e1_upper = 0.0;
};
BaselineBounds baseline_bounds(const BasisStats& stats, const IntensitySet& intensities);

/// Number of smallest intensities feeding each estimator: 2floor(k/2) for Y_0
/// and Y_1 e_1, 2floor((k-1)/2)+1 for Y_1. Those parities make every
/// truncation coefficient C_{m,j} favour the bound direction, so unknown
/// high-photon yields can be set to zero.
std::size_t yield_subset_size(std::size_t k, int m);
std::size_t error_product_subset_size(std::size_t k);

/// Inverted estimate of Y_m from the n smallest intensities with the
/// unobserved high-photon terms set to `fill` and no fluctuation terms.
/// With fill = 0 and a channel whose Y_j vanish for j >= n this is exact.
double inversion_estimate(std::span<const double> gains, const IntensitySet& intensities, std::size_t n, int m,
                          double fill = 0.0);

/// Lower bound on Y_{B,m}, m in {0, 1}, clamped to [0, 1].
///
/// Each gain is moved by its delta against the sign of its inverse-matrix
/// weight. For k = 2 no odd subset of at least two intensities exists, so the
/// Y_1 bound uses both intensities and fills the high-photon yields with 1.
double generalized_yield_lower(const ObservedStats& stats, const IntensitySet& intensities, int m, Basis basis);

/// Upper bound on Y_{Z,1} e_{Z,1}, clamped to [0, 1/2].
double generalized_error_product_upper(const ObservedStats& stats, const IntensitySet& intensities);

/// gamma(a, b, c, d) = sqrt((c+d)(1-b)b / (cd) * ln((c+d) / (2 pi c d (1-b) b a^2))).
/// Empty when the logarithm's argument is <= 1: no inflation exists at that
/// failure probability.
std::optional<double> gamma_bar(double a, double b, double c, double d);

/// e_p <= e_Z1 + gamma(failure_prob, e_Z1, s_Z Y_Z1 <mu e^-mu> / <Q_Z>, s_X Y_X1 <mu e^-mu> / <Q_X>),
/// clamped to 1/2, using the lower bounds on Y_1. Asymptotic mode returns e_Z1.
/// 1/2 when either single-photon yield bound is zero; empty when gamma is
/// ill-defined.
std::optional<double> phase_error_upper(const BoundSet& partial, const IntensityProfile& profile,
                                        const ObservedStats& stats, double failure_prob, KeyMode mode);

/// All bounds for one configuration. `stats` must already carry its deltas.
BoundSet compute_bounds(const ObservedStats& stats, const IntensityProfile& profile, const ProtocolParams& params,
                        double eps_sec);

}  // namespace decoy
