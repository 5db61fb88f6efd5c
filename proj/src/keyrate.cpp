#include "decoy/keyrate.hpp"

#include <cmath>

#include "decoy/error.hpp"
#include "decoy/polymath.hpp"

namespace decoy {

KeyRate key_rate(const IntensityProfile& profile, const ProtocolParams& params, const BoundSet& bounds,
                 const ObservedStats& stats, double eps_sec) {
  if (!bounds.e_p_upper) return {0.0, true};
  const double e_p = std::clamp(*bounds.e_p_upper, 0.0, 0.5);
  const BasisStats& x = stats[Basis::X];

  double leak = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (x.gain[i] > 0.0) {
      const double e = std::clamp(x.error_gain[i] / x.gain[i], 0.0, 1.0);
      leak += profile.probability(i) * x.gain[i] * binary_entropy(e);
    }
  }

  double r = intensity_expectation(profile, [](double mu) { return std::exp(-mu); }) * bounds.y_x0_lower +
             intensity_expectation(profile, [](double mu) { return mu * std::exp(-mu); }) * bounds.y_x1_lower *
                 (1.0 - binary_entropy(e_p)) -
             leak;
  if (params.mode == KeyMode::Finite) {
    require(eps_sec > 0.0 && eps_sec < 1.0, "eps_sec must lie in (0, 1)");
    const double chi_k = chi(static_cast<int>(profile.size()), params.chi_policy);
    r -= profile.average(x.gain) / params.s_x *
         (6.0 * std::log2(chi_k / eps_sec) + std::log2(2.0 / params.eps_cor));
  }
  const double p_x = profile.p_x();
  return {std::max(0.0, p_x * p_x * r), false};
}

RateEvaluation self_consistent_rate(const IntensityProfile& profile, const ProtocolParams& params,
                                    const ObservedStats& gains) {
  params.validate();
  require(params.mode == KeyMode::Finite, "the eps_sec fixed point only exists for finite keys");
  const double p_x = profile.p_x();
  const double mean_qx = profile.average(gains[Basis::X].gain);

  RateEvaluation out;
  double final_length = params.s_x;
  double previous = 0.0;
  for (int it = 1; it <= kMaxFixedPointIterations; ++it) {
    const double eps_sec = std::min(params.kappa * final_length, 0.5);
    const ObservedStats stats = with_fluctuations(gains, profile, params, eps_sec);
    out.bounds = compute_bounds(stats, profile, params, eps_sec);
    const KeyRate r = key_rate(profile, params, out.bounds, stats, eps_sec);
    out.iterations = it;
    out.eps_sec = eps_sec;
    out.ill_defined = r.ill_defined;
    out.rate = r.value;
    if (!(r.value > 0.0) || !(mean_qx > 0.0)) {
      out.rate = 0.0;
      out.final_length = 0.0;
      out.converged = true;
      return out;
    }
    final_length = r.value * params.s_x / (p_x * p_x * mean_qx);
    out.final_length = final_length;
    if (it > 1 && std::abs(r.value - previous) < kFixedPointTolerance * r.value) {
      out.converged = true;
      return out;
    }
    previous = r.value;
  }
  return out;
}

RateEvaluation evaluate_rate(const IntensityProfile& profile, const ProtocolParams& params,
                             const ObservedStats& gains) {
  if (params.mode == KeyMode::Finite) return self_consistent_rate(profile, params, gains);
  params.validate();
  RateEvaluation out;
  const ObservedStats stats = with_fluctuations(gains, profile, params, 0.0);
  out.bounds = compute_bounds(stats, profile, params, 0.0);
  const KeyRate r = key_rate(profile, params, out.bounds, stats, 0.0);
  out.rate = r.value;
  out.ill_defined = r.ill_defined;
  out.converged = true;
  out.iterations = 1;
  out.eps_sec = 0.0;
  out.final_length = INFINITY;
  return out;
}

}  // namespace decoy
