#pragma once

#include "decoy/bounds.hpp"
#include "decoy/protocol.hpp"

namespace decoy {

template <class F>
double intensity_expectation(const IntensityProfile& profile, F&& f) {
  return profile.expectation(std::forward<F>(f));
}

struct KeyRate {
  double value = 0.0;
  bool ill_defined = false;  ///< e_p could not be bounded; value is 0
};

/// Secret bits per pulse sent:
///   p_X^2 { <e^-mu> Y_X0 + <mu e^-mu> Y_X1 [1 - H(e_p)] - <Q_X H(E_X)>
///           - (<Q_X> / l_raw) [6 log2(chi/eps_sec) + log2(2/eps_cor)] }
/// clamped at 0. Asymptotic mode drops the finite-size penalty.
KeyRate key_rate(const IntensityProfile& profile, const ProtocolParams& params, const BoundSet& bounds,
                 const ObservedStats& stats, double eps_sec);

struct RateEvaluation {
  double rate = 0.0;
  double eps_sec = 0.0;
  double final_length = 0.0;  ///< l_final = R s_X / (p_X^2 <Q_X>)
  bool converged = false;
  bool ill_defined = false;
  int iterations = 0;
  BoundSet bounds;
};

inline constexpr int kMaxFixedPointIterations = 100;
inline constexpr double kFixedPointTolerance = 1e-10;

/// Solve eps_sec = kappa * l_final by plain iteration, starting from
/// l_final = s_X. `gains` holds exact gains; deltas are recomputed for each
/// eps_sec. Stops when R changes by less than 1e-10 relative. A zero rate is
/// absorbing.
RateEvaluation self_consistent_rate(const IntensityProfile& profile, const ProtocolParams& params,
                                    const ObservedStats& gains);

/// self_consistent_rate in finite mode, a single asymptotic evaluation otherwise.
RateEvaluation evaluate_rate(const IntensityProfile& profile, const ProtocolParams& params,
                             const ObservedStats& gains);

}  // namespace decoy
