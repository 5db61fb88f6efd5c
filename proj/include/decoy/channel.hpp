#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "decoy/bounds.hpp"
#include "decoy/protocol.hpp"

namespace decoy {

/// Affine detection model of a 100 km fiber link.
struct FiberChannelModel {
  double p_ap = 4e-2;     ///< after-pulse probability
  double p_dc = 6e-7;     ///< dark count probability
  double e_mis = 5e-3;    ///< optical misalignment error
  double eta_ch = 1e-2;   ///< fiber transmittance
  double eta_sys = 1e-3;  ///< system transmittance

  void validate() const;
};

/// (1 + p_ap)(2 p_dc + eta_sys mu), clamped to [0, 1]. Warns outside 0 <= mu <= 1.
double fiber_gain(const FiberChannelModel& model, double mu);

/// (1 + p_ap) p_dc + (e_mis eta_ch + p_ap eta_sys / 2) mu, clamped to [0, gain].
double fiber_error_gain(const FiberChannelModel& model, double mu);

inline constexpr int kDefaultMaxPhotonNumber = 30;

/// Ground-truth photon-number yields and error rates for both bases.
/// Photon numbers above max_photon_number() are treated as zero-yield; for
/// mu <= 1.5 and the default cutoff of 30 their Poisson weight is below 1e-15.
struct ChannelTruth {
  std::array<std::vector<double>, 2> yields;  ///< [basis][m]
  std::array<std::vector<double>, 2> errors;  ///< [basis][m]

  int max_photon_number() const { return static_cast<int>(yields[0].size()) - 1; }
  double yield(Basis b, int m) const { return yields[static_cast<int>(b)][m]; }
  double error(Basis b, int m) const { return errors[static_cast<int>(b)][m]; }

  void validate() const;
};

/// Q_{B,mu} = sum_m Poisson(mu, m) Y_{B,m}.
double observed_gain(const ChannelTruth& truth, double mu, Basis basis);

/// Q_{B,mu} E_{B,mu} = sum_m Poisson(mu, m) Y_{B,m} e_{B,m}.
double observed_error_gain(const ChannelTruth& truth, double mu, Basis basis);

/// Uniform random channels: Y_{B,m} ~ U[0, y_max], e_{B,m} ~ U[0, e_max],
/// with e_{B,0} fixed to 1/2.
struct SamplerConfig {
  double y_max = 0.1;
  double e_max = 0.01;
  std::uint64_t seed = 1;
  std::uint64_t samples = 100000;
  int max_photon_number = kDefaultMaxPhotonNumber;

  void validate() const;
};

/// Sample `index` of the stream `config.seed`. Deterministic in (seed, index);
/// draws are consumed in the order Y_X, e_X, Y_Z, e_Z, each for m = 0..m_max.
ChannelTruth sample_random_channel(const SamplerConfig& config, std::uint64_t index);

/// Exact gains and error gains per intensity (deltas zero, s_X = s_Z = 0).
ObservedStats exact_gains(const ChannelTruth& truth, const IntensitySet& intensities);
ObservedStats exact_gains(const FiberChannelModel& model, const IntensitySet& intensities,
                          bool warn_out_of_range = true);

/// exact_gains with the Hoeffding half-widths for eps_sec attached.
/// Observation noise is not sampled: finite-size effects enter only through
/// the deltas.
ObservedStats exact_stats(const ChannelTruth& truth, const IntensityProfile& profile, const ProtocolParams& params,
                          double eps_sec);
ObservedStats exact_stats(const FiberChannelModel& model, const IntensityProfile& profile,
                          const ProtocolParams& params, double eps_sec);

/// JSON record {"max_photon_number": n, "x": {"yields": [...], "errors": [...]}, "z": {...}}.
/// Doubles are written with round-trip precision.
std::string to_text(const ChannelTruth& truth);
ChannelTruth channel_truth_from_text(std::string_view text);

}  // namespace decoy
