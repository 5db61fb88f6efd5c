#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "decoy/channel.hpp"
#include "decoy/keyrate.hpp"
#include "decoy/protocol.hpp"

namespace decoy {

/// One of the eight reference decoy configurations A-H.
struct CaseDefinition {
  char label;
  std::vector<double> intensities;
  std::vector<double> probabilities;

  IntensityProfile profile(double p_x) const;
};

std::span<const CaseDefinition> reference_cases();
/// Throws ErrorKind::InvalidArgument for an unknown label.
const CaseDefinition& reference_case(char label);

struct RateStudyResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t zero_rate = 0;    ///< samples clamped to R = 0 (included in the mean)
  std::uint64_t ill_defined = 0;  ///< subset of zero_rate where e_p had no valid bound
  std::uint64_t unconverged = 0;

  double zero_fraction() const { return samples ? static_cast<double>(zero_rate) / samples : 0.0; }
};

/// Per-sample key rates over sampler.samples random channels, in index order.
/// Bit-identical for any thread count.
std::vector<double> sample_key_rates(const IntensityProfile& profile, const SamplerConfig& sampler,
                                     const ProtocolParams& params, unsigned threads = 1,
                                     RateStudyResult* counters = nullptr);

/// Mean key rate (negative rates count as 0) with its standard error.
RateStudyResult average_key_rate(const IntensityProfile& profile, const SamplerConfig& sampler,
                                 const ProtocolParams& params, unsigned threads = 1);

/// Summary of |estimate - truth| / truth over a set of samples. Samples whose
/// truth is below 1e-12 are excluded and counted separately.
struct RelativeErrorStats {
  double mean = 0.0;    ///< mean of per-sample relative errors
  double max = 0.0;     ///< largest per-sample relative error
  double pooled = 0.0;  ///< sum |estimate - truth| / sum truth
  std::uint64_t counted = 0;
  std::uint64_t excluded = 0;
};

inline constexpr double kRelativeErrorFloor = 1e-12;

/// Order-sensitive reduction; callers feed samples in index order.
RelativeErrorStats relative_errors(std::span<const double> estimates, std::span<const double> truths);

struct BaselineStudyConfig {
  double mu1_min = 0.5, mu1_max = 0.9;
  double mu2_min = 0.01, mu2_max = 0.1;
  double mu3 = 0.0;
  int grid = 5;  ///< points per intensity axis
  /// Channels per grid point is samples / grid^2; every grid point sees the
  /// same channel stream.
  SamplerConfig sampler{1.0, 0.5, 1, 100000, kDefaultMaxPhotonNumber};
};

struct BaselineConfigResult {
  double mu1 = 0.0, mu2 = 0.0, mu3 = 0.0;
  RelativeErrorStats y1;    ///< Y_{B,1}, both bases pooled
  RelativeErrorStats y1h2;  ///< Y_{X,1} H(e_p), asymptotic e_p
};

struct BaselineStudyResult {
  std::vector<BaselineConfigResult> configs;
  RelativeErrorStats y1;  ///< all configurations together
  RelativeErrorStats y1h2;
  double y1_worst_config_mean = 0.0;  ///< max over configurations of the mean relative error
  double y1h2_worst_config_mean = 0.0;
};

/// Accuracy of the three-intensity estimator (asymptotic, no deltas) over a
/// grid of intensity choices.
BaselineStudyResult baseline_error_study(const BaselineStudyConfig& config, unsigned threads = 1);

struct GeneralizedCaseResult {
  char label = '?';
  int k = 0;
  RelativeErrorStats y1;    ///< Y_{B,1}, both bases pooled
  RelativeErrorStats y1e1;  ///< Y_{Z,1} e_{Z,1}
  /// |C_{1,k'}| ~ prod_{t in K \ {least}} mu_t / k'! for the subsets used by
  /// each estimator.
  double c2_estimate_y1 = 0.0;
  double c2_estimate_y1e1 = 0.0;
  /// The exact |C_{1,k'}| on the same subsets.
  double c2_exact_y1 = 0.0;
  double c2_exact_y1e1 = 0.0;
};

/// Accuracy of the generalized estimator on one configuration, asymptotic mode.
GeneralizedCaseResult generalized_error_study(const CaseDefinition& config, const SamplerConfig& sampler,
                                              unsigned threads = 1);

/// prod of the subset without its least element, divided by |subset|!.
double truncation_error_estimate(const IntensitySet& subset);

struct OptimizeOptions {
  int k = 3;
  int restarts = 20;
  double mu_min = 1e-6;  ///< the pinned least intensity
  double mu_max = 1.0;   ///< upper end of the fiber model's validity range
  std::uint64_t seed = 1;
  int max_evaluations = 3000;  ///< per simplex run
  int polish_rounds = 3;       ///< simplex restarts from each run's best point
  unsigned threads = 1;

  void validate() const;
};

struct OptimizeResult {
  IntensityProfile profile;
  RateEvaluation evaluation;
  std::vector<double> restart_rates;  ///< best rate found by each restart
  int evaluations = 0;
  std::vector<std::string> warnings;
};

/// Maximize the self-consistent finite-key rate on a fiber channel over the
/// free intensities, their probabilities and p_X. Derivative-free simplex
/// search from `restarts` random starts; deterministic in `seed` for any
/// thread count.
OptimizeResult optimize_profile(const FiberChannelModel& channel, const ProtocolParams& params,
                                const OptimizeOptions& options);

/// Map unconstrained coordinates (2k - 1 of them) to a profile: ordered
/// intensities through logistic fractions of the remaining range, a softmax
/// over probabilities, and a logistic p_X. Throws ErrorKind::InvalidArgument
/// if extreme coordinates round two intensities to the same value.
IntensityProfile decode_profile(std::span<const double> x, const OptimizeOptions& options);
std::vector<double> encode_profile(const IntensityProfile& profile, const OptimizeOptions& options);

/// Sum in a fixed binary-tree order.
double pairwise_sum(std::span<const double> values);

/// Run body(i) for i in [0, n) on up to `threads` workers.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body);

}  // namespace decoy

#include "decoy/detail/parallel.hpp"
