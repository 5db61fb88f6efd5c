#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace decoy {

enum class Basis { X = 0, Z = 1 };

inline constexpr double kDefaultMinGap = 0.05;

/// Mean photon numbers mu_1 > mu_2 > ... > mu_k >= 0.
///
/// Consecutive values closer than `min_gap` are legal but reported through
/// warn(): the inversion divides by intensity differences.
class IntensitySet {
 public:
  explicit IntensitySet(std::vector<double> values, double min_gap = kDefaultMinGap);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double least() const { return values_.back(); }

  /// Smallest consecutive difference (infinity for a single value).
  double min_separation() const noexcept;

  /// The n smallest intensities, still in decreasing order.
  IntensitySet smallest(std::size_t n) const;

 private:
  IntensitySet() = default;
  std::vector<double> values_;
};

/// Decoy configuration: intensities, their selection probabilities and the
/// probability p_X of choosing the X (key) basis.
class IntensityProfile {
 public:
  IntensityProfile(IntensitySet intensities, std::vector<double> probabilities, double p_x);

  const IntensitySet& intensities() const noexcept { return intensities_; }
  std::span<const double> probabilities() const noexcept { return probabilities_; }
  double probability(std::size_t i) const { return probabilities_[i]; }
  double p_x() const noexcept { return p_x_; }
  std::size_t size() const noexcept { return intensities_.size(); }

  /// <f(mu)> = sum_n p_n f(mu_n).
  template <class F>
  double expectation(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < size(); ++i) sum += probabilities_[i] * f(intensities_[i]);
    return sum;
  }

  /// <v> for a per-intensity table v (gains, error gains).
  double average(std::span<const double> per_intensity) const;

 private:
  IntensitySet intensities_;
  std::vector<double> probabilities_;
  double p_x_;
};

/// How many failure events are charged against eps_sec.
enum class ChiPolicy {
  General,     ///< 9 + (4k - 2)
  LimBaseline,  ///< 21, only defined for k = 3
};

enum class KeyMode { Finite, Asymptotic };

/// Which estimator produces the yield bounds.
enum class BoundMethod {
  Generalized,  ///< subset-restricted Vandermonde inversion, any k >= 2
  Baseline,     ///< the classic three-intensity formulas, k = 3 only
};

struct ProtocolParams {
  double s_x = 1e9;  ///< raw sifted key length (bits)
  double eps_cor = 1e-15;
  double kappa = 1e-15;  ///< secrecy leakage per final key bit
  ChiPolicy chi_policy = ChiPolicy::General;
  KeyMode mode = KeyMode::Finite;
  BoundMethod bound_method = BoundMethod::Generalized;

  void validate() const;
};

}  // namespace decoy

namespace decoy {

/// Number of failure events budgeted against eps_sec for k intensities.
/// Throws ErrorKind::Configuration for LimBaseline with k != 3.
int chi(int k, ChiPolicy policy);

}  // namespace decoy
