#include "decoy/protocol.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "decoy/error.hpp"

namespace decoy {

IntensitySet::IntensitySet(std::vector<double> values, double min_gap) : values_(std::move(values)) {
  require(!values_.empty(), "an intensity set needs at least one value");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    require(std::isfinite(values_[i]) && values_[i] >= 0.0, "intensities must be finite and non-negative");
    if (i > 0) require(values_[i - 1] > values_[i], "intensities must be strictly decreasing");
  }
  if (min_gap > 0.0 && min_separation() < min_gap) {
    std::ostringstream msg;
    msg << "intensities separated by " << min_separation() << " < " << min_gap
        << "; the inversion loses precision for close intensities";
    warn(msg.str());
  }
}

double IntensitySet::min_separation() const noexcept {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < values_.size(); ++i) gap = std::min(gap, values_[i - 1] - values_[i]);
  return gap;
}

IntensitySet IntensitySet::smallest(std::size_t n) const {
  require(n >= 1 && n <= values_.size(), "subset size out of range");
  IntensitySet subset;
  subset.values_.assign(values_.end() - static_cast<std::ptrdiff_t>(n), values_.end());
  return subset;
}

IntensityProfile::IntensityProfile(IntensitySet intensities, std::vector<double> probabilities, double p_x)
    : intensities_(std::move(intensities)), probabilities_(std::move(probabilities)), p_x_(p_x) {
  require(probabilities_.size() == intensities_.size(),
          "one probability per intensity is required");
  double total = 0.0;
  for (double p : probabilities_) {
    require(std::isfinite(p) && p > 0.0, "intensity probabilities must be positive");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-12, "intensity probabilities must sum to 1");
  require(p_x_ > 0.0 && p_x_ < 1.0, "p_X must lie in (0, 1)");
}

double IntensityProfile::average(std::span<const double> per_intensity) const {
  require(per_intensity.size() == size(), "per-intensity table has the wrong length");
  double sum = 0.0;
  for (std::size_t i = 0; i < size(); ++i) sum += probabilities_[i] * per_intensity[i];
  return sum;
}

void ProtocolParams::validate() const {
  if (mode == KeyMode::Finite) {
    require(std::isfinite(s_x) && s_x >= 1.0, "s_X must be at least 1 in finite mode");
  }
  require(eps_cor > 0.0 && eps_cor < 1.0, "eps_cor must lie in (0, 1)");
  require(kappa > 0.0 && kappa < 1.0, "kappa must lie in (0, 1)");
}

}  // namespace decoy

namespace decoy {

int chi(int k, ChiPolicy policy) {
  require(k >= 2, "at least two intensities are required");
  switch (policy) {
    case ChiPolicy::General:
      // 2 * 2floor(k/2) + 2 * (2floor((k-1)/2) + 1) Hoeffding events plus 9 fixed ones.
      return 9 + (4 * k - 2);
    case ChiPolicy::LimBaseline:
      if (k != 3) fail(ErrorKind::Configuration, "the chi = 21 budget is only defined for k = 3");
      return 21;
  }
  fail(ErrorKind::InvalidArgument, "unknown chi policy");
}

}  // namespace decoy
