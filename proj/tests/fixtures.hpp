#pragma once

#include <cmath>
#include <algorithm>
#include <functional>
#include <random>
#include <vector>

#include "decoy/channel.hpp"
#include "decoy/protocol.hpp"

namespace fixture {

// Smooth deterministic channel with m_max = 30.
inline decoy::ChannelTruth wavy_channel() {
  decoy::ChannelTruth t;
  for (auto& v : t.yields) v.resize(31);
  for (auto& v : t.errors) v.resize(31);
  for (int m = 0; m <= 30; ++m) {
    t.yields[0][m] = 0.05 * (1 + 0.3 * std::sin(m));
    t.errors[0][m] = 0.004 * (1 + 0.5 * std::cos(m));
    t.yields[1][m] = 0.04 * (1 + 0.2 * std::cos(m));
    t.errors[1][m] = 0.006 * (1 + 0.4 * std::sin(m));
  }
  t.errors[0][0] = t.errors[1][0] = 0.5;
  return t;
}

// Only Y_0..Y_{n-1} non-zero.
inline decoy::ChannelTruth short_channel(int n, double y = 0.3, double e = 0.02) {
  decoy::ChannelTruth t;
  for (auto& v : t.yields) v.assign(31, 0.0);
  for (auto& v : t.errors) v.assign(31, 0.0);
  for (int m = 0; m < n; ++m)
    for (int b = 0; b < 2; ++b) {
      t.yields[b][m] = y * (1.0 + 0.1 * m + 0.05 * b);
      t.errors[b][m] = e * (1.0 + 0.2 * m);
    }
  t.errors[0][0] = t.errors[1][0] = 0.5;
  return t;
}

// Strictly decreasing intensities in (lo, hi] whose neighbours differ by at least `gap`.
inline std::vector<double> separated_intensities(std::mt19937_64& rng, int k, double least, double gap,
                                                 double hi = 1.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    std::vector<double> mu(k);
    mu[k - 1] = least;
    for (int i = 0; i + 1 < k; ++i) mu[i] = least + gap + (hi - least - gap) * u(rng);
    std::sort(mu.begin(), mu.end() - 1, std::greater<>());
    bool ok = true;
    for (int i = 0; i + 1 < k; ++i) ok = ok && mu[i] - mu[i + 1] >= gap;
    if (ok) return mu;
  }
}

}  // namespace fixture
