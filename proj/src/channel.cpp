#include "decoy/channel.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

#include "decoy/error.hpp"
#include "decoy/rng.hpp"

namespace decoy {
namespace {

bool is_probability(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

void warn_range(double mu) {
  if (mu < 0.0 || mu > 1.0) {
    std::ostringstream msg;
    msg << "fiber model evaluated at mu=" << mu << ", outside its validity range [0, 1]";
    warn(msg.str());
  }
}

double raw_gain(const FiberChannelModel& f, double mu) {
  return std::clamp((1.0 + f.p_ap) * (2.0 * f.p_dc + f.eta_sys * mu), 0.0, 1.0);
}

double raw_error_gain(const FiberChannelModel& f, double mu) {
  const double qe = (1.0 + f.p_ap) * f.p_dc + (f.e_mis * f.eta_ch + f.p_ap * f.eta_sys / 2.0) * mu;
  return std::clamp(qe, 0.0, raw_gain(f, mu));
}

template <class Term>
double poisson_sum(double mu, int m_max, Term&& term) {
  require(mu >= 0.0, "negative mean photon number");
  double weight = std::exp(-mu);
  double sum = 0.0;
  for (int m = 0; m <= m_max; ++m) {
    sum += weight * term(m);
    weight *= mu / (m + 1);
  }
  return sum;
}

nlohmann::json basis_record(const ChannelTruth& t, Basis b) {
  return {{"yields", t.yields[static_cast<int>(b)]}, {"errors", t.errors[static_cast<int>(b)]}};
}

}  // namespace

void FiberChannelModel::validate() const {
  for (double v : {p_ap, p_dc, e_mis, eta_ch, eta_sys}) {
    require(is_probability(v), "fiber channel parameters must lie in [0, 1]");
  }
}

double fiber_gain(const FiberChannelModel& model, double mu) {
  warn_range(mu);
  return raw_gain(model, mu);
}

double fiber_error_gain(const FiberChannelModel& model, double mu) {
  warn_range(mu);
  return raw_error_gain(model, mu);
}

void ChannelTruth::validate() const {
  const std::size_t n = yields[0].size();
  require(n >= 1, "a channel needs at least the vacuum yield");
  for (int b = 0; b < 2; ++b) {
    require(yields[b].size() == n && errors[b].size() == n, "yield and error tables must have equal length");
    for (std::size_t m = 0; m < n; ++m) {
      require(is_probability(yields[b][m]), "yields must lie in [0, 1]");
      require(std::isfinite(errors[b][m]) && errors[b][m] >= 0.0 && errors[b][m] <= 0.5,
              "error rates must lie in [0, 1/2]");
    }
    require(errors[b][0] == 0.5, "the vacuum error rate e_{B,0} must be 1/2");
  }
}

double observed_gain(const ChannelTruth& truth, double mu, Basis basis) {
  const auto& y = truth.yields[static_cast<int>(basis)];
  return poisson_sum(mu, truth.max_photon_number(), [&](int m) { return y[m]; });
}

double observed_error_gain(const ChannelTruth& truth, double mu, Basis basis) {
  const auto& y = truth.yields[static_cast<int>(basis)];
  const auto& e = truth.errors[static_cast<int>(basis)];
  return poisson_sum(mu, truth.max_photon_number(), [&](int m) { return y[m] * e[m]; });
}

void SamplerConfig::validate() const {
  require(y_max > 0.0 && y_max <= 1.0, "y_max must lie in (0, 1]");
  require(e_max > 0.0 && e_max <= 0.5, "e_max must lie in (0, 1/2]");
  require(max_photon_number >= 1, "max_photon_number must be positive");
}

ChannelTruth sample_random_channel(const SamplerConfig& config, std::uint64_t index) {
  config.validate();
  CounterRng rng(config.seed, index);
  const auto n = static_cast<std::size_t>(config.max_photon_number) + 1;
  ChannelTruth t;
  for (int b = 0; b < 2; ++b) {
    t.yields[b].resize(n);
    t.errors[b].resize(n);
    for (auto& y : t.yields[b]) y = config.y_max * rng.uniform();
    for (auto& e : t.errors[b]) e = config.e_max * rng.uniform();
    // Vacuum detections are pure dark counts.
    t.errors[b][0] = 0.5;
  }
  return t;
}

ObservedStats exact_gains(const ChannelTruth& truth, const IntensitySet& intensities) {
  ObservedStats out;
  const std::size_t k = intensities.size();
  for (Basis b : {Basis::X, Basis::Z}) {
    BasisStats& s = out[b];
    s.gain.resize(k);
    s.error_gain.resize(k);
    s.delta_gain.assign(k, 0.0);
    s.delta_error_gain.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      s.gain[i] = observed_gain(truth, intensities[i], b);
      s.error_gain[i] = observed_error_gain(truth, intensities[i], b);
    }
  }
  return out;
}

ObservedStats exact_gains(const FiberChannelModel& model, const IntensitySet& intensities, bool warn_out_of_range) {
  model.validate();
  if (warn_out_of_range) {
    for (double mu : intensities.values()) warn_range(mu);
  }
  ObservedStats out;
  const std::size_t k = intensities.size();
  for (Basis b : {Basis::X, Basis::Z}) {
    BasisStats& s = out[b];
    s.gain.resize(k);
    s.error_gain.resize(k);
    s.delta_gain.assign(k, 0.0);
    s.delta_error_gain.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      s.gain[i] = raw_gain(model, intensities[i]);
      s.error_gain[i] = raw_error_gain(model, intensities[i]);
    }
  }
  return out;
}

ObservedStats exact_stats(const ChannelTruth& truth, const IntensityProfile& profile, const ProtocolParams& params,
                          double eps_sec) {
  return with_fluctuations(exact_gains(truth, profile.intensities()), profile, params, eps_sec);
}

ObservedStats exact_stats(const FiberChannelModel& model, const IntensityProfile& profile,
                          const ProtocolParams& params, double eps_sec) {
  return with_fluctuations(exact_gains(model, profile.intensities()), profile, params, eps_sec);
}

std::string to_text(const ChannelTruth& truth) {
  const nlohmann::json j = {{"max_photon_number", truth.max_photon_number()},
                            {"x", basis_record(truth, Basis::X)},
                            {"z", basis_record(truth, Basis::Z)}};
  return j.dump(2) + "\n";
}

ChannelTruth channel_truth_from_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, std::string("channel record: ") + e.what());
  }
  ChannelTruth t;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key != "max_photon_number" && key != "x" && key != "z") {
        fail(ErrorKind::Parse, "channel record: unknown key '" + key + "'");
      }
    }
    for (auto [name, b] : {std::pair{"x", 0}, std::pair{"z", 1}}) {
      const auto& rec = j.at(name);
      for (const auto& [key, value] : rec.items()) {
        if (key != "yields" && key != "errors") {
          fail(ErrorKind::Parse, "channel record: unknown key '" + key + "'");
        }
      }
      t.yields[b] = rec.at("yields").get<std::vector<double>>();
      t.errors[b] = rec.at("errors").get<std::vector<double>>();
    }
    if (j.contains("max_photon_number") &&
        j.at("max_photon_number").get<int>() != static_cast<int>(t.yields[0].size()) - 1) {
      fail(ErrorKind::Parse, "channel record: max_photon_number does not match the table length");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("channel record: ") + e.what());
  }
  try {
    t.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Parse, std::string("channel record: ") + e.what());
  }
  return t;
}

}  // namespace decoy
