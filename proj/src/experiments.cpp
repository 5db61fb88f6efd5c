#include "decoy/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "decoy/bounds.hpp"
#include "decoy/error.hpp"
#include "decoy/nelder_mead.hpp"
#include "decoy/polymath.hpp"
#include "decoy/rng.hpp"

namespace decoy {

namespace {

const std::vector<CaseDefinition>& case_table() {
  static const std::vector<CaseDefinition> cases = {
      {'A', {0.66, 0.05, 1e-6}, {1.0 / 3, 1.0 / 3, 1.0 / 3}},
      {'B', {0.8, 0.1, 1e-6}, {0.5, 0.25, 0.25}},
      {'C', {0.8, 0.5, 0.35, 1e-6}, {0.5, 1.0 / 6, 1.0 / 6, 1.0 / 6}},
      {'D', {1.0, 0.67, 0.33, 1e-6}, {0.5, 1.0 / 6, 1.0 / 6, 1.0 / 6}},
      {'E', {0.8, 0.65, 0.5, 0.35, 1e-6}, {0.5, 0.125, 0.125, 0.125, 0.125}},
      {'F', {1.0, 0.75, 0.5, 0.1, 1e-6}, {0.5, 0.125, 0.125, 0.125, 0.125}},
      {'G', {1.0, 0.8, 0.65, 0.5, 0.35, 1e-6}, {0.5, 0.1, 0.1, 0.1, 0.1, 0.1}},
      {'H', {1.0, 0.8, 0.6, 0.4, 0.2, 1e-6}, {0.5, 0.1, 0.1, 0.1, 0.1, 0.1}},
  };
  return cases;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

constexpr double kCoordinateLimit = 30.0;

}  // namespace

IntensityProfile CaseDefinition::profile(double p_x) const {
  // Case A's decoy sits 1e-6 below the default gap threshold; the published
  // sets are used as given.
  return IntensityProfile(IntensitySet(intensities, 0.0), probabilities, p_x);
}

std::span<const CaseDefinition> reference_cases() { return case_table(); }

const CaseDefinition& reference_case(char label) {
  for (const auto& c : case_table())
    if (c.label == label) return c;
  fail(ErrorKind::InvalidArgument, std::string("unknown case label '") + label + "'");
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<double> sample_key_rates(const IntensityProfile& profile, const SamplerConfig& sampler,
                                     const ProtocolParams& params, unsigned threads, RateStudyResult* counters) {
  sampler.validate();
  params.validate();
  const std::size_t n = sampler.samples;
  std::vector<double> rates(n, 0.0);
  std::vector<unsigned char> flags(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    const ChannelTruth truth = sample_random_channel(sampler, i);
    const RateEvaluation ev = evaluate_rate(profile, params, exact_gains(truth, profile.intensities()));
    rates[i] = std::max(ev.rate, 0.0);
    flags[i] = static_cast<unsigned char>((ev.rate > 0.0 ? 0 : 1) | (ev.ill_defined ? 2 : 0) |
                                          (ev.converged ? 0 : 4));
  });
  if (counters) {
    counters->samples = n;
    counters->zero_rate = counters->ill_defined = counters->unconverged = 0;
    for (unsigned char f : flags) {
      counters->zero_rate += f & 1;
      counters->ill_defined += (f >> 1) & 1;
      counters->unconverged += (f >> 2) & 1;
    }
  }
  return rates;
}

RateStudyResult average_key_rate(const IntensityProfile& profile, const SamplerConfig& sampler,
                                 const ProtocolParams& params, unsigned threads) {
  RateStudyResult out;
  std::vector<double> rates = sample_key_rates(profile, sampler, params, threads, &out);
  const double n = static_cast<double>(rates.size());
  if (rates.empty()) return out;
  out.mean = pairwise_sum(rates) / n;
  if (rates.size() > 1) {
    for (double& r : rates) r = (r - out.mean) * (r - out.mean);
    out.std_error = std::sqrt(pairwise_sum(rates) / (n - 1.0) / n);
  }
  return out;
}

RelativeErrorStats relative_errors(std::span<const double> estimates, std::span<const double> truths) {
  require(estimates.size() == truths.size(), "estimate and truth counts differ");
  RelativeErrorStats out;
  std::vector<double> rel, abs_err, kept_truth;
  rel.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (!(truths[i] >= kRelativeErrorFloor)) {
      ++out.excluded;
      continue;
    }
    const double diff = std::abs(estimates[i] - truths[i]);
    rel.push_back(diff / truths[i]);
    abs_err.push_back(diff);
    kept_truth.push_back(truths[i]);
    out.max = std::max(out.max, diff / truths[i]);
  }
  out.counted = rel.size();
  if (!rel.empty()) {
    out.mean = pairwise_sum(rel) / static_cast<double>(rel.size());
    out.pooled = pairwise_sum(abs_err) / pairwise_sum(kept_truth);
  }
  return out;
}

BaselineStudyResult baseline_error_study(const BaselineStudyConfig& config, unsigned threads) {
  config.sampler.validate();
  require(config.grid >= 1, "grid needs at least one point per axis");
  require(config.mu1_min > 0.0 && config.mu1_min <= config.mu1_max, "bad mu_1 range");
  require(config.mu2_min > config.mu3 && config.mu2_min <= config.mu2_max, "bad mu_2 range");
  require(config.mu3 >= 0.0, "mu_3 must be non-negative");

  const int g = config.grid;
  const std::uint64_t per = config.sampler.samples / static_cast<std::uint64_t>(g * g);
  require(per >= 1, "fewer samples than grid points");
  auto axis = [g](double lo, double hi, int i) { return g == 1 ? lo : lo + (hi - lo) * i / (g - 1); };

  std::vector<IntensitySet> sets;
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b) {
      IntensitySet set({axis(config.mu1_min, config.mu1_max, a), axis(config.mu2_min, config.mu2_max, b),
                        config.mu3},
                       0.0);
      if (!(set[0] > set[1] + set[2]))
        fail(ErrorKind::Configuration, "the three-intensity estimator needs mu_1 > mu_2 + mu_3");
      sets.push_back(std::move(set));
    }

  const std::size_t nc = sets.size();
  // [config][sample] slots; y1 holds X then Z for each sample.
  std::vector<std::vector<double>> y1_est(nc, std::vector<double>(2 * per)), y1_true(nc, std::vector<double>(2 * per));
  std::vector<std::vector<double>> h_est(nc, std::vector<double>(per)), h_true(nc, std::vector<double>(per));

  parallel_for(per, threads, [&](std::size_t s) {
    const ChannelTruth truth = sample_random_channel(config.sampler, s);
    const double e_z1 = truth.error(Basis::Z, 1);
    for (std::size_t c = 0; c < nc; ++c) {
      const ObservedStats gains = exact_gains(truth, sets[c]);
      const BaselineBounds bx = baseline_bounds(gains[Basis::X], sets[c]);
      const BaselineBounds bz = baseline_bounds(gains[Basis::Z], sets[c]);
      const double yx = std::clamp(bx.y1_lower, 0.0, 1.0);
      const double yz = std::clamp(bz.y1_lower, 0.0, 1.0);
      y1_est[c][2 * s] = yx;
      y1_true[c][2 * s] = truth.yield(Basis::X, 1);
      y1_est[c][2 * s + 1] = yz;
      y1_true[c][2 * s + 1] = truth.yield(Basis::Z, 1);
      const double e_up = yz > 0.0 ? std::min(0.5, std::clamp(bz.y1e1_upper, 0.0, 0.5) / yz) : 0.5;
      h_est[c][s] = yx * binary_entropy(e_up);
      h_true[c][s] = truth.yield(Basis::X, 1) * binary_entropy(e_z1);
    }
  });

  BaselineStudyResult out;
  std::vector<double> all_y1e, all_y1t, all_he, all_ht;
  for (std::size_t c = 0; c < nc; ++c) {
    BaselineConfigResult r;
    r.mu1 = sets[c][0];
    r.mu2 = sets[c][1];
    r.mu3 = sets[c][2];
    r.y1 = relative_errors(y1_est[c], y1_true[c]);
    r.y1h2 = relative_errors(h_est[c], h_true[c]);
    out.y1_worst_config_mean = std::max(out.y1_worst_config_mean, r.y1.mean);
    out.y1h2_worst_config_mean = std::max(out.y1h2_worst_config_mean, r.y1h2.mean);
    out.configs.push_back(r);
    all_y1e.insert(all_y1e.end(), y1_est[c].begin(), y1_est[c].end());
    all_y1t.insert(all_y1t.end(), y1_true[c].begin(), y1_true[c].end());
    all_he.insert(all_he.end(), h_est[c].begin(), h_est[c].end());
    all_ht.insert(all_ht.end(), h_true[c].begin(), h_true[c].end());
  }
  out.y1 = relative_errors(all_y1e, all_y1t);
  out.y1h2 = relative_errors(all_he, all_ht);
  return out;
}

double truncation_error_estimate(const IntensitySet& subset) {
  double prod = 1.0;
  for (std::size_t t = 0; t + 1 < subset.size(); ++t) prod *= subset[t];
  return prod / factorial(static_cast<int>(subset.size()));
}

GeneralizedCaseResult generalized_error_study(const CaseDefinition& config, const SamplerConfig& sampler,
                                              unsigned threads) {
  sampler.validate();
  const IntensitySet set(config.intensities, 0.0);
  const std::size_t k = set.size();
  const std::size_t n = sampler.samples;

  std::vector<double> y1_est(2 * n), y1_true(2 * n), p_est(n), p_true(n);
  parallel_for(n, threads, [&](std::size_t s) {
    const ChannelTruth truth = sample_random_channel(sampler, s);
    const ObservedStats gains = exact_gains(truth, set);
    for (Basis b : {Basis::X, Basis::Z}) {
      const std::size_t slot = 2 * s + static_cast<std::size_t>(b);
      y1_est[slot] = generalized_yield_lower(gains, set, 1, b);
      y1_true[slot] = truth.yield(b, 1);
    }
    p_est[s] = generalized_error_product_upper(gains, set);
    p_true[s] = truth.yield(Basis::Z, 1) * truth.error(Basis::Z, 1);
  });

  GeneralizedCaseResult out;
  out.label = config.label;
  out.k = static_cast<int>(k);
  out.y1 = relative_errors(y1_est, y1_true);
  out.y1e1 = relative_errors(p_est, p_true);
  const IntensitySet sy = set.smallest(yield_subset_size(k, 1));
  const IntensitySet se = set.smallest(error_product_subset_size(k));
  out.c2_estimate_y1 = truncation_error_estimate(sy);
  out.c2_estimate_y1e1 = truncation_error_estimate(se);
  out.c2_exact_y1 = std::abs(c_coefficient(sy.values(), 1, static_cast<int>(sy.size())));
  out.c2_exact_y1e1 = std::abs(c_coefficient(se.values(), 1, static_cast<int>(se.size())));
  return out;
}

void OptimizeOptions::validate() const {
  require(k >= 2 && k <= 6, "k must lie in [2, 6]");
  require(restarts >= 1, "at least one restart is required");
  require(mu_min >= 0.0 && std::isfinite(mu_min), "mu_min must be finite and non-negative");
  require(mu_max > mu_min && std::isfinite(mu_max), "mu_max must exceed mu_min");
  require(max_evaluations >= 10, "max_evaluations must be at least 10");
  require(polish_rounds >= 0, "polish_rounds must be non-negative");
}

IntensityProfile decode_profile(std::span<const double> x, const OptimizeOptions& options) {
  const std::size_t k = static_cast<std::size_t>(options.k);
  require(x.size() == 2 * k - 1, "coordinate vector has the wrong length");
  auto at = [&](std::size_t i) { return std::clamp(x[i], -kCoordinateLimit, kCoordinateLimit); };

  std::vector<double> mu(k);
  double top = options.mu_max;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    mu[i] = options.mu_min + (top - options.mu_min) * sigmoid(at(i));
    top = mu[i];
  }
  mu[k - 1] = options.mu_min;

  std::vector<double> logits(k, 0.0);
  for (std::size_t i = 0; i + 1 < k; ++i) logits[i] = at(k - 1 + i);
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> probs(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += probs[i] = std::exp(logits[i] - peak);
  for (double& p : probs) p /= total;
  // Renormalising again absorbs the last rounding so the sum check passes.
  total = pairwise_sum(probs);
  for (double& p : probs) p /= total;

  return IntensityProfile(IntensitySet(std::move(mu), 0.0), std::move(probs), sigmoid(at(2 * k - 2)));
}

std::vector<double> encode_profile(const IntensityProfile& profile, const OptimizeOptions& options) {
  const std::size_t k = profile.size();
  require(static_cast<int>(k) == options.k, "profile size differs from options.k");
  std::vector<double> x(2 * k - 1);
  double top = options.mu_max;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const double f = (profile.intensities()[i] - options.mu_min) / (top - options.mu_min);
    require(f > 0.0 && f < 1.0, "profile lies outside the optimizer's intensity range");
    x[i] = logit(f);
    top = profile.intensities()[i];
  }
  for (std::size_t i = 0; i + 1 < k; ++i)
    x[k - 1 + i] = std::log(profile.probability(i) / profile.probability(k - 1));
  x[2 * k - 2] = logit(profile.p_x());
  return x;
}

namespace {

struct RestartOutcome {
  std::vector<double> x;
  double rate = 0.0;
  int evaluations = 0;
};

RestartOutcome run_restart(const FiberChannelModel& channel, const ProtocolParams& params,
                           const OptimizeOptions& options, int restart) {
  const std::size_t k = static_cast<std::size_t>(options.k);
  auto rate_at = [&](const std::vector<double>& x) {
    try {
      const IntensityProfile profile = decode_profile(x, options);
      return evaluate_rate(profile, params, exact_gains(channel, profile.intensities(), false)).rate;
    } catch (const Error&) {
      // Far-out coordinates can round neighbouring intensities together.
      return 0.0;
    }
  };

  RestartOutcome out;
  CounterRng rng(options.seed, static_cast<std::uint64_t>(restart));
  std::vector<double> x(2 * k - 1);
  double start_rate = 0.0;
  for (int attempt = 0; attempt < 1000 && !(start_rate > 0.0); ++attempt) {
    // Signal near the low end of the range, decoys at moderate fractions below it.
    x[0] = logit(0.05 + 0.55 * rng.uniform());
    for (std::size_t i = 1; i + 1 < k; ++i) x[i] = logit(0.2 + 0.6 * rng.uniform());
    for (std::size_t i = 0; i + 1 < k; ++i) x[k - 1 + i] = 2.0 * rng.uniform() - 1.0 + (i == 0 ? 1.5 : 0.0);
    x[2 * k - 2] = logit(0.5 + 0.45 * rng.uniform());
    start_rate = rate_at(x);
    ++out.evaluations;
  }

  NelderMeadOptions nm;
  nm.max_evaluations = options.max_evaluations;
  auto objective = [&](const std::vector<double>& y) { return -rate_at(y); };
  out.x = x;
  out.rate = start_rate;
  for (int round = 0; round <= options.polish_rounds; ++round) {
    const NelderMeadResult r = nelder_mead(objective, out.x, nm);
    out.evaluations += r.evaluations;
    const bool improved = -r.value > out.rate;
    if (improved) {
      out.rate = -r.value;
      out.x = r.x;
    }
    if (!improved) break;
    nm.initial_step = 0.25;
  }
  return out;
}

}  // namespace

OptimizeResult optimize_profile(const FiberChannelModel& channel, const ProtocolParams& params,
                                const OptimizeOptions& options) {
  channel.validate();
  params.validate();
  options.validate();
  if (params.bound_method == BoundMethod::Baseline && options.k != 3)
    fail(ErrorKind::Configuration, "the three-intensity estimator only optimizes k = 3");

  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(options.restarts));
  parallel_for(outcomes.size(), options.threads,
               [&](std::size_t r) { outcomes[r] = run_restart(channel, params, options, static_cast<int>(r)); });

  std::size_t best = 0;
  std::vector<double> restart_rates;
  int evaluations = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    restart_rates.push_back(outcomes[r].rate);
    evaluations += outcomes[r].evaluations;
    if (outcomes[r].rate > outcomes[best].rate) best = r;
  }

  IntensityProfile profile = decode_profile(outcomes[best].x, options);
  std::vector<std::string> warnings;
  const double sep = profile.intensities().min_separation();
  if (sep < kDefaultMinGap) {
    std::ostringstream msg;
    msg << "optimized intensities are only " << sep << " apart (below " << kDefaultMinGap << ")";
    warnings.push_back(msg.str());
    warn(warnings.back());
  }
  const RateEvaluation evaluation = evaluate_rate(profile, params, exact_gains(channel, profile.intensities(), false));
  return OptimizeResult{std::move(profile), evaluation, std::move(restart_rates), evaluations, std::move(warnings)};
}

}  // namespace decoy
