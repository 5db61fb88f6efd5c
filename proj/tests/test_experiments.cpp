#include <doctest.h>

#include <cmath>
#include <vector>

#include "decoy/error.hpp"
#include "decoy/experiments.hpp"
#include "decoy/nelder_mead.hpp"

using namespace decoy;

TEST_CASE("reference cases") {
  REQUIRE(reference_cases().size() == 8);
  const auto& a = reference_case('A');
  CHECK(a.intensities == std::vector<double>{0.66, 0.05, 1e-6});
  CHECK(reference_case('H').intensities.size() == 6);
  CHECK(reference_case('F').intensities[3] == 0.1);
  CHECK_THROWS_AS(reference_case('Z'), Error);
  for (const auto& c : reference_cases()) CHECK_NOTHROW(c.profile(0.5));
}

TEST_CASE("pairwise sum") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(pairwise_sum({}) == 0.0);
}

TEST_CASE("relative error statistics") {
  const std::vector<double> est{1.1, 2.0, 0.5, 3.0};
  const std::vector<double> truth{1.0, 2.0, 0.0, 2.0};
  const RelativeErrorStats s = relative_errors(est, truth);
  CHECK(s.counted == 3);
  CHECK(s.excluded == 1);
  CHECK(s.mean == doctest::Approx((0.1 + 0.0 + 0.5) / 3));
  CHECK(s.max == doctest::Approx(0.5));
  CHECK(s.pooled == doctest::Approx(1.1 / 5.0));
}

TEST_CASE("Monte Carlo means are reproducible and thread independent") {
  SamplerConfig s;
  s.samples = 3000;
  s.seed = 11;
  ProtocolParams params;
  const IntensityProfile p = reference_case('B').profile(0.5);
  const RateStudyResult a = average_key_rate(p, s, params, 1);
  const RateStudyResult b = average_key_rate(p, s, params, 1);
  const RateStudyResult c = average_key_rate(p, s, params, 4);
  CHECK(a.mean == b.mean);
  CHECK(a.mean == c.mean);
  CHECK(a.std_error == c.std_error);
  CHECK(a.zero_rate == c.zero_rate);
  CHECK(a.samples == 3000);
  CHECK(a.mean > 0.0);
  CHECK(a.zero_fraction() > 0.0);
  CHECK(a.zero_fraction() < 1.0);
}

TEST_CASE("standard error shrinks as one over root N") {
  ProtocolParams params;
  params.mode = KeyMode::Asymptotic;
  const IntensityProfile p = reference_case('C').profile(0.5);
  SamplerConfig s;
  std::vector<double> scaled;
  for (std::uint64_t n : {1000u, 10000u}) {
    s.samples = n;
    scaled.push_back(average_key_rate(p, s, params).std_error * std::sqrt(static_cast<double>(n)));
  }
  CHECK(scaled[1] == doctest::Approx(scaled[0]).epsilon(0.2));
}

TEST_CASE("baseline study on a coarse grid") {
  BaselineStudyConfig cfg;
  cfg.grid = 2;
  cfg.sampler.samples = 4000;
  const BaselineStudyResult r = baseline_error_study(cfg);
  REQUIRE(r.configs.size() == 4);
  CHECK(r.configs[0].mu1 == 0.5);
  CHECK(r.configs[3].mu1 == 0.9);
  CHECK(r.configs[3].mu2 == doctest::Approx(0.1));
  CHECK(r.y1.counted + r.y1.excluded == 2 * 4000);
  // Larger signal intensity, larger truncation error.
  CHECK(r.configs[2].y1.mean > r.configs[0].y1.mean);
  CHECK(r.y1_worst_config_mean >= r.y1.mean);
  CHECK(baseline_error_study(cfg, 3).y1.mean == r.y1.mean);

  cfg.mu2_min = 0.5;
  cfg.mu2_max = 0.6;
  CHECK_THROWS(baseline_error_study(cfg));
}

TEST_CASE("generalized study tightens with more intensities") {
  SamplerConfig s;
  s.samples = 2000;
  s.y_max = 1.0;
  s.e_max = 0.5;
  const auto a = generalized_error_study(reference_case('A'), s);
  const auto g = generalized_error_study(reference_case('G'), s);
  CHECK(a.k == 3);
  CHECK(g.k == 6);
  CHECK(g.y1.pooled < a.y1.pooled / 4);
  CHECK(g.y1e1.pooled < a.y1e1.pooled / 50);
  CHECK(a.c2_estimate_y1 == doctest::Approx(0.66 * 0.05 / 6).epsilon(1e-12));
  CHECK(a.c2_estimate_y1e1 == doctest::Approx(0.05 / 2).epsilon(1e-12));
  CHECK(a.c2_exact_y1e1 == doctest::Approx(0.05 / 2).epsilon(1e-3));
}

TEST_CASE("simplex search") {
  auto rosen = [](const std::vector<double>& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  NelderMeadOptions o;
  o.max_evaluations = 5000;
  o.f_tolerance = 1e-14;
  o.x_tolerance = 1e-10;
  const auto r = nelder_mead(rosen, {-1.2, 1.0}, o);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.value < 1e-8);

  auto with_nan = [](const std::vector<double>& x) { return x[0] < 0 ? NAN : (x[0] - 2) * (x[0] - 2); };
  CHECK(nelder_mead(with_nan, {1.0}).x[0] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("profile coordinates round trip") {
  OptimizeOptions o;
  o.k = 4;
  const IntensityProfile p(IntensitySet({0.7, 0.3, 0.1, 1e-6}), {0.4, 0.3, 0.2, 0.1}, 0.85);
  const auto x = encode_profile(p, o);
  REQUIRE(x.size() == 7);
  const IntensityProfile q = decode_profile(x, o);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(q.intensities()[i] == doctest::Approx(p.intensities()[i]).epsilon(1e-12));
    CHECK(q.probability(i) == doctest::Approx(p.probability(i)).epsilon(1e-12));
  }
  CHECK(q.p_x() == doctest::Approx(0.85).epsilon(1e-12));
  const std::vector<double> wild{8, -8, 8, -8, 8, -8, 8};
  const IntensityProfile w = decode_profile(wild, o);
  CHECK(w.intensities()[0] <= 1.0);
  CHECK(w.intensities().least() == 1e-6);
  // Nested tiny fractions collapse below double resolution.
  const std::vector<double> collapse{-30, -30, -30, 0, 0, 0, 0};
  CHECK_THROWS_AS(decode_profile(collapse, o), Error);
}

TEST_CASE("optimizer returns a re-evaluable profile") {
  OptimizeOptions o;
  o.k = 3;
  o.restarts = 3;
  o.max_evaluations = 600;
  o.polish_rounds = 1;
  ProtocolParams params;
  const FiberChannelModel fiber;
  const OptimizeResult r = optimize_profile(fiber, params, o);
  CHECK(r.restart_rates.size() == 3);
  CHECK(r.evaluation.rate > 1.3e-5);
  CHECK(r.profile.intensities().least() == 1e-6);
  const RateEvaluation again = evaluate_rate(r.profile, params, exact_gains(fiber, r.profile.intensities(), false));
  CHECK(again.rate == r.evaluation.rate);

  o.threads = 3;
  CHECK(optimize_profile(fiber, params, o).evaluation.rate == r.evaluation.rate);

  o.k = 1;
  CHECK_THROWS_AS(optimize_profile(fiber, params, o), Error);
}

TEST_CASE("two intensities optimize to a positive rate") {
  OptimizeOptions o;
  o.k = 2;
  o.restarts = 4;
  o.max_evaluations = 800;
  const OptimizeResult r = optimize_profile(FiberChannelModel{}, ProtocolParams{}, o);
  CHECK(r.evaluation.rate >= 0.0);
  MESSAGE("k = 2 optimized rate: ", r.evaluation.rate);
}
