#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "decoy/decoy.h"

TEST_CASE("C API: profiles") {
  const double mu[] = {0.6, 0.2, 0.0};
  const double pr[] = {0.5, 0.25, 0.25};
  decoy_profile* p = nullptr;
  REQUIRE(decoy_profile_create(mu, pr, 3, 0.7, &p) == DECOY_OK);
  CHECK(decoy_profile_size(p) == 3);
  double mu_out[3], pr_out[3], p_x = 0;
  CHECK(decoy_profile_get(p, mu_out, pr_out, &p_x) == DECOY_OK);
  CHECK(mu_out[1] == 0.2);
  CHECK(pr_out[2] == 0.25);
  CHECK(p_x == 0.7);
  decoy_profile_destroy(p);

  const double bad_mu[] = {0.2, 0.6, 0.0};
  decoy_profile* q = reinterpret_cast<decoy_profile*>(0x1);
  CHECK(decoy_profile_create(bad_mu, pr, 3, 0.7, &q) == DECOY_ERR_INVALID_ARGUMENT);
  CHECK(q == nullptr);
  CHECK(std::string(decoy_last_error()).find("decreasing") != std::string::npos);
  CHECK(decoy_profile_create(nullptr, pr, 3, 0.7, &q) == DECOY_ERR_INVALID_ARGUMENT);

  CHECK(decoy_profile_reference('Q', 0.5, &q) == DECOY_ERR_INVALID_ARGUMENT);
  REQUIRE(decoy_profile_reference('D', 0.5, &q) == DECOY_OK);
  CHECK(decoy_profile_size(q) == 4);
  decoy_profile_destroy(q);
  decoy_profile_destroy(nullptr);
}

TEST_CASE("C API: fiber rate") {
  const double mu[] = {0.196, 0.102, 1e-6};
  const double pr[] = {0.606, 0.272, 0.122};
  decoy_profile* p = nullptr;
  REQUIRE(decoy_profile_create(mu, pr, 3, 0.907, &p) == DECOY_OK);
  decoy_fiber f;
  decoy_fiber_defaults(&f);
  decoy_protocol proto;
  decoy_protocol_defaults(&proto);
  decoy_rate_report r;
  REQUIRE(decoy_rate_fiber(p, &f, &proto, &r) == DECOY_OK);
  CHECK(r.rate == doctest::Approx(1.4985237052040442e-05).epsilon(1e-9));
  CHECK(r.converged == 1);
  CHECK(r.bounds.e_p_defined == 1);

  proto.mode = DECOY_MODE_ASYMPTOTIC;
  REQUIRE(decoy_rate_fiber(p, &f, &proto, &r) == DECOY_OK);
  CHECK(std::isinf(r.final_length));

  proto.chi_policy = 7;
  CHECK(decoy_rate_fiber(p, &f, &proto, &r) == DECOY_ERR_INVALID_ARGUMENT);
  decoy_protocol_defaults(&proto);
  proto.bound_method = DECOY_BOUNDS_BASELINE;
  CHECK(decoy_rate_fiber(p, &f, &proto, &r) == DECOY_OK);
  decoy_profile_destroy(p);

  decoy_profile* four = nullptr;
  REQUIRE(decoy_profile_reference('C', 0.5, &four) == DECOY_OK);
  proto.chi_policy = DECOY_CHI_LIM;
  proto.bound_method = DECOY_BOUNDS_GENERALIZED;
  CHECK(decoy_rate_fiber(four, &f, &proto, &r) == DECOY_ERR_CONFIGURATION);
  decoy_profile_destroy(four);
}

TEST_CASE("C API: channels") {
  decoy_sampler s;
  decoy_sampler_defaults(&s);
  decoy_channel* c = nullptr;
  REQUIRE(decoy_channel_sample(&s, 5, &c) == DECOY_OK);
  size_t needed = 0;
  CHECK(decoy_channel_to_text(c, nullptr, 0, &needed) == DECOY_ERR_BUFFER_TOO_SMALL);
  REQUIRE(needed > 10);
  std::vector<char> buf(needed);
  REQUIRE(decoy_channel_to_text(c, buf.data(), buf.size(), &needed) == DECOY_OK);
  decoy_channel* back = nullptr;
  REQUIRE(decoy_channel_parse(buf.data(), &back) == DECOY_OK);
  std::vector<char> buf2(needed);
  REQUIRE(decoy_channel_to_text(back, buf2.data(), buf2.size(), nullptr) == DECOY_OK);
  CHECK(std::string(buf.data()) == std::string(buf2.data()));

  decoy_profile* p = nullptr;
  REQUIRE(decoy_profile_reference('A', 0.5, &p) == DECOY_OK);
  decoy_protocol proto;
  decoy_protocol_defaults(&proto);
  decoy_rate_report r1, r2;
  REQUIRE(decoy_rate_channel(p, c, &proto, &r1) == DECOY_OK);
  REQUIRE(decoy_rate_channel(p, back, &proto, &r2) == DECOY_OK);
  CHECK(r1.rate == r2.rate);

  CHECK(decoy_channel_parse("{ nope", &back) == DECOY_ERR_PARSE);
  decoy_channel_destroy(c);

  const double y[] = {0.1, 0.2}, e[] = {0.5, 0.01}, ebad[] = {0.3, 0.01};
  CHECK(decoy_channel_create(y, e, y, e, 2, &c) == DECOY_OK);
  decoy_channel_destroy(c);
  CHECK(decoy_channel_create(y, ebad, y, e, 2, &c) == DECOY_ERR_INVALID_ARGUMENT);
  decoy_profile_destroy(p);
}

TEST_CASE("C API: studies") {
  decoy_profile* p = nullptr;
  REQUIRE(decoy_profile_reference('B', 0.5, &p) == DECOY_OK);
  decoy_sampler s;
  decoy_sampler_defaults(&s);
  s.samples = 500;
  decoy_protocol proto;
  decoy_protocol_defaults(&proto);
  decoy_rate_study a, b;
  REQUIRE(decoy_average_rate(p, &s, &proto, 1, &a) == DECOY_OK);
  REQUIRE(decoy_average_rate(p, &s, &proto, 2, &b) == DECOY_OK);
  CHECK(a.mean == b.mean);
  CHECK(a.samples == 500);
  decoy_profile_destroy(p);

  decoy_baseline_config cfg;
  decoy_baseline_defaults(&cfg);
  cfg.grid = 2;
  cfg.sampler.samples = 400;
  decoy_baseline_study* study = nullptr;
  REQUIRE(decoy_baseline_study_run(&cfg, 1, &study) == DECOY_OK);
  CHECK(decoy_baseline_study_points(study) == 4);
  decoy_baseline_point pt;
  CHECK(decoy_baseline_study_point(study, 3, &pt) == DECOY_OK);
  CHECK(pt.mu1 == 0.9);
  CHECK(decoy_baseline_study_point(study, 4, &pt) == DECOY_ERR_INVALID_ARGUMENT);
  decoy_baseline_summary sum;
  CHECK(decoy_baseline_study_summary(study, &sum) == DECOY_OK);
  CHECK(sum.y1.counted + sum.y1.excluded == 800);
  decoy_baseline_study_destroy(study);

  decoy_generalized_result g;
  s.samples = 200;
  REQUIRE(decoy_generalized_study('H', &s, 1, &g) == DECOY_OK);
  CHECK(g.label == 'H');
  CHECK(g.k == 6);
}

namespace {
int warnings_seen = 0;
void on_warning(const char*, void* user) { ++*static_cast<int*>(user); }
}  // namespace

TEST_CASE("C API: optimizer and warnings") {
  decoy_set_warning_handler(on_warning, &warnings_seen);
  const double mu[] = {0.5, 0.49, 0.0};
  const double pr[] = {0.5, 0.25, 0.25};
  decoy_profile* p = nullptr;
  REQUIRE(decoy_profile_create(mu, pr, 3, 0.7, &p) == DECOY_OK);
  CHECK(warnings_seen == 1);
  decoy_profile_destroy(p);

  decoy_fiber f;
  decoy_fiber_defaults(&f);
  decoy_protocol proto;
  decoy_protocol_defaults(&proto);
  decoy_optimize_options o;
  decoy_optimize_defaults(&o);
  CHECK(o.restarts == 20);
  o.restarts = 2;
  o.max_evaluations = 300;
  o.polish_rounds = 0;
  std::vector<double> rates(2);
  decoy_rate_report r;
  int evals = 0;
  decoy_profile* best = nullptr;
  REQUIRE(decoy_optimize(&f, &proto, &o, &best, &r, rates.data(), &evals) == DECOY_OK);
  CHECK(r.rate > 0.0);
  CHECK(std::max(rates[0], rates[1]) == r.rate);
  CHECK(evals > 0);
  decoy_profile_destroy(best);
  o.k = 9;
  CHECK(decoy_optimize(&f, &proto, &o, &best, &r, nullptr, nullptr) == DECOY_ERR_INVALID_ARGUMENT);
  decoy_set_warning_handler(nullptr, nullptr);

  CHECK(std::string(decoy_status_string(DECOY_ERR_PARSE)) == "parse error");
}
