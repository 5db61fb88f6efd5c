#include "decoy/decoy.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "decoy/channel.hpp"
#include "decoy/error.hpp"
#include "decoy/experiments.hpp"
#include "decoy/keyrate.hpp"

struct decoy_profile {
  decoy::IntensityProfile value;
};

struct decoy_channel {
  decoy::ChannelTruth value;
};

struct decoy_baseline_study {
  decoy::BaselineStudyResult value;
};

namespace {

thread_local std::string last_error;

decoy_status set_error(decoy_status status, const char* what) {
  last_error = what;
  return status;
}

template <class F>
decoy_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return DECOY_OK;
  } catch (const decoy::Error& e) {
    switch (e.kind()) {
      case decoy::ErrorKind::InvalidArgument: return set_error(DECOY_ERR_INVALID_ARGUMENT, e.what());
      case decoy::ErrorKind::Configuration: return set_error(DECOY_ERR_CONFIGURATION, e.what());
      case decoy::ErrorKind::Degenerate: return set_error(DECOY_ERR_DEGENERATE, e.what());
      case decoy::ErrorKind::Parse: return set_error(DECOY_ERR_PARSE, e.what());
    }
    return set_error(DECOY_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(DECOY_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(DECOY_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* name) {
  if (!p) decoy::fail(decoy::ErrorKind::InvalidArgument, std::string(name) + " is NULL");
}

decoy::ProtocolParams to_params(const decoy_protocol* p) {
  need(p, "protocol");
  decoy::ProtocolParams out;
  out.s_x = p->s_x;
  out.eps_cor = p->eps_cor;
  out.kappa = p->kappa;
  switch (p->chi_policy) {
    case DECOY_CHI_GENERAL: out.chi_policy = decoy::ChiPolicy::General; break;
    case DECOY_CHI_LIM: out.chi_policy = decoy::ChiPolicy::LimBaseline; break;
    default: decoy::fail(decoy::ErrorKind::InvalidArgument, "unknown chi policy");
  }
  switch (p->mode) {
    case DECOY_MODE_FINITE: out.mode = decoy::KeyMode::Finite; break;
    case DECOY_MODE_ASYMPTOTIC: out.mode = decoy::KeyMode::Asymptotic; break;
    default: decoy::fail(decoy::ErrorKind::InvalidArgument, "unknown key mode");
  }
  switch (p->bound_method) {
    case DECOY_BOUNDS_GENERALIZED: out.bound_method = decoy::BoundMethod::Generalized; break;
    case DECOY_BOUNDS_BASELINE: out.bound_method = decoy::BoundMethod::Baseline; break;
    default: decoy::fail(decoy::ErrorKind::InvalidArgument, "unknown bound method");
  }
  out.validate();
  return out;
}

decoy::FiberChannelModel to_fiber(const decoy_fiber* f) {
  need(f, "fiber");
  decoy::FiberChannelModel out{f->p_ap, f->p_dc, f->e_mis, f->eta_ch, f->eta_sys};
  out.validate();
  return out;
}

decoy::SamplerConfig to_sampler(const decoy_sampler* s) {
  need(s, "sampler");
  decoy::SamplerConfig out{s->y_max, s->e_max, s->seed, s->samples, s->max_photon_number};
  out.validate();
  return out;
}

void fill_report(const decoy::RateEvaluation& ev, decoy_rate_report* out) {
  out->rate = ev.rate;
  out->eps_sec = ev.eps_sec;
  out->final_length = ev.final_length;
  out->converged = ev.converged;
  out->ill_defined = ev.ill_defined;
  out->iterations = ev.iterations;
  out->bounds.y_x0_lower = ev.bounds.y_x0_lower;
  out->bounds.y_x1_lower = ev.bounds.y_x1_lower;
  out->bounds.y_z0_lower = ev.bounds.y_z0_lower;
  out->bounds.y_z1_lower = ev.bounds.y_z1_lower;
  out->bounds.y1e1_z_upper = ev.bounds.y1e1_z_upper;
  out->bounds.e_z1_upper = ev.bounds.e_z1_upper;
  out->bounds.e_p_defined = ev.bounds.e_p_upper.has_value();
  out->bounds.e_p_upper = ev.bounds.e_p_upper.value_or(0.0);
}

decoy_relative_error to_c(const decoy::RelativeErrorStats& s) {
  return {s.mean, s.max, s.pooled, s.counted, s.excluded};
}

}  // namespace

extern "C" {

void decoy_protocol_defaults(decoy_protocol* out) {
  if (!out) return;
  const decoy::ProtocolParams d;
  *out = {d.s_x, d.eps_cor, d.kappa, DECOY_CHI_GENERAL, DECOY_MODE_FINITE, DECOY_BOUNDS_GENERALIZED};
}

void decoy_fiber_defaults(decoy_fiber* out) {
  if (!out) return;
  const decoy::FiberChannelModel d;
  *out = {d.p_ap, d.p_dc, d.e_mis, d.eta_ch, d.eta_sys};
}

void decoy_sampler_defaults(decoy_sampler* out) {
  if (!out) return;
  const decoy::SamplerConfig d;
  *out = {d.y_max, d.e_max, d.seed, d.samples, d.max_photon_number};
}

void decoy_optimize_defaults(decoy_optimize_options* out) {
  if (!out) return;
  const decoy::OptimizeOptions d;
  *out = {d.k, d.restarts, d.mu_min, d.mu_max, d.seed, d.max_evaluations, d.polish_rounds, d.threads};
}

void decoy_baseline_defaults(decoy_baseline_config* out) {
  if (!out) return;
  const decoy::BaselineStudyConfig d;
  const auto& s = d.sampler;
  *out = {d.mu1_min, d.mu1_max, d.mu2_min, d.mu2_max, d.mu3, d.grid,
          {s.y_max, s.e_max, s.seed, s.samples, s.max_photon_number}};
}

const char* decoy_status_string(decoy_status status) {
  switch (status) {
    case DECOY_OK: return "ok";
    case DECOY_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DECOY_ERR_CONFIGURATION: return "unsupported configuration";
    case DECOY_ERR_DEGENERATE: return "degenerate intensities";
    case DECOY_ERR_PARSE: return "parse error";
    case DECOY_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case DECOY_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* decoy_last_error(void) { return last_error.c_str(); }

void decoy_set_warning_handler(decoy_warning_fn fn, void* user) {
  if (!fn) {
    decoy::set_warning_handler({});
    return;
  }
  decoy::set_warning_handler([fn, user](std::string_view msg) {
    const std::string copy(msg);
    fn(copy.c_str(), user);
  });
}

decoy_status decoy_profile_create(const double* intensities, const double* probabilities, size_t k, double p_x,
                                  decoy_profile** out) {
  return guarded([&] {
    need(intensities, "intensities");
    need(probabilities, "probabilities");
    need(out, "out");
    *out = nullptr;
    decoy::IntensitySet set(std::vector<double>(intensities, intensities + k));
    *out = new decoy_profile{
        decoy::IntensityProfile(std::move(set), std::vector<double>(probabilities, probabilities + k), p_x)};
  });
}

decoy_status decoy_profile_reference(char label, double p_x, decoy_profile** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new decoy_profile{decoy::reference_case(label).profile(p_x)};
  });
}

void decoy_profile_destroy(decoy_profile* profile) { delete profile; }

size_t decoy_profile_size(const decoy_profile* profile) { return profile ? profile->value.size() : 0; }

decoy_status decoy_profile_get(const decoy_profile* profile, double* intensities, double* probabilities,
                               double* p_x) {
  return guarded([&] {
    need(profile, "profile");
    const auto& p = profile->value;
    for (size_t i = 0; i < p.size(); ++i) {
      if (intensities) intensities[i] = p.intensities()[i];
      if (probabilities) probabilities[i] = p.probability(i);
    }
    if (p_x) *p_x = p.p_x();
  });
}

decoy_status decoy_channel_create(const double* yields_x, const double* errors_x, const double* yields_z,
                                  const double* errors_z, size_t len, decoy_channel** out) {
  return guarded([&] {
    need(yields_x, "yields_x");
    need(errors_x, "errors_x");
    need(yields_z, "yields_z");
    need(errors_z, "errors_z");
    need(out, "out");
    *out = nullptr;
    decoy::ChannelTruth t;
    t.yields = {std::vector<double>(yields_x, yields_x + len), std::vector<double>(yields_z, yields_z + len)};
    t.errors = {std::vector<double>(errors_x, errors_x + len), std::vector<double>(errors_z, errors_z + len)};
    t.validate();
    *out = new decoy_channel{std::move(t)};
  });
}

decoy_status decoy_channel_sample(const decoy_sampler* sampler, uint64_t index, decoy_channel** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    *out = new decoy_channel{decoy::sample_random_channel(to_sampler(sampler), index)};
  });
}

decoy_status decoy_channel_parse(const char* text, decoy_channel** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = nullptr;
    *out = new decoy_channel{decoy::channel_truth_from_text(text)};
  });
}

decoy_status decoy_channel_to_text(const decoy_channel* channel, char* buffer, size_t capacity, size_t* needed) {
  decoy_status status = DECOY_OK;
  const decoy_status st = guarded([&] {
    need(channel, "channel");
    const std::string text = decoy::to_text(channel->value);
    if (needed) *needed = text.size() + 1;
    if (!buffer || capacity < text.size() + 1) {
      status = DECOY_ERR_BUFFER_TOO_SMALL;
      return;
    }
    std::memcpy(buffer, text.c_str(), text.size() + 1);
  });
  if (st != DECOY_OK) return st;
  if (status != DECOY_OK) return set_error(status, "output buffer is too small");
  return DECOY_OK;
}

void decoy_channel_destroy(decoy_channel* channel) { delete channel; }

decoy_status decoy_rate_fiber(const decoy_profile* profile, const decoy_fiber* fiber, const decoy_protocol* protocol,
                              decoy_rate_report* out) {
  return guarded([&] {
    need(profile, "profile");
    need(out, "out");
    const auto params = to_params(protocol);
    const auto gains = decoy::exact_gains(to_fiber(fiber), profile->value.intensities());
    fill_report(decoy::evaluate_rate(profile->value, params, gains), out);
  });
}

decoy_status decoy_rate_channel(const decoy_profile* profile, const decoy_channel* channel,
                                const decoy_protocol* protocol, decoy_rate_report* out) {
  return guarded([&] {
    need(profile, "profile");
    need(channel, "channel");
    need(out, "out");
    const auto params = to_params(protocol);
    const auto gains = decoy::exact_gains(channel->value, profile->value.intensities());
    fill_report(decoy::evaluate_rate(profile->value, params, gains), out);
  });
}

decoy_status decoy_average_rate(const decoy_profile* profile, const decoy_sampler* sampler,
                                const decoy_protocol* protocol, unsigned threads, decoy_rate_study* out) {
  return guarded([&] {
    need(profile, "profile");
    need(out, "out");
    const auto r = decoy::average_key_rate(profile->value, to_sampler(sampler), to_params(protocol), threads);
    *out = {r.mean, r.std_error, r.samples, r.zero_rate, r.ill_defined, r.unconverged};
  });
}

decoy_status decoy_optimize(const decoy_fiber* fiber, const decoy_protocol* protocol,
                            const decoy_optimize_options* options, decoy_profile** best, decoy_rate_report* report,
                            double* restart_rates, int* evaluations) {
  return guarded([&] {
    need(options, "options");
    need(best, "best");
    *best = nullptr;
    decoy::OptimizeOptions opt;
    opt.k = options->k;
    opt.restarts = options->restarts;
    opt.mu_min = options->mu_min;
    opt.mu_max = options->mu_max;
    opt.seed = options->seed;
    opt.max_evaluations = options->max_evaluations;
    opt.polish_rounds = options->polish_rounds;
    opt.threads = options->threads;
    auto r = decoy::optimize_profile(to_fiber(fiber), to_params(protocol), opt);
    if (report) fill_report(r.evaluation, report);
    if (restart_rates) std::copy(r.restart_rates.begin(), r.restart_rates.end(), restart_rates);
    if (evaluations) *evaluations = r.evaluations;
    *best = new decoy_profile{std::move(r.profile)};
  });
}

decoy_status decoy_baseline_study_run(const decoy_baseline_config* config, unsigned threads,
                                      decoy_baseline_study** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    decoy::BaselineStudyConfig c;
    c.mu1_min = config->mu1_min;
    c.mu1_max = config->mu1_max;
    c.mu2_min = config->mu2_min;
    c.mu2_max = config->mu2_max;
    c.mu3 = config->mu3;
    c.grid = config->grid;
    c.sampler = to_sampler(&config->sampler);
    *out = new decoy_baseline_study{decoy::baseline_error_study(c, threads)};
  });
}

size_t decoy_baseline_study_points(const decoy_baseline_study* study) {
  return study ? study->value.configs.size() : 0;
}

decoy_status decoy_baseline_study_point(const decoy_baseline_study* study, size_t index, decoy_baseline_point* out) {
  return guarded([&] {
    need(study, "study");
    need(out, "out");
    decoy::require(index < study->value.configs.size(), "point index out of range");
    const auto& c = study->value.configs[index];
    *out = {c.mu1, c.mu2, c.mu3, to_c(c.y1), to_c(c.y1h2)};
  });
}

decoy_status decoy_baseline_study_summary(const decoy_baseline_study* study, decoy_baseline_summary* out) {
  return guarded([&] {
    need(study, "study");
    need(out, "out");
    const auto& s = study->value;
    *out = {to_c(s.y1), to_c(s.y1h2), s.y1_worst_config_mean, s.y1h2_worst_config_mean};
  });
}

void decoy_baseline_study_destroy(decoy_baseline_study* study) { delete study; }

decoy_status decoy_generalized_study(char label, const decoy_sampler* sampler, unsigned threads,
                                     decoy_generalized_result* out) {
  return guarded([&] {
    need(out, "out");
    const auto r = decoy::generalized_error_study(decoy::reference_case(label), to_sampler(sampler), threads);
    *out = {r.label, r.k, to_c(r.y1), to_c(r.y1e1), r.c2_estimate_y1, r.c2_estimate_y1e1, r.c2_exact_y1,
            r.c2_exact_y1e1};
  });
}

}  // extern "C"
