/* C interface to the decoy-state key-rate library. */
#ifndef DECOY_DECOY_H
#define DECOY_DECOY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DECOY_BUILDING_LIBRARY)
#define DECOY_API __declspec(dllexport)
#else
#define DECOY_API __declspec(dllimport)
#endif
#else
#define DECOY_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum decoy_status {
  DECOY_OK = 0,
  DECOY_ERR_INVALID_ARGUMENT = 1,
  DECOY_ERR_CONFIGURATION = 2,
  DECOY_ERR_DEGENERATE = 3,
  DECOY_ERR_PARSE = 4,
  DECOY_ERR_BUFFER_TOO_SMALL = 5,
  DECOY_ERR_INTERNAL = 6
} decoy_status;

typedef enum decoy_key_mode { DECOY_MODE_FINITE = 0, DECOY_MODE_ASYMPTOTIC = 1 } decoy_key_mode;

typedef enum decoy_chi_policy {
  DECOY_CHI_GENERAL = 0, /* 9 + (4k - 2) */
  DECOY_CHI_LIM = 1      /* 21, k = 3 only */
} decoy_chi_policy;

typedef enum decoy_bound_method { DECOY_BOUNDS_GENERALIZED = 0, DECOY_BOUNDS_BASELINE = 1 } decoy_bound_method;

typedef struct decoy_profile decoy_profile;
typedef struct decoy_channel decoy_channel;
typedef struct decoy_baseline_study decoy_baseline_study;

typedef struct decoy_protocol {
  double s_x;
  double eps_cor;
  double kappa;
  int chi_policy;   /* decoy_chi_policy */
  int mode;         /* decoy_key_mode */
  int bound_method; /* decoy_bound_method */
} decoy_protocol;

typedef struct decoy_fiber {
  double p_ap;
  double p_dc;
  double e_mis;
  double eta_ch;
  double eta_sys;
} decoy_fiber;

typedef struct decoy_sampler {
  double y_max;
  double e_max;
  uint64_t seed;
  uint64_t samples;
  int max_photon_number;
} decoy_sampler;

typedef struct decoy_bounds {
  double y_x0_lower;
  double y_x1_lower;
  double y_z0_lower;
  double y_z1_lower;
  double y1e1_z_upper;
  double e_z1_upper;
  double e_p_upper; /* meaningful only when e_p_defined */
  int e_p_defined;
} decoy_bounds;

typedef struct decoy_rate_report {
  double rate;
  double eps_sec;
  double final_length; /* infinite in asymptotic mode */
  int converged;
  int ill_defined;
  int iterations;
  decoy_bounds bounds;
} decoy_rate_report;

typedef struct decoy_rate_study {
  double mean;
  double std_error;
  uint64_t samples;
  uint64_t zero_rate;
  uint64_t ill_defined;
  uint64_t unconverged;
} decoy_rate_study;

typedef struct decoy_optimize_options {
  int k;
  int restarts;
  double mu_min;
  double mu_max;
  uint64_t seed;
  int max_evaluations;
  int polish_rounds;
  unsigned threads;
} decoy_optimize_options;

typedef struct decoy_relative_error {
  double mean;
  double max;
  double pooled;
  uint64_t counted;
  uint64_t excluded;
} decoy_relative_error;

typedef struct decoy_baseline_config {
  double mu1_min, mu1_max;
  double mu2_min, mu2_max;
  double mu3;
  int grid;
  decoy_sampler sampler;
} decoy_baseline_config;

typedef struct decoy_baseline_point {
  double mu1, mu2, mu3;
  decoy_relative_error y1;
  decoy_relative_error y1h2;
} decoy_baseline_point;

typedef struct decoy_baseline_summary {
  decoy_relative_error y1;
  decoy_relative_error y1h2;
  double y1_worst_config_mean;
  double y1h2_worst_config_mean;
} decoy_baseline_summary;

typedef struct decoy_generalized_result {
  char label;
  int k;
  decoy_relative_error y1;
  decoy_relative_error y1e1;
  double c2_estimate_y1;
  double c2_estimate_y1e1;
  double c2_exact_y1;
  double c2_exact_y1e1;
} decoy_generalized_result;

/* Defaults */
DECOY_API void decoy_protocol_defaults(decoy_protocol* out);
DECOY_API void decoy_fiber_defaults(decoy_fiber* out);
DECOY_API void decoy_sampler_defaults(decoy_sampler* out);
DECOY_API void decoy_optimize_defaults(decoy_optimize_options* out);
DECOY_API void decoy_baseline_defaults(decoy_baseline_config* out);

/* Diagnostics. The message of the last failed call is kept per thread. */
DECOY_API const char* decoy_status_string(decoy_status status);
DECOY_API const char* decoy_last_error(void);
typedef void (*decoy_warning_fn)(const char* message, void* user);
/* NULL restores the default stderr handler. */
DECOY_API void decoy_set_warning_handler(decoy_warning_fn fn, void* user);

/* Profiles: intensities strictly decreasing. */
DECOY_API decoy_status decoy_profile_create(const double* intensities, const double* probabilities, size_t k,
                                            double p_x, decoy_profile** out);
/* Reference configurations 'A'..'H'. */
DECOY_API decoy_status decoy_profile_reference(char label, double p_x, decoy_profile** out);
DECOY_API void decoy_profile_destroy(decoy_profile* profile);
DECOY_API size_t decoy_profile_size(const decoy_profile* profile);
/* Either array may be NULL; non-NULL arrays need decoy_profile_size() slots. */
DECOY_API decoy_status decoy_profile_get(const decoy_profile* profile, double* intensities, double* probabilities,
                                         double* p_x);

/* Channels: photon-number yields and error rates, index m = 0..len-1. */
DECOY_API decoy_status decoy_channel_create(const double* yields_x, const double* errors_x, const double* yields_z,
                                            const double* errors_z, size_t len, decoy_channel** out);
DECOY_API decoy_status decoy_channel_sample(const decoy_sampler* sampler, uint64_t index, decoy_channel** out);
DECOY_API decoy_status decoy_channel_parse(const char* text, decoy_channel** out);
/* Writes a NUL-terminated record. *needed receives the size including the NUL. */
DECOY_API decoy_status decoy_channel_to_text(const decoy_channel* channel, char* buffer, size_t capacity,
                                             size_t* needed);
DECOY_API void decoy_channel_destroy(decoy_channel* channel);

/* Key rates on exact gains. */
DECOY_API decoy_status decoy_rate_fiber(const decoy_profile* profile, const decoy_fiber* fiber,
                                        const decoy_protocol* protocol, decoy_rate_report* out);
DECOY_API decoy_status decoy_rate_channel(const decoy_profile* profile, const decoy_channel* channel,
                                          const decoy_protocol* protocol, decoy_rate_report* out);

/* Monte Carlo mean over sampled channels. */
DECOY_API decoy_status decoy_average_rate(const decoy_profile* profile, const decoy_sampler* sampler,
                                          const decoy_protocol* protocol, unsigned threads, decoy_rate_study* out);

/* restart_rates may be NULL or hold options->restarts slots. */
DECOY_API decoy_status decoy_optimize(const decoy_fiber* fiber, const decoy_protocol* protocol,
                                      const decoy_optimize_options* options, decoy_profile** best,
                                      decoy_rate_report* report, double* restart_rates, int* evaluations);

/* Error studies. */
DECOY_API decoy_status decoy_baseline_study_run(const decoy_baseline_config* config, unsigned threads,
                                                decoy_baseline_study** out);
DECOY_API size_t decoy_baseline_study_points(const decoy_baseline_study* study);
DECOY_API decoy_status decoy_baseline_study_point(const decoy_baseline_study* study, size_t index,
                                                  decoy_baseline_point* out);
DECOY_API decoy_status decoy_baseline_study_summary(const decoy_baseline_study* study, decoy_baseline_summary* out);
DECOY_API void decoy_baseline_study_destroy(decoy_baseline_study* study);

DECOY_API decoy_status decoy_generalized_study(char label, const decoy_sampler* sampler, unsigned threads,
                                               decoy_generalized_result* out);

#ifdef __cplusplus
}
#endif

#endif
