/* C interface to the nlsgd library.
 *
 * Every function returns an nlsgd_status; on failure the message is available
 * from nlsgd_last_error() on the calling thread until the next call. Strings
 * returned through char** are owned by the caller and released with
 * nlsgd_string_free(). Handles are not thread-safe for concurrent mutation;
 * const handles may be shared. */
#ifndef NLSGD_H
#define NLSGD_H

#include <stddef.h>
#include <stdint.h>

#if defined(NLSGD_BUILDING_LIBRARY)
#define NLSGD_API __attribute__((visibility("default")))
#else
#define NLSGD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nlsgd_status {
  NLSGD_OK = 0,
  NLSGD_ERR_INVALID_ARGUMENT = 1,
  NLSGD_ERR_UNSUPPORTED = 2,
  NLSGD_ERR_CONFIG = 3,
  NLSGD_ERR_IO = 4,
  NLSGD_ERR_NUMERIC = 5,
  NLSGD_ERR_INTERNAL = 6
} nlsgd_status;

typedef enum nlsgd_format { NLSGD_FORMAT_TEXT = 0, NLSGD_FORMAT_CSV = 1 } nlsgd_format;

typedef struct nlsgd_experiment nlsgd_experiment;
typedef struct nlsgd_nonlin nlsgd_nonlin;
typedef struct nlsgd_noise nlsgd_noise;
typedef struct nlsgd_rng nlsgd_rng;

NLSGD_API const char* nlsgd_version(void);
NLSGD_API const char* nlsgd_last_error(void);
NLSGD_API const char* nlsgd_status_name(nlsgd_status status);
NLSGD_API void nlsgd_string_free(char* s);

/* Experiments */
NLSGD_API nlsgd_status nlsgd_experiment_load(const char* path, nlsgd_experiment** out);
NLSGD_API nlsgd_status nlsgd_experiment_parse(const char* text, nlsgd_experiment** out);
NLSGD_API void nlsgd_experiment_free(nlsgd_experiment* e);
NLSGD_API nlsgd_status nlsgd_experiment_set_seed(nlsgd_experiment* e, uint64_t seed);
NLSGD_API nlsgd_status nlsgd_experiment_set_runs(nlsgd_experiment* e, uint64_t runs);
NLSGD_API nlsgd_status nlsgd_experiment_set_threads(nlsgd_experiment* e, unsigned threads);
/* Restricts later calls to one arm; NULL or "" clears the filter. */
NLSGD_API nlsgd_status nlsgd_experiment_set_arm(nlsgd_experiment* e, const char* arm);
NLSGD_API nlsgd_status nlsgd_experiment_canonical(const nlsgd_experiment* e, char** out);

/* Runs every selected arm and writes <arm>__<metric>.csv, plot scripts and a
 * manifest into out_dir. */
NLSGD_API nlsgd_status nlsgd_simulate(const nlsgd_experiment* e, const char* out_dir);
NLSGD_API nlsgd_status nlsgd_tailprob(const nlsgd_experiment* e, const char* out_dir);
NLSGD_API nlsgd_status nlsgd_theory(const nlsgd_experiment* e, nlsgd_format format, char** out);
/* *passed is 1 when every check passed. */
NLSGD_API nlsgd_status nlsgd_verify(const nlsgd_experiment* e, char** report, int* passed);
/* Writes projection.csv (n rows of x,y) when out_dir is non-NULL. */
NLSGD_API nlsgd_status nlsgd_project(const nlsgd_experiment* e, const char* out_dir, char** summary);

/* Random streams */
NLSGD_API nlsgd_status nlsgd_rng_create(uint64_t seed, uint64_t stream, nlsgd_rng** out);
NLSGD_API void nlsgd_rng_free(nlsgd_rng* rng);
NLSGD_API nlsgd_status nlsgd_rng_uniform(nlsgd_rng* rng, double* out);

/* Nonlinearities. type: "sign", "comp_clip" (param = m), "normalize",
 * "joint_clip" (param = M). */
NLSGD_API nlsgd_status nlsgd_nonlin_create(const char* type, size_t dim, double param, nlsgd_nonlin** out);
NLSGD_API nlsgd_status nlsgd_nonlin_create_quantizer(size_t dim, size_t levels, double range, nlsgd_nonlin** out);
NLSGD_API void nlsgd_nonlin_free(nlsgd_nonlin* map);
NLSGD_API nlsgd_status nlsgd_nonlin_apply(const nlsgd_nonlin* map, const double* x, size_t n, double* out);
NLSGD_API nlsgd_status nlsgd_nonlin_bound(const nlsgd_nonlin* map, double* out);
/* *passed is 1 when every axiom check passed. */
NLSGD_API nlsgd_status nlsgd_nonlin_check_axioms(const nlsgd_nonlin* map, size_t samples, uint64_t seed, int* passed);

/* Noise models. type: "power_tail" (p1 = alpha), "log_squared", "cauchy"
 * (p1 = x0, p2 = gamma), "radial_power_tail" (p1 = alpha), "point_mass". */
NLSGD_API nlsgd_status nlsgd_noise_create(const char* type, size_t dim, double p1, double p2, nlsgd_noise** out);
NLSGD_API nlsgd_status nlsgd_noise_create_mixture(double lambda, const nlsgd_noise* symmetric,
                                                  const nlsgd_noise* nonsymmetric, nlsgd_noise** out);
NLSGD_API nlsgd_status nlsgd_noise_create_shifted(const nlsgd_noise* base, double offset, nlsgd_noise** out);
NLSGD_API void nlsgd_noise_free(nlsgd_noise* noise);
NLSGD_API nlsgd_status nlsgd_noise_sample(const nlsgd_noise* noise, nlsgd_rng* rng, double* out, size_t n);
NLSGD_API nlsgd_status nlsgd_noise_density(const nlsgd_noise* noise, const double* z, size_t n, double* out);
NLSGD_API nlsgd_status nlsgd_noise_marginal_cdf(const nlsgd_noise* noise, double z, double* out);

/* Closed-form constants */
NLSGD_API nlsgd_status nlsgd_eta_constants(const nlsgd_nonlin* map, const nlsgd_noise* noise, double* eta1,
                                           double* eta2);
NLSGD_API nlsgd_status nlsgd_zeta(double delta, double a, double mu, double gamma, double* out);
NLSGD_API nlsgd_status nlsgd_competitor_rates(double p, double* nonconvex_exp, double* strongly_convex_exp);
NLSGD_API nlsgd_status nlsgd_mixture_neighborhood(double lambda, double eta1, double eta2, double C, double* size,
                                                  double* lambda_max);

#ifdef __cplusplus
}
#endif

#endif
