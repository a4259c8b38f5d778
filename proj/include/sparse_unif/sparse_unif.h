/* C interface to the sparse uniformity testing library.
 *
 * Every function returns an su_status. On failure the message is available
 * from su_last_error() until the next call on the same thread. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with su_string_free. */
#ifndef SPARSE_UNIF_H
#define SPARSE_UNIF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SU_API __declspec(dllexport)
#else
#define SU_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum su_status {
  SU_OK = 0,
  SU_ERR_DOMAIN = 1,
  SU_ERR_INFEASIBLE = 2,
  SU_ERR_CONFIG = 3,
  SU_ERR_IO = 4,
  SU_ERR_NULL_ARGUMENT = 5,
  SU_ERR_INTERNAL = 6
} su_status;

typedef struct su_histogram su_histogram;
typedef struct su_test su_test;

typedef struct su_params {
  uint64_t n;
  uint64_t d;
  uint64_t s;
  double alpha;
  double epsilon;
} su_params;

typedef struct su_seed {
  uint64_t root_seed;
  uint64_t stream_id;
} su_seed;

typedef struct su_test_options {
  const char* statistic;   /* chisq | max_std | max_count | ghc | combined */
  const char* calibration; /* analytic | monte_carlo */
  double level;
  uint64_t replications; /* B for monte_carlo */
  su_seed seed;
  const char* scheme; /* null draws: multinomial | poissonized */
  double max_c;       /* > 1 */
  int one_sided;
  int normal_approximation;
  unsigned threads; /* 0: SPARSE_UNIF_THREADS or 1 */
} su_test_options;

SU_API const char* su_version(void);
SU_API const char* su_last_error(void);
SU_API void su_string_free(char* s);

/* Fills s = round(d^(1-alpha)); alpha = 1 - ln s / ln d when only s is known. */
SU_API su_status su_params_from_alpha(uint64_t n, uint64_t d, double alpha, double epsilon, su_params* out);
SU_API su_status su_params_from_sparsity(uint64_t n, uint64_t d, uint64_t s, double epsilon, su_params* out);

SU_API su_status su_histogram_create(const uint64_t* counts, size_t d, uint64_t n, const char* scheme,
                                     su_histogram** out);
SU_API su_status su_histogram_load(const char* path, const char* default_scheme, su_histogram** out);
SU_API su_status su_histogram_sample_null(uint64_t d, uint64_t n, const char* scheme, su_seed seed,
                                          su_histogram** out);
SU_API size_t su_histogram_size(const su_histogram* h);
SU_API uint64_t su_histogram_n(const su_histogram* h);
SU_API su_status su_histogram_counts(const su_histogram* h, uint64_t* out, size_t capacity);
SU_API void su_histogram_free(su_histogram* h);

SU_API void su_test_options_default(su_test_options* out);
SU_API su_status su_test_create(const su_params* params, const su_test_options* options, su_test** out);
/* TestReport JSON: {name, value, cutoff, reject, calibration, per_t?}. */
SU_API su_status su_test_evaluate(const su_test* test, const su_histogram* h, char** report_json);
SU_API su_status su_test_reject(const su_test* test, const su_histogram* h, int* reject);
/* {"statistic", "cutoffs": [{"component", "cutoff", "level"?, "tie_reject_probability"?}]};
 * Monte-Carlo tests reject a value equal to the cutoff with that probability,
 * using a uniform derived from the histogram. */
SU_API su_status su_test_cutoffs(const su_test* test, char** json);
SU_API void su_test_free(su_test* test);

/* {n, d, s, alpha, eps1, eps2, c_alpha, eps_max, density, sample_size_regime};
 * c_alpha is null outside alpha in (1/2, 1) and eps_max is null for s < 2. */
SU_API su_status su_thresholds(const su_params* params, char** json);

/* prior: paired | sparse_twosided | impossibility. mc_replications > 0 adds
 * a Monte-Carlo second moment for the paired prior. */
SU_API su_status su_lower_bound(const su_params* params, const char* prior, double delta, uint64_t mc_replications,
                                su_seed seed, unsigned threads, char** json);

/* Variational identity at `draws` random C* values plus second-moment cross
 * checks. *passed is 1 only when every check passes. */
SU_API su_status su_verify(uint64_t d, uint64_t draws, uint64_t grid_size, uint64_t mc_replications, su_seed seed,
                           unsigned threads, int* passed, char** json);

/* Runs the phase grid described by the config file and writes the grid plus
 * its .boundary.csv sibling. seed_override may be NULL. format: csv | json. */
SU_API su_status su_phase_diagram(const char* config_path, const char* out_path, const char* format,
                                  const su_seed* seed_override, unsigned threads, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* SPARSE_UNIF_H */
