#ifndef MIXIDENT_H
#define MIXIDENT_H

/*
 * C interface to libmixident.
 *
 * Every fallible call returns a status code (MIXIDENT_OK or one of the error
 * codes below); the message of the most recent failure on the calling thread
 * is available from mixident_last_error(). Objects are opaque handles released
 * with their *_free function. Strings returned through `char** out` are
 * allocated by the library and released with mixident_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MIXIDENT_API __declspec(dllexport)
#else
#define MIXIDENT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  MIXIDENT_OK = 0,
  MIXIDENT_E_INVALID_ARGS = 1,
  MIXIDENT_E_NON_POSITIVE_WEIGHT = 2,
  MIXIDENT_E_DIMENSION_MISMATCH = 3,
  MIXIDENT_E_NOT_A_PROBABILITY = 4,
  MIXIDENT_E_CAP_EXCEEDED = 5,
  MIXIDENT_E_SHAPE_MISMATCH = 6,
  MIXIDENT_E_SPLIT_MISMATCH = 7,
  MIXIDENT_E_N_TOO_SMALL = 8,
  MIXIDENT_E_TOO_MANY_COLUMNS = 9,
  MIXIDENT_E_DEPENDENT_SUBSET = 10,
  MIXIDENT_E_ZERO_VECTOR = 11,
  MIXIDENT_E_RANK_DEFICIENT_MODES = 12,
  MIXIDENT_E_NO_CONVERGENCE = 13,
  MIXIDENT_E_CONTINUATION_STALLED = 14,
  MIXIDENT_E_SEPARATION_LOST = 15,
  MIXIDENT_E_INVALID_REGION = 16,
  MIXIDENT_E_VERIFICATION_FAILED = 17,
  MIXIDENT_E_GENERATION_FAILED = 18,
  MIXIDENT_E_PARSE_ERROR = 19,
  MIXIDENT_E_INTERNAL = 20
};

typedef struct mixident_mixture mixident_mixture;
typedef struct mixident_tensor mixident_tensor;

typedef struct mixident_options {
  uint64_t seed;     /* default 0 */
  double rel_tol;    /* default 1e-9 */
  size_t tensor_cap; /* default 10^7 */
} mixident_options;

typedef struct mixident_bound_verdict {
  long m, k, n;
  int identifiable_guaranteed;
  int determined_guaranteed;
  int counterexample_exists_ident;
  int counterexample_exists_det;
} mixident_bound_verdict;

MIXIDENT_API void mixident_options_default(mixident_options* out);
MIXIDENT_API const char* mixident_last_error(void);
MIXIDENT_API const char* mixident_status_name(int status);
MIXIDENT_API void mixident_string_free(char* s);
/* Child seed for sub-run `index` of a seeded run (splitmix64 mixing). */
MIXIDENT_API uint64_t mixident_derive_seed(uint64_t seed, uint64_t index);

/* Mixtures. `components` is m rows of d probabilities, row-major. */
MIXIDENT_API int mixident_mixture_create(size_t m, size_t d, const double* weights,
                                         const double* components, mixident_mixture** out);
MIXIDENT_API int mixident_mixture_from_json(const char* json, mixident_mixture** out);
MIXIDENT_API int mixident_mixture_to_json(const mixident_mixture* p, char** out);
MIXIDENT_API void mixident_mixture_free(mixident_mixture* p);
MIXIDENT_API size_t mixident_mixture_size(const mixident_mixture* p);
MIXIDENT_API size_t mixident_mixture_dim(const mixident_mixture* p);
MIXIDENT_API int mixident_mixture_weights(const mixident_mixture* p, double* out, size_t len);
MIXIDENT_API int mixident_mixture_components(const mixident_mixture* p, double* out, size_t len);
MIXIDENT_API int mixident_product_lift(const mixident_mixture* p, unsigned r,
                                       const mixident_options* opt, mixident_mixture** out);
MIXIDENT_API int mixident_match_distance(const mixident_mixture* p, const mixident_mixture* q,
                                         double* out);
/* Uniform-simplex components with Kruskal rank min(d, m), seeded by opt->seed. */
MIXIDENT_API int mixident_random_mixture(size_t d, size_t m, const mixident_options* opt,
                                         mixident_mixture** out);

/* Moment tensors. */
MIXIDENT_API int mixident_moment_tensor(const mixident_mixture* p, unsigned n,
                                        const mixident_options* opt, mixident_tensor** out);
MIXIDENT_API int mixident_tensor_from_json(const char* json, mixident_tensor** out);
MIXIDENT_API int mixident_tensor_to_json(const mixident_tensor* t, char** out);
MIXIDENT_API void mixident_tensor_free(mixident_tensor* t);
MIXIDENT_API unsigned mixident_tensor_order(const mixident_tensor* t);
MIXIDENT_API size_t mixident_tensor_dim(const mixident_tensor* t);
MIXIDENT_API size_t mixident_tensor_size(const mixident_tensor* t);
MIXIDENT_API int mixident_tensor_entries(const mixident_tensor* t, double* out, size_t len);
MIXIDENT_API int mixident_tensor_distance(const mixident_tensor* a, const mixident_tensor* b,
                                          double* out);
/* CSV of the mode-`mode` unfolding (0, 1 or 2) of the balanced three-way flattening. */
MIXIDENT_API int mixident_tensor_flattening_csv(const mixident_tensor* t, unsigned mode, char** out);

/* Grouped data. */
MIXIDENT_API int mixident_sample_groups_json(const mixident_mixture* p, size_t n, size_t groups,
                                             const mixident_options* opt, char** out);
MIXIDENT_API int mixident_empirical_tensor(const char* dataset_json, const mixident_options* opt,
                                           mixident_tensor** out);

/* Bounds and planning. */
MIXIDENT_API int mixident_bound_verdict_get(long m, long k, long n, mixident_bound_verdict* out);
MIXIDENT_API int mixident_bound_verdict_json(long m, long k, long n, char** out);
MIXIDENT_API int mixident_plan_topics_json(long vocab_clusters, long topics, long words_per_doc,
                                           char** out);

/* Rank reports on the component family of a mixture. */
MIXIDENT_API int mixident_kruskal_rank_json(const mixident_mixture* p, const mixident_options* opt,
                                            char** out);
/* One lemma-suite cell; *pass receives measured >= expected. */
MIXIDENT_API int mixident_kindpow_trial_json(size_t d, size_t m, unsigned n,
                                             const mixident_options* opt, int* pass, char** out);
MIXIDENT_API int mixident_kpindpow_trial_json(size_t d, size_t m, unsigned n, size_t support,
                                              const mixident_options* opt, int* pass, char** out);

/* Identifiability. */
MIXIDENT_API int mixident_recover(const mixident_tensor* t, size_t m, const mixident_options* opt,
                                  mixident_mixture** out);
MIXIDENT_API int mixident_certify_json(const mixident_mixture* p, unsigned n, unsigned trials,
                                       const mixident_options* opt, int* certified, char** out);
MIXIDENT_API int mixident_search_json(const mixident_mixture* p, unsigned n, size_t l,
                                      size_t restarts, const mixident_options* opt, int* found,
                                      char** out);

/* Counterexamples; kind is "ident" or "det". */
MIXIDENT_API int mixident_counterexample_json(const char* kind, long m, long k, long n,
                                              const mixident_options* opt, char** out);

/* Random independence; *fraction receives the independent share of trials. */
MIXIDENT_API int mixident_monte_carlo_json(size_t d, size_t trials, int forced_dependence,
                                           const mixident_options* opt, double* fraction,
                                           char** out);

#ifdef __cplusplus
}
#endif

#endif
