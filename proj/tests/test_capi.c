/* Exercises the shared library through its C header only. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "mixident/mixident.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

static void test_mixture_lifecycle(void) {
  const double w[] = {0.3, 0.7};
  const double c[] = {0.2, 0.8, 0.9, 0.1};
  mixident_mixture* p = NULL;
  EXPECT(mixident_mixture_create(2, 2, w, c, &p) == MIXIDENT_OK);
  EXPECT(mixident_mixture_size(p) == 2);
  EXPECT(mixident_mixture_dim(p) == 2);

  double wout[2] = {0, 0};
  EXPECT(mixident_mixture_weights(p, wout, 2) == MIXIDENT_OK);
  EXPECT(wout[0] == 0.3 && wout[1] == 0.7);
  EXPECT(mixident_mixture_weights(p, wout, 1) == MIXIDENT_E_INVALID_ARGS);

  char* json = NULL;
  EXPECT(mixident_mixture_to_json(p, &json) == MIXIDENT_OK);
  mixident_mixture* back = NULL;
  EXPECT(mixident_mixture_from_json(json, &back) == MIXIDENT_OK);
  double dist = -1;
  EXPECT(mixident_match_distance(p, back, &dist) == MIXIDENT_OK);
  EXPECT(dist == 0.0);
  mixident_string_free(json);

  mixident_mixture* lifted = NULL;
  EXPECT(mixident_product_lift(p, 2, NULL, &lifted) == MIXIDENT_OK);
  EXPECT(mixident_mixture_dim(lifted) == 4);
  double comps[8];
  EXPECT(mixident_mixture_components(lifted, comps, 8) == MIXIDENT_OK);
  EXPECT(fabs(comps[1] - 0.16) < 1e-15);

  mixident_mixture_free(lifted);
  mixident_mixture_free(back);
  mixident_mixture_free(p);
}

static void test_errors(void) {
  const double w[] = {0.5, 0.4};
  const double c[] = {1, 0, 0, 1};
  mixident_mixture* p = NULL;
  EXPECT(mixident_mixture_create(2, 2, w, c, &p) == MIXIDENT_E_NOT_A_PROBABILITY);
  EXPECT(p == NULL);
  EXPECT(strlen(mixident_last_error()) > 0);
  EXPECT(strcmp(mixident_status_name(MIXIDENT_E_NOT_A_PROBABILITY), "NotAProbability") == 0);
  EXPECT(strcmp(mixident_status_name(999), "Unknown") == 0);

  EXPECT(mixident_mixture_from_json("{", &p) == MIXIDENT_E_PARSE_ERROR);
  EXPECT(mixident_mixture_create(0, 2, w, c, &p) != MIXIDENT_OK);
  EXPECT(mixident_mixture_create(2, 2, NULL, c, &p) == MIXIDENT_E_INVALID_ARGS);

  mixident_bound_verdict v;
  EXPECT(mixident_bound_verdict_get(3, 5, 3, &v) == MIXIDENT_E_INVALID_ARGS);

  mixident_options opt;
  mixident_options_default(&opt);
  EXPECT(opt.seed == 0 && opt.rel_tol == 1e-9 && opt.tensor_cap == 10000000u);
  opt.rel_tol = 2.0;
  mixident_mixture* r = NULL;
  EXPECT(mixident_random_mixture(3, 3, &opt, &r) == MIXIDENT_E_INVALID_ARGS);

  char* out = NULL;
  EXPECT(mixident_counterexample_json("ident", 3, 2, 5, NULL, &out) == MIXIDENT_E_INVALID_REGION);
  EXPECT(mixident_counterexample_json("other", 3, 2, 3, NULL, &out) == MIXIDENT_E_INVALID_ARGS);
  EXPECT(out == NULL);
}

static void test_bounds(void) {
  mixident_bound_verdict v;
  EXPECT(mixident_bound_verdict_get(10, 7, 4, &v) == MIXIDENT_OK);
  EXPECT(v.determined_guaranteed == 1);
  EXPECT(mixident_bound_verdict_get(5, 2, 8, &v) == MIXIDENT_OK);
  EXPECT(v.identifiable_guaranteed == 0 && v.counterexample_exists_ident == 1);
}

static void test_tensor_and_recovery(void) {
  mixident_options opt;
  mixident_options_default(&opt);
  opt.seed = 4;
  mixident_mixture* p = NULL;
  EXPECT(mixident_random_mixture(4, 3, &opt, &p) == MIXIDENT_OK);
  mixident_tensor* t = NULL;
  EXPECT(mixident_moment_tensor(p, 3, &opt, &t) == MIXIDENT_OK);
  EXPECT(mixident_tensor_order(t) == 3 && mixident_tensor_dim(t) == 4 && mixident_tensor_size(t) == 64);

  mixident_mixture* q = NULL;
  EXPECT(mixident_recover(t, 3, &opt, &q) == MIXIDENT_OK);
  double dist = 1;
  EXPECT(mixident_match_distance(p, q, &dist) == MIXIDENT_OK);
  EXPECT(dist <= 1e-6);

  char* csv = NULL;
  EXPECT(mixident_tensor_flattening_csv(t, 0, &csv) == MIXIDENT_OK);
  EXPECT(csv != NULL && strchr(csv, '\n') != NULL);
  mixident_string_free(csv);

  int certified = 0;
  char* report = NULL;
  EXPECT(mixident_certify_json(p, 3, 2, &opt, &certified, &report) == MIXIDENT_OK);
  EXPECT(certified == 1);
  mixident_string_free(report);

  opt.tensor_cap = 10;
  mixident_tensor* big = NULL;
  EXPECT(mixident_moment_tensor(p, 3, &opt, &big) == MIXIDENT_E_CAP_EXCEEDED);

  mixident_mixture_free(q);
  mixident_tensor_free(t);
  mixident_mixture_free(p);
}

static void test_reports(void) {
  char* out = NULL;
  int pass = 0;
  EXPECT(mixident_kindpow_trial_json(3, 5, 2, NULL, &pass, &out) == MIXIDENT_OK);
  EXPECT(pass == 1);
  mixident_string_free(out);

  double fraction = -1;
  EXPECT(mixident_monte_carlo_json(3, 100, 0, NULL, &fraction, &out) == MIXIDENT_OK);
  EXPECT(fraction == 1.0);
  mixident_string_free(out);
  EXPECT(mixident_monte_carlo_json(3, 100, 1, NULL, &fraction, &out) == MIXIDENT_OK);
  EXPECT(fraction == 0.0);
  mixident_string_free(out);

  EXPECT(mixident_counterexample_json("det", 2, 2, 3, NULL, &out) == MIXIDENT_OK);
  EXPECT(strstr(out, "\"determinedness\"") != NULL);
  mixident_string_free(out);

  EXPECT(mixident_plan_topics_json(7, 10, 4, &out) == MIXIDENT_OK);
  EXPECT(strstr(out, "\"determined\": true") != NULL);
  mixident_string_free(out);

  EXPECT(mixident_derive_seed(1, 2) == mixident_derive_seed(1, 2));
  EXPECT(mixident_derive_seed(1, 2) != mixident_derive_seed(2, 1));
}

int main(void) {
  test_mixture_lifecycle();
  test_errors();
  test_bounds();
  test_tensor_and_recovery();
  test_reports();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  printf("C API: all checks passed\n");
  return 0;
}
