#include "mixident/mixident.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "mixident/counterexamples.hpp"
#include "mixident/identifiability.hpp"
#include "mixident/random.hpp"
#include "mixident/randomcheck.hpp"
#include "mixident/serialize.hpp"

struct mixident_mixture {
  mixident::Mixture value;
};

struct mixident_tensor {
  mixident::MomentTensor value;
};

namespace {

using namespace mixident;

thread_local std::string last_error;

struct Settings {
  std::uint64_t seed = 0;
  double rel_tol = kDefaultRelTol;
  Limits limits;
};

Settings settings(const mixident_options* opt) {
  Settings s;
  if (opt) {
    s.seed = opt->seed;
    s.rel_tol = opt->rel_tol;
    s.limits.tensor_cap = opt->tensor_cap;
  }
  if (!(s.rel_tol > 0.0 && s.rel_tol < 1.0)) fail(ErrorCode::InvalidArgs, "rel_tol must be in (0, 1)");
  if (s.limits.tensor_cap == 0) fail(ErrorCode::InvalidArgs, "tensor_cap must be positive");
  return s;
}

template <class F>
int guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return MIXIDENT_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MIXIDENT_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return MIXIDENT_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::InvalidArgs, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(const io::Json& j, char** out) { *out = copy_string(io::dump(j)); }

}  // namespace

extern "C" {

void mixident_options_default(mixident_options* out) {
  if (!out) return;
  out->seed = 0;
  out->rel_tol = kDefaultRelTol;
  out->tensor_cap = Limits{}.tensor_cap;
}

const char* mixident_last_error(void) { return last_error.c_str(); }

const char* mixident_status_name(int status) {
  if (status == MIXIDENT_OK) return "OK";
  if (status < MIXIDENT_E_INVALID_ARGS || status > MIXIDENT_E_INTERNAL) return "Unknown";
  return to_string(static_cast<ErrorCode>(status));
}

void mixident_string_free(char* s) { std::free(s); }

uint64_t mixident_derive_seed(uint64_t seed, uint64_t index) { return derive_seed(seed, index); }

int mixident_mixture_create(size_t m, size_t d, const double* weights, const double* components,
                            mixident_mixture** out) {
  return guarded([&] {
    require(out && weights && components, "null argument");
    require(m > 0 && d > 0, "m and d must be positive");
    std::vector<Categorical> comps;
    for (size_t i = 0; i < m; ++i) comps.emplace_back(std::vector<double>(components + i * d, components + (i + 1) * d));
    *out = new mixident_mixture{make_mixture(std::vector<double>(weights, weights + m), std::move(comps))};
  });
}

int mixident_mixture_from_json(const char* json, mixident_mixture** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = new mixident_mixture{io::mixture_from_json(io::parse(json))};
  });
}

int mixident_mixture_to_json(const mixident_mixture* p, char** out) {
  return guarded([&] {
    require(p && out, "null argument");
    emit(io::to_json(p->value), out);
  });
}

void mixident_mixture_free(mixident_mixture* p) { delete p; }

size_t mixident_mixture_size(const mixident_mixture* p) { return p ? p->value.size() : 0; }

size_t mixident_mixture_dim(const mixident_mixture* p) { return p ? p->value.dim() : 0; }

int mixident_mixture_weights(const mixident_mixture* p, double* out, size_t len) {
  return guarded([&] {
    require(p && out, "null argument");
    require(len >= p->value.size(), "output buffer too small");
    std::copy(p->value.weights().begin(), p->value.weights().end(), out);
  });
}

int mixident_mixture_components(const mixident_mixture* p, double* out, size_t len) {
  return guarded([&] {
    require(p && out, "null argument");
    require(len >= p->value.size() * p->value.dim(), "output buffer too small");
    for (const auto& c : p->value.components()) out = std::copy(c.probs().begin(), c.probs().end(), out);
  });
}

int mixident_product_lift(const mixident_mixture* p, unsigned r, const mixident_options* opt,
                          mixident_mixture** out) {
  return guarded([&] {
    require(p && out, "null argument");
    *out = new mixident_mixture{product_lift(p->value, r, settings(opt).limits)};
  });
}

int mixident_match_distance(const mixident_mixture* p, const mixident_mixture* q, double* out) {
  return guarded([&] {
    require(p && q && out, "null argument");
    *out = mixture_match_distance(p->value, q->value);
  });
}

int mixident_random_mixture(size_t d, size_t m, const mixident_options* opt, mixident_mixture** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const Settings s = settings(opt);
    *out = new mixident_mixture{random_k_independent_mixture(d, m, s.seed, s.rel_tol)};
  });
}

int mixident_moment_tensor(const mixident_mixture* p, unsigned n, const mixident_options* opt,
                           mixident_tensor** out) {
  return guarded([&] {
    require(p && out, "null argument");
    *out = new mixident_tensor{moment_tensor(p->value, n, settings(opt).limits)};
  });
}

int mixident_tensor_from_json(const char* json, mixident_tensor** out) {
  return guarded([&] {
    require(json && out, "null argument");
    *out = new mixident_tensor{io::tensor_from_json(io::parse(json))};
  });
}

int mixident_tensor_to_json(const mixident_tensor* t, char** out) {
  return guarded([&] {
    require(t && out, "null argument");
    emit(io::to_json(t->value), out);
  });
}

void mixident_tensor_free(mixident_tensor* t) { delete t; }

unsigned mixident_tensor_order(const mixident_tensor* t) { return t ? t->value.order() : 0; }

size_t mixident_tensor_dim(const mixident_tensor* t) { return t ? t->value.dim() : 0; }

size_t mixident_tensor_size(const mixident_tensor* t) { return t ? t->value.size() : 0; }

int mixident_tensor_entries(const mixident_tensor* t, double* out, size_t len) {
  return guarded([&] {
    require(t && out, "null argument");
    require(len >= t->value.size(), "output buffer too small");
    std::copy(t->value.entries().begin(), t->value.entries().end(), out);
  });
}

int mixident_tensor_distance(const mixident_tensor* a, const mixident_tensor* b, double* out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    *out = frobenius_distance(a->value, b->value);
  });
}

int mixident_tensor_flattening_csv(const mixident_tensor* t, unsigned mode, char** out) {
  return guarded([&] {
    require(t && out, "null argument");
    const Split3 s = balanced_split(t->value.order());
    *out = copy_string(flattening_csv(flatten3(t->value, s), mode));
  });
}

int mixident_sample_groups_json(const mixident_mixture* p, size_t n, size_t groups,
                                const mixident_options* opt, char** out) {
  return guarded([&] {
    require(p && out, "null argument");
    emit(io::to_json(sample_groups(p->value, n, groups, settings(opt).seed)), out);
  });
}

int mixident_empirical_tensor(const char* dataset_json, const mixident_options* opt,
                              mixident_tensor** out) {
  return guarded([&] {
    require(dataset_json && out, "null argument");
    const GroupedDataset data = io::dataset_from_json(io::parse(dataset_json));
    *out = new mixident_tensor{empirical_moment_tensor(data, true, settings(opt).limits)};
  });
}

int mixident_bound_verdict_get(long m, long k, long n, mixident_bound_verdict* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const BoundVerdict v = bound_verdict(m, k, n);
    *out = mixident_bound_verdict{v.m,
                                  v.k,
                                  v.n,
                                  v.identifiable_guaranteed,
                                  v.determined_guaranteed,
                                  v.counterexample_exists_ident,
                                  v.counterexample_exists_det};
  });
}

int mixident_bound_verdict_json(long m, long k, long n, char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    emit(io::to_json(bound_verdict(m, k, n)), out);
  });
}

int mixident_plan_topics_json(long vocab_clusters, long topics, long words_per_doc, char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    emit(io::to_json(plan_topics(vocab_clusters, topics, words_per_doc)), out);
  });
}

int mixident_kruskal_rank_json(const mixident_mixture* p, const mixident_options* opt, char** out) {
  return guarded([&] {
    require(p && out, "null argument");
    const Settings s = settings(opt);
    const VectorFamily f = VectorFamily::from_components(p->value);
    io::Json j = io::to_json(kruskal_rank(f, s.rel_tol));
    j["numerical_rank"] = numerical_rank(f, s.rel_tol);
    j["m"] = f.size();
    j["d"] = f.dim();
    emit(j, out);
  });
}

int mixident_kindpow_trial_json(size_t d, size_t m, unsigned n, const mixident_options* opt,
                                int* pass, char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const Settings s = settings(opt);
    const LemmaReport r = kindpow_trial(d, m, n, s.seed, s.rel_tol, s.limits);
    if (pass) *pass = r.pass;
    emit(io::to_json(r), out);
  });
}

int mixident_kpindpow_trial_json(size_t d, size_t m, unsigned n, size_t support,
                                 const mixident_options* opt, int* pass, char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const Settings s = settings(opt);
    const LemmaReport r = kpindpow_trial(d, m, n, support, s.seed, s.rel_tol, s.limits);
    if (pass) *pass = r.pass;
    emit(io::to_json(r), out);
  });
}

int mixident_recover(const mixident_tensor* t, size_t m, const mixident_options* opt,
                     mixident_mixture** out) {
  return guarded([&] {
    require(t && out, "null argument");
    const Settings s = settings(opt);
    RecoveryOptions o;
    o.seed = s.seed;
    o.rel_tol = s.rel_tol;
    o.limits = s.limits;
    // A single component needs no split.
    const Split3 s3 = m == 1 && t->value.order() < 3 ? Split3(1, 1, 1) : balanced_split(t->value.order());
    *out = new mixident_mixture{recover_mixture(t->value, m, s3, o).mixture};
  });
}

int mixident_certify_json(const mixident_mixture* p, unsigned n, unsigned trials,
                          const mixident_options* opt, int* certified, char** out) {
  return guarded([&] {
    require(p && out, "null argument");
    const Settings s = settings(opt);
    RecoveryOptions o;
    o.rel_tol = s.rel_tol;
    o.limits = s.limits;
    const CertificationReport r = certify_identifiability(p->value, n, trials, s.seed, o);
    if (certified) *certified = r.certified;
    emit(io::to_json(r), out);
  });
}

int mixident_search_json(const mixident_mixture* p, unsigned n, size_t l, size_t restarts,
                         const mixident_options* opt, int* found, char** out) {
  return guarded([&] {
    require(p && out, "null argument");
    const Settings s = settings(opt);
    SearchOptions o;
    o.limits = s.limits;
    const SearchOutcome r = search_alternative(p->value, n, l, restarts, s.seed, o);
    if (found) *found = r.witness.has_value();
    emit(io::to_json(r), out);
  });
}

int mixident_counterexample_json(const char* kind, long m, long k, long n,
                                 const mixident_options* opt, char** out) {
  return guarded([&] {
    require(kind && out, "null argument");
    const Settings s = settings(opt);
    const std::string which = kind;
    if (which == "ident")
      emit(io::to_json(build_nonidentifiable(m, k, n, s.seed, s.limits)), out);
    else if (which == "det")
      emit(io::to_json(build_nondetermined(m, k, n, s.seed, s.limits)), out);
    else
      fail(ErrorCode::InvalidArgs, "kind must be ident or det");
  });
}

int mixident_monte_carlo_json(size_t d, size_t trials, int forced_dependence,
                              const mixident_options* opt, double* fraction, char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const Settings s = settings(opt);
    const MonteCarloReport r = monte_carlo_independence(d, trials, s.rel_tol, s.seed, forced_dependence != 0);
    if (fraction) *fraction = double(r.independent_count) / double(r.trials);
    emit(io::to_json(r), out);
  });
}

}  // extern "C"
