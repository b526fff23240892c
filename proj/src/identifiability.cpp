#include "mixident/identifiability.hpp"

#include <algorithm>

namespace mixident {

BoundVerdict bound_verdict(long m, long k, long n) {
  if (m < 1 || k < 1 || n < 1) fail(ErrorCode::InvalidArgs, "m, k and n must be positive");
  if (k > m) fail(ErrorCode::InvalidArgs, "k cannot exceed m");

  BoundVerdict v;
  v.m = m;
  v.k = k;
  v.n = n;
  v.identifiable_guaranteed = (m >= 2 && k >= 2 && 2 * m - 1 <= (k - 1) * n) || m == 1;
  v.determined_guaranteed = m >= 2 && n % 2 == 0 && 2 * m - 2 <= (k - 1) * (n - 1);
  v.counterexample_exists_ident = m >= k && k >= 2 && 2 * m - 1 > (k - 1) * n;
  v.counterexample_exists_det = m >= k && k >= 2 && 2 * m > (k - 1) * n;

  if (m == 1) {
    v.notes.emplace_back("m = 1: a single component is identifiable for every n");
    v.notes.emplace_back("m = 1: determined for n >= 2 by the no-assumption bound n >= 2m");
    return v;
  }
  if (k == 1) {
    v.notes.emplace_back("k = 1: no independence beyond nonzero components; no bound applies");
    return v;
  }
  if (k == 2)
    v.notes.emplace_back(
        "k = 2 (any distinct components): identifiable iff n >= 2m-1, determined for even n >= 2m");
  if (k == m)
    v.notes.emplace_back(
        "k = m (linearly independent components): identifiable for n >= 3, determined for even n >= 4");
  if (n == 2)
    v.notes.emplace_back("determinedness bound is vacuous at n = 2 (it would force m = 1)");
  if (!v.determined_guaranteed && !v.counterexample_exists_det) {
    v.notes.emplace_back(n % 2 != 0
                             ? "UNKNOWN: determinedness for odd n is not settled by the bounds"
                             : "UNKNOWN: between the determinedness upper and lower bounds");
  }
  return v;
}

Split3 balanced_split(unsigned n) {
  if (n < 3) fail(ErrorCode::NTooSmall, "a three-way split needs n >= 3");
  const unsigned q = n / 3;
  switch (n % 3) {
    case 0: return Split3(q, q, q);
    case 1: return Split3(q, q, q + 1);
    default: return Split3(q, q + 1, q + 1);
  }
}

KruskalCondition kruskal_condition(const Mixture& p, unsigned n, const Split3& s, double rel_tol,
                                   const Limits& limits) {
  if (s.total() != n) fail(ErrorCode::SplitMismatch, "split does not sum to n");
  const VectorFamily base = VectorFamily::from_components(p);
  KruskalCondition out;
  out.r = p.size();
  std::array<std::size_t, 3> ks{};
  for (std::size_t i = 0; i < 3; ++i)
    ks[i] = kruskal_rank(VectorFamily::kron_powers(base, s[i], limits), rel_tol).k;
  out.k1 = ks[0];
  out.k2 = ks[1];
  out.k3 = ks[2];
  out.satisfied = out.k1 + out.k2 + out.k3 >= 2 * out.r + 2;
  return out;
}

namespace {

long ceil_div(long a, long b) { return (a + b - 1) / b; }

}  // namespace

TopicPlan plan_topics(long clusters, long topics, long words_per_doc) {
  if (clusters < 1 || topics < 1 || words_per_doc < 1)
    fail(ErrorCode::InvalidArgs, "clusters, topics and words per document must be positive");
  TopicPlan plan;
  plan.clusters = clusters;
  plan.topics = topics;
  plan.words_per_doc = words_per_doc;
  const long m = topics;
  plan.effective_k = std::min(clusters, m);
  if (clusters > m)
    plan.notes.emplace_back("more clusters than topics: k = m governs (topics linearly independent)");

  if (m == 1) {
    plan.identifiable = true;
    plan.determined = words_per_doc >= 2;
    plan.min_words_ident = 1;
    plan.min_words_det = 2;
    plan.min_clusters_ident = 1;
    plan.min_clusters_det = 1;
    plan.notes.emplace_back("single topic: trivially feasible");
    return plan;
  }

  const BoundVerdict v = bound_verdict(m, plan.effective_k, words_per_doc);
  plan.identifiable = v.identifiable_guaranteed;
  plan.determined = v.determined_guaranteed;

  const long k = plan.effective_k;
  if (k >= 2) {
    plan.min_words_ident = std::max(1L, ceil_div(2 * m - 1, k - 1));
    long n_det = ceil_div(2 * m - 2, k - 1) + 1;
    if (n_det % 2 != 0) ++n_det;
    plan.min_words_det = std::max(2L, n_det);
  } else {
    plan.notes.emplace_back("one cluster cannot separate two or more topics");
  }

  // Smallest d' (k = min(d', m)) meeting each bound at the given n.
  for (long c = 2; c <= m; ++c)
    if (2 * m - 1 <= (c - 1) * words_per_doc) {
      plan.min_clusters_ident = c;
      break;
    }
  if (words_per_doc % 2 == 0)
    for (long c = 2; c <= m; ++c)
      if (2 * m - 2 <= (c - 1) * (words_per_doc - 1)) {
        plan.min_clusters_det = c;
        break;
      }
  if (!plan.identifiable && plan.min_words_ident)
    plan.notes.emplace_back("identifiability needs at least " + std::to_string(*plan.min_words_ident) +
                            " words per document");
  if (!plan.determined && plan.min_words_det)
    plan.notes.emplace_back("determinedness needs an even number of at least " +
                            std::to_string(*plan.min_words_det) + " words per document");
  return plan;
}

}  // namespace mixident
