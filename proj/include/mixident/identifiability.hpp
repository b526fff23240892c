#pragma once

// Identifiability bounds for grouped-sample mixtures with k-independent
// components, the Kruskal uniqueness condition on three-way flattenings, and
// constructive certification by recovering a mixture from its moment tensor.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixident/core.hpp"
#include "mixident/rank.hpp"
#include "mixident/tensor.hpp"

namespace mixident {

struct BoundVerdict {
  long m = 0, k = 0, n = 0;
  bool identifiable_guaranteed = false;     // 2m-1 <= (k-1)n, or m == 1
  bool determined_guaranteed = false;       // n even and 2m-2 <= (k-1)(n-1)
  bool counterexample_exists_ident = false; // m >= k >= 2 and 2m-1 > (k-1)n
  bool counterexample_exists_det = false;   // m >= k >= 2 and 2m > (k-1)n
  std::vector<std::string> notes;

  friend bool operator==(const BoundVerdict&, const BoundVerdict&) = default;
};

/// Throws InvalidArgs unless 1 <= k <= m and n >= 1.
BoundVerdict bound_verdict(long m, long k, long n);

/// n = 3n' -> (n',n',n'); 3n'+1 -> (n',n',n'+1); 3n'+2 -> (n',n'+1,n'+1).
/// Throws NTooSmall for n < 3.
Split3 balanced_split(unsigned n);

struct KruskalCondition {
  std::size_t r = 0;
  std::size_t k1 = 0, k2 = 0, k3 = 0;
  bool satisfied = false;  // k1 + k2 + k3 >= 2r + 2
};

/// Kruskal ranks of the component powers mu_j^{(x) n_i} for each part n_i.
KruskalCondition kruskal_condition(const Mixture& p, unsigned n, const Split3& s,
                                   double rel_tol = kDefaultRelTol, const Limits& limits = {});

enum class RecoveryRoute { SingleComponent, SimultaneousDiagonalization, LeastSquares };
const char* to_string(RecoveryRoute route) noexcept;

struct RecoveryOptions {
  std::uint64_t seed = 0;
  double rel_tol = kDefaultRelTol;
  Limits limits;
  double residual_threshold = 1e-10;
  /// Random pencils drawn before giving up on simultaneous diagonalization.
  unsigned pencil_draws = 20;
  double pencil_condition_limit = 1e10;
  /// When the two largest flattening modes are not of full rank m, fit by
  /// multi-start least squares instead of failing with RankDeficientModes.
  bool least_squares_fallback = true;
  unsigned least_squares_restarts = 200;
};

struct Recovery {
  Mixture mixture;
  RecoveryRoute route;
  double residual;         // Frobenius distance of V_n(mixture) to the input
  unsigned attempts;       // pencils drawn, or least-squares restarts used
};

/// Recovers an m-component mixture from (a near-exact) V_n.
///
/// Simultaneous diagonalization on the flattening whose two largest parts
/// become the full-rank modes: two random contractions of the third mode give
/// slices whose pencil eigenvectors are the mode-1 factors; each factor is
/// de-powered through the leading singular vector of its d x d^{r-1} reshape,
/// normalized to the simplex, and weights come from nonnegative least squares.
/// A projected Levenberg-Marquardt refinement then drives the residual below
/// `residual_threshold`.
///
/// Errors: InvalidArgs, SplitMismatch, RankDeficientModes (fallback disabled),
/// NoConvergence.
Recovery recover_mixture(const MomentTensor& t, std::size_t m, const Split3& s,
                         const RecoveryOptions& options = {});

struct RecoveryTrial {
  std::uint64_t seed = 0;
  double match_distance = 0.0;  // +inf when the trial failed
  std::string route;
  std::string error;
};

struct CertificationReport {
  BoundVerdict bound;
  std::optional<KruskalCondition> kruskal_condition;
  std::vector<RecoveryTrial> recovery;
  bool certified = false;
  std::vector<std::string> notes;
};

inline constexpr double kRecoveryMatchTol = 1e-6;

/// Certified when the Kruskal condition holds on the balanced split and every
/// recovery trial lands within 1e-6 (match distance) of P.
CertificationReport certify_identifiability(const Mixture& p, unsigned n, unsigned trials,
                                            std::uint64_t seed,
                                            const RecoveryOptions& options = {});

struct SearchOptions {
  unsigned max_iterations = 500;
  double residual_tol = 1e-10;
  double distinct_tol = 1e-3;
  /// A candidate counts only if every weight is at least this and all its
  /// components are pairwise this far apart in total variation; otherwise a
  /// degenerate near-copy of P could pass the residual test.
  double min_weight = 1e-3;
  double min_separation = 1e-2;
  double verify_tol = 1e-8;
  Limits limits;
};

struct SearchOutcome {
  std::optional<Mixture> witness;
  double witness_residual = 0.0;
  std::size_t witness_restart = 0;
  double best_residual = 0.0;  // smallest residual over all restarts
  std::size_t restarts = 0;
};

/// Multi-start constrained least squares over l-component mixtures for a Q
/// with V_n(Q) = V_n(P) and Q != P. No witness is a normal outcome, not a
/// proof of determinedness.
SearchOutcome search_alternative(const Mixture& p, unsigned n, std::size_t l,
                                 std::size_t restarts, std::uint64_t seed,
                                 const SearchOptions& options = {});

struct TopicPlan {
  long clusters = 0, topics = 0, words_per_doc = 0;
  long effective_k = 0;
  bool identifiable = false;
  bool determined = false;
  std::optional<long> min_words_ident;   // smallest n for identifiability
  std::optional<long> min_words_det;     // smallest even n for determinedness
  std::optional<long> min_clusters_ident;
  std::optional<long> min_clusters_det;
  std::vector<std::string> notes;
};

/// Feasibility of (d', m, n) under generic d'-independent topics.
TopicPlan plan_topics(long clusters, long topics, long words_per_doc);

}  // namespace mixident
