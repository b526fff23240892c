#pragma once

// Explicit pairs P != Q with equal grouped moment tensors below the bounds:
// moment-matched Bernoulli bases lifted to product spaces.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mixident/core.hpp"

namespace mixident {

struct ContinuationOptions {
  double step = 0.02;
  double min_step = 1e-7;
  unsigned max_steps = 5000;
  double newton_tol = 1e-12;
  /// Walk until the pair is this far apart (match distance, or dummy weight
  /// for the determinedness walk).
  double target_separation = 0.02;
  /// ... and until the tensors at the first unmatched order are this far
  /// apart (Frobenius).
  double next_moment_gap = 1e-5;
  double min_weight = 1e-4;
  double prob_floor = 1e-4;
  double collision_floor = 1e-2;
  /// Random base mixtures: probabilities at least this far apart within
  /// [0.05, 0.95], weights at least `weight_floor`.
  double prob_separation = 0.08;
  double weight_floor = 0.05;
  std::size_t max_components = 8;
};

struct BernoulliMixture {
  std::vector<double> weights;
  std::vector<double> probs;  // success probabilities

  /// sum_i w_i p_i^j
  double power_moment(unsigned j) const;
  Mixture to_mixture() const;
};

struct BernoulliPair {
  BernoulliMixture p;
  BernoulliMixture q;
  unsigned matched_order = 0;  // power moments 1..matched_order agree
};

/// Random m-component base mixture with the separation floors of `options`.
BernoulliMixture random_bernoulli_mixture(std::size_t m, std::uint64_t seed,
                                          const ContinuationOptions& options = {});

/// Q with at most m components matching P's power moments of orders 1..2m-2,
/// by walking the one-dimensional solution curve through P.
/// Errors: ContinuationStalled, SeparationLost, VerificationFailed.
BernoulliPair bernoulli_moment_match(std::size_t m, std::uint64_t seed,
                                     const ContinuationOptions& options = {});
BernoulliPair bernoulli_moment_match(const BernoulliMixture& p,
                                     const ContinuationOptions& options = {});

/// Q with m+1 components matching P's power moments of orders 1..2m-1. The
/// walk starts from P plus a zero-weight component at a location drawn from
/// `seed` and follows the curve in the direction of increasing weight on it.
BernoulliPair bernoulli_determinedness_match(std::size_t m, std::uint64_t seed,
                                             const ContinuationOptions& options = {});
BernoulliPair bernoulli_determinedness_match(const BernoulliMixture& p, std::uint64_t seed,
                                             const ContinuationOptions& options = {});

enum class Construction { Identifiability, Determinedness };
const char* to_string(Construction c) noexcept;

struct PairVerification {
  double tensor_distance = 0.0;
  std::size_t k_measured_P = 0;
  std::size_t k_measured_Q = 0;
  double match_distance = 0.0;
  /// Base tensors at the first unmatched order (2m-1 or 2m) must differ.
  unsigned base_order = 0;
  double base_distance = 0.0;
};

struct CounterexamplePair {
  Mixture P;
  Mixture Q;
  long m = 0, k = 0;
  unsigned n = 0;
  std::uint64_t seed = 0;
  std::uint64_t base_seed = 0;  // seed of the base pair actually used
  Construction construction = Construction::Identifiability;
  PairVerification verification;
};

inline constexpr double kPairTensorTol = 1e-8;
inline constexpr double kPairMatchTol = 1e-3;
inline constexpr double kPairBaseTol = 1e-6;
inline constexpr unsigned kBaseRetries = 16;

/// Requires m >= k >= 2 and 2m-1 > (k-1)n (InvalidRegion otherwise). Lifts a
/// moment-matched base pair by k-1 and re-verifies from scratch.
CounterexamplePair build_nonidentifiable(long m, long k, long n, std::uint64_t seed,
                                         const Limits& limits = {},
                                         const ContinuationOptions& options = {});

/// Requires 2m > (k-1)n with m >= k >= 2, or m = 1 and k >= 2 (k-independence
/// of a single component is vacuous). Q' has m+1 components.
CounterexamplePair build_nondetermined(long m, long k, long n, std::uint64_t seed,
                                       const Limits& limits = {},
                                       const ContinuationOptions& options = {});

/// Recomputes every invariant of a lifted pair from scratch and throws
/// VerificationFailed on any miss.
PairVerification verify_pair(const Mixture& p_lift, const Mixture& q_lift, const Mixture& base_p,
                             const Mixture& base_q, unsigned n, std::size_t k, Construction c,
                             const Limits& limits = {});

}  // namespace mixident
