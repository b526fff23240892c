#pragma once

// Uniform sampling on the probability simplex and Monte Carlo checks of the
// almost-sure linear independence of random simplex points.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mixident/core.hpp"
#include "mixident/random.hpp"
#include "mixident/rank.hpp"

namespace mixident {

/// Uniform draw on the (d-1)-simplex: d unit exponentials, normalized.
Categorical sample_simplex(std::size_t d, Rng& rng);
Categorical sample_simplex(std::size_t d, std::uint64_t seed);

struct MonteCarloReport {
  std::size_t trials = 0;
  std::size_t dim = 0;
  std::size_t independent_count = 0;
  double min_observed_sv = 0.0;
  bool forced_dependence = false;
  std::vector<double> per_trial_min_sv;
};

/// Per trial: d simplex points, independent iff numerical rank == d. With
/// `forced_dependence`, the last point is replaced by the mean of the others
/// before the check (a control that must always read as dependent).
MonteCarloReport monte_carlo_independence(std::size_t d, std::size_t trials, double rel_tol,
                                          std::uint64_t seed, bool forced_dependence = false);

/// m uniform-simplex components with uniform weights on the weight simplex,
/// redrawn until the component family has Kruskal rank min(d, m).
/// Throws GenerationFailed after 100 draws.
Mixture random_k_independent_mixture(std::size_t d, std::size_t m, std::uint64_t seed,
                                     double rel_tol = kDefaultRelTol);

/// One cell of the tensor-power lemma suite: a random_k_independent_mixture
/// family checked with verify_kindpow.
LemmaReport kindpow_trial(std::size_t d, std::size_t m, unsigned n, std::uint64_t seed,
                          double rel_tol = kDefaultRelTol, const Limits& limits = {});

/// One cell of the mixed-power lemma suite: x is a random convex combination
/// of `support` family members, which forces k' <= support.
LemmaReport kpindpow_trial(std::size_t d, std::size_t m, unsigned n, std::size_t support,
                           std::uint64_t seed, double rel_tol = kDefaultRelTol,
                           const Limits& limits = {});

}  // namespace mixident
