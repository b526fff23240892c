#include <algorithm>
#include <limits>

#include "mixident/fit.hpp"
#include "mixident/identifiability.hpp"
#include "mixident/random.hpp"
#include "mixident/randomcheck.hpp"

namespace mixident {

namespace {

std::optional<Mixture> accept(const fit::Parameters& params, const Mixture& p, unsigned n,
                              const SearchOptions& options) {
  const std::size_t l = params.weights.size();
  for (double w : params.weights)
    if (w < options.min_weight) return std::nullopt;
  std::vector<Categorical> comps;
  for (const auto& c : params.components) comps.push_back(Categorical::normalized(c));
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (total_variation(comps[i], comps[j]) < options.min_separation) return std::nullopt;
  std::vector<double> w = params.weights;
  double s = 0.0;
  for (double x : w) s += x;
  for (double& x : w) x /= s;
  Mixture q = make_mixture(std::move(w), std::move(comps));
  if (q.size() != l) return std::nullopt;
  if (!(mixture_match_distance(q, p) > options.distinct_tol)) return std::nullopt;
  const double dense = frobenius_distance(moment_tensor(q, n, options.limits),
                                          moment_tensor(p, n, options.limits));
  if (!(dense <= options.verify_tol)) return std::nullopt;
  return q;
}

}  // namespace

SearchOutcome search_alternative(const Mixture& p, unsigned n, std::size_t l,
                                 std::size_t restarts, std::uint64_t seed,
                                 const SearchOptions& options) {
  if (n == 0 || l == 0 || restarts == 0)
    fail(ErrorCode::InvalidArgs, "n, l and restarts must be positive");
  const std::size_t d = p.dim();
  checked_power(d, n, options.limits.tensor_cap);
  const fit::SymmetricMoments moments(d, n);
  const Eigen::VectorXd target = moments.compress(moment_tensor(p, n, options.limits));

  SearchOutcome out;
  out.best_residual = std::numeric_limits<double>::infinity();
  fit::Options fo;
  fo.max_iterations = options.max_iterations;
  fo.target_residual = options.residual_tol * 1e-2;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, r));
    fit::Parameters init;
    const auto w = sample_simplex(l, rng);
    init.weights.assign(w.probs().begin(), w.probs().end());
    for (std::size_t i = 0; i < l; ++i) {
      const auto c = sample_simplex(d, rng);
      init.components.emplace_back(c.probs().begin(), c.probs().end());
    }
    const fit::Result res = fit::fit_mixture(moments, target, std::move(init), fo);
    out.restarts = r + 1;
    out.best_residual = std::min(out.best_residual, res.residual);
    if (!(res.residual < options.residual_tol)) continue;
    if (auto q = accept(res.params, p, n, options)) {
      out.witness = std::move(q);
      out.witness_residual = res.residual;
      out.witness_restart = r;
      break;
    }
  }
  return out;
}

}  // namespace mixident
