#include "mixident/randomcheck.hpp"

#include <algorithm>
#include <limits>

namespace mixident {

Categorical sample_simplex(std::size_t d, Rng& rng) {
  if (d == 0) fail(ErrorCode::InvalidArgs, "simplex dimension must be positive");
  std::vector<double> e(d);
  for (double& x : e) x = rng.exponential();
  return Categorical::normalized(std::move(e));
}

Categorical sample_simplex(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return sample_simplex(d, rng);
}

MonteCarloReport monte_carlo_independence(std::size_t d, std::size_t trials, double rel_tol,
                                          std::uint64_t seed, bool forced_dependence) {
  if (d < 2) fail(ErrorCode::InvalidArgs, "dimension must be at least 2");
  if (trials == 0) fail(ErrorCode::InvalidArgs, "need at least one trial");
  MonteCarloReport report;
  report.trials = trials;
  report.dim = d;
  report.forced_dependence = forced_dependence;
  report.min_observed_sv = std::numeric_limits<double>::infinity();
  report.per_trial_min_sv.reserve(trials);
  const auto cols = static_cast<Eigen::Index>(d);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    Eigen::MatrixXd m(cols, cols);
    for (Eigen::Index i = 0; i < cols; ++i) {
      const auto c = sample_simplex(d, rng);
      for (Eigen::Index j = 0; j < cols; ++j) m(j, i) = c[static_cast<std::size_t>(j)];
    }
    if (forced_dependence) m.col(cols - 1) = m.leftCols(cols - 1).rowwise().mean();
    const Eigen::VectorXd sv = singular_values(m);
    const double smallest = sv(sv.size() - 1);
    report.per_trial_min_sv.push_back(smallest);
    report.min_observed_sv = std::min(report.min_observed_sv, smallest);
    if (numerical_rank(m, rel_tol) == d) ++report.independent_count;
  }
  return report;
}

Mixture random_k_independent_mixture(std::size_t d, std::size_t m, std::uint64_t seed,
                                     double rel_tol) {
  if (d < 2) fail(ErrorCode::InvalidArgs, "dimension must be at least 2");
  if (m == 0) fail(ErrorCode::InvalidArgs, "need at least one component");
  const std::size_t target = std::min(d, m);
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    std::vector<Categorical> comps;
    comps.reserve(m);
    for (std::size_t i = 0; i < m; ++i) comps.push_back(sample_simplex(d, rng));
    const auto w = sample_simplex(m, rng);
    std::vector<double> weights(w.probs().begin(), w.probs().end());
    if (std::any_of(weights.begin(), weights.end(), [](double x) { return !(x > 0.0); })) continue;
    Mixture p = make_mixture(std::move(weights), std::move(comps));
    if (p.size() != m) continue;
    if (kruskal_rank(VectorFamily::from_components(p), rel_tol).k == target) return p;
  }
  fail(ErrorCode::GenerationFailed, "no family with Kruskal rank min(d, m) after 100 draws");
}

LemmaReport kindpow_trial(std::size_t d, std::size_t m, unsigned n, std::uint64_t seed,
                          double rel_tol, const Limits& limits) {
  const Mixture p = random_k_independent_mixture(d, m, seed, rel_tol);
  return verify_kindpow(VectorFamily::from_components(p), n, rel_tol, limits);
}

LemmaReport kpindpow_trial(std::size_t d, std::size_t m, unsigned n, std::size_t support,
                           std::uint64_t seed, double rel_tol, const Limits& limits) {
  if (support < 2 || support > m) fail(ErrorCode::InvalidArgs, "support must be in [2, m]");
  const Mixture p = random_k_independent_mixture(d, m, seed, rel_tol);
  Rng rng(derive_seed(seed, 0x6b70));
  // Random support set (partial Fisher-Yates) and convex coefficients.
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  for (std::size_t i = 0; i < support; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * double(m - i));
    std::swap(idx[i], idx[std::min(j, m - 1)]);
  }
  const auto coef = sample_simplex(support, rng);
  std::vector<double> x(d, 0.0);
  for (std::size_t s = 0; s < support; ++s)
    for (std::size_t j = 0; j < d; ++j) x[j] += coef[s] * p.component(idx[s])[j];
  return verify_kpindpow(x, VectorFamily::from_components(p), n, rel_tol, limits);
}

}  // namespace mixident
