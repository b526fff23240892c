#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "mixident/fit.hpp"
#include "mixident/identifiability.hpp"
#include "mixident/random.hpp"
#include "mixident/randomcheck.hpp"

namespace mixident {

const char* to_string(RecoveryRoute route) noexcept {
  switch (route) {
    case RecoveryRoute::SingleComponent: return "single_component";
    case RecoveryRoute::SimultaneousDiagonalization: return "simultaneous_diagonalization";
    case RecoveryRoute::LeastSquares: return "least_squares";
  }
  return "unknown";
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Base vector of a (scaled) Kronecker power v^{(x) r}, via the leading left
// singular vector of its d x d^{r-1} reshape; sign fixed so the sum is positive.
std::vector<double> depower(const Eigen::VectorXd& power, std::size_t d) {
  const auto rows = static_cast<Eigen::Index>(d);
  const Eigen::Index cols = power.size() / rows;
  Eigen::VectorXd base;
  if (cols == 1) {
    base = power;
  } else {
    const RowMatrix reshaped = Eigen::Map<const RowMatrix>(power.data(), rows, cols);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(reshaped, Eigen::ComputeThinU);
    base = svd.matrixU().col(0);
  }
  if (base.sum() < 0.0) base = -base;
  return {base.data(), base.data() + base.size()};
}

// Maps fitted parameters to a Mixture, or nullopt when a weight vanished or
// two components merged (fewer than m distinct components remain).
std::optional<Mixture> to_mixture(const fit::Parameters& params, std::size_t m) {
  std::vector<double> w;
  std::vector<Categorical> comps;
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    if (!(params.weights[i] > 0.0)) continue;
    w.push_back(params.weights[i]);
    comps.push_back(Categorical::normalized(params.components[i]));
  }
  if (w.size() != m) return std::nullopt;
  double s = 0.0;
  for (double x : w) s += x;
  for (double& x : w) x /= s;
  Mixture out = make_mixture(std::move(w), std::move(comps));
  if (out.size() != m) return std::nullopt;
  return out;
}

struct Attempt {
  std::optional<Mixture> mixture;
  double residual = std::numeric_limits<double>::infinity();
};

Attempt refine(const fit::SymmetricMoments& moments, const Eigen::VectorXd& target,
               fit::Parameters init, std::size_t m, const RecoveryOptions& options) {
  fit::Options fo;
  fo.target_residual = std::min(1e-14, options.residual_threshold * 1e-3);
  const fit::Result res = fit::fit_mixture(moments, target, std::move(init), fo);
  Attempt out;
  out.residual = res.residual;
  if (res.residual <= options.residual_threshold) out.mixture = to_mixture(res.params, m);
  return out;
}

// Initial weights for fixed components by nonnegative least squares.
std::vector<double> nnls_weights(const fit::SymmetricMoments& moments, const Eigen::VectorXd& target,
                                 const std::vector<std::vector<double>>& comps) {
  const std::size_t m = comps.size();
  Eigen::MatrixXd design(target.size(), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> unit(m, 0.0);
    unit[i] = 1.0;
    design.col(static_cast<Eigen::Index>(i)) = moments.evaluate(unit, comps);
  }
  const Eigen::VectorXd w = fit::nnls(design, target);
  std::vector<double> out(w.data(), w.data() + w.size());
  double s = 0.0;
  for (double x : out) s += x;
  if (!(s > 0.0)) return std::vector<double>(m, 1.0 / double(m));
  for (double& x : out) x /= s;
  return out;
}

std::optional<fit::Parameters> jennrich_init(const Tensor3& x, std::size_t d, std::size_t m,
                                             const Eigen::MatrixXd& ua, const Eigen::MatrixXd& ub,
                                             Rng& rng, const RecoveryOptions& options) {
  const auto [da, db, dc] = x.shape;
  const auto mi = static_cast<Eigen::Index>(m);
  Eigen::VectorXd u(static_cast<Eigen::Index>(dc)), v(static_cast<Eigen::Index>(dc));
  for (Eigen::Index l = 0; l < u.size(); ++l) u(l) = rng.uniform(-1.0, 1.0);
  for (Eigen::Index l = 0; l < v.size(); ++l) v(l) = rng.uniform(-1.0, 1.0);

  // Contract mode 3, then project modes 1 and 2 onto their top-m subspaces.
  Eigen::MatrixXd cu = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(da), static_cast<Eigen::Index>(db));
  Eigen::MatrixXd cv = cu;
  for (std::size_t a = 0; a < da; ++a)
    for (std::size_t b = 0; b < db; ++b) {
      double su = 0.0, sv = 0.0;
      for (std::size_t c = 0; c < dc; ++c) {
        const double e = x(a, b, c);
        su += u(static_cast<Eigen::Index>(c)) * e;
        sv += v(static_cast<Eigen::Index>(c)) * e;
      }
      cu(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = su;
      cv(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = sv;
    }
  const Eigen::MatrixXd m1 = ua.transpose() * cu * ub;
  const Eigen::MatrixXd m2 = ua.transpose() * cv * ub;

  const Eigen::VectorXd sv2 = singular_values(m2);
  if (!(sv2(mi - 1) > 0.0) || sv2(0) / sv2(mi - 1) > options.pencil_condition_limit) return std::nullopt;

  const Eigen::MatrixXd pencil = m1 * m2.inverse();
  Eigen::EigenSolver<Eigen::MatrixXd> es(pencil);
  if (es.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXcd lambda = es.eigenvalues();
  const double scale = lambda.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < mi; ++i) {
    if (std::abs(lambda(i).imag()) > 1e-6 * std::max(scale, 1e-300)) return std::nullopt;
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(lambda(i) - lambda(j)) < 1e-8 * scale) return std::nullopt;
  }
  const Eigen::MatrixXd factors = ua * es.eigenvectors().real();

  fit::Parameters init;
  for (Eigen::Index i = 0; i < mi; ++i) {
    auto base = depower(factors.col(i), d);
    for (double& p : base) p = std::max(p, 0.0);
    double s = 0.0;
    for (double p : base) s += p;
    if (!(s > 0.0)) return std::nullopt;
    for (double& p : base) p /= s;
    init.components.push_back(std::move(base));
  }
  return init;
}

// The marginal of a rank-one V_n is the component itself.
Recovery recover_single(const MomentTensor& t, const RecoveryOptions& options) {
  MomentTensor marginal = t;
  while (marginal.order() > 1) marginal = marginalize_last(marginal);
  std::vector<double> p(marginal.entries().begin(), marginal.entries().end());
  Mixture out = make_mixture({1.0}, {Categorical::normalized(std::move(p))});
  const double residual = frobenius_distance(moment_tensor(out, t.order(), options.limits), t);
  if (residual > options.residual_threshold)
    fail(ErrorCode::NoConvergence, "tensor is not a single-component moment tensor");
  return Recovery{std::move(out), RecoveryRoute::SingleComponent, residual, 0};
}

}  // namespace

Recovery recover_mixture(const MomentTensor& t, std::size_t m, const Split3& s,
                         const RecoveryOptions& options) {
  if (m == 0) fail(ErrorCode::InvalidArgs, "m must be positive");
  if (m == 1) return recover_single(t, options);
  if (s.total() != t.order()) fail(ErrorCode::SplitMismatch, "split does not match tensor order");
  const std::size_t d = t.dim();
  const fit::SymmetricMoments moments(d, t.order());
  const Eigen::VectorXd target = moments.compress(t);

  // Largest parts first: the first two modes must carry full-rank factors.
  std::array<unsigned, 3> parts = s.parts();
  std::sort(parts.begin(), parts.end(), std::greater<>());
  const Tensor3 x = flatten_parts(t, parts);
  const auto [da, db, dc] = x.shape;
  const RowMatrix unfold_a =
      Eigen::Map<const RowMatrix>(x.entries.data(), static_cast<Eigen::Index>(da),
                                  static_cast<Eigen::Index>(db * dc));
  RowMatrix unfold_b(static_cast<Eigen::Index>(db), static_cast<Eigen::Index>(da * dc));
  for (std::size_t a = 0; a < da; ++a)
    for (std::size_t b = 0; b < db; ++b)
      for (std::size_t c = 0; c < dc; ++c)
        unfold_b(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a * dc + c)) = x(a, b, c);

  const bool modes_full_rank = da >= m && db >= m &&
                               numerical_rank(unfold_a, options.rel_tol) >= m &&
                               numerical_rank(unfold_b, options.rel_tol) >= m;
  double best_residual = std::numeric_limits<double>::infinity();

  if (modes_full_rank) {
    const auto mi = static_cast<Eigen::Index>(m);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_a(unfold_a, Eigen::ComputeThinU);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd_b(unfold_b, Eigen::ComputeThinU);
    const Eigen::MatrixXd ua = svd_a.matrixU().leftCols(mi);
    const Eigen::MatrixXd ub = svd_b.matrixU().leftCols(mi);
    Rng rng(options.seed);
    for (unsigned draw = 1; draw <= options.pencil_draws; ++draw) {
      auto init = jennrich_init(x, d, m, ua, ub, rng, options);
      if (!init) continue;
      init->weights = nnls_weights(moments, target, init->components);
      Attempt a = refine(moments, target, std::move(*init), m, options);
      best_residual = std::min(best_residual, a.residual);
      if (a.mixture)
        return Recovery{std::move(*a.mixture), RecoveryRoute::SimultaneousDiagonalization, a.residual,
                        draw};
    }
  } else if (!options.least_squares_fallback) {
    fail(ErrorCode::RankDeficientModes,
         "flattening modes of sizes " + std::to_string(da) + " and " + std::to_string(db) +
             " do not carry rank " + std::to_string(m));
  }

  if (options.least_squares_fallback) {
    for (unsigned r = 0; r < options.least_squares_restarts; ++r) {
      Rng rng(derive_seed(options.seed, 0x1000 + r));
      fit::Parameters init;
      const auto w = sample_simplex(m, rng);
      init.weights.assign(w.probs().begin(), w.probs().end());
      for (std::size_t i = 0; i < m; ++i) {
        const auto c = sample_simplex(d, rng);
        init.components.emplace_back(c.probs().begin(), c.probs().end());
      }
      Attempt a = refine(moments, target, std::move(init), m, options);
      best_residual = std::min(best_residual, a.residual);
      if (a.mixture)
        return Recovery{std::move(*a.mixture), RecoveryRoute::LeastSquares, a.residual, r + 1};
    }
  }
  fail(ErrorCode::NoConvergence,
       "residual stalled at " + std::to_string(best_residual) + " above the threshold");
}

CertificationReport certify_identifiability(const Mixture& p, unsigned n, unsigned trials,
                                            std::uint64_t seed, const RecoveryOptions& options) {
  if (n == 0) fail(ErrorCode::InvalidArgs, "n must be positive");
  if (trials == 0) fail(ErrorCode::InvalidArgs, "need at least one trial");
  CertificationReport report;
  const std::size_t m = p.size();
  const std::size_t k = kruskal_rank(VectorFamily::from_components(p), options.rel_tol).k;
  report.bound = bound_verdict(static_cast<long>(m), static_cast<long>(k), n);

  const MomentTensor t = moment_tensor(p, n, options.limits);
  std::optional<Split3> split;
  if (n >= 3) {
    split = balanced_split(n);
    report.kruskal_condition = kruskal_condition(p, n, *split, options.rel_tol, options.limits);
  } else {
    report.notes.emplace_back("n < 3: no three-way split, Kruskal condition not applicable");
  }
  if (m >= 2 && !report.bound.identifiable_guaranteed)
    report.notes.emplace_back("outside the identifiability bound for the measured k");

  bool all_recovered = true;
  bool used_least_squares = false;
  for (unsigned i = 0; i < trials; ++i) {
    RecoveryTrial trial;
    trial.seed = derive_seed(seed, i);
    trial.match_distance = std::numeric_limits<double>::infinity();
    try {
      RecoveryOptions o = options;
      o.seed = trial.seed;
      if (!split && m != 1) fail(ErrorCode::NTooSmall, "no three-way split for n < 3");
      const Recovery r = split ? recover_mixture(t, m, *split, o) : recover_single(t, o);
      trial.route = to_string(r.route);
      used_least_squares = used_least_squares || r.route == RecoveryRoute::LeastSquares;
      trial.match_distance = mixture_match_distance(r.mixture, p);
    } catch (const Error& e) {
      trial.error = to_string(e.code());
    }
    if (!(trial.match_distance <= kRecoveryMatchTol)) all_recovered = false;
    report.recovery.push_back(std::move(trial));
  }
  if (used_least_squares)
    report.notes.emplace_back(
        "recovery used multi-start least squares (two largest modes not of full rank m): "
        "uniqueness evidence, not a proof");

  if (m == 1) {
    report.certified = all_recovered;
    report.notes.emplace_back("m = 1: certified by recovery alone");
  } else {
    report.certified = all_recovered && report.kruskal_condition && report.kruskal_condition->satisfied;
  }
  return report;
}

}  // namespace mixident
