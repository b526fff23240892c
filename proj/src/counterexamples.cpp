#include "mixident/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "mixident/random.hpp"
#include "mixident/randomcheck.hpp"
#include "mixident/rank.hpp"
#include "mixident/tensor.hpp"

namespace mixident {

const char* to_string(Construction c) noexcept {
  return c == Construction::Identifiability ? "identifiability" : "determinedness";
}

double BernoulliMixture::power_moment(unsigned j) const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * std::pow(probs[i], j);
  return s;
}

Mixture BernoulliMixture::to_mixture() const {
  std::vector<Categorical> comps;
  comps.reserve(probs.size());
  for (double p : probs) comps.emplace_back(std::vector<double>{1.0 - p, p});
  return make_mixture(weights, std::move(comps), 0.0);
}

namespace {

// Unknowns x = (w_0..w_{L-1}, q_0..q_{L-1}); equations sum(w) - 1 and
// sum_i w_i q_i^j - target_j for j = 1..J. Entries in `fixed` never move.
class MomentSystem {
 public:
  MomentSystem(std::size_t components, std::vector<double> target, std::vector<bool> fixed)
      : l_(components), target_(std::move(target)), fixed_(std::move(fixed)) {
    for (std::size_t i = 0; i < 2 * l_; ++i)
      if (!fixed_[i]) free_.push_back(i);
  }

  std::size_t equations() const { return target_.size() + 1; }
  std::size_t unknowns() const { return free_.size(); }

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(equations()));
    r(0) = x.head(static_cast<Eigen::Index>(l_)).sum() - 1.0;
    for (std::size_t j = 1; j <= target_.size(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < l_; ++i) s += w(x, i) * std::pow(q(x, i), static_cast<double>(j));
      r(static_cast<Eigen::Index>(j)) = s - target_[j - 1];
    }
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(equations()),
                                                 static_cast<Eigen::Index>(2 * l_));
    for (std::size_t i = 0; i < l_; ++i) {
      const auto wi = static_cast<Eigen::Index>(i);
      const auto qi = static_cast<Eigen::Index>(l_ + i);
      full(0, wi) = 1.0;
      for (std::size_t j = 1; j <= target_.size(); ++j) {
        const auto row = static_cast<Eigen::Index>(j);
        full(row, wi) = std::pow(q(x, i), static_cast<double>(j));
        full(row, qi) = w(x, i) * double(j) * std::pow(q(x, i), static_cast<double>(j - 1));
      }
    }
    Eigen::MatrixXd out(full.rows(), static_cast<Eigen::Index>(free_.size()));
    for (std::size_t c = 0; c < free_.size(); ++c)
      out.col(static_cast<Eigen::Index>(c)) = full.col(static_cast<Eigen::Index>(free_[c]));
    return out;
  }

  void add_free(Eigen::VectorXd& x, const Eigen::VectorXd& delta) const {
    for (std::size_t c = 0; c < free_.size(); ++c)
      x(static_cast<Eigen::Index>(free_[c])) += delta(static_cast<Eigen::Index>(c));
  }

  std::size_t free_index(std::size_t variable) const {
    return static_cast<std::size_t>(std::find(free_.begin(), free_.end(), variable) - free_.begin());
  }

  std::size_t components() const { return l_; }
  double w(const Eigen::VectorXd& x, std::size_t i) const { return x(static_cast<Eigen::Index>(i)); }
  double q(const Eigen::VectorXd& x, std::size_t i) const {
    return x(static_cast<Eigen::Index>(l_ + i));
  }

 private:
  std::size_t l_;
  std::vector<double> target_;
  std::vector<bool> fixed_;
  std::vector<std::size_t> free_;
};

// Newton with minimum-norm steps; returns the final residual norm.
double correct(const MomentSystem& sys, Eigen::VectorXd& x) {
  double best = sys.residual(x).norm();
  for (unsigned it = 0; it < 40 && best > 1e-15; ++it) {
    const Eigen::VectorXd r = sys.residual(x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.jacobian(x), Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd y = x;
    sys.add_free(y, -svd.solve(r));
    const double norm = sys.residual(y).norm();
    if (!std::isfinite(norm) || norm >= best) break;
    x = y;
    best = norm;
  }
  return best;
}

Eigen::VectorXd tangent(const MomentSystem& sys, const Eigen::VectorXd& x) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.jacobian(x), Eigen::ComputeFullV);
  return svd.matrixV().col(svd.matrixV().cols() - 1);
}

struct Walk {
  const MomentSystem& sys;
  const ContinuationOptions& options;
  std::function<bool(const Eigen::VectorXd&)> feasible;
  std::function<bool(const Eigen::VectorXd&)> done;
};

// Predictor-corrector along the one-dimensional solution curve from x0.
Eigen::VectorXd walk_curve(const Walk& walk, Eigen::VectorXd x, Eigen::VectorXd t) {
  const ContinuationOptions& o = walk.options;
  double h = o.step;
  bool last_failure_infeasible = false;
  for (unsigned step = 0; step < o.max_steps; ++step) {
    for (;;) {
      Eigen::VectorXd y = x;
      walk.sys.add_free(y, h * t);
      const double res = correct(walk.sys, y);
      const Eigen::VectorXd moved = y - x;
      if (res <= o.newton_tol && moved.norm() <= 2.0 * h) {
        if (walk.feasible(y)) {
          Eigen::VectorXd t_new = tangent(walk.sys, y);
          if (t_new.dot(t) < 0.0) t_new = -t_new;
          x = std::move(y);
          t = std::move(t_new);
          h = std::min(o.step, 2.0 * h);
          break;
        }
        last_failure_infeasible = true;
      } else {
        last_failure_infeasible = false;
      }
      h /= 2.0;
      if (h < o.min_step) {
        // The curve leaves the feasible region here; the caller verifies
        // whether this boundary point is already far enough from P.
        if (last_failure_infeasible && step > 0) return x;
        if (last_failure_infeasible)
          fail(ErrorCode::SeparationLost, "weights or probabilities left the feasible region");
        fail(ErrorCode::ContinuationStalled, "Newton correction failed at the minimum step");
      }
    }
    if (walk.done(x)) return x;
  }
  fail(ErrorCode::ContinuationStalled, "walk did not reach the target separation");
}

std::vector<double> power_moments(const BernoulliMixture& p, unsigned order) {
  std::vector<double> out;
  for (unsigned j = 1; j <= order; ++j) out.push_back(p.power_moment(j));
  return out;
}

BernoulliMixture from_state(const MomentSystem& sys, const Eigen::VectorXd& x) {
  BernoulliMixture out;
  for (std::size_t i = 0; i < sys.components(); ++i) {
    out.weights.push_back(sys.w(x, i));
    out.probs.push_back(sys.q(x, i));
  }
  return out;
}

bool separated(const std::vector<double>& probs, double floor) {
  for (std::size_t i = 0; i < probs.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(probs[i] - probs[j]) < floor) return false;
  return true;
}

// Frobenius distance of the order-(J+1) tensors when power moments 1..J
// agree: every entry differs by the (J+1)-th power-moment gap up to sign.
double next_order_gap(const BernoulliMixture& p, const BernoulliMixture& q, unsigned order) {
  return std::abs(p.power_moment(order + 1) - q.power_moment(order + 1)) *
         std::pow(2.0, 0.5 * double(order + 1));
}

// Moments agree through `order` within the Newton tolerance and differ at the
// next order.
void verify_base(BernoulliPair& pair, unsigned order, const ContinuationOptions& o) {
  for (double w : pair.q.weights)
    if (!(w >= o.min_weight)) fail(ErrorCode::SeparationLost, "a weight of Q fell below the floor");
  if (pair.q.weights.size() == pair.p.weights.size() &&
      !(mixture_match_distance(pair.q.to_mixture(), pair.p.to_mixture()) > kPairMatchTol))
    fail(ErrorCode::ContinuationStalled, "walk stayed within 1e-3 of P");
  for (unsigned j = 1; j <= order; ++j)
    if (!(std::abs(pair.p.power_moment(j) - pair.q.power_moment(j)) <= o.newton_tol))
      fail(ErrorCode::VerificationFailed, "power moment " + std::to_string(j) + " does not match");
  if (!(next_order_gap(pair.p, pair.q, order) > 1e-6))
    fail(ErrorCode::ContinuationStalled,
         "first unmatched moment tensors within 1e-6 (walk too short or m too large)");
  pair.matched_order = order;
}

void check_base_size(std::size_t m, std::size_t min_m, const ContinuationOptions& o) {
  if (m < min_m) fail(ErrorCode::InvalidArgs, "too few components");
  if (m > o.max_components)
    fail(ErrorCode::InvalidArgs,
         "at most " + std::to_string(o.max_components) + " components (moment system conditioning)");
}

}  // namespace

BernoulliMixture random_bernoulli_mixture(std::size_t m, std::uint64_t seed,
                                          const ContinuationOptions& options) {
  if (m == 0) fail(ErrorCode::InvalidArgs, "need at least one component");
  const double lo = 0.05, hi = 0.95;
  const double slack = (hi - lo) - double(m - 1) * options.prob_separation;
  const double weight_slack = 1.0 - double(m) * options.weight_floor;
  if (slack < 0.0 || weight_slack < 0.0)
    fail(ErrorCode::InvalidArgs, "separation floors leave no room for " + std::to_string(m) + " components");
  Rng rng(seed);
  std::vector<double> u(m);
  for (double& x : u) x = rng.uniform() * slack;
  std::sort(u.begin(), u.end());
  BernoulliMixture out;
  for (std::size_t i = 0; i < m; ++i) out.probs.push_back(lo + u[i] + double(i) * options.prob_separation);
  const auto w = sample_simplex(m, rng);
  for (std::size_t i = 0; i < m; ++i) out.weights.push_back(options.weight_floor + weight_slack * w[i]);
  double s = 0.0;
  for (double x : out.weights) s += x;
  for (double& x : out.weights) x /= s;
  return out;
}

BernoulliPair bernoulli_moment_match(const BernoulliMixture& p, const ContinuationOptions& options) {
  const std::size_t m = p.probs.size();
  check_base_size(m, 2, options);
  const unsigned order = static_cast<unsigned>(2 * m - 2);
  const MomentSystem sys(m, power_moments(p, order), std::vector<bool>(2 * m, false));
  Eigen::VectorXd x0(static_cast<Eigen::Index>(2 * m));
  for (std::size_t i = 0; i < m; ++i) {
    x0(static_cast<Eigen::Index>(i)) = p.weights[i];
    x0(static_cast<Eigen::Index>(m + i)) = p.probs[i];
  }
  const Mixture pm = p.to_mixture();
  const auto feasible = [&](const Eigen::VectorXd& x) {
    const BernoulliMixture q = from_state(sys, x);
    for (std::size_t i = 0; i < m; ++i)
      if (q.weights[i] < options.min_weight || q.probs[i] < options.prob_floor ||
          q.probs[i] > 1.0 - options.prob_floor)
        return false;
    return separated(q.probs, options.collision_floor);
  };
  const auto done = [&](const Eigen::VectorXd& x) {
    const BernoulliMixture q = from_state(sys, x);
    return mixture_match_distance(q.to_mixture(), pm) >= options.target_separation &&
           next_order_gap(p, q, order) >= options.next_moment_gap;
  };
  const Walk walk{sys, options, feasible, done};
  const Eigen::VectorXd t0 = tangent(sys, x0);
  std::optional<Error> first_error;
  for (double sign : {1.0, -1.0}) {
    try {
      BernoulliPair pair{p, from_state(sys, walk_curve(walk, x0, sign * t0)), 0};
      verify_base(pair, order, options);
      return pair;
    } catch (const Error& e) {
      if (!first_error) first_error = e;
    }
  }
  throw *first_error;
}

BernoulliPair bernoulli_moment_match(std::size_t m, std::uint64_t seed,
                                     const ContinuationOptions& options) {
  check_base_size(m, 2, options);
  return bernoulli_moment_match(random_bernoulli_mixture(m, seed, options), options);
}

namespace {

BernoulliPair determinedness_walk(const BernoulliMixture& p, std::uint64_t dummy_seed,
                                  const ContinuationOptions& options) {
  const std::size_t m = p.probs.size();
  const unsigned order = static_cast<unsigned>(2 * m - 1);
  const std::size_t l = m + 1;

  // Dummy location away from every component of P.
  Rng rng(dummy_seed);
  double dummy = -1.0;
  for (unsigned attempt = 0; attempt < 10000 && dummy < 0.0; ++attempt) {
    const double c = rng.uniform(0.05, 0.95);
    if (std::all_of(p.probs.begin(), p.probs.end(),
                    [&](double q) { return std::abs(q - c) >= options.prob_separation; }))
      dummy = c;
  }
  if (dummy < 0.0) fail(ErrorCode::SeparationLost, "no room for the added component");

  std::vector<bool> fixed(2 * l, false);
  fixed[l + m] = true;
  const MomentSystem sys(l, power_moments(p, order), fixed);
  Eigen::VectorXd x0(static_cast<Eigen::Index>(2 * l));
  for (std::size_t i = 0; i < m; ++i) {
    x0(static_cast<Eigen::Index>(i)) = p.weights[i];
    x0(static_cast<Eigen::Index>(l + i)) = p.probs[i];
  }
  x0(static_cast<Eigen::Index>(m)) = 0.0;
  x0(static_cast<Eigen::Index>(l + m)) = dummy;

  const auto feasible = [&](const Eigen::VectorXd& x) {
    const BernoulliMixture q = from_state(sys, x);
    for (std::size_t i = 0; i < l; ++i) {
      const double floor = i == m ? 0.0 : options.min_weight;
      if (q.weights[i] < floor || q.probs[i] < options.prob_floor ||
          q.probs[i] > 1.0 - options.prob_floor)
        return false;
    }
    return separated(q.probs, options.collision_floor);
  };
  const auto done = [&](const Eigen::VectorXd& x) {
    return sys.w(x, m) >= options.target_separation &&
           next_order_gap(p, from_state(sys, x), order) >= options.next_moment_gap;
  };
  Eigen::VectorXd t0 = tangent(sys, x0);
  if (t0(static_cast<Eigen::Index>(sys.free_index(m))) < 0.0) t0 = -t0;
  BernoulliPair pair{p, from_state(sys, walk_curve(Walk{sys, options, feasible, done}, x0, t0)), 0};
  verify_base(pair, order, options);
  return pair;
}

}  // namespace

BernoulliPair bernoulli_determinedness_match(const BernoulliMixture& p, std::uint64_t seed,
                                             const ContinuationOptions& options) {
  const std::size_t m = p.probs.size();
  check_base_size(m, 1, options);
  if (m + 1 > options.max_components)
    fail(ErrorCode::InvalidArgs, "Q would exceed the component limit");
  // A walk can hit the boundary before the added weight reaches its floor;
  // another location for the added component usually gets further.
  std::optional<Error> first_error;
  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    try {
      return determinedness_walk(p, derive_seed(seed, 0x64756d + attempt), options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ContinuationStalled && e.code() != ErrorCode::SeparationLost) throw;
      if (!first_error) first_error = e;
    }
  }
  throw *first_error;
}

BernoulliPair bernoulli_determinedness_match(std::size_t m, std::uint64_t seed,
                                             const ContinuationOptions& options) {
  check_base_size(m, 1, options);
  return bernoulli_determinedness_match(random_bernoulli_mixture(m, seed, options), seed, options);
}

PairVerification verify_pair(const Mixture& p_lift, const Mixture& q_lift, const Mixture& base_p,
                             const Mixture& base_q, unsigned n, std::size_t k, Construction c,
                             const Limits& limits) {
  PairVerification v;
  v.tensor_distance =
      frobenius_distance(moment_tensor(p_lift, n, limits), moment_tensor(q_lift, n, limits));
  v.match_distance = mixture_match_distance(p_lift, q_lift);
  const KruskalReport kp = kruskal_rank(VectorFamily::from_components(p_lift));
  const KruskalReport kq = kruskal_rank(VectorFamily::from_components(q_lift));
  v.k_measured_P = kp.k;
  v.k_measured_Q = kq.k;
  const std::size_t m = base_p.size();
  v.base_order = static_cast<unsigned>(c == Construction::Identifiability ? 2 * m - 1 : 2 * m);
  v.base_distance = frobenius_distance(moment_tensor(base_p, v.base_order, limits),
                                       moment_tensor(base_q, v.base_order, limits));

  const auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::VerificationFailed, what);
  };
  require(v.tensor_distance <= kPairTensorTol,
          "tensor distance " + std::to_string(v.tensor_distance) + " above 1e-8");
  require(v.match_distance > kPairMatchTol, "mixtures are not distinct");
  require(is_k_independent(kp, p_lift.size(), k), "lifted P components not k-independent");
  require(is_k_independent(kq, q_lift.size(), k), "lifted Q components not k-independent");
  require(v.base_distance > kPairBaseTol, "base tensors agree beyond the matched order");
  if (c == Construction::Identifiability)
    require(q_lift.size() <= p_lift.size(), "Q has more components than P");
  else
    require(q_lift.size() > p_lift.size(), "Q must have more components than P");
  return v;
}

namespace {

template <class Base>
CounterexamplePair build(long m, long k, long n, std::uint64_t seed, const Limits& limits,
                         Construction c, Base&& base) {
  const auto r = static_cast<unsigned>(k - 1);
  checked_power(2, r * static_cast<unsigned>(n), limits.tensor_cap);
  std::optional<Error> last;
  for (unsigned attempt = 0; attempt < kBaseRetries; ++attempt) {
    const std::uint64_t base_seed = derive_seed(seed, attempt);
    std::optional<BernoulliPair> pair;
    try {
      pair = base(base_seed);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ContinuationStalled && e.code() != ErrorCode::SeparationLost) throw;
      last = e;
      continue;
    }
    const Mixture bp = pair->p.to_mixture();
    const Mixture bq = pair->q.to_mixture();
    Mixture pl = product_lift(bp, r, limits);
    Mixture ql = product_lift(bq, r, limits);
    const PairVerification v =
        verify_pair(pl, ql, bp, bq, static_cast<unsigned>(n), static_cast<std::size_t>(k), c, limits);
    return CounterexamplePair{std::move(pl), std::move(ql), m,         k, static_cast<unsigned>(n),
                              seed,          base_seed,     c,         v};
  }
  throw *last;
}

}  // namespace

CounterexamplePair build_nonidentifiable(long m, long k, long n, std::uint64_t seed,
                                         const Limits& limits, const ContinuationOptions& options) {
  if (n < 1) fail(ErrorCode::InvalidArgs, "n must be positive");
  if (!(m >= k && k >= 2 && 2 * m - 1 > (k - 1) * n))
    fail(ErrorCode::InvalidRegion, "needs m >= k >= 2 and 2m-1 > (k-1)n");
  return build(m, k, n, seed, limits, Construction::Identifiability, [&](std::uint64_t s) {
    return bernoulli_moment_match(static_cast<std::size_t>(m), s, options);
  });
}

CounterexamplePair build_nondetermined(long m, long k, long n, std::uint64_t seed,
                                       const Limits& limits, const ContinuationOptions& options) {
  if (n < 1) fail(ErrorCode::InvalidArgs, "n must be positive");
  if (!(k >= 2 && (m >= k || m == 1) && 2 * m > (k - 1) * n))
    fail(ErrorCode::InvalidRegion, "needs m >= k >= 2 (or m = 1) and 2m > (k-1)n");
  return build(m, k, n, seed, limits, Construction::Determinedness, [&](std::uint64_t s) {
    return bernoulli_determinedness_match(static_cast<std::size_t>(m), s, options);
  });
}

}  // namespace mixident
