#include "mixident/fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace mixident::fit {

std::vector<double> project_to_simplex(std::span<const double> v) {
  if (v.empty()) return {};
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = std::max(v[j] - theta, 0.0);
  // Remove the rounding residue of the shift so the result sums to 1.
  const double s = std::accumulate(out.begin(), out.end(), 0.0);
  if (s > 0.0)
    for (double& x : out) x /= s;
  return out;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, unsigned max_iterations) {
  const Eigen::Index n = a.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, a.norm() * b.norm());

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
    return z;
  };

  for (unsigned outer = 0; outer < max_iterations; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (unsigned inner = 0; inner < max_iterations; ++inner) {
      Eigen::VectorXd z = solve_passive();
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      if (feasible) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0)
          alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && std::abs(x(j)) <= 1e-15) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
    }
  }
  return x;
}

SymmetricMoments::SymmetricMoments(std::size_t dim, unsigned order) : dim_(dim), order_(order) {
  if (dim == 0 || order == 0) fail(ErrorCode::InvalidArgs, "dim and order must be positive");
  std::vector<double> log_fact(order + 1, 0.0);
  for (unsigned i = 1; i <= order; ++i) log_fact[i] = log_fact[i - 1] + std::log(double(i));

  std::vector<std::size_t> idx(order, 0);
  while (true) {
    std::vector<unsigned> c(dim, 0);
    std::size_t off = 0;
    for (auto j : idx) {
      ++c[j];
      off = off * dim + j;
    }
    double log_mult = log_fact[order];
    for (auto cj : c) log_mult -= log_fact[cj];
    counts_.push_back(std::move(c));
    offset_.push_back(off);
    scale_.push_back(std::sqrt(std::round(std::exp(log_mult))));

    // Next non-decreasing tuple.
    std::size_t p = order;
    while (p > 0 && idx[p - 1] == dim - 1) --p;
    if (p == 0) break;
    const std::size_t v = idx[p - 1] + 1;
    for (std::size_t q = p - 1; q < order; ++q) idx[q] = v;
  }
}

Eigen::VectorXd SymmetricMoments::compress(const MomentTensor& t) const {
  if (t.dim() != dim_ || t.order() != order_)
    fail(ErrorCode::ShapeMismatch, "tensor shape differs from the moment layout");
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  const auto e = t.entries();
  for (std::size_t u = 0; u < size(); ++u) out(static_cast<Eigen::Index>(u)) = scale_[u] * e[offset_[u]];
  return out;
}

namespace {

// pw[j][e] = p_j^e for e = 0..n.
std::vector<std::vector<double>> power_table(const std::vector<double>& p, unsigned n) {
  std::vector<std::vector<double>> pw(p.size(), std::vector<double>(n + 1, 1.0));
  for (std::size_t j = 0; j < p.size(); ++j)
    for (unsigned e = 1; e <= n; ++e) pw[j][e] = pw[j][e - 1] * p[j];
  return pw;
}

}  // namespace

Eigen::VectorXd SymmetricMoments::evaluate(std::span<const double> weights,
                                           const std::vector<std::vector<double>>& components) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto pw = power_table(components[i], order_);
    for (std::size_t u = 0; u < size(); ++u) {
      double mono = 1.0;
      for (std::size_t j = 0; j < dim_; ++j) mono *= pw[j][counts_[u][j]];
      out(static_cast<Eigen::Index>(u)) += weights[i] * scale_[u] * mono;
    }
  }
  return out;
}

Eigen::MatrixXd SymmetricMoments::jacobian(std::span<const double> weights,
                                           const std::vector<std::vector<double>>& components) const {
  const std::size_t l = components.size();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size()),
                                              static_cast<Eigen::Index>(l + l * dim_));
  for (std::size_t i = 0; i < l; ++i) {
    const auto pw = power_table(components[i], order_);
    const auto col0 = static_cast<Eigen::Index>(l + i * dim_);
    for (std::size_t u = 0; u < size(); ++u) {
      const auto& c = counts_[u];
      const auto row = static_cast<Eigen::Index>(u);
      double mono = 1.0;
      for (std::size_t j = 0; j < dim_; ++j) mono *= pw[j][c[j]];
      jac(row, static_cast<Eigen::Index>(i)) = scale_[u] * mono;
      for (std::size_t j = 0; j < dim_; ++j) {
        if (c[j] == 0) continue;
        double rest = c[j] * pw[j][c[j] - 1];
        for (std::size_t q = 0; q < dim_; ++q)
          if (q != j) rest *= pw[q][c[q]];
        jac(row, col0 + static_cast<Eigen::Index>(j)) = scale_[u] * weights[i] * rest;
      }
    }
  }
  return jac;
}

namespace {

// Orthonormal basis of {x in R^s : sum x = 0}, as an s x (s-1) matrix.
Eigen::MatrixXd tangent_basis(std::size_t s) {
  const auto n = static_cast<Eigen::Index>(s);
  if (s <= 1) return Eigen::MatrixXd::Zero(n, 0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::Ones(n, 1));
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return q.rightCols(n - 1);
}

Parameters project(Parameters p) {
  p.weights = project_to_simplex(p.weights);
  for (auto& c : p.components) c = project_to_simplex(c);
  return p;
}

}  // namespace

Result fit_mixture(const SymmetricMoments& moments, const Eigen::VectorXd& target, Parameters init,
                   const Options& options) {
  const std::size_t l = init.components.size();
  const std::size_t d = moments.dim();
  if (l == 0 || init.weights.size() != l) fail(ErrorCode::InvalidArgs, "malformed initial point");
  for (const auto& c : init.components)
    if (c.size() != d) fail(ErrorCode::DimensionMismatch, "component dimension mismatch");
  if (static_cast<std::size_t>(target.size()) != moments.size())
    fail(ErrorCode::ShapeMismatch, "target size differs from the moment layout");

  const Eigen::MatrixXd basis_w = tangent_basis(l);
  const Eigen::MatrixXd basis_c = tangent_basis(d);
  const Eigen::Index rw = basis_w.cols(), rc = basis_c.cols();
  const Eigen::Index reduced = rw + static_cast<Eigen::Index>(l) * rc;

  Result res;
  res.params = project(std::move(init));
  auto residual_of = [&](const Parameters& p) {
    return Eigen::VectorXd(moments.evaluate(p.weights, p.components) - target);
  };
  Eigen::VectorXd r = residual_of(res.params);
  res.residual = r.norm();
  if (reduced == 0) return res;

  double lambda = -1.0;
  std::vector<double> history;
  for (unsigned it = 0; it < options.max_iterations; ++it) {
    if (res.residual <= options.target_residual) break;
    res.iterations = it + 1;

    const Eigen::MatrixXd jn = moments.jacobian(res.params.weights, res.params.components);
    Eigen::MatrixXd jac(jn.rows(), reduced);
    jac.leftCols(rw) = jn.leftCols(static_cast<Eigen::Index>(l)) * basis_w;
    for (std::size_t i = 0; i < l; ++i)
      jac.middleCols(rw + static_cast<Eigen::Index>(i) * rc, rc) =
          jn.middleCols(static_cast<Eigen::Index>(l + i * d), static_cast<Eigen::Index>(d)) * basis_c;

    const Eigen::MatrixXd h = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    const double scale = std::max(h.diagonal().maxCoeff(), 1e-300);
    if (lambda < 0.0) lambda = 1e-3 * scale;

    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      Eigen::MatrixXd damped = h;
      damped.diagonal().array() += lambda;
      const Eigen::VectorXd step = damped.ldlt().solve(-g);

      Parameters cand = res.params;
      const Eigen::VectorXd dw = basis_w * step.head(rw);
      for (std::size_t i = 0; i < l; ++i) cand.weights[i] += dw(static_cast<Eigen::Index>(i));
      for (std::size_t i = 0; i < l; ++i) {
        const Eigen::VectorXd dc = basis_c * step.segment(rw + static_cast<Eigen::Index>(i) * rc, rc);
        for (std::size_t j = 0; j < d; ++j) cand.components[i][j] += dc(static_cast<Eigen::Index>(j));
      }
      cand = project(std::move(cand));
      Eigen::VectorXd rc_new = residual_of(cand);
      const double f_new = rc_new.norm();
      if (std::isfinite(f_new) && f_new < res.residual) {
        res.params = std::move(cand);
        r = std::move(rc_new);
        res.residual = f_new;
        lambda = std::max(lambda / 3.0, 1e-16 * scale);
        accepted = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) break;

    history.push_back(res.residual);
    if (history.size() > options.stall_window &&
        res.residual > 0.9 * history[history.size() - 1 - options.stall_window])
      break;
  }
  return res;
}

}  // namespace mixident::fit
