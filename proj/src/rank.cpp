#include "mixident/rank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixident/tensor.hpp"

namespace mixident {

VectorFamily::VectorFamily(Eigen::MatrixXd columns, std::vector<std::string> labels)
    : columns_(std::move(columns)), labels_(std::move(labels)) {
  if (columns_.cols() == 0 || columns_.rows() == 0)
    fail(ErrorCode::InvalidArgs, "vector family is empty");
  if (!labels_.empty() && labels_.size() != static_cast<std::size_t>(columns_.cols()))
    fail(ErrorCode::DimensionMismatch, "label count differs from column count");
  for (Eigen::Index j = 0; j < columns_.cols(); ++j)
    if (!(columns_.col(j).norm() > 1e-14))
      fail(ErrorCode::ZeroVector, "column " + std::to_string(j) + " is (numerically) zero");
}

VectorFamily VectorFamily::from_components(const Mixture& p) {
  Eigen::MatrixXd m(p.dim(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p.dim(); ++j) m(j, i) = p.component(i)[j];
  return VectorFamily(std::move(m));
}

VectorFamily VectorFamily::kron_powers(const VectorFamily& f, unsigned r, const Limits& limits) {
  const std::size_t rows = checked_power(f.dim(), r, limits.tensor_cap);
  Eigen::MatrixXd m(rows, f.size());
  std::vector<double> col(f.dim());
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = 0; j < f.dim(); ++j) col[j] = f.matrix()(j, i);
    const auto power = kron_power(col, r, limits);
    for (std::size_t e = 0; e < rows; ++e) m(e, i) = power[e];
  }
  return VectorFamily(std::move(m), f.labels());
}

Eigen::MatrixXd VectorFamily::select(std::span<const std::size_t> subset) const {
  Eigen::MatrixXd out(columns_.rows(), static_cast<Eigen::Index>(subset.size()));
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] >= size()) fail(ErrorCode::InvalidArgs, "subset index out of range");
    out.col(static_cast<Eigen::Index>(i)) = columns_.col(static_cast<Eigen::Index>(subset[i]));
  }
  return out;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues();
}

std::size_t numerical_rank(const Eigen::MatrixXd& a, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) fail(ErrorCode::InvalidArgs, "rel_tol must be in (0, 1)");
  const Eigen::VectorXd sv = singular_values(a);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = rel_tol * sv(0);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

std::size_t numerical_rank(const VectorFamily& f, double rel_tol) {
  return numerical_rank(f.matrix(), rel_tol);
}

namespace {

// Advances `c` (strictly increasing indices < m) to the next combination in
// lexicographic order. Returns false after the last one.
bool next_combination(std::vector<std::size_t>& c, std::size_t m) {
  const std::size_t s = c.size();
  for (std::size_t i = s; i-- > 0;) {
    if (c[i] < m - s + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < s; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

KruskalReport kruskal_rank(const VectorFamily& f, double rel_tol, std::size_t max_columns) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) fail(ErrorCode::InvalidArgs, "rel_tol must be in (0, 1)");
  const std::size_t m = f.size();
  if (m > max_columns)
    fail(ErrorCode::TooManyColumns,
         std::to_string(m) + " columns exceed the enumeration bound " + std::to_string(max_columns));
  const std::size_t top = std::min(f.dim(), m);

  KruskalReport report;
  report.max_sv_ratio_at_k_plus_1 = std::numeric_limits<double>::quiet_NaN();
  double min_sv_prev = std::numeric_limits<double>::infinity();
  for (std::size_t s = 1; s <= top; ++s) {
    std::vector<std::size_t> subset(s);
    std::iota(subset.begin(), subset.end(), std::size_t{0});
    double min_sv = std::numeric_limits<double>::infinity();
    do {
      const Eigen::VectorXd sv = singular_values(f.select(subset));
      const double smallest = sv(sv.size() - 1);
      if (!(smallest > rel_tol * sv(0))) {
        report.k = s - 1;
        report.witness = subset;
        report.min_sv_at_k = min_sv_prev;
        report.max_sv_ratio_at_k_plus_1 = sv(0) > 0.0 ? smallest / sv(0) : 0.0;
        return report;
      }
      min_sv = std::min(min_sv, smallest);
    } while (next_combination(subset, m));
    min_sv_prev = min_sv;
  }
  report.k = top;
  report.min_sv_at_k = min_sv_prev;
  if (top < m) {
    // More columns than dimensions: the first (D+1)-subset is dependent.
    report.witness.resize(top + 1);
    std::iota(report.witness.begin(), report.witness.end(), std::size_t{0});
    report.max_sv_ratio_at_k_plus_1 = 0.0;
  }
  return report;
}

bool is_k_independent(const KruskalReport& report, std::size_t family_size, std::size_t k) {
  return report.k >= std::min(k, family_size);
}

Eigen::MatrixXd dual_vectors(const VectorFamily& f, std::span<const std::size_t> subset,
                             double rel_tol) {
  if (subset.empty()) fail(ErrorCode::InvalidArgs, "empty subset");
  const Eigen::MatrixXd x = f.select(subset);
  if (numerical_rank(x, rel_tol) != subset.size())
    fail(ErrorCode::DependentSubset, "selected columns are linearly dependent");
  // Z = pinv(X)^T gives X^T Z = I for full column rank X.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  return cod.pseudoInverse().transpose();
}

LemmaReport verify_kindpow(const VectorFamily& f, unsigned n, double rel_tol, const Limits& limits) {
  if (n == 0) fail(ErrorCode::InvalidArgs, "power must be positive");
  LemmaReport out;
  out.k = kruskal_rank(f, rel_tol).k;
  if (out.k < 2) fail(ErrorCode::InvalidArgs, "family must be at least 2-independent");
  out.expected = std::min<std::size_t>(n * (out.k - 1) + 1, f.size());
  out.powers = kruskal_rank(VectorFamily::kron_powers(f, n, limits), rel_tol);
  out.measured = out.powers.k;
  out.pass = out.measured >= out.expected;
  return out;
}

LemmaReport verify_kpindpow(std::span<const double> x, const VectorFamily& f, unsigned n,
                            double rel_tol, const Limits& limits) {
  if (n == 0) fail(ErrorCode::InvalidArgs, "power must be positive");
  if (x.size() != f.dim()) fail(ErrorCode::DimensionMismatch, "x has the wrong dimension");
  LemmaReport out;
  out.k = kruskal_rank(f, rel_tol).k;
  if (out.k < 2) fail(ErrorCode::InvalidArgs, "family must be at least 2-independent");

  Eigen::MatrixXd ext(f.dim(), f.size() + 1);
  ext.col(0) = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  ext.rightCols(static_cast<Eigen::Index>(f.size())) = f.matrix();
  const VectorFamily extended(std::move(ext));
  out.k_prime = kruskal_rank(extended, rel_tol).k;
  if (out.k_prime < 2 || out.k_prime > out.k)
    fail(ErrorCode::InvalidArgs, "(x, family) must be k'-independent with 2 <= k' <= k");

  const std::size_t m = f.size();
  out.expected = std::min<std::size_t>(m + 1, (n - 1) * (out.k - 1) + out.k_prime);
  out.powers = kruskal_rank(VectorFamily::kron_powers(extended, n, limits), rel_tol);
  out.measured = out.powers.k;
  out.pass = out.measured >= out.expected;
  return out;
}

}  // namespace mixident
