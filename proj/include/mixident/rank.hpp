#pragma once

// Numerical ranks, Kruskal ranks (k-independence) and dual vector systems.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixident/core.hpp"

namespace mixident {

inline constexpr double kDefaultRelTol = 1e-9;
inline constexpr std::size_t kDefaultMaxColumns = 22;

/// Sequence of nonzero vectors of a common dimension, stored as columns.
/// Repeats are allowed (k-independence is defined on sequences).
class VectorFamily {
 public:
  /// Throws ZeroVector if a column has norm <= 1e-14, InvalidArgs if empty.
  explicit VectorFamily(Eigen::MatrixXd columns, std::vector<std::string> labels = {});

  static VectorFamily from_components(const Mixture& p);
  /// Family of Kronecker powers x_i^{(x) r} of the given family.
  static VectorFamily kron_powers(const VectorFamily& f, unsigned r, const Limits& limits = {});

  std::size_t size() const noexcept { return static_cast<std::size_t>(columns_.cols()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(columns_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return columns_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Columns selected by index, in the given order.
  Eigen::MatrixXd select(std::span<const std::size_t> subset) const;

 private:
  Eigen::MatrixXd columns_;
  std::vector<std::string> labels_;
};

/// Singular values in decreasing order.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& a);

/// Count of singular values above rel_tol * sigma_max (0 when sigma_max == 0).
std::size_t numerical_rank(const Eigen::MatrixXd& a, double rel_tol = kDefaultRelTol);
std::size_t numerical_rank(const VectorFamily& f, double rel_tol = kDefaultRelTol);

struct KruskalReport {
  std::size_t k = 0;
  /// Lexicographically first dependent subset of size k + 1; empty when k == m.
  std::vector<std::size_t> witness;
  /// Smallest singular value over all size-k subsets.
  double min_sv_at_k = 0.0;
  /// sigma_min / sigma_max of the witness (<= rel_tol); NaN without a witness.
  double max_sv_ratio_at_k_plus_1 = 0.0;

  bool has_witness() const noexcept { return !witness.empty(); }
};

/// Largest k such that every k columns are numerically independent, by
/// exhaustive lexicographic subset enumeration. Throws TooManyColumns when
/// the family exceeds `max_columns`.
KruskalReport kruskal_rank(const VectorFamily& f, double rel_tol = kDefaultRelTol,
                           std::size_t max_columns = kDefaultMaxColumns);

/// True when every min(k, m) members are independent (vacuous for m < k).
bool is_k_independent(const KruskalReport& report, std::size_t family_size, std::size_t k);

/// Dual system z_1..z_s of the selected columns: <x_subset[i], z_j> = delta_ij.
/// Returned as the columns of a D x s matrix. Throws DependentSubset when the
/// selected columns are not independent at rel_tol.
Eigen::MatrixXd dual_vectors(const VectorFamily& f, std::span<const std::size_t> subset,
                             double rel_tol = kDefaultRelTol);

/// Outcome of checking a tensor-power independence lemma on one family.
struct LemmaReport {
  std::size_t k = 0;        // Kruskal rank of the base family
  std::size_t k_prime = 0;  // Kruskal rank of (x, family); 0 for the plain lemma
  std::size_t expected = 0;
  std::size_t measured = 0;
  bool pass = false;
  KruskalReport powers;     // report on the power family
};

/// Powers x_i^{(x) n} are min(n(k-1)+1, m)-independent when k >= 2.
/// Throws InvalidArgs if the family has Kruskal rank < 2.
LemmaReport verify_kindpow(const VectorFamily& f, unsigned n, double rel_tol = kDefaultRelTol,
                           const Limits& limits = {});

/// With (x, F) k'-independent, 2 <= k' <= k: x^{(x) n}, x_i^{(x) n} are
/// min(m+1, (n-1)(k-1)+k')-independent. Throws InvalidArgs on precondition
/// failure.
LemmaReport verify_kpindpow(std::span<const double> x, const VectorFamily& f, unsigned n,
                            double rel_tol = kDefaultRelTol, const Limits& limits = {});

}  // namespace mixident
