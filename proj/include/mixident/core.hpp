#pragma once

// Probability vectors on a finite sample space, finite mixtures of them, and
// grouped-sample data drawn from a mixture.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mixident/error.hpp"

namespace mixident {

/// Global size limits. `tensor_cap` bounds every dense object whose size grows
/// as d^n (moment tensors, Kronecker powers, product-lift outcome spaces).
struct Limits {
  std::size_t tensor_cap = 10'000'000;
};

inline constexpr double kProbabilitySumTol = 1e-12;
inline constexpr double kWeightRenormTol = 1e-9;
inline constexpr double kDedupTol = 1e-9;

/// d^r, or CapExceeded when it exceeds `cap` (also guards overflow).
std::size_t checked_power(std::size_t d, unsigned r, std::size_t cap);

/// Probability vector over {0, ..., d-1}.
class Categorical {
 public:
  /// Validates: d >= 1, entries >= 0, sum within 1e-12 of 1.
  /// Throws NotAProbability otherwise.
  explicit Categorical(std::vector<double> probs);

  std::size_t dim() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t j) const noexcept { return probs_[j]; }

  /// Divides by the sum after clamping negatives to zero. For outputs of
  /// numerical routines that are probabilities up to rounding.
  static Categorical normalized(std::vector<double> values);

  friend bool operator==(const Categorical&, const Categorical&) = default;

 private:
  std::vector<double> probs_;
};

double total_variation(const Categorical& a, const Categorical& b);
double max_norm_distance(const Categorical& a, const Categorical& b);

/// P = sum_i a_i delta_{mu_i} with positive weights and pairwise distinct
/// components over a common sample space. Immutable once built.
class Mixture {
 public:
  std::size_t size() const noexcept { return weights_.size(); }
  std::size_t dim() const noexcept { return components_.front().dim(); }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::vector<Categorical>& components() const noexcept { return components_; }
  double weight(std::size_t i) const noexcept { return weights_[i]; }
  const Categorical& component(std::size_t i) const noexcept { return components_[i]; }

  friend bool operator==(const Mixture&, const Mixture&) = default;

 private:
  friend Mixture make_mixture(std::vector<double>, std::vector<Categorical>, double);
  Mixture(std::vector<double> w, std::vector<Categorical> c)
      : weights_(std::move(w)), components_(std::move(c)) {}

  std::vector<double> weights_;
  std::vector<Categorical> components_;
};

/// Builds a minimal mixture. Weights summing to 1 within 1e-9 are rescaled to
/// sum exactly; components within `dedup_tol` (max-norm) of an earlier one are
/// merged into it by adding weights.
///
/// Errors: NonPositiveWeight, DimensionMismatch (length or d mismatch),
/// NotAProbability (weights not summing to 1, or empty input).
Mixture make_mixture(std::vector<double> weights, std::vector<Categorical> components,
                     double dedup_tol = kDedupTol);

/// Mixture with the same weights whose components are the r-fold product
/// measures, flattened row-major over (j_1, ..., j_r).
Mixture product_lift(const Mixture& p, unsigned r, const Limits& limits = {});

/// Groups of n outcome indices, stored flat (group g occupies [g*n, (g+1)*n)).
class GroupedDataset {
 public:
  /// Throws InvalidArgs on n == 0, d == 0, ragged data or out-of-range index.
  GroupedDataset(std::size_t n, std::size_t d, std::vector<std::uint32_t> flat);

  std::size_t group_size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return d_; }
  std::size_t groups() const noexcept { return n_ == 0 ? 0 : flat_.size() / n_; }
  std::span<const std::uint32_t> group(std::size_t g) const noexcept {
    return std::span<const std::uint32_t>(flat_).subspan(g * n_, n_);
  }
  std::span<const std::uint32_t> flat() const noexcept { return flat_; }

  friend bool operator==(const GroupedDataset&, const GroupedDataset&) = default;

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<std::uint32_t> flat_;
};

/// Draws N groups: a component index by weight, then n iid outcomes from it.
GroupedDataset sample_groups(const Mixture& p, std::size_t n, std::size_t groups,
                             std::uint64_t seed);

/// Minimum over component bijections of
///   max(max_i |a_i - b_s(i)|, max_i TV(mu_i, nu_s(i))),
/// or +infinity when the component counts differ. Throws DimensionMismatch.
double mixture_match_distance(const Mixture& p, const Mixture& q);

}  // namespace mixident
