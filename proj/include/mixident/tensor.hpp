#pragma once

// Dense grouped-sample moment tensors V_n(P) = sum_i a_i mu_i^{x n} and their
// three-way flattenings. Entries are stored row-major over (j_1, ..., j_n).

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mixident/core.hpp"

namespace mixident {

class MomentTensor {
 public:
  /// Throws ShapeMismatch unless entries.size() == dim^order.
  MomentTensor(unsigned order, std::size_t dim, std::vector<double> entries);

  unsigned order() const noexcept { return order_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Row-major flat offset of a multi-index of length order().
  std::size_t offset(std::span<const std::size_t> index) const;
  double at(std::span<const std::size_t> index) const { return entries_[offset(index)]; }

  friend bool operator==(const MomentTensor&, const MomentTensor&) = default;

 private:
  unsigned order_;
  std::size_t dim_;
  std::vector<double> entries_;
};

/// Composition n = n1 + n2 + n3 into positive parts with n1 <= n2 <= n3 <= n1 + 1.
class Split3 {
 public:
  /// Throws SplitMismatch when the parts are not positive and balanced.
  Split3(unsigned n1, unsigned n2, unsigned n3);

  unsigned total() const noexcept { return parts_[0] + parts_[1] + parts_[2]; }
  unsigned operator[](std::size_t i) const noexcept { return parts_[i]; }
  const std::array<unsigned, 3>& parts() const noexcept { return parts_; }

  friend bool operator==(const Split3&, const Split3&) = default;

 private:
  std::array<unsigned, 3> parts_;
};

/// Order-3 tensor with mode sizes (d^{n1}, d^{n2}, d^{n3}).
struct Tensor3 {
  std::array<std::size_t, 3> shape;
  std::vector<double> entries;

  double operator()(std::size_t a, std::size_t b, std::size_t c) const {
    return entries[(a * shape[1] + b) * shape[2] + c];
  }
};

/// Row-major outer power v^{(x) r}.
std::vector<double> kron_power(std::span<const double> v, unsigned r, const Limits& limits = {});

MomentTensor moment_tensor(const Mixture& p, unsigned n, const Limits& limits = {});

/// Normalized tuple counts, optionally averaged over all n! index
/// permutations (the model makes the n samples of a group exchangeable).
MomentTensor empirical_moment_tensor(const GroupedDataset& data, bool symmetrize = true,
                                     const Limits& limits = {});

/// Groups the first n1, next n2 and last n3 indices. Pure re-indexing.
Tensor3 flatten3(const MomentTensor& t, const Split3& s);

/// Same re-indexing for an arbitrary composition of positive parts
/// (each part >= 1, parts summing to the order).
Tensor3 flatten_parts(const MomentTensor& t, const std::array<unsigned, 3>& parts);

/// Inverse of flatten3.
MomentTensor unflatten(const Tensor3& t, const Split3& s, std::size_t dim);

/// Sums out the last index (order n -> n - 1). Requires order >= 2.
MomentTensor marginalize_last(const MomentTensor& t);

double frobenius_distance(const MomentTensor& a, const MomentTensor& b);

/// Largest |T(j) - T(pi j)| over adjacent transpositions pi; zero for
/// symmetric tensors.
double symmetry_defect(const MomentTensor& t);

/// Matrix unfolding of a flattening (rows = mode `mode`, columns = the other
/// two modes in order) written as CSV, one row per line.
std::string flattening_csv(const Tensor3& t, unsigned mode);

}  // namespace mixident
