#pragma once

// Least-squares fitting of mixtures to moment tensors. Shared by the
// recovery refinement stage and the alternative-mixture search.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mixident/tensor.hpp"

namespace mixident::fit {

/// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_to_simplex(std::span<const double> v);

/// Lawson-Hanson nonnegative least squares: argmin ||A x - b|| s.t. x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                     unsigned max_iterations = 500);

/// The distinct entries of a symmetric order-n tensor over d outcomes, one per
/// multiset of indices, weighted by sqrt(multiplicity). The Euclidean norm of
/// a compressed difference equals the Frobenius norm of the full difference.
class SymmetricMoments {
 public:
  SymmetricMoments(std::size_t dim, unsigned order);

  std::size_t dim() const noexcept { return dim_; }
  unsigned order() const noexcept { return order_; }
  std::size_t size() const noexcept { return scale_.size(); }

  /// Reads the representative (sorted) entry of each multiset from `t`.
  Eigen::VectorXd compress(const MomentTensor& t) const;

  /// Compressed moments of sum_i w_i p_i^{(x) n}.
  Eigen::VectorXd evaluate(std::span<const double> weights,
                           const std::vector<std::vector<double>>& components) const;

  /// Jacobian of `evaluate` in natural coordinates: columns are the L weights
  /// followed by the d entries of each component in turn.
  Eigen::MatrixXd jacobian(std::span<const double> weights,
                           const std::vector<std::vector<double>>& components) const;

 private:
  std::size_t dim_;
  unsigned order_;
  std::vector<std::vector<unsigned>> counts_;  // outcome multiplicities per multiset
  std::vector<std::size_t> offset_;            // flat offset of the sorted index
  std::vector<double> scale_;                  // sqrt(multinomial coefficient)
};

struct Parameters {
  std::vector<double> weights;
  std::vector<std::vector<double>> components;
};

struct Options {
  unsigned max_iterations = 500;
  double target_residual = 1e-13;
  /// Stop when the residual fails to drop by 10% over this many iterations.
  unsigned stall_window = 60;
};

struct Result {
  Parameters params;
  double residual = 0.0;  // Frobenius distance to the target tensor
  unsigned iterations = 0;
};

/// Projected Levenberg-Marquardt on the Frobenius residual. Steps are taken in
/// the tangent space of the simplex constraints and each iterate is projected
/// back onto the simplices; steps that do not reduce the residual are
/// rejected and the damping increased.
Result fit_mixture(const SymmetricMoments& moments, const Eigen::VectorXd& target,
                   Parameters init, const Options& options = {});

}  // namespace mixident::fit
