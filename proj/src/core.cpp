#include "mixident/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mixident/random.hpp"
#include "mixident/tensor.hpp"

namespace mixident {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgs: return "InvalidArgs";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotAProbability: return "NotAProbability";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SplitMismatch: return "SplitMismatch";
    case ErrorCode::NTooSmall: return "NTooSmall";
    case ErrorCode::TooManyColumns: return "TooManyColumns";
    case ErrorCode::DependentSubset: return "DependentSubset";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::RankDeficientModes: return "RankDeficientModes";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ContinuationStalled: return "ContinuationStalled";
    case ErrorCode::SeparationLost: return "SeparationLost";
    case ErrorCode::InvalidRegion: return "InvalidRegion";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

std::size_t checked_power(std::size_t d, unsigned r, std::size_t cap) {
  std::size_t out = 1;
  for (unsigned i = 0; i < r; ++i) {
    if (d != 0 && out > cap / d) {
      std::ostringstream msg;
      msg << d << "^" << r << " exceeds the tensor cap " << cap;
      fail(ErrorCode::CapExceeded, msg.str());
    }
    out *= d;
  }
  if (out > cap) fail(ErrorCode::CapExceeded, "size exceeds the tensor cap");
  return out;
}

Categorical::Categorical(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) fail(ErrorCode::NotAProbability, "empty probability vector");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p))
      fail(ErrorCode::NotAProbability, "negative or non-finite probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << sum;
    fail(ErrorCode::NotAProbability, msg.str());
  }
}

Categorical Categorical::normalized(std::vector<double> values) {
  double sum = 0.0;
  for (double& v : values) {
    if (!std::isfinite(v)) fail(ErrorCode::NotAProbability, "non-finite entry");
    v = std::max(v, 0.0);
    sum += v;
  }
  if (!(sum > 0.0)) fail(ErrorCode::NotAProbability, "no positive mass to normalize");
  for (double& v : values) v /= sum;
  return Categorical(std::move(values));
}

double total_variation(const Categorical& a, const Categorical& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::DimensionMismatch, "TV of different dimensions");
  double s = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) s += std::abs(a[j] - b[j]);
  return 0.5 * s;
}

double max_norm_distance(const Categorical& a, const Categorical& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::DimensionMismatch, "distance of different dimensions");
  double s = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) s = std::max(s, std::abs(a[j] - b[j]));
  return s;
}

Mixture make_mixture(std::vector<double> weights, std::vector<Categorical> components,
                     double dedup_tol) {
  if (weights.size() != components.size())
    fail(ErrorCode::DimensionMismatch, "weights and components differ in length");
  if (weights.empty()) fail(ErrorCode::NotAProbability, "mixture has no components");
  const std::size_t d = components.front().dim();
  for (const auto& c : components)
    if (c.dim() != d) fail(ErrorCode::DimensionMismatch, "components differ in dimension");

  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorCode::NonPositiveWeight, "weight <= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightRenormTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights sum to " << total;
    fail(ErrorCode::NotAProbability, msg.str());
  }

  std::vector<double> merged_w;
  std::vector<Categorical> merged_c;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    auto it = std::find_if(merged_c.begin(), merged_c.end(), [&](const Categorical& c) {
      return max_norm_distance(c, components[i]) <= dedup_tol;
    });
    if (it != merged_c.end()) {
      merged_w[static_cast<std::size_t>(it - merged_c.begin())] += weights[i];
    } else {
      merged_w.push_back(weights[i]);
      merged_c.push_back(std::move(components[i]));
    }
  }
  const double sum = std::accumulate(merged_w.begin(), merged_w.end(), 0.0);
  if (sum != 1.0)
    for (double& w : merged_w) w /= sum;
  return Mixture(std::move(merged_w), std::move(merged_c));
}

Mixture product_lift(const Mixture& p, unsigned r, const Limits& limits) {
  if (r == 0) fail(ErrorCode::InvalidArgs, "lift order must be positive");
  checked_power(p.dim(), r, limits.tensor_cap);
  if (r == 1) return p;
  std::vector<Categorical> lifted;
  lifted.reserve(p.size());
  for (const auto& c : p.components())
    lifted.emplace_back(kron_power(c.probs(), r, limits));
  std::vector<double> w(p.weights().begin(), p.weights().end());
  // Distinct base components stay distinct after lifting, so nothing merges.
  return make_mixture(std::move(w), std::move(lifted), 0.0);
}

GroupedDataset::GroupedDataset(std::size_t n, std::size_t d, std::vector<std::uint32_t> flat)
    : n_(n), d_(d), flat_(std::move(flat)) {
  if (n_ == 0) fail(ErrorCode::InvalidArgs, "group size must be positive");
  if (d_ == 0) fail(ErrorCode::InvalidArgs, "outcome count must be positive");
  if (flat_.size() % n_ != 0) fail(ErrorCode::InvalidArgs, "groups have unequal length");
  for (auto j : flat_)
    if (j >= d_) fail(ErrorCode::InvalidArgs, "outcome index out of range");
}

GroupedDataset sample_groups(const Mixture& p, std::size_t n, std::size_t groups,
                             std::uint64_t seed) {
  if (n == 0) fail(ErrorCode::InvalidArgs, "group size must be positive");
  if (groups == 0) fail(ErrorCode::InvalidArgs, "number of groups must be positive");
  Rng rng(seed);
  std::vector<std::uint32_t> flat;
  flat.reserve(n * groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const auto& c = p.component(rng.categorical(p.weights()));
    for (std::size_t t = 0; t < n; ++t)
      flat.push_back(static_cast<std::uint32_t>(rng.categorical(c.probs())));
  }
  return GroupedDataset(n, p.dim(), std::move(flat));
}

namespace {

// Kuhn's augmenting-path matching restricted to cost <= threshold.
bool perfect_matching_exists(const std::vector<std::vector<double>>& cost, double threshold) {
  const std::size_t m = cost.size();
  std::vector<std::ptrdiff_t> match_right(m, -1);
  std::vector<char> seen;
  auto augment = [&](auto&& self, std::size_t u) -> bool {
    for (std::size_t v = 0; v < m; ++v) {
      if (cost[u][v] > threshold || seen[v]) continue;
      seen[v] = 1;
      if (match_right[v] < 0 || self(self, static_cast<std::size_t>(match_right[v]))) {
        match_right[v] = static_cast<std::ptrdiff_t>(u);
        return true;
      }
    }
    return false;
  };
  for (std::size_t u = 0; u < m; ++u) {
    seen.assign(m, 0);
    if (!augment(augment, u)) return false;
  }
  return true;
}

}  // namespace

double mixture_match_distance(const Mixture& p, const Mixture& q) {
  if (p.dim() != q.dim()) fail(ErrorCode::DimensionMismatch, "mixtures over different spaces");
  if (p.size() != q.size()) return std::numeric_limits<double>::infinity();
  const std::size_t m = p.size();
  std::vector<std::vector<double>> cost(m, std::vector<double>(m));
  std::vector<double> values;
  values.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      cost[i][j] = std::max(std::abs(p.weight(i) - q.weight(j)),
                            total_variation(p.component(i), q.component(j)));
      values.push_back(cost[i][j]);
    }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  // Bottleneck assignment: smallest threshold admitting a perfect matching.
  std::size_t lo = 0, hi = values.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (perfect_matching_exists(cost, values[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return values[lo];
}

}  // namespace mixident
