#include "mixident/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

namespace mixident {

MomentTensor::MomentTensor(unsigned order, std::size_t dim, std::vector<double> entries)
    : order_(order), dim_(dim), entries_(std::move(entries)) {
  if (order_ == 0 || dim_ == 0) fail(ErrorCode::ShapeMismatch, "order and dim must be positive");
  std::size_t expect = 1;
  for (unsigned i = 0; i < order_ && expect <= entries_.size(); ++i) expect *= dim_;
  if (expect != entries_.size()) fail(ErrorCode::ShapeMismatch, "entry count is not dim^order");
  for (double e : entries_)
    if (!std::isfinite(e)) fail(ErrorCode::ShapeMismatch, "non-finite tensor entry");
}

std::size_t MomentTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != order_) fail(ErrorCode::ShapeMismatch, "index length differs from order");
  std::size_t off = 0;
  for (std::size_t j : index) {
    if (j >= dim_) fail(ErrorCode::ShapeMismatch, "index out of range");
    off = off * dim_ + j;
  }
  return off;
}

Split3::Split3(unsigned n1, unsigned n2, unsigned n3) : parts_{n1, n2, n3} {
  if (n1 == 0 || n2 == 0 || n3 == 0) fail(ErrorCode::SplitMismatch, "split parts must be positive");
  if (!(n1 <= n2 && n2 <= n3 && n3 <= n1 + 1))
    fail(ErrorCode::SplitMismatch, "split must satisfy n1 <= n2 <= n3 <= n1 + 1");
}

std::vector<double> kron_power(std::span<const double> v, unsigned r, const Limits& limits) {
  if (r == 0) fail(ErrorCode::InvalidArgs, "power must be positive");
  if (v.empty()) fail(ErrorCode::InvalidArgs, "empty vector");
  const std::size_t d = v.size();
  const std::size_t total = checked_power(d, r, limits.tensor_cap);
  std::vector<double> out(v.begin(), v.end());
  out.reserve(total);
  std::vector<double> next;
  for (unsigned t = 1; t < r; ++t) {
    next.resize(out.size() * d);
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) next[i * d + j] = out[i] * v[j];
    out.swap(next);
  }
  return out;
}

MomentTensor moment_tensor(const Mixture& p, unsigned n, const Limits& limits) {
  if (n == 0) fail(ErrorCode::InvalidArgs, "group size must be positive");
  const std::size_t total = checked_power(p.dim(), n, limits.tensor_cap);
  std::vector<double> entries(total, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto power = kron_power(p.component(i).probs(), n, limits);
    const double a = p.weight(i);
    for (std::size_t e = 0; e < total; ++e) entries[e] += a * power[e];
  }
  return MomentTensor(n, p.dim(), std::move(entries));
}

MomentTensor empirical_moment_tensor(const GroupedDataset& data, bool symmetrize,
                                     const Limits& limits) {
  const std::size_t groups = data.groups();
  if (groups == 0) fail(ErrorCode::InvalidArgs, "dataset has no groups");
  const auto n = static_cast<unsigned>(data.group_size());
  const std::size_t d = data.dim();
  const std::size_t total = checked_power(d, n, limits.tensor_cap);
  std::vector<double> counts(total, 0.0);

  std::vector<std::size_t> positions(n);
  double per_perm = 1.0;
  if (symmetrize)
    for (unsigned i = 2; i <= n; ++i) per_perm *= i;

  for (std::size_t g = 0; g < groups; ++g) {
    const auto tuple = data.group(g);
    if (!symmetrize) {
      std::size_t off = 0;
      for (auto j : tuple) off = off * d + j;
      counts[off] += 1.0;
      continue;
    }
    // Every ordering of positions (not of distinct values), so repeated
    // outcomes are weighted by their multiplicity.
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    do {
      std::size_t off = 0;
      for (auto pos : positions) off = off * d + tuple[pos];
      counts[off] += 1.0;
    } while (std::next_permutation(positions.begin(), positions.end()));
  }
  const double scale = 1.0 / (static_cast<double>(groups) * per_perm);
  for (double& c : counts) c *= scale;
  return MomentTensor(n, d, std::move(counts));
}

Tensor3 flatten_parts(const MomentTensor& t, const std::array<unsigned, 3>& parts) {
  if (parts[0] == 0 || parts[1] == 0 || parts[2] == 0 ||
      parts[0] + parts[1] + parts[2] != t.order())
    fail(ErrorCode::SplitMismatch, "split does not match tensor order");
  Tensor3 out;
  for (std::size_t i = 0; i < 3; ++i) out.shape[i] = checked_power(t.dim(), parts[i], t.size());
  // Row-major grouping of consecutive indices leaves the flat layout intact.
  out.entries.assign(t.entries().begin(), t.entries().end());
  return out;
}

Tensor3 flatten3(const MomentTensor& t, const Split3& s) { return flatten_parts(t, s.parts()); }

MomentTensor unflatten(const Tensor3& t, const Split3& s, std::size_t dim) {
  for (std::size_t i = 0; i < 3; ++i)
    if (checked_power(dim, s[i], t.entries.size()) != t.shape[i])
      fail(ErrorCode::SplitMismatch, "mode sizes do not match split");
  return MomentTensor(s.total(), dim, t.entries);
}

MomentTensor marginalize_last(const MomentTensor& t) {
  if (t.order() < 2) fail(ErrorCode::InvalidArgs, "cannot marginalize an order-1 tensor");
  const std::size_t d = t.dim();
  const auto e = t.entries();
  std::vector<double> out(e.size() / d, 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) out[i] += e[i * d + j];
  return MomentTensor(t.order() - 1, d, std::move(out));
}

double frobenius_distance(const MomentTensor& a, const MomentTensor& b) {
  if (a.order() != b.order() || a.dim() != b.dim())
    fail(ErrorCode::ShapeMismatch, "tensors differ in order or dimension");
  double s = 0.0;
  const auto x = a.entries();
  const auto y = b.entries();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

double symmetry_defect(const MomentTensor& t) {
  const unsigned n = t.order();
  const std::size_t d = t.dim();
  const auto e = t.entries();
  // stride[p] = d^(n-1-p)
  std::vector<std::size_t> stride(n, 1);
  for (unsigned p = n - 1; p-- > 0;) stride[p] = stride[p + 1] * d;
  double worst = 0.0;
  for (std::size_t off = 0; off < e.size(); ++off)
    for (unsigned p = 0; p + 1 < n; ++p) {
      const std::size_t jp = (off / stride[p]) % d;
      const std::size_t jq = (off / stride[p + 1]) % d;
      const std::size_t swapped = off - jp * stride[p] - jq * stride[p + 1] +
                                  jq * stride[p] + jp * stride[p + 1];
      worst = std::max(worst, std::abs(e[off] - e[swapped]));
    }
  return worst;
}

std::string flattening_csv(const Tensor3& t, unsigned mode) {
  if (mode > 2) fail(ErrorCode::InvalidArgs, "mode must be 0, 1 or 2");
  const auto [s0, s1, s2] = t.shape;
  const std::size_t rows = t.shape[mode];
  std::string out;
  char buf[32];
  for (std::size_t r = 0; r < rows; ++r) {
    bool first = true;
    auto emit = [&](double v) {
      if (!first) out += ',';
      first = false;
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
    };
    if (mode == 0) {
      for (std::size_t b = 0; b < s1; ++b)
        for (std::size_t c = 0; c < s2; ++c) emit(t(r, b, c));
    } else if (mode == 1) {
      for (std::size_t a = 0; a < s0; ++a)
        for (std::size_t c = 0; c < s2; ++c) emit(t(a, r, c));
    } else {
      for (std::size_t a = 0; a < s0; ++a)
        for (std::size_t b = 0; b < s1; ++b) emit(t(a, b, r));
    }
    out += '\n';
  }
  return out;
}

}  // namespace mixident
