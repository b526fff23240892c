#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "mixident/core.hpp"

namespace testsupport {

inline mixident::Mixture mixture(std::vector<double> w, const std::vector<std::vector<double>>& comps) {
  std::vector<mixident::Categorical> c;
  for (const auto& row : comps) c.emplace_back(row);
  return mixident::make_mixture(std::move(w), std::move(c));
}

// Kruskal rank of the n-th Kronecker powers of m generic points in dimension
// d: the powers span the symmetric tensors, of dimension C(d + n - 1, n), and
// generic points on the Veronese variety are in linear general position.
inline std::size_t generic_power_rank(std::size_t d, std::size_t m, unsigned n) {
  std::size_t sym = 1;
  for (unsigned i = 1; i <= n; ++i) sym = sym * (d + i - 1) / i;
  return std::min(m, sym);
}

// Exact fraction over __int128, always reduced with a positive denominator.
struct Fraction {
  __int128 num = 0, den = 1;

  static __int128 gcd(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }
  static Fraction make(__int128 n, __int128 d) {
    if (d < 0) n = -n, d = -d;
    const __int128 g = gcd(n, d);
    return {n / g, d / g};
  }
  Fraction operator-(const Fraction& o) const { return make(num * o.den - o.num * den, den * o.den); }
  Fraction operator*(const Fraction& o) const { return make(num * o.num, den * o.den); }
  Fraction operator/(const Fraction& o) const { return make(num * o.den, den * o.num); }
  bool zero() const { return num == 0; }
};

// Rank of an integer matrix (rows x cols, row-major) by Gaussian elimination
// over the rationals.
inline std::size_t exact_rank(const std::vector<long>& a, std::size_t rows, std::size_t cols) {
  std::vector<Fraction> m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = Fraction{a[i], 1};
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && m[pivot * cols + c].zero()) ++pivot;
    if (pivot == rows) continue;
    for (std::size_t j = 0; j < cols; ++j) std::swap(m[rank * cols + j], m[pivot * cols + j]);
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (m[r * cols + c].zero()) continue;
      const Fraction f = m[r * cols + c] / m[rank * cols + c];
      for (std::size_t j = c; j < cols; ++j) m[r * cols + j] = m[r * cols + j] - f * m[rank * cols + j];
    }
    ++rank;
  }
  return rank;
}

// Kruskal rank of the columns of an integer matrix: the largest k such that
// every k columns have exact rank k. Columns must be nonzero.
inline std::size_t exact_kruskal_rank(const std::vector<long>& a, std::size_t rows, std::size_t cols) {
  std::size_t k = 0;
  for (std::size_t s = 1; s <= std::min(rows, cols); ++s) {
    bool all = true;
    std::vector<std::size_t> idx(s);
    std::iota(idx.begin(), idx.end(), 0);
    while (all) {
      std::vector<long> sub(rows * s);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < s; ++j) sub[r * s + j] = a[r * cols + idx[j]];
      if (exact_rank(sub, rows, s) < s) all = false;
      // Next combination in lexicographic order.
      std::size_t i = s;
      while (i > 0 && idx[i - 1] == cols - s + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
    }
    if (!all) break;
    k = s;
  }
  return k;
}

}  // namespace testsupport
