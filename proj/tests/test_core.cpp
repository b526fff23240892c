#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "mixident/core.hpp"
#include "mixident/random.hpp"
#include "mixident/randomcheck.hpp"
#include "support.hpp"

using namespace mixident;
using testsupport::mixture;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

Mixture random_mixture(std::size_t d, std::size_t m, std::uint64_t seed) {
  return random_k_independent_mixture(d, m, seed);
}

}  // namespace

TEST_CASE("categorical validation") {
  CHECK_NOTHROW(Categorical({0.25, 0.75}));
  CHECK(code_of([] { Categorical({0.5, 0.6}); }) == ErrorCode::NotAProbability);
  CHECK(code_of([] { Categorical({-0.1, 1.1}); }) == ErrorCode::NotAProbability);
  CHECK(code_of([] { Categorical(std::vector<double>{}); }) == ErrorCode::NotAProbability);
  const auto c = Categorical::normalized({2.0, -1e-18, 2.0});
  CHECK(c[0] == 0.5);
  CHECK(c[1] == 0.0);
}

TEST_CASE("make_mixture examples") {
  const Mixture single = mixture({1.0}, {{0.5, 0.5}});
  CHECK(single.size() == 1);

  const Mixture merged = mixture({0.5, 0.5}, {{1, 0}, {1, 0}});
  CHECK(merged.size() == 1);
  CHECK(merged.weight(0) == 1.0);

  const Mixture two = mixture({0.3, 0.7}, {{0.2, 0.8}, {0.9, 0.1}});
  REQUIRE(two.size() == 2);
  CHECK(two.weight(0) == 0.3);
  CHECK(two.weight(1) == 0.7);
  CHECK(two.component(0)[0] == 0.2);
  CHECK(two.component(1)[1] == 0.1);
}

TEST_CASE("make_mixture errors") {
  CHECK(code_of([] { mixture({0.0, 1.0}, {{1, 0}, {0, 1}}); }) == ErrorCode::NonPositiveWeight);
  CHECK(code_of([] { mixture({0.5, 0.4}, {{1, 0}, {0, 1}}); }) == ErrorCode::NotAProbability);
  CHECK(code_of([] { mixture({0.5, 0.5}, {{1, 0}, {0, 0, 1}}); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { mixture({1.0}, {{1, 0}, {0, 1}}); }) == ErrorCode::DimensionMismatch);
  // Within the renormalization window the weights are rescaled.
  const Mixture p = mixture({0.5 + 4e-10, 0.5}, {{1, 0}, {0, 1}});
  CHECK(p.weight(0) + p.weight(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("product_lift examples") {
  const Mixture p = mixture({0.5, 0.5}, {{0.3, 0.7}, {0.6, 0.4}});
  CHECK(product_lift(p, 1) == p);

  const Mixture point = mixture({1.0}, {{1, 0}});
  const Mixture lifted_point = product_lift(point, 2);
  REQUIRE(lifted_point.dim() == 4);
  CHECK(std::vector<double>(lifted_point.component(0).probs().begin(), lifted_point.component(0).probs().end()) ==
        std::vector<double>{1, 0, 0, 0});

  // Outer product by hand: (0.3*0.3, 0.3*0.7, 0.7*0.3, 0.7*0.7).
  const Mixture lifted = product_lift(p, 2);
  const double expect[] = {0.09, 0.21, 0.21, 0.49};
  for (std::size_t j = 0; j < 4; ++j) CHECK(lifted.component(0)[j] == doctest::Approx(expect[j]).epsilon(1e-15));
  CHECK(lifted.weight(0) == 0.5);

  CHECK(code_of([&] { product_lift(p, 0); }) == ErrorCode::InvalidArgs);
  Limits tight{8};
  CHECK(code_of([&] { product_lift(p, 4, tight); }) == ErrorCode::CapExceeded);
}

TEST_CASE("product_lift properties") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t d = 2 + seed % 3;
    const Mixture p = random_mixture(d, 2 + seed % 3, seed);
    for (unsigned r = 1; r <= 3; ++r) {
      const Mixture lifted = product_lift(p, r);
      for (const auto& c : lifted.components()) {
        const double s = std::accumulate(c.probs().begin(), c.probs().end(), 0.0);
        CHECK(std::abs(s - 1.0) <= 1e-12);
      }
    }
    // Row-major lifts compose: lift(lift(P, a), b) == lift(P, a*b).
    for (auto [a, b] : {std::pair{1u, 2u}, {2u, 2u}, {2u, 1u}, {1u, 3u}}) {
      const Mixture twice = product_lift(product_lift(p, a), b);
      const Mixture once = product_lift(p, a * b);
      REQUIRE(twice.dim() == once.dim());
      for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < once.dim(); ++j)
          CHECK(std::abs(twice.component(i)[j] - once.component(i)[j]) <= 1e-12);
    }
  }
}

TEST_CASE("sample_groups") {
  const Mixture point = mixture({1.0}, {{1, 0}});
  const GroupedDataset zeros = sample_groups(point, 4, 50, 9);
  CHECK(zeros.groups() == 50);
  for (auto j : zeros.flat()) CHECK(j == 0);

  CHECK(code_of([&] { sample_groups(point, 3, 0, 1); }) == ErrorCode::InvalidArgs);
  CHECK(code_of([&] { sample_groups(point, 0, 3, 1); }) == ErrorCode::InvalidArgs);

  const Mixture p = mixture({0.3, 0.7}, {{0.2, 0.8}, {0.9, 0.1}});
  CHECK(sample_groups(p, 3, 1000, 42) == sample_groups(p, 3, 1000, 42));
  CHECK(!(sample_groups(p, 3, 1000, 42) == sample_groups(p, 3, 1000, 43)));
}

TEST_CASE("GroupedDataset validation") {
  CHECK(code_of([] { GroupedDataset(2, 2, {0, 1, 1}); }) == ErrorCode::InvalidArgs);
  CHECK(code_of([] { GroupedDataset(2, 2, {0, 2}); }) == ErrorCode::InvalidArgs);
  CHECK(code_of([] { GroupedDataset(0, 2, {}); }) == ErrorCode::InvalidArgs);
}

TEST_CASE("mixture_match_distance examples") {
  const Mixture p = mixture({0.3, 0.7}, {{0.2, 0.8}, {0.9, 0.1}});
  const Mixture reversed = mixture({0.7, 0.3}, {{0.9, 0.1}, {0.2, 0.8}});
  CHECK(mixture_match_distance(p, p) == 0.0);
  CHECK(mixture_match_distance(p, reversed) == 0.0);
  CHECK(mixture_match_distance(mixture({1.0}, {{1, 0}}), mixture({1.0}, {{0, 1}})) == 1.0);
  CHECK(mixture_match_distance(p, mixture({1.0}, {{1, 0}})) == std::numeric_limits<double>::infinity());
  CHECK(code_of([&] { mixture_match_distance(p, mixture({1.0}, {{1, 0, 0}})); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("mixture_match_distance is symmetric and detects differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t m = 2 + seed % 4;
    const Mixture p = random_mixture(3, m, seed);
    const Mixture q = random_mixture(3, m, seed + 1000);
    CHECK(mixture_match_distance(p, q) == mixture_match_distance(q, p));
    CHECK(mixture_match_distance(p, q) > 0.0);

    // A joint permutation of weights and components is at distance zero.
    std::vector<double> w(p.weights().begin(), p.weights().end());
    std::vector<Categorical> c = p.components();
    std::rotate(w.begin(), w.begin() + 1, w.end());
    std::rotate(c.begin(), c.begin() + 1, c.end());
    CHECK(mixture_match_distance(p, make_mixture(w, c)) <= 1e-15);

    // Brute force over all bijections agrees with the bottleneck assignment.
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double worst = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        worst = std::max(worst, std::abs(p.weight(i) - q.weight(perm[i])));
        double tv = 0.0;
        for (std::size_t j = 0; j < 3; ++j) tv += std::abs(p.component(i)[j] - q.component(perm[i])[j]);
        worst = std::max(worst, 0.5 * tv);
      }
      best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(mixture_match_distance(p, q) == doctest::Approx(best).epsilon(1e-14));
  }
}

TEST_CASE("derive_seed streams are distinct and stable") {
  CHECK(derive_seed(0, 0) != derive_seed(0, 1));
  CHECK(derive_seed(0, 0) != derive_seed(1, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("checked_power") {
  CHECK(checked_power(3, 4, 100) == 81);
  CHECK(code_of([] { checked_power(3, 5, 100); }) == ErrorCode::CapExceeded);
  CHECK(code_of([] { checked_power(1000, 40, std::numeric_limits<std::size_t>::max()); }) ==
        ErrorCode::CapExceeded);
}
