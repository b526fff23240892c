#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mixident/random.hpp"
#include "mixident/randomcheck.hpp"

using namespace mixident;

TEST_CASE("sample_simplex") {
  Rng rng(1);
  CHECK(sample_simplex(1, rng)[0] == 1.0);
  CHECK_THROWS_AS(sample_simplex(0, rng), Error);

  // The first coordinate of a uniform point on the 1-simplex is uniform on [0, 1].
  const std::size_t draws = 100000;
  std::vector<double> x(draws);
  for (auto& v : x) v = sample_simplex(2, rng)[0];
  std::sort(x.begin(), x.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < draws; ++i)
    ks = std::max({ks, std::abs(double(i + 1) / draws - x[i]), std::abs(x[i] - double(i) / draws)});
  CHECK(ks < 0.01);

  // In dimension 3 the first coordinate has density 2(1 - x), mean 1/3.
  double mean = 0.0;
  for (std::size_t i = 0; i < draws; ++i) mean += sample_simplex(3, rng)[0];
  CHECK(mean / draws == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("monte_carlo_independence") {
  for (std::size_t d : {2u, 3u, 5u}) {
    const MonteCarloReport r = monte_carlo_independence(d, 1000, 1e-9, d);
    CHECK(r.independent_count == 1000);
    CHECK(r.per_trial_min_sv.size() == 1000);
    CHECK(r.min_observed_sv > 0.0);
    const MonteCarloReport c = monte_carlo_independence(d, 200, 1e-9, d, true);
    CHECK(c.independent_count == 0);
  }
  const MonteCarloReport a = monte_carlo_independence(4, 50, 1e-9, 7);
  const MonteCarloReport b = monte_carlo_independence(4, 50, 1e-9, 7);
  CHECK(a.per_trial_min_sv == b.per_trial_min_sv);
  CHECK_THROWS_AS(monte_carlo_independence(1, 10, 1e-9, 0), Error);
  CHECK_THROWS_AS(monte_carlo_independence(3, 0, 1e-9, 0), Error);
}

TEST_CASE("random_k_independent_mixture") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t d = 2 + seed % 4, m = 1 + seed % 7;
    const Mixture p = random_k_independent_mixture(d, m, seed);
    CHECK(p.size() == m);
    CHECK(kruskal_rank(VectorFamily::from_components(p)).k == std::min(d, m));
  }
  CHECK(kruskal_rank(VectorFamily::from_components(random_k_independent_mixture(3, 5, 0))).k == 3);
  CHECK(numerical_rank(VectorFamily::from_components(random_k_independent_mixture(5, 3, 0))) == 3);
  CHECK(random_k_independent_mixture(4, 1, 0).size() == 1);
  CHECK(random_k_independent_mixture(3, 4, 12) == random_k_independent_mixture(3, 4, 12));
}

TEST_CASE("kpindpow_trial forces k' <= support") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LemmaReport r = kpindpow_trial(4, 6, 2, 2, seed);
    CHECK(r.k_prime <= 2);
    CHECK(r.pass);
  }
  CHECK_THROWS_AS(kpindpow_trial(4, 6, 2, 1, 0), Error);
}
