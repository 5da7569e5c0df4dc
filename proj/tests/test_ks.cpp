#include "distband/ks.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "distband/rng.hpp"
#include "distband/simlab.hpp"

using distband::GroupedSamples;
using distband::ks_p_asymptotic;
using distband::ks_p_permutation;
using distband::ks_statistic;

TEST_CASE("KS statistic on the tail-outlier fixture") {
  const auto g = distband::simlab::tail_outlier_fixture();
  const auto ks = ks_statistic(g);
  CHECK(ks.d == Catch::Approx(0.3).margin(1e-12));
  CHECK(ks.d_plus == Catch::Approx(0.3).margin(1e-12));   // group 0 sits below
  CHECK(ks.d_minus == Catch::Approx(0.0378).margin(5e-4));
  CHECK(ks.d == std::max(ks.d_plus, ks.d_minus));
}

TEST_CASE("KS statistic degenerate cases") {
  GroupedSamples same;
  same.x = {1.0, 2.0, 3.0};
  same.y = {1.0, 2.0, 3.0};
  CHECK(ks_statistic(same).d == 0.0);

  const auto separated = distband::simlab::separated_fixture();
  CHECK(ks_statistic(separated).d == Catch::Approx(1.0));
}

TEST_CASE("asymptotic KS p-value") {
  CHECK(ks_p_asymptotic(0.0, 30, 30) == 1.0);
  CHECK(ks_p_asymptotic(0.3, 49, 20) == Catch::Approx(0.155).margin(0.005));
  CHECK(ks_p_asymptotic(1.0, 30, 30) <= 1e-12);
  CHECK_THROWS_AS(ks_p_asymptotic(1.5, 10, 10), std::domain_error);
}

TEST_CASE("permutation KS p-value on fixed datasets") {
  GroupedSamples same;
  same.x = {1.0, 2.0, 3.0};
  same.y = {1.0, 2.0, 3.0};
  CHECK(ks_p_permutation(same, 200, 5) == 1.0);

  // fully separated 5 vs 5: exactly 2 of C(10,5) = 252 shuffles reach d = 1
  const auto separated = distband::simlab::separated_fixture();
  const double p = ks_p_permutation(separated, 100000, 5);
  CHECK(p == Catch::Approx(2.0 / 252.0).margin(0.002));
}

TEST_CASE("permutation KS p-value on the tail-outlier fixture") {
  const auto g = distband::simlab::tail_outlier_fixture();
  const double p = ks_p_permutation(g, 20000, distband::kDefaultSeed);
  CHECK(p == Catch::Approx(0.121).margin(0.015));
}

TEST_CASE("KS statistic is invariant to monotone transforms") {
  const auto g = distband::simlab::tail_outlier_fixture();
  const auto before = ks_statistic(g);
  for (const std::string id : {"exp", "arctan-rescale", "cubic-plus-linear"}) {
    const auto transformed =
        distband::simlab::apply_transform(g, distband::simlab::make_transform(id, g));
    const auto after = ks_statistic(transformed);
    CHECK(before.d == after.d);
    CHECK(before.d_plus == after.d_plus);
    CHECK(before.d_minus == after.d_minus);
  }
}

TEST_CASE("permutation p-value is super-uniform under the null") {
  const int trials = 300;
  const std::int64_t reps = 300;
  const double alpha = 0.10;
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    distband::Rng rng(777, static_cast<std::uint64_t>(t));
    GroupedSamples g;
    g.x.resize(8);
    g.y.resize(8);
    for (auto& v : g.x) v = rng.normal();
    for (auto& v : g.y) v = rng.normal();
    std::sort(g.x.begin(), g.x.end());
    std::sort(g.y.begin(), g.y.end());
    if (ks_p_permutation(g, reps, 1000 + t) <= alpha) ++hits;
  }
  const double rate = static_cast<double>(hits) / trials;
  CHECK(rate <= alpha + 3.0 * std::sqrt(alpha * (1.0 - alpha) / trials));
}

TEST_CASE("permutation p-value is deterministic per seed") {
  const auto g = distband::simlab::separated_fixture();
  CHECK(ks_p_permutation(g, 5000, 12) == ks_p_permutation(g, 5000, 12));
}
