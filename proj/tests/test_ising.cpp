#include <doctest.h>

#include "isingmc/ising.hpp"
#include "isingmc/rng.hpp"
#include "support/oracles.hpp"

using namespace isingmc;

TEST_CASE("edge_index follows row-major pair order") {
  CHECK(edge_index(1, 2, 3).linear == 0);
  CHECK(edge_index(1, 3, 3).linear == 1);
  CHECK(edge_index(2, 3, 3).linear == 2);
  CHECK(edge_index(2, 3, 4).linear == 3);
  CHECK(edge_index(3, 4, 4).linear == 5);
}

TEST_CASE("edge_index rejects invalid pairs") {
  CHECK_THROWS_AS(edge_index(2, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(edge_index(3, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(edge_index(1, 4, 3), std::invalid_argument);
  CHECK_THROWS_AS(edge_index(0, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(edge_from_linear(3, 3), std::out_of_range);
}

TEST_CASE("edge_index is a bijection up to d = 100") {
  for (int d : {2, 3, 7, 50, 100}) {
    std::size_t expected = 0;
    for (int r = 1; r <= d; ++r) {
      for (int s = r + 1; s <= d; ++s, ++expected) {
        const auto idx = edge_index(r, s, d);
        REQUIRE(idx.linear == expected);
        const auto back = edge_from_linear(idx.linear, d);
        REQUIRE(back == idx);
      }
    }
    CHECK(expected == num_edges(d));
  }
}

TEST_CASE("suff_stat products") {
  CHECK(suff_stat(SpinConfig({1, 1, 1})) == SuffStat{1, 1, 1});
  CHECK(suff_stat(SpinConfig({1, -1, 1})) == SuffStat{-1, 1, -1});
  CHECK_THROWS_AS(SpinConfig({1, 0, 1}), std::invalid_argument);
}

TEST_CASE("global spin flip leaves J and the score unchanged") {
  Rng rng({7, 0});
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(12));
    std::vector<Spin> v(static_cast<std::size_t>(d));
    for (auto& x : v) x = rng.spin();
    const SpinConfig y(v);
    const auto theta = testing::random_theta(d, 2.0, rng);
    CHECK(suff_stat(y) == suff_stat(y.negated()));
    CHECK(edge_score(theta, y) == doctest::Approx(edge_score(theta, y.negated())).epsilon(1e-14));
  }
}

TEST_CASE("edge_score") {
  Theta zero(4);
  CHECK(edge_score(zero, SpinConfig({1, -1, 1, -1})) == 0.0);

  Theta t(2, {1.0});
  CHECK(edge_score(t, SpinConfig({1, 1})) == 1.0);

  Rng rng({3, 1});
  const auto theta = testing::random_theta(9, 1.5, rng);
  std::vector<Spin> v(9);
  for (auto& x : v) x = rng.spin();
  const auto j = suff_stat(v);
  double dot = 0.0;
  for (std::size_t e = 0; e < j.size(); ++e) dot += theta[e] * j[e];
  CHECK(edge_score(theta, v) == doctest::Approx(dot).epsilon(1e-13));

  CHECK_THROWS_AS(edge_score(theta, SpinConfig({1, 1})), DimensionError);
}

TEST_CASE("incremental_edge_score") {
  Theta t(2, {1.0});
  const SpinConfig y({1, 1});
  CHECK(incremental_edge_score(1.0, t, y, 0, 1) == 1.0);
  CHECK(incremental_edge_score(1.0, t, y, 1, -1) == -1.0);
  CHECK_THROWS_AS(incremental_edge_score(1.0, t, y, 2, -1), std::out_of_range);
}

TEST_CASE("incremental scores agree with recomputation over 1e4 random flips") {
  Rng rng({11, 0});
  const int d = 15;
  const auto theta = testing::random_theta(d, 1.0, rng);
  std::vector<Spin> v(d);
  for (auto& x : v) x = rng.spin();
  SpinConfig y(v);
  double score = edge_score(theta, y);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const int site = static_cast<int>(rng.below(d));
    const Spin value = rng.spin();
    score = incremental_edge_score(score, theta, y, site, value);
    y.set(site, value);
    worst = std::max(worst, std::abs(score - edge_score(theta, y)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("incremental drift stays below 1e-9 after 1e6 updates") {
  Rng rng({12, 0});
  const int d = 10;
  const auto theta = testing::random_theta(d, 1.0, rng);
  SpinConfig y = SpinConfig::ones(d);
  double score = edge_score(theta, y);
  for (int k = 0; k < 1000000; ++k) {
    const int site = static_cast<int>(rng.below(d));
    const Spin value = rng.spin();
    score = incremental_edge_score(score, theta, y, site, value);
    y.set(site, value);
  }
  CHECK(std::abs(score - edge_score(theta, y)) <= 1e-9);
}

TEST_CASE("Theta validation") {
  CHECK_THROWS_AS(Theta(3, {1.0, 2.0}), DimensionError);
  CHECK_THROWS_AS(Theta(2, {std::nan("")}), std::invalid_argument);
  Theta t(4);
  t.set(2, 1, 0.5);
  CHECK(t.at(1, 2) == 0.5);
  CHECK(t.at(2, 1) == 0.5);
  CHECK(t[edge_index(2, 3, 4).linear] == 0.5);
}

TEST_CASE("Dataset mean statistic") {
  const Dataset data(3, {SpinConfig({1, 1, 1}), SpinConfig({1, -1, 1})});
  const auto mean = data.mean_suff_stat();
  CHECK(mean == std::vector<double>{0.0, 1.0, 0.0});
  CHECK_THROWS_AS(Dataset(3, std::vector<SpinConfig>{SpinConfig({1, 1})}), DimensionError);
  CHECK_THROWS_AS(Dataset(3, std::vector<SpinConfig>{}), std::invalid_argument);
}
