#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "nnlogit/neighbors.hpp"
#include "nnlogit/rng.hpp"

using namespace nnlogit;

namespace {

RowMatrix random_cloud(std::size_t n, std::size_t p, std::uint64_t seed) {
  RandomStream s(seed);
  RowMatrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = s.gaussian();
  return x;
}

// Independent oracle: compute every distance, stable-sort (distance, index).
std::vector<std::size_t> sort_all(const RowMatrix& x, const std::vector<double>& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double d = x(i, j) - q[static_cast<std::size_t>(j)];
      s += d * d;
    }
    all.emplace_back(s, static_cast<std::size_t>(i));
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(all[i].second);
  return out;
}

RowMatrix line(std::initializer_list<double> values) {
  RowMatrix x(values.size(), 1);
  std::size_t i = 0;
  for (double v : values) x(static_cast<Eigen::Index>(i++), 0) = v;
  return x;
}

}  // namespace

TEST_CASE("points on a line") {
  const NeighborIndex index(line({0, 1, 2, 3}));
  std::vector<double> q{0.0};
  auto nb = index.k_nearest(q, 2);
  CHECK(nb.indices == std::vector<std::size_t>{0, 1});
  CHECK(nb.bandwidth == doctest::Approx(1.0));

  q[0] = 1.4;
  nb = index.k_nearest(q, 2);
  CHECK(nb.indices == std::vector<std::size_t>{1, 2});
  CHECK(nb.bandwidth == doctest::Approx(0.6));
  CHECK(nb.distances[0] == doctest::Approx(0.4));
}

TEST_CASE("single point answers every query") {
  RowMatrix x(1, 3);
  x << 1, 2, 3;
  const NeighborIndex index(x);
  RandomStream s(1);
  for (int r = 0; r < 10; ++r) {
    std::vector<double> q{s.gaussian(), s.gaussian(), s.gaussian()};
    const auto nb = index.k_nearest(q, 1);
    CHECK(nb.indices == std::vector<std::size_t>{0});
  }
}

TEST_CASE("duplicated points come before farther points, lower index first") {
  const NeighborIndex index(line({5, 1, 1, 0.5, 1}));
  const std::vector<double> q{1.2};
  const auto nb = index.k_nearest(q, 3);
  CHECK(nb.indices == std::vector<std::size_t>{1, 2, 4});
  const auto nb2 = index.k_nearest(q, 2);
  CHECK(nb2.indices == std::vector<std::size_t>{1, 2});
}

TEST_CASE("tied distances on both sides break by index") {
  const NeighborIndex index(line({2, 0, 1, 3, -1}));
  const std::vector<double> q{1.0};
  // distances: 1, 1, 0, 2, 2
  CHECK(index.k_nearest(q, 2).indices == std::vector<std::size_t>{2, 0});
  CHECK(index.k_nearest(q, 4).indices == std::vector<std::size_t>{2, 0, 1, 3});
}

TEST_CASE("4 points in the plane against a linear scan") {
  RowMatrix x(4, 2);
  x << 0, 0, 1, 0, 0, 1, 1, 1;
  const NeighborIndex index(x, 1);
  RandomStream s(2);
  for (int r = 0; r < 100; ++r) {
    const std::vector<double> q{2 * s.uniform() - 0.5, 2 * s.uniform() - 0.5};
    for (std::size_t k = 1; k <= 4; ++k) {
      CHECK(index.k_nearest(q, k).indices == sort_all(x, q, k));
    }
  }
}

TEST_CASE("200 points in 5 dimensions against sorting all distances") {
  const auto x = random_cloud(200, 5, 3);
  const NeighborIndex index(x, 4);
  RandomStream s(4);
  for (int r = 0; r < 50; ++r) {
    std::vector<double> q(5);
    for (double& v : q) v = s.gaussian();
    const auto nb = index.k_nearest(q, 10);
    CHECK(nb.indices == sort_all(x, q, 10));
    CHECK(std::is_sorted(nb.distances.begin(), nb.distances.end()));
    CHECK(nb.bandwidth == nb.distances.back());
    const auto brute = brute_force_k_nearest(x, q, 10);
    CHECK(brute.indices == nb.indices);
    CHECK(brute.distances == nb.distances);
  }
}

TEST_CASE("grid data with many ties matches the oracle") {
  RowMatrix x(64, 2);
  for (int i = 0; i < 64; ++i) {
    x(i, 0) = i % 8;
    x(i, 1) = (i / 8) % 4;  // every point appears twice
  }
  const NeighborIndex index(x, 3);
  for (int r = 0; r < 30; ++r) {
    const std::vector<double> q{0.5 * (r % 15), 0.5 * (r % 7)};
    for (std::size_t k : {1, 5, 17, 64}) CHECK(index.k_nearest(q, k).indices == sort_all(x, q, k));
  }
}

TEST_CASE("index errors") {
  CHECK_THROWS_AS(NeighborIndex{RowMatrix(0, 2)}, std::invalid_argument);
  RowMatrix bad(2, 1);
  bad << 0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(NeighborIndex{bad}, std::invalid_argument);

  const NeighborIndex index(line({0, 1, 2}));
  const std::vector<double> q{0.0};
  CHECK_THROWS_AS(index.k_nearest(q, 4), std::invalid_argument);
  CHECK_THROWS_AS(index.k_nearest(q, 0), std::invalid_argument);
  const std::vector<double> inf{std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(index.k_nearest(inf, 1), std::invalid_argument);
  const std::vector<double> wrong{0.0, 0.0};
  CHECK_THROWS_AS(index.k_nearest(wrong, 1), std::invalid_argument);
}

TEST_CASE("theoretical bandwidth") {
  CHECK(theoretical_bandwidth(100, 10000, 1, 0.5) == doctest::Approx(0.01));
  CHECK(theoretical_bandwidth(50, 50, 2, 1.0 / std::numbers::pi) == doctest::Approx(1.0));
  CHECK(theoretical_bandwidth(100, 10000, 3, 1.0) ==
        doctest::Approx(std::cbrt(0.01 * 3.0 / (4.0 * std::numbers::pi))));
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
  CHECK_THROWS_AS(theoretical_bandwidth(0, 10, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(theoretical_bandwidth(1, 10, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(theoretical_bandwidth(1, 10, 1, 0.0), std::invalid_argument);
}
