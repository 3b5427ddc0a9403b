#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "nnlogit/synthetic.hpp"

using namespace nnlogit;

namespace {

double positive_rate(const Dataset& d) {
  return static_cast<double>(d.count_positive()) / static_cast<double>(d.n());
}

}  // namespace

TEST_CASE("true dimensions and oracle bases") {
  CHECK(true_dimension(1) == 1);
  CHECK(true_dimension(2) == 2);
  CHECK(true_dimension(3) == 2);
  CHECK(true_dimension(4) == 3);
  CHECK_THROWS_AS(true_dimension(5), std::invalid_argument);
  CHECK_THROWS_AS(true_dimension(0), std::invalid_argument);

  const auto o4 = oracle_for(4, 8);
  CHECK(o4.true_d == 3);
  CHECK(o4.basis == Matrix::Identity(8, 8).leftCols(3));
  CHECK_FALSE(o4.logit_gradient.has_value());

  const auto o1 = oracle_for(1, 8);
  REQUIRE(o1.logit_gradient.has_value());
  CHECK(*o1.logit_gradient == Vector::Unit(8, 0));
}

TEST_CASE("Example 1 logit is x1 + 1 everywhere") {
  // P(Y = 1 | x) = expit(x1 + 1): the rule flips exactly at u = expit(x1 + 1).
  const std::vector<double> x{0.3, -2.0, 5.0};
  const double pi = 1.0 / (1.0 + std::exp(-1.3));
  CHECK(label_rule(1, x, std::nextafter(pi, 0.0)) == 1);
  CHECK(label_rule(1, x, pi + 1e-12) == 0);
}

TEST_CASE("Example 2 at the origin with negative noise") {
  const std::vector<double> x{0.0, 0.0};
  CHECK(label_rule(2, x, -1.0) == 0);
  CHECK(label_rule(2, x, 0.0) == 1);
}

TEST_CASE("Examples 3 and 4 by direct evaluation") {
  const std::vector<double> x3{0.5, 1.5};
  CHECK(label_rule(3, x3, 0.0) == 1);   // 1.0 * 1.0
  CHECK(label_rule(3, x3, -6.0) == 0);  // 1 - 1.2
  const std::vector<double> x4{std::exp(1.0), 1.0, -2.0};
  CHECK(label_rule(4, x4, 0.0) == 0);   // 2 * (1 - 2) = -2
  CHECK(label_rule(4, x4, 11.0) == 1);  // -2 + 2.2
  const std::vector<double> zero{0.0, 1.0, 1.0};
  CHECK_NOTHROW(label_rule(4, zero, 0.0));
  CHECK(label_rule(4, zero, 0.0) == 0);  // log(0+) * 2 is very negative
  CHECK_THROWS_AS(label_rule(4, x3, 0.0), std::invalid_argument);
}

TEST_CASE("generation is deterministic and shaped") {
  const auto a = generate({3, 50, 6, 11});
  const auto b = generate({3, 50, 6, 11});
  const auto c = generate({3, 50, 6, 12});
  CHECK(a.data.covariates == b.data.covariates);
  CHECK(a.data.labels == b.data.labels);
  CHECK(a.data.covariates != c.data.covariates);
  CHECK(a.data.n() == 50);
  CHECK(a.data.p() == 6);
  CHECK(a.data.feature_names.front() == "x1");
  CHECK(a.data.feature_names.back() == "x6");
  CHECK_NOTHROW(a.data.validate());
}

TEST_CASE("invalid specs") {
  CHECK_THROWS_AS(generate({5, 10, 8, 0}), std::invalid_argument);
  CHECK_THROWS_AS(generate({1, 0, 8, 0}), std::invalid_argument);
  CHECK_THROWS_AS(generate({4, 10, 2, 0}), std::invalid_argument);
  CHECK_NOTHROW(generate({1, 10, 1, 0}));
}

TEST_CASE("covariates are standard normal") {
  const auto sim = generate({2, 20000, 4, 13});
  const auto& x = sim.data.covariates;
  for (Eigen::Index j = 0; j < 4; ++j) {
    const double mean = x.col(j).mean();
    const double var = (x.col(j).array() - mean).square().sum() / 19999.0;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(20000.0));
    CHECK(std::abs(var - 1.0) < 0.05);
  }
  CHECK(std::abs((x.col(0).array() * x.col(1).array()).mean()) < 0.03);
}

TEST_CASE("Example 1 class balance matches E[expit(X1 + 1)]") {
  // Trapezoid rule against the normal density.
  double expected = 0.0;
  const double h = 1e-3;
  for (double t = -10.0; t <= 10.0; t += h) {
    expected += h * std::exp(-0.5 * t * t) / std::sqrt(2 * std::numbers::pi) / (1.0 + std::exp(-(t + 1.0)));
  }
  const std::size_t n = 100000;
  const auto sim = generate({1, n, 2, 14});
  const double se = std::sqrt(expected * (1 - expected) / static_cast<double>(n));
  CHECK(std::abs(positive_rate(sim.data) - expected) < 4 * se);
}

TEST_CASE("Example 4 class balance matches an independent simulation") {
  const std::size_t n = 100000;
  const double mine = positive_rate(generate({4, n, 3, 15}).data);

  std::mt19937_64 engine(2024);
  std::normal_distribution<double> z;
  std::size_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = z(engine), x2 = z(engine), x3 = z(engine), e = z(engine);
    ones += std::log(x1 * x1) * (x2 * x2 + x3) + 0.2 * e >= 0.0;
  }
  const double ref = static_cast<double>(ones) / static_cast<double>(n);
  const double se = std::sqrt(2.0 * ref * (1 - ref) / static_cast<double>(n));
  CHECK(std::abs(mine - ref) < 3 * se);
}

TEST_CASE("oracle sidecar JSON") {
  const SyntheticSpec spec{4, 100, 8, 3};
  const auto j = to_json(oracle_for(4, 8), spec);
  CHECK(j["true_d"] == 3);
  CHECK(j["basis_axes"] == nlohmann::json::array({0, 1, 2}));
  CHECK(j["example"] == 4);
  CHECK(j["seed"] == 3);
}
