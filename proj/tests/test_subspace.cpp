#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "nnlogit/rng.hpp"
#include "nnlogit/subspace.hpp"

using namespace nnlogit;

namespace {

GradientEstimate estimate_with(std::initializer_list<double> b) {
  GradientEstimate e;
  e.gradient = Vector(static_cast<Eigen::Index>(b.size()));
  Eigen::Index i = 0;
  for (double v : b) e.gradient[i++] = v;
  return e;
}

Matrix random_orthogonal(Eigen::Index p, std::uint64_t seed) {
  RandomStream s(seed);
  Matrix g(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) g(i, j) = s.gaussian();
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(p, p);
}

AggregatedMatrix wrap(const Matrix& m) { return {m, 1}; }

}  // namespace

TEST_CASE("aggregate of one estimate is its outer product") {
  std::vector<GradientEstimate> est{estimate_with({1, 0})};
  const auto m = aggregate_M(est);
  CHECK(m.used_points == 1);
  CHECK(m.matrix.isApprox(Matrix{{1, 0}, {0, 0}}));
}

TEST_CASE("aggregate of e1 and e2 is half the identity") {
  std::vector<GradientEstimate> est{estimate_with({1, 0}), estimate_with({0, 1})};
  CHECK(aggregate_M(est).matrix.isApprox(0.5 * Matrix::Identity(2, 2)));
}

TEST_CASE("aggregate matches a double loop and ignores skipped estimates") {
  RandomStream s(1);
  std::vector<GradientEstimate> est;
  for (int r = 0; r < 20; ++r) {
    est.push_back(estimate_with({s.gaussian(), s.gaussian(), s.gaussian(), s.gaussian()}));
  }
  est[3].skipped = SkipReason::class_imbalance;
  est[7].skipped = SkipReason::degenerate;
  double expected[4][4] = {};
  int used = 0;
  for (const auto& e : est) {
    if (e.is_skipped()) continue;
    ++used;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) expected[i][j] += e.gradient[i] * e.gradient[j];
  }
  const auto m = aggregate_M(est);
  CHECK(m.used_points == 18);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(m.matrix(i, j) == doctest::Approx(expected[i][j] / used));
}

TEST_CASE("aggregate of only skipped estimates fails") {
  std::vector<GradientEstimate> est{estimate_with({1, 0})};
  est[0].skipped = SkipReason::degenerate;
  CHECK_THROWS_AS(aggregate_M(est), NumericalError);
}

TEST_CASE("diagonal matrix") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1, 3, 0;
  const auto model = eigen_basis(wrap(d));
  CHECK(model.eigenvalues.isApprox(Vector{{3, 1, 0}}));
  CHECK(model.basis.col(0).isApprox(Vector{{0, 1, 0}}));
  CHECK(model.basis.col(1).isApprox(Vector{{1, 0, 0}}));
  CHECK(std::abs(model.basis(2, 2)) == doctest::Approx(1.0));
  CHECK(model.nonzero_count() == 2);
  CHECK(model.d == 0);
}

TEST_CASE("identity has a degenerate spectrum that reconstructs") {
  const auto model = eigen_basis(wrap(Matrix::Identity(3, 3)));
  CHECK(model.eigenvalues.isApprox(Vector::Ones(3)));
  const Matrix rebuilt = model.basis * model.eigenvalues.asDiagonal() * model.basis.transpose();
  CHECK(rebuilt.isApprox(Matrix::Identity(3, 3), 1e-12));
}

TEST_CASE("construct then recover a random spectrum") {
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const Matrix q = random_orthogonal(6, rep);
    const Vector lambda{{5.0, 2.5, 1.0, 0.5, 0.1, 0.01}};
    const Matrix m = q * lambda.asDiagonal() * q.transpose();
    const auto model = eigen_basis(wrap(m));
    for (Eigen::Index i = 0; i < 6; ++i) CHECK(std::abs(model.eigenvalues[i] - lambda[i]) < 1e-8);
    // Each recovered vector spans the same line as the planted one.
    for (Eigen::Index i = 0; i < 6; ++i) {
      CHECK(std::abs(std::abs(model.basis.col(i).dot(q.col(i))) - 1.0) < 1e-8);
    }
    CHECK((model.basis.transpose() * model.basis).isApprox(Matrix::Identity(6, 6), 1e-12));
  }
}

TEST_CASE("jacobi agrees with Eigen's symmetric solver") {
  RandomStream s(2);
  for (int rep = 0; rep < 10; ++rep) {
    Matrix g(7, 7);
    for (Eigen::Index i = 0; i < 7; ++i)
      for (Eigen::Index j = 0; j < 7; ++j) g(i, j) = s.gaussian();
    const Matrix sym = g + g.transpose();
    const auto mine = jacobi_eigen(sym);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(sym);
    const Vector expected = ref.eigenvalues().reverse();
    CHECK((mine.values - expected).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((mine.vectors * mine.values.asDiagonal() * mine.vectors.transpose() - sym).norm() < 1e-10);
  }
}

TEST_CASE("sign convention and clamping") {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 1e-14;
  m(2, 2) = 0.5;
  auto model = eigen_basis(wrap(m));
  CHECK(model.eigenvalues[2] == 0.0);
  CHECK(model.nonzero_count() == 2);
  for (Eigen::Index k = 0; k < 3; ++k) {
    for (Eigen::Index r = 0; r < 3; ++r) {
      if (std::abs(model.basis(r, k)) > 1e-12) {
        CHECK(model.basis(r, k) > 0.0);
        break;
      }
    }
  }
  CHECK(eigen_basis(wrap(Matrix::Zero(2, 2))).nonzero_count() == 0);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(eigen_basis(wrap(bad)), std::invalid_argument);
}

TEST_CASE("projectors") {
  const Matrix q = random_orthogonal(5, 9);
  const Vector lambda{{4, 3, 2, 1, 0.5}};
  const auto model = eigen_basis(wrap(q * lambda.asDiagonal() * q.transpose()));
  CHECK(projector(model, 5).isApprox(Matrix::Identity(5, 5), 1e-12));
  for (std::size_t d = 1; d <= 5; ++d) {
    const Matrix pr = projector(model, d);
    CHECK((pr * pr - pr).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(pr.trace() == doctest::Approx(static_cast<double>(d)));
  }
  SubspaceModel e1;
  e1.eigenvalues = Vector{{1, 0}};
  e1.basis = Matrix::Identity(2, 2);
  CHECK(projector(e1, 1).isApprox(Matrix{{1, 0}, {0, 0}}));
  CHECK_THROWS_AS(projector(model, 0), std::out_of_range);
  CHECK_THROWS_AS(projector(model, 6), std::out_of_range);
}

TEST_CASE("subspace distance") {
  const Matrix e1 = Matrix::Identity(3, 3).col(0);
  const Matrix e2 = Matrix::Identity(3, 3).col(1);
  CHECK(subspace_distance(e1, e1) == 0.0);
  CHECK(subspace_distance(e1, e2) == doctest::Approx(std::numbers::sqrt2));

  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const Matrix basis = random_orthogonal(6, 100 + rep).leftCols(3);
    const Matrix mix = random_orthogonal(3, 200 + rep);
    CHECK(subspace_distance(basis, basis * mix) < 1e-10);
  }
  Matrix skew(3, 1);
  skew << 1, 1, 0;
  CHECK_THROWS_AS(subspace_distance(skew, e1), std::invalid_argument);
  CHECK_THROWS_AS(subspace_distance(e1, Matrix::Identity(2, 2).col(0)), std::invalid_argument);
}

TEST_CASE("model JSON round trip is exact") {
  const Matrix q = random_orthogonal(4, 5);
  auto model = eigen_basis(wrap(q * Vector{{3, 2, 1, 0}}.asDiagonal() * q.transpose()));
  model.d = 2;
  const auto text = to_json(model).dump();
  const auto back = subspace_model_from_json(nlohmann::json::parse(text));
  CHECK(back.eigenvalues == model.eigenvalues);
  CHECK(back.basis == model.basis);
  CHECK(back.d == 2);
  auto broken = to_json(model);
  broken["basis_columns"].erase(0);
  CHECK_THROWS_AS(subspace_model_from_json(broken), DataError);
}
