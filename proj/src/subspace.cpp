#include "nnlogit/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnlogit {

namespace {

constexpr double kClampRatio = 1e-12;
constexpr double kOrthonormalTol = 1e-6;

void require_orthonormal(const Matrix& basis, const char* what) {
  const Matrix gram = basis.transpose() * basis;
  const Matrix id = Matrix::Identity(gram.rows(), gram.cols());
  if ((gram - id).cwiseAbs().maxCoeff() > kOrthonormalTol) {
    throw std::invalid_argument(std::string(what) + ": basis is not orthonormal");
  }
}

}  // namespace

std::size_t SubspaceModel::nonzero_count() const {
  return static_cast<std::size_t>((eigenvalues.array() > 0.0).count());
}

Matrix SubspaceModel::leading(std::size_t dim) const {
  if (dim == 0 || dim > p()) throw std::out_of_range("leading: dimension out of range");
  return basis.leftCols(static_cast<Eigen::Index>(dim));
}

AggregatedMatrix aggregate_M(std::span<const GradientEstimate> estimates) {
  AggregatedMatrix out;
  for (const auto& e : estimates) {
    if (e.is_skipped()) continue;
    if (out.used_points == 0) out.matrix = Matrix::Zero(e.gradient.size(), e.gradient.size());
    if (e.gradient.size() != out.matrix.rows()) {
      throw std::invalid_argument("aggregate_M: gradients of different lengths");
    }
    out.matrix.selfadjointView<Eigen::Lower>().rankUpdate(e.gradient);
    ++out.used_points;
  }
  if (out.used_points == 0) throw NumericalError("all estimates skipped");
  out.matrix = out.matrix.selfadjointView<Eigen::Lower>();
  out.matrix /= static_cast<double>(out.used_points);
  return out;
}

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tol, int max_sweeps) {
  const Eigen::Index p = symmetric.rows();
  if (symmetric.cols() != p) throw std::invalid_argument("jacobi_eigen: matrix is not square");
  if (!symmetric.allFinite()) throw std::invalid_argument("jacobi_eigen: non-finite entries");

  Matrix a = 0.5 * (symmetric + symmetric.transpose());
  Matrix v = Matrix::Identity(p, p);
  SymmetricEigen out;

  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = i + 1; j < p; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(2.0 * off) <= tol * scale) break;
    out.sweeps = sweep + 1;

    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = i + 1; j < p; ++j) {
        const double aij = a(i, j);
        if (aij == 0.0) continue;
        // Rotation angle that annihilates a(i, j).
        const double theta = (a(j, j) - a(i, i)) / (2.0 * aij);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index r = 0; r < p; ++r) {
          const double ari = a(r, i), arj = a(r, j);
          a(r, i) = c * ari - s * arj;
          a(r, j) = s * ari + c * arj;
        }
        for (Eigen::Index r = 0; r < p; ++r) {
          const double air = a(i, r), ajr = a(j, r);
          a(i, r) = c * air - s * ajr;
          a(j, r) = s * air + c * ajr;
        }
        for (Eigen::Index r = 0; r < p; ++r) {
          const double vri = v(r, i), vrj = v(r, j);
          v(r, i) = c * vri - s * vrj;
          v(r, j) = s * vri + c * vrj;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
  out.values.resize(p);
  out.vectors.resize(p, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    out.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

SubspaceModel eigen_basis(const AggregatedMatrix& m) {
  if (!m.matrix.allFinite()) throw std::invalid_argument("eigen_basis: non-finite entries");
  SymmetricEigen eig = jacobi_eigen(m.matrix);
  SubspaceModel model;
  model.eigenvalues = eig.values;
  model.basis = eig.vectors;

  const double top = std::max(model.eigenvalues.size() ? model.eigenvalues[0] : 0.0, 0.0);
  for (Eigen::Index k = 0; k < model.eigenvalues.size(); ++k) {
    if (model.eigenvalues[k] < kClampRatio * top || top == 0.0) model.eigenvalues[k] = 0.0;
  }
  for (Eigen::Index k = 0; k < model.basis.cols(); ++k) {
    for (Eigen::Index r = 0; r < model.basis.rows(); ++r) {
      const double x = model.basis(r, k);
      if (std::abs(x) > 1e-12) {
        if (x < 0.0) model.basis.col(k) *= -1.0;
        break;
      }
    }
  }
  return model;
}

Matrix projector_of(const Matrix& basis) { return basis * basis.transpose(); }

Matrix projector(const SubspaceModel& model, std::size_t d) {
  return projector_of(model.leading(d));
}

double subspace_distance(const Matrix& basis1, const Matrix& basis2) {
  if (basis1.rows() != basis2.rows()) {
    throw std::invalid_argument("subspace_distance: ambient dimensions differ");
  }
  require_orthonormal(basis1, "subspace_distance");
  require_orthonormal(basis2, "subspace_distance");
  return (projector_of(basis1) - projector_of(basis2)).norm();
}

nlohmann::json to_json(const SubspaceModel& model) {
  nlohmann::json j;
  j["eigenvalues"] = std::vector<double>(model.eigenvalues.data(),
                                         model.eigenvalues.data() + model.eigenvalues.size());
  auto columns = nlohmann::json::array();
  for (Eigen::Index k = 0; k < model.basis.cols(); ++k) {
    std::vector<double> col(static_cast<std::size_t>(model.basis.rows()));
    for (Eigen::Index r = 0; r < model.basis.rows(); ++r) col[static_cast<std::size_t>(r)] = model.basis(r, k);
    columns.push_back(col);
  }
  j["basis_columns"] = columns;
  j["d"] = model.d;
  return j;
}

SubspaceModel subspace_model_from_json(const nlohmann::json& j) {
  SubspaceModel model;
  const auto values = j.at("eigenvalues").get<std::vector<double>>();
  const auto columns = j.at("basis_columns").get<std::vector<std::vector<double>>>();
  const auto p = static_cast<Eigen::Index>(values.size());
  if (static_cast<Eigen::Index>(columns.size()) != p) {
    throw DataError("model: basis column count does not match eigenvalue count");
  }
  model.eigenvalues = Eigen::Map<const Vector>(values.data(), p);
  model.basis.resize(p, p);
  for (Eigen::Index k = 0; k < p; ++k) {
    if (static_cast<Eigen::Index>(columns[static_cast<std::size_t>(k)].size()) != p) {
      throw DataError("model: basis column has the wrong length");
    }
    for (Eigen::Index r = 0; r < p; ++r) {
      model.basis(r, k) = columns[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)];
    }
  }
  model.d = j.value("d", std::size_t{0});
  return model;
}

}  // namespace nnlogit
