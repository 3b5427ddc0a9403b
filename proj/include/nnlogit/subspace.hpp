#pragma once

#include <cstddef>
#include <span>

#include "json.hpp"
#include "nnlogit/gradient_field.hpp"
#include "nnlogit/types.hpp"

namespace nnlogit {

/// Average of b b^T over the non-skipped gradient estimates.
struct AggregatedMatrix {
  Matrix matrix;
  std::size_t used_points = 0;
};

/// Ordered eigenbasis of the aggregated matrix plus the retained dimension.
struct SubspaceModel {
  Vector eigenvalues;  // nonincreasing
  Matrix basis;        // p x p, column k pairs with eigenvalues[k]
  std::size_t d = 0;   // 0 until a dimension is chosen

  std::size_t p() const { return static_cast<std::size_t>(basis.rows()); }
  /// Number of eigenvalues that survived clamping.
  std::size_t nonzero_count() const;
  /// First d basis columns.
  Matrix leading(std::size_t d) const;
};

/// Throws NumericalError if every estimate is skipped.
AggregatedMatrix aggregate_M(std::span<const GradientEstimate> estimates);

struct SymmetricEigen {
  Vector values;   // nonincreasing
  Matrix vectors;  // orthonormal columns
  int sweeps = 0;
};

/// Cyclic Jacobi rotations for a symmetric matrix.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tol = 1e-15, int max_sweeps = 100);

/// Eigenvalues below 1e-12 of the largest are set to 0. Each eigenvector's
/// first nonzero coordinate is made positive.
SubspaceModel eigen_basis(const AggregatedMatrix& m);

/// Orthogonal projector onto the top-d eigenvectors.
Matrix projector(const SubspaceModel& model, std::size_t d);

/// B B^T for a basis with orthonormal columns.
Matrix projector_of(const Matrix& basis);

/// ||P1 - P2||_F for two orthonormal bases of subspaces of the same R^p.
double subspace_distance(const Matrix& basis1, const Matrix& basis2);

nlohmann::json to_json(const SubspaceModel& model);
SubspaceModel subspace_model_from_json(const nlohmann::json& j);

}  // namespace nnlogit
