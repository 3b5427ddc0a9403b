#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nnlogit {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Binary labels stored as 0/1.
using Labels = std::vector<int>;

/// Malformed or unusable input data (maps to exit code 3 in the CLI).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a usable result (exit code 4).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Labeled covariates: n points in R^p with binary labels.
struct Dataset {
  RowMatrix covariates;
  Labels labels;
  std::vector<std::string> feature_names;

  std::size_t n() const { return static_cast<std::size_t>(covariates.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(covariates.cols()); }

  std::span<const double> row(std::size_t i) const {
    return {covariates.data() + i * p(), p()};
  }

  std::size_t count_positive() const;

  /// Throws DataError if labels are not 0/1, sizes mismatch or an entry is non-finite.
  void validate() const;

  /// Rows selected by `indices`, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

inline Eigen::Map<const Vector> as_vector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

}  // namespace nnlogit
