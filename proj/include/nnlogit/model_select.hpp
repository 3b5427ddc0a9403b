#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "nnlogit/classify.hpp"
#include "nnlogit/local_logistic.hpp"
#include "nnlogit/subspace.hpp"
#include "nnlogit/types.hpp"

namespace nnlogit {

/// Cross-validated misclassification over a grid of candidate values.
struct CvReport {
  std::string parameter;  // "lambda" or "dimension"
  std::vector<double> grid;
  /// Mean risk over the retained folds, one per grid value.
  std::vector<double> risks;
  /// One row per retained fold.
  std::vector<std::vector<double>> fold_risks;
  std::vector<std::size_t> retained_folds;
  std::vector<std::size_t> dropped_folds;
  std::vector<std::string> warnings;
  double chosen = 0.0;
  std::size_t chosen_index = 0;
};

nlohmann::json to_json(const CvReport& report);
CvReport cv_report_from_json(const nlohmann::json& j);

/// Disjoint cover of {0..n-1} by `folds` nearly equal groups after a shuffle.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds,
                                                 std::uint64_t seed);

/// `size` values from `top` down to top * ratio, geometrically spaced.
std::vector<double> lambda_grid(double top, std::size_t size, double ratio = 1e-3);

/// Column means of the covariates.
Vector mean_point(const Dataset& data);

struct LambdaSelectOptions {
  std::size_t folds = 10;
  std::size_t grid_size = 100;
  double grid_ratio = 1e-3;
  SolverOptions solver;
};

/// Picks the penalty by K-fold CV of the local fit at the mean point.
///
/// Within each training fold the k nearest neighbors of the mean point are
/// fitted along the grid (anchored at lambda_max of the full-data
/// neighborhood); each held-out observation is labeled 1 iff
/// expit(a + b'(X - mean)) > 1/2. Ties in mean risk go to the larger
/// lambda. Throws NumericalError if every fold is dropped.
CvReport select_lambda(const Dataset& data, std::size_t k, std::uint64_t seed,
                       const LambdaSelectOptions& opts = {});

/// Picks d in {1..p'} (p' = nonzero eigenvalues) by K-fold CV of
/// `classifier` on the projected covariates. Ties go to the smaller d.
CvReport select_dimension(const Dataset& data, const SubspaceModel& basis, std::size_t folds,
                          const Classifier& classifier, std::uint64_t seed);

}  // namespace nnlogit
