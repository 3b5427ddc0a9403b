#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nnlogit/dataio.hpp"
#include "nnlogit/gradient_field.hpp"
#include "nnlogit/model_select.hpp"
#include "nnlogit/subspace.hpp"
#include "nnlogit/types.hpp"

namespace nnlogit {

inline constexpr int kSchemaVersion = 1;

/// Deterministic 64-bit seed for a named sub-task of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::vector<std::uint64_t> path);

struct ReductionConfig {
  std::optional<std::size_t> k;    // default floor(sqrt(n))
  std::optional<std::size_t> m;    // default ceil(n / 4)
  std::optional<double> lambda;    // unset: cross-validated at the mean point
  LambdaSelectOptions lambda_cv;
  FieldOptions field;
  std::uint64_t seed = 0;
};

/// Output of the gradient-aggregation pipeline on one dataset.
struct ReductionResult {
  SubspaceModel model;
  double lambda = 0.0;
  std::size_t k = 0;
  std::size_t m = 0;
  std::size_t used_points = 0;
  std::map<std::string, std::size_t> skipped;  // by reason
  std::size_t nonconverged = 0;
  std::optional<CvReport> lambda_report;
  std::optional<Scaling> scaling;  // set by callers that standardized the input
  std::vector<std::string> feature_names;
  std::uint64_t seed = 0;

  std::size_t skipped_total() const;
};

/// Select lambda (unless fixed), estimate the gradient field, aggregate and
/// eigendecompose. Throws NumericalError("all estimates skipped or zero")
/// when no usable direction is found.
ReductionResult reduce(const Dataset& data, const ReductionConfig& config);

nlohmann::json to_json(const ReductionResult& result);
ReductionResult reduction_from_json(const nlohmann::json& j);

struct EvaluationMetrics {
  std::size_t d = 0;
  std::size_t k_vote = 0;
  std::size_t n_test = 0;
  double misclassification = 0.0;
  double auc = 0.0;
};

/// kNN on the top-d projection of `train`, scored on `test`. Both datasets
/// must already be on the model's scale.
EvaluationMetrics evaluate_projection(const Dataset& train, const Dataset& test,
                                      const SubspaceModel& model, std::size_t d,
                                      std::size_t k_vote, std::uint64_t seed);

/// kNN on `basis` coordinates (or raw covariates when basis is empty).
EvaluationMetrics evaluate_basis(const Dataset& train, const Dataset& test, const Matrix& basis,
                                 std::size_t k_vote, std::uint64_t seed);

nlohmann::json to_json(const EvaluationMetrics& m);

// ---------------------------------------------------------------------------
// Simulation harness: subspace distance and classification risk per method.

struct FigureConfig {
  int example = 1;
  std::vector<std::size_t> n_grid = {500, 1000, 2000};
  std::size_t p = 8;
  std::size_t reps = 50;
  std::uint64_t seed = 0;
  std::size_t k_vote = 10;
  std::size_t dim_folds = 5;
  bool select_dimension = true;
  std::size_t test_size = 0;  // 0: same as n
  std::vector<std::string> methods = {"llo_penalized", "llo_unpenalized", "oracle", "full"};
};

struct FigureRecord {
  std::size_t n = 0;
  std::size_t rep = 0;
  std::string method;
  std::optional<double> distance;
  double risk_true_d = 0.0;
  double auc_true_d = 0.0;
  std::optional<double> lambda;
  std::optional<double> risk_cv_d;
  std::optional<std::size_t> chosen_d;
  double wall_seconds = 0.0;
};

struct FigureReport {
  FigureConfig config;
  std::vector<FigureRecord> records;
};

/// Replications run in parallel; per-replication seeds depend only on
/// (seed, n, rep), so results do not depend on the thread count.
FigureReport run_figures(const FigureConfig& config);

struct Aggregate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};
Aggregate aggregate(const std::vector<double>& values);

/// Aggregate of `field` over the records of (n, method).
Aggregate figure_aggregate(const FigureReport& report, std::size_t n, const std::string& method,
                           const std::string& field);

nlohmann::json to_json(const FigureReport& report);
std::string to_csv(const FigureReport& report);

// ---------------------------------------------------------------------------
// Gradient error rate at the origin for Example 1.

struct RateConfig {
  std::size_t p = 1;
  std::vector<std::size_t> n_grid = {500, 1000, 2000, 4000};
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  double lambda = 0.0;
};

struct RatePoint {
  std::size_t n = 0;
  std::size_t k = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

struct RateReport {
  RateConfig config;
  std::vector<RatePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double theory_slope = 0.0;
  double wall_seconds = 0.0;
};

/// k = ceil(n^(4 / (p + 4))).
std::size_t rate_neighbor_count(std::size_t n, std::size_t p);

/// Least-squares slope of log(mean error) on log(n).
RateReport run_rate(const RateConfig& config);

nlohmann::json to_json(const RateReport& report);
std::string to_csv(const RateReport& report);

/// Removes every key named "wall_seconds" at any depth.
nlohmann::json strip_timing(nlohmann::json j);

}  // namespace nnlogit
