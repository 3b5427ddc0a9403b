#include "nnlogit/model_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nnlogit/gradient_field.hpp"
#include "nnlogit/neighbors.hpp"
#include "nnlogit/rng.hpp"

namespace nnlogit {

namespace {

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& held_out) {
  std::vector<bool> out(n, false);
  for (std::size_t i : held_out) out[i] = true;
  std::vector<std::size_t> keep;
  keep.reserve(n - held_out.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!out[i]) keep.push_back(i);
  }
  return keep;
}

// Averages the retained fold rows and picks the first minimizer.
void summarize(CvReport& report) {
  const std::size_t g = report.grid.size();
  report.risks.assign(g, 0.0);
  for (const auto& row : report.fold_risks) {
    for (std::size_t c = 0; c < g; ++c) report.risks[c] += row[c];
  }
  for (auto& r : report.risks) r /= static_cast<double>(report.fold_risks.size());
  report.chosen_index = static_cast<std::size_t>(
      std::min_element(report.risks.begin(), report.risks.end()) - report.risks.begin());
  report.chosen = report.grid[report.chosen_index];
}

}  // namespace

nlohmann::json to_json(const CvReport& report) {
  return {{"parameter", report.parameter},
          {"grid", report.grid},
          {"risks", report.risks},
          {"fold_risks", report.fold_risks},
          {"retained_folds", report.retained_folds},
          {"dropped_folds", report.dropped_folds},
          {"warnings", report.warnings},
          {"chosen", report.chosen},
          {"chosen_index", report.chosen_index}};
}

CvReport cv_report_from_json(const nlohmann::json& j) {
  CvReport r;
  r.parameter = j.at("parameter").get<std::string>();
  r.grid = j.at("grid").get<std::vector<double>>();
  r.risks = j.at("risks").get<std::vector<double>>();
  r.fold_risks = j.at("fold_risks").get<std::vector<std::vector<double>>>();
  r.retained_folds = j.at("retained_folds").get<std::vector<std::size_t>>();
  r.dropped_folds = j.at("dropped_folds").get<std::vector<std::size_t>>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  r.chosen = j.at("chosen").get<double>();
  r.chosen_index = j.at("chosen_index").get<std::size_t>();
  return r;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t folds,
                                                 std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("make_folds: need at least 2 folds");
  if (folds > n) throw std::invalid_argument("make_folds: more folds than observations");
  RandomStream stream(seed, {stream_tag::folds});
  const auto perm = shuffle(stream, n);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t t = 0; t < n; ++t) out[t % folds].push_back(perm[t]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

std::vector<double> lambda_grid(double top, std::size_t size, double ratio) {
  if (size == 0) throw std::invalid_argument("lambda_grid: empty grid");
  if (!(top >= 0.0) || !(ratio > 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("lambda_grid: invalid range");
  }
  std::vector<double> grid(size);
  grid[0] = top;
  for (std::size_t i = 1; i < size; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(size - 1);
    grid[i] = top * std::pow(ratio, t);
  }
  return grid;
}

Vector mean_point(const Dataset& data) { return data.covariates.colwise().mean().transpose(); }

CvReport select_lambda(const Dataset& data, std::size_t k, std::uint64_t seed,
                       const LambdaSelectOptions& opts) {
  data.validate();
  if (k == 0 || k > data.n()) throw std::invalid_argument("select_lambda: k out of range");
  const std::size_t positives = data.count_positive();
  if (positives == 0 || positives == data.n()) {
    throw std::invalid_argument("select_lambda: dataset has a single class");
  }
  const Vector center = mean_point(data);
  const std::span<const double> x(center.data(), static_cast<std::size_t>(center.size()));

  const NeighborIndex full_index(data.covariates);
  const LocalProblem anchor = make_local_problem(data, full_index.k_nearest(x, k), x, 0.0);
  double top = 0.0;
  try {
    top = lambda_max(anchor);
  } catch (const std::invalid_argument&) {
    throw NumericalError("select_lambda: the neighborhood of the mean point has a single class");
  }

  CvReport report;
  report.parameter = "lambda";
  report.grid = lambda_grid(top, opts.grid_size, opts.grid_ratio);

  const auto folds = make_folds(data.n(), opts.folds, seed);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto train_rows = complement(data.n(), folds[f]);
    const Dataset train = data.subset(train_rows);
    const std::size_t kf = std::min(k, train.n());
    const NeighborIndex index(train.covariates);
    const LocalProblem local = make_local_problem(train, index.k_nearest(x, kf), x, 0.0);
    const auto local_pos = static_cast<std::size_t>(
        std::count(local.labels.begin(), local.labels.end(), 1));
    if (local_pos == 0 || local_pos == local.k()) {
      report.dropped_folds.push_back(f);
      report.warnings.push_back("fold " + std::to_string(f) +
                                " dropped: single class near the mean point");
      continue;
    }
    const auto path = fit_path(local, report.grid, opts.solver);

    std::vector<double> row(report.grid.size());
    for (std::size_t g = 0; g < path.size(); ++g) {
      std::size_t wrong = 0;
      for (std::size_t i : folds[f]) {
        const double eta =
            path[g].intercept +
            (data.covariates.row(static_cast<Eigen::Index>(i)).transpose() - center)
                .dot(path[g].gradient);
        const int predicted = expit(eta) > 0.5 ? 1 : 0;
        wrong += predicted != data.labels[i];
      }
      row[g] = static_cast<double>(wrong) / static_cast<double>(folds[f].size());
    }
    report.fold_risks.push_back(std::move(row));
    report.retained_folds.push_back(f);
  }
  if (report.fold_risks.empty()) throw NumericalError("select_lambda: every fold was dropped");
  summarize(report);
  return report;
}

CvReport select_dimension(const Dataset& data, const SubspaceModel& basis, std::size_t folds,
                          const Classifier& classifier, std::uint64_t seed) {
  data.validate();
  if (basis.p() != data.p()) throw std::invalid_argument("select_dimension: dimension mismatch");
  const std::size_t candidates = std::max<std::size_t>(basis.nonzero_count(), 1);

  CvReport report;
  report.parameter = "dimension";
  for (std::size_t d = 1; d <= candidates; ++d) report.grid.push_back(static_cast<double>(d));

  const auto parts = make_folds(data.n(), folds, seed);
  std::vector<RowMatrix> projected;
  projected.reserve(candidates);
  for (std::size_t d = 1; d <= candidates; ++d) projected.push_back(project(data.covariates, basis, d));

  for (std::size_t f = 0; f < parts.size(); ++f) {
    const auto train_rows = complement(data.n(), parts[f]);
    Labels train_labels(train_rows.size()), test_labels(parts[f].size());
    for (std::size_t t = 0; t < train_rows.size(); ++t) train_labels[t] = data.labels[train_rows[t]];
    for (std::size_t t = 0; t < parts[f].size(); ++t) test_labels[t] = data.labels[parts[f][t]];

    std::vector<double> row;
    try {
      for (std::size_t c = 0; c < candidates; ++c) {
        const RowMatrix& z = projected[c];
        RowMatrix z_train(static_cast<Eigen::Index>(train_rows.size()), z.cols());
        RowMatrix z_test(static_cast<Eigen::Index>(parts[f].size()), z.cols());
        for (std::size_t t = 0; t < train_rows.size(); ++t) {
          z_train.row(static_cast<Eigen::Index>(t)) = z.row(static_cast<Eigen::Index>(train_rows[t]));
        }
        for (std::size_t t = 0; t < parts[f].size(); ++t) {
          z_test.row(static_cast<Eigen::Index>(t)) = z.row(static_cast<Eigen::Index>(parts[f][t]));
        }
        auto model = classifier.clone_untrained();
        model->train(z_train, train_labels);
        const auto predictions = model->predict_batch(z_test);
        row.push_back(misclassification_risk(labels_of(predictions), test_labels));
      }
    } catch (const std::exception& e) {
      report.dropped_folds.push_back(f);
      report.warnings.push_back("fold " + std::to_string(f) + " dropped: " + e.what());
      continue;
    }
    report.fold_risks.push_back(std::move(row));
    report.retained_folds.push_back(f);
  }
  if (report.fold_risks.empty()) throw NumericalError("select_dimension: every fold was dropped");
  summarize(report);
  return report;
}

}  // namespace nnlogit
