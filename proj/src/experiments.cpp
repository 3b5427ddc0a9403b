#include "nnlogit/experiments.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nnlogit/classify.hpp"
#include "nnlogit/neighbors.hpp"
#include "nnlogit/rng.hpp"
#include "nnlogit/synthetic.hpp"

namespace nnlogit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

// Runs body(job) for every job in parallel and rethrows the first failure
// (in job order) afterwards.
template <class Body>
void parallel_jobs(std::size_t count, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t j = 0; j < total; ++j) {
    try {
      body(static_cast<std::size_t>(j));
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::vector<std::uint64_t> path) {
  return RandomStream(seed, std::move(path)).next_u64();
}

std::size_t ReductionResult::skipped_total() const {
  std::size_t total = 0;
  for (const auto& [reason, count] : skipped) total += count;
  return total;
}

ReductionResult reduce(const Dataset& data, const ReductionConfig& config) {
  data.validate();
  ReductionResult r;
  r.seed = config.seed;
  r.feature_names = data.feature_names;
  r.k = config.k.value_or(default_neighbor_count(data.n()));
  r.m = config.m.value_or(default_query_count(data.n()));
  if (r.k == 0 || r.k > data.n()) throw std::invalid_argument("reduce: k out of range");
  if (r.m == 0 || r.m > data.n()) throw std::invalid_argument("reduce: m out of range");

  if (config.lambda) {
    if (!(*config.lambda >= 0.0)) throw std::invalid_argument("reduce: lambda must be nonnegative");
    r.lambda = *config.lambda;
  } else {
    r.lambda_report = select_lambda(data, r.k, config.seed, config.lambda_cv);
    r.lambda = r.lambda_report->chosen;
  }

  const NeighborIndex index(data.covariates);
  const auto estimates = estimate_field(data, index, r.m, r.k, r.lambda, config.seed, config.field);
  for (const auto& e : estimates) {
    if (e.is_skipped()) ++r.skipped[std::string(to_string(e.skipped))];
    if (!e.converged) ++r.nonconverged;
  }

  AggregatedMatrix m;
  try {
    m = aggregate_M(estimates);
  } catch (const NumericalError&) {
    throw NumericalError("all estimates skipped or zero");
  }
  if (!(m.matrix.trace() > 0.0)) throw NumericalError("all estimates skipped or zero");
  r.used_points = m.used_points;
  r.model = eigen_basis(m);
  return r;
}

nlohmann::json to_json(const ReductionResult& r) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "subspace_model";
  j["model"] = to_json(r.model);
  j["lambda"] = r.lambda;
  j["k"] = r.k;
  j["m"] = r.m;
  j["seed"] = r.seed;
  j["used_points"] = r.used_points;
  j["skipped_points"] = r.skipped_total();
  j["skipped_by_reason"] = r.skipped;
  j["nonconverged_fits"] = r.nonconverged;
  j["feature_names"] = r.feature_names;
  j["scaling"] = r.scaling ? to_json(*r.scaling) : nlohmann::json(nullptr);
  j["lambda_cv"] = r.lambda_report ? to_json(*r.lambda_report) : nlohmann::json(nullptr);
  return j;
}

ReductionResult reduction_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kSchemaVersion || j.value("kind", "") != "subspace_model") {
    throw DataError("model file: unsupported schema");
  }
  ReductionResult r;
  r.model = subspace_model_from_json(j.at("model"));
  r.lambda = j.at("lambda").get<double>();
  r.k = j.at("k").get<std::size_t>();
  r.m = j.at("m").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.used_points = j.at("used_points").get<std::size_t>();
  r.skipped = j.at("skipped_by_reason").get<std::map<std::string, std::size_t>>();
  r.nonconverged = j.at("nonconverged_fits").get<std::size_t>();
  r.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  if (!j.at("scaling").is_null()) r.scaling = scaling_from_json(j.at("scaling"));
  if (!j.at("lambda_cv").is_null()) r.lambda_report = cv_report_from_json(j.at("lambda_cv"));
  return r;
}

EvaluationMetrics evaluate_basis(const Dataset& train, const Dataset& test, const Matrix& basis,
                                 std::size_t k_vote, std::uint64_t seed) {
  const bool raw = basis.size() == 0;
  const RowMatrix z_train = raw ? train.covariates : project_onto(train.covariates, basis);
  const RowMatrix z_test = raw ? test.covariates : project_onto(test.covariates, basis);
  KnnClassifier knn(k_vote, seed);
  knn.train(z_train, train.labels);
  const auto predictions = knn.predict_batch(z_test);

  EvaluationMetrics m;
  m.d = static_cast<std::size_t>(z_train.cols());
  m.k_vote = k_vote;
  m.n_test = test.n();
  m.misclassification = misclassification_risk(labels_of(predictions), test.labels);
  const std::size_t pos = test.count_positive();
  m.auc = (pos == 0 || pos == test.n()) ? std::numeric_limits<double>::quiet_NaN()
                                        : roc_auc(scores_of(predictions), test.labels);
  return m;
}

EvaluationMetrics evaluate_projection(const Dataset& train, const Dataset& test,
                                      const SubspaceModel& model, std::size_t d,
                                      std::size_t k_vote, std::uint64_t seed) {
  if (train.p() != model.p() || test.p() != model.p()) {
    throw std::invalid_argument("evaluate: data dimension does not match the model");
  }
  if (d == 0 || d > model.p()) throw std::out_of_range("evaluate: d out of range");
  // d == p uses the identity projector, i.e. the raw covariates.
  return evaluate_basis(train, test, d == model.p() ? Matrix() : model.leading(d), k_vote, seed);
}

nlohmann::json to_json(const EvaluationMetrics& m) {
  return {{"d", m.d},
          {"k_vote", m.k_vote},
          {"n_test", m.n_test},
          {"misclassification", m.misclassification},
          {"auc", std::isnan(m.auc) ? nlohmann::json(nullptr) : nlohmann::json(m.auc)}};
}

// ---------------------------------------------------------------------------

FigureReport run_figures(const FigureConfig& config) {
  if (config.reps == 0 || config.n_grid.empty()) {
    throw std::invalid_argument("figures: need at least one n and one replication");
  }
  const std::size_t true_d = true_dimension(config.example);
  for (const auto& method : config.methods) {
    if (method != "llo_penalized" && method != "llo_unpenalized" && method != "oracle" &&
        method != "full") {
      throw std::invalid_argument("figures: unknown method " + method);
    }
  }

  const std::size_t per_rep = config.methods.size();
  const std::size_t jobs = config.n_grid.size() * config.reps;
  FigureReport report;
  report.config = config;
  report.records.resize(jobs * per_rep);

  parallel_jobs(jobs, [&](std::size_t job) {
    const std::size_t n = config.n_grid[job / config.reps];
    const std::size_t rep = job % config.reps;
    const std::uint64_t rep_seed = derive_seed(config.seed, {stream_tag::replication, n, rep});
    const auto train = generate({config.example, n, config.p, rep_seed});
    const std::size_t n_test = config.test_size ? config.test_size : n;
    const auto test = generate(
        {config.example, n_test, config.p, derive_seed(config.seed, {stream_tag::test_set, n, rep})});

    for (std::size_t t = 0; t < per_rep; ++t) {
      const auto start = Clock::now();
      FigureRecord rec;
      rec.n = n;
      rec.rep = rep;
      rec.method = config.methods[t];
      if (rec.method == "oracle" || rec.method == "full") {
        const bool oracle = rec.method == "oracle";
        const auto m = evaluate_basis(train.data, test.data,
                                      oracle ? train.oracle.basis : Matrix(), config.k_vote, rep_seed);
        if (oracle) rec.distance = 0.0;
        rec.risk_true_d = m.misclassification;
        rec.auc_true_d = m.auc;
      } else {
        ReductionConfig rc;
        rc.seed = rep_seed;
        if (rec.method == "llo_unpenalized") rc.lambda = 0.0;
        const auto r = reduce(train.data, rc);
        rec.lambda = r.lambda;
        rec.distance = subspace_distance(r.model.leading(true_d), train.oracle.basis);
        const auto m = evaluate_projection(train.data, test.data, r.model, true_d, config.k_vote, rep_seed);
        rec.risk_true_d = m.misclassification;
        rec.auc_true_d = m.auc;
        if (config.select_dimension) {
          const KnnClassifier knn(config.k_vote, rep_seed);
          const auto cv = select_dimension(train.data, r.model, config.dim_folds, knn, rep_seed);
          rec.chosen_d = static_cast<std::size_t>(cv.chosen);
          rec.risk_cv_d = evaluate_projection(train.data, test.data, r.model, *rec.chosen_d,
                                              config.k_vote, rep_seed)
                              .misclassification;
        }
      }
      rec.wall_seconds = seconds_since(start);
      report.records[job * per_rep + t] = std::move(rec);
    }
  });
  return report;
}

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) /
                            static_cast<double>(values.size()));
  }
  return a;
}

namespace {

std::optional<double> record_field(const FigureRecord& r, const std::string& field) {
  if (field == "distance") return r.distance;
  if (field == "risk_true_d") return r.risk_true_d;
  if (field == "auc_true_d") return std::isnan(r.auc_true_d) ? std::nullopt : std::optional(r.auc_true_d);
  if (field == "risk_cv_d") return r.risk_cv_d;
  if (field == "chosen_d") {
    return r.chosen_d ? std::optional(static_cast<double>(*r.chosen_d)) : std::nullopt;
  }
  if (field == "lambda") return r.lambda;
  throw std::invalid_argument("unknown record field " + field);
}

const std::vector<std::string> kAggregateFields = {"distance", "risk_true_d", "auc_true_d",
                                                   "risk_cv_d", "chosen_d", "lambda"};

nlohmann::json aggregate_json(const Aggregate& a) {
  return {{"mean", a.mean}, {"std_error", a.std_error}, {"count", a.count}};
}

}  // namespace

Aggregate figure_aggregate(const FigureReport& report, std::size_t n, const std::string& method,
                           const std::string& field) {
  std::vector<double> values;
  for (const auto& r : report.records) {
    if (r.n != n || r.method != method) continue;
    if (const auto v = record_field(r, field)) values.push_back(*v);
  }
  return aggregate(values);
}

nlohmann::json to_json(const FigureReport& report) {
  const auto& c = report.config;
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "figure_report";
  j["config"] = {{"example", c.example},   {"n_grid", c.n_grid},       {"p", c.p},
                 {"reps", c.reps},         {"seed", c.seed},           {"k_vote", c.k_vote},
                 {"dim_folds", c.dim_folds}, {"select_dimension", c.select_dimension},
                 {"test_size", c.test_size}, {"methods", c.methods}};
  auto records = nlohmann::json::array();
  for (const auto& r : report.records) {
    records.push_back({{"n", r.n},
                       {"rep", r.rep},
                       {"method", r.method},
                       {"distance", optional_json(r.distance)},
                       {"risk_true_d", r.risk_true_d},
                       {"auc_true_d", std::isnan(r.auc_true_d) ? nlohmann::json(nullptr)
                                                               : nlohmann::json(r.auc_true_d)},
                       {"lambda", optional_json(r.lambda)},
                       {"risk_cv_d", optional_json(r.risk_cv_d)},
                       {"chosen_d", optional_json(r.chosen_d)},
                       {"wall_seconds", r.wall_seconds}});
  }
  j["records"] = records;
  auto aggregates = nlohmann::json::array();
  for (std::size_t n : c.n_grid) {
    for (const auto& method : c.methods) {
      nlohmann::json a = {{"n", n}, {"method", method}};
      for (const auto& field : kAggregateFields) {
        const auto agg = figure_aggregate(report, n, method, field);
        if (agg.count > 0) a[field] = aggregate_json(agg);
      }
      aggregates.push_back(a);
    }
  }
  j["aggregates"] = aggregates;
  return j;
}

std::string to_csv(const FigureReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "n,rep,method,distance,risk_true_d,auc_true_d,lambda,risk_cv_d,chosen_d,wall_seconds\n";
  auto opt = [&](const auto& v) {
    if (v) out << *v;
    out << ',';
  };
  for (const auto& r : report.records) {
    out << r.n << ',' << r.rep << ',' << r.method << ',';
    opt(r.distance);
    out << r.risk_true_d << ',';
    if (!std::isnan(r.auc_true_d)) out << r.auc_true_d;
    out << ',';
    opt(r.lambda);
    opt(r.risk_cv_d);
    opt(r.chosen_d);
    out << r.wall_seconds << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

std::size_t rate_neighbor_count(std::size_t n, std::size_t p) {
  const double exponent = 4.0 / (static_cast<double>(p) + 4.0);
  const auto k = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), exponent)));
  return std::min(std::max<std::size_t>(k, 1), n);
}

RateReport run_rate(const RateConfig& config) {
  if (config.reps == 0 || config.n_grid.empty()) {
    throw std::invalid_argument("rate: need at least one n and one replication");
  }
  const auto start = Clock::now();
  RateReport report;
  report.config = config;
  report.theory_slope = -1.0 / (static_cast<double>(config.p) + 4.0);

  const std::size_t jobs = config.n_grid.size() * config.reps;
  std::vector<std::optional<double>> errors(jobs);
  parallel_jobs(jobs, [&](std::size_t job) {
    const std::size_t n = config.n_grid[job / config.reps];
    const std::size_t rep = job % config.reps;
    const auto sim = generate({1, n, config.p, derive_seed(config.seed, {stream_tag::replication, n, rep})});
    const NeighborIndex index(sim.data.covariates);
    const std::vector<double> origin(config.p, 0.0);
    const auto est = estimate_at(sim.data, index, origin, rate_neighbor_count(n, config.p), config.lambda);
    if (!est.is_skipped()) errors[job] = (est.gradient - *sim.oracle.logit_gradient).norm();
  });

  std::vector<double> log_n, log_err;
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    RatePoint point;
    point.n = config.n_grid[g];
    point.k = rate_neighbor_count(point.n, config.p);
    std::vector<double> values;
    for (std::size_t rep = 0; rep < config.reps; ++rep) {
      if (const auto& e = errors[g * config.reps + rep]) {
        values.push_back(*e);
      } else {
        ++point.skipped;
      }
    }
    const auto agg = aggregate(values);
    point.used = agg.count;
    point.mean_error = agg.mean;
    point.std_error = agg.std_error;
    if (point.used > 0 && point.mean_error > 0.0) {
      log_n.push_back(std::log(static_cast<double>(point.n)));
      log_err.push_back(std::log(point.mean_error));
    }
    report.points.push_back(point);
  }

  if (log_n.size() >= 2) {
    const Eigen::Map<const Vector> x(log_n.data(), static_cast<Eigen::Index>(log_n.size()));
    const Eigen::Map<const Vector> y(log_err.data(), static_cast<Eigen::Index>(log_err.size()));
    const double xm = x.mean(), ym = y.mean();
    const double sxx = (x.array() - xm).square().sum();
    report.slope = ((x.array() - xm) * (y.array() - ym)).sum() / sxx;
    report.intercept = ym - report.slope * xm;
  } else {
    report.slope = std::numeric_limits<double>::quiet_NaN();
    report.intercept = std::numeric_limits<double>::quiet_NaN();
  }
  report.wall_seconds = seconds_since(start);
  return report;
}

nlohmann::json to_json(const RateReport& report) {
  const auto& c = report.config;
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "rate_report";
  j["config"] = {{"p", c.p}, {"n_grid", c.n_grid}, {"reps", c.reps}, {"seed", c.seed}, {"lambda", c.lambda}};
  auto points = nlohmann::json::array();
  for (const auto& pt : report.points) {
    points.push_back({{"n", pt.n},
                      {"k", pt.k},
                      {"mean_error", pt.mean_error},
                      {"std_error", pt.std_error},
                      {"used", pt.used},
                      {"skipped", pt.skipped}});
  }
  j["points"] = points;
  j["slope"] = std::isnan(report.slope) ? nlohmann::json(nullptr) : nlohmann::json(report.slope);
  j["intercept"] =
      std::isnan(report.intercept) ? nlohmann::json(nullptr) : nlohmann::json(report.intercept);
  j["theory_slope"] = report.theory_slope;
  j["wall_seconds"] = report.wall_seconds;
  return j;
}

std::string to_csv(const RateReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "n,k,mean_error,std_error,used,skipped\n";
  for (const auto& pt : report.points) {
    out << pt.n << ',' << pt.k << ',' << pt.mean_error << ',' << pt.std_error << ',' << pt.used
        << ',' << pt.skipped << '\n';
  }
  return out.str();
}

nlohmann::json strip_timing(nlohmann::json j) {
  if (j.is_object()) {
    j.erase("wall_seconds");
    for (auto& [key, value] : j.items()) value = strip_timing(value);
  } else if (j.is_array()) {
    for (auto& value : j) value = strip_timing(value);
  }
  return j;
}

}  // namespace nnlogit
