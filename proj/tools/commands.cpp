#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "nnlogit/classify.hpp"
#include "nnlogit/dataio.hpp"
#include "nnlogit/experiments.hpp"
#include "nnlogit/model_select.hpp"
#include "nnlogit/synthetic.hpp"

namespace nnlogit::cli {

namespace {

using nlohmann::json;

struct CsvFlags {
  std::string label;
  int label_index = -1;
  std::string positive = "1";
  std::string negative;
  std::vector<std::string> drop;
  bool no_header = false;
};

void add_csv_flags(CLI::App* cmd, CsvFlags& f) {
  cmd->add_option("--label", f.label, "Label column name (default: last column)");
  cmd->add_option("--label-index", f.label_index, "Label column position, negative counts from the end");
  cmd->add_option("--positive", f.positive, "Label value of class 1")->capture_default_str();
  cmd->add_option("--negative", f.negative, "Label value of class 0 (default: the other value seen)");
  cmd->add_option("--drop", f.drop, "Columns to ignore, by name or position")->delimiter(',');
  cmd->add_flag("--no-header", f.no_header, "The file has no header row");
}

CsvOptions csv_options(const CsvFlags& f) {
  CsvOptions o;
  o.has_header = !f.no_header;
  if (!f.label.empty()) o.label_name = f.label;
  o.label_index = f.label_index;
  o.positive_label = f.positive;
  if (!f.negative.empty()) o.negative_label = f.negative;
  o.drop_columns = f.drop;
  return o;
}

Dataset load(const std::string& path, const CsvFlags& flags, std::ostream& err) {
  auto loaded = load_csv(path, csv_options(flags));
  for (const auto& w : loaded.warnings) err << "warning: " << path << ": " << w << '\n';
  return std::move(loaded.dataset);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << text;
  if (!f) throw DataError("cannot write " + path);
}

void emit(const json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    out << text;
  } else {
    write_text(path, text);
  }
}

json read_json(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

ReductionResult read_model(const std::string& path) {
  const json j = read_json(path);
  try {
    return reduction_from_json(j);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

Dataset on_model_scale(const Dataset& data, const ReductionResult& model) {
  if (data.p() != model.model.p()) {
    throw DataError("data has " + std::to_string(data.p()) + " covariates, model expects " +
                    std::to_string(model.model.p()));
  }
  return model.scaling ? model.scaling->apply(data) : data;
}

std::optional<double> parse_lambda(const std::string& text) {
  if (text == "auto") return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(v >= 0.0)) {
    throw std::invalid_argument("--lambda must be 'auto' or a nonnegative number");
  }
  return v;
}

// Subcommand state, kept alive for the duration of one run().

struct SimulateArgs {
  int example = 1;
  std::size_t n = 0;
  std::size_t p = 8;
  std::uint64_t seed = 0;
  std::string out;
  std::string oracle_out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream&) {
  const SyntheticSpec spec{a.example, a.n, a.p, a.seed};
  const auto sim = generate(spec);
  write_csv(sim.data, a.out);
  json oracle = to_json(sim.oracle, spec);
  oracle["schema_version"] = kSchemaVersion;
  oracle["kind"] = "oracle";
  write_text(a.oracle_out.empty() ? a.out + ".oracle.json" : a.oracle_out, oracle.dump(2) + "\n");
  return kOk;
}

struct SplitArgs {
  std::string data;
  CsvFlags csv;
  double fraction = 0.7;
  std::uint64_t seed = 0;
  std::string train_out;
  std::string test_out;
  std::string out;
};

int cmd_split(const SplitArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset data = load(a.data, a.csv, err);
  const auto [train, test] = split(data, a.fraction, a.seed);
  write_csv(train, a.train_out);
  write_csv(test, a.test_out);
  emit({{"schema_version", kSchemaVersion},
        {"kind", "split"},
        {"seed", a.seed},
        {"train_fraction", a.fraction},
        {"train", summary_json(train)},
        {"test", summary_json(test)}},
       a.out, out);
  return kOk;
}

struct SummaryArgs {
  std::string data;
  CsvFlags csv;
  std::string out;
};

int cmd_summary(const SummaryArgs& a, std::ostream& out) {
  const auto loaded = load_csv(a.data, csv_options(a.csv));
  json j = summary_json(loaded.dataset, loaded.dropped_rows);
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "summary";
  j["warnings"] = loaded.warnings;
  emit(j, a.out, out);
  return kOk;
}

struct ReduceArgs {
  std::string data;
  CsvFlags csv;
  std::size_t k = 0;
  std::size_t m = 0;
  std::string lambda = "auto";
  std::size_t lambda_folds = 10;
  std::size_t lambda_grid = 100;
  bool standardize = false;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_reduce(const ReduceArgs& a, std::ostream& out, std::ostream& err) {
  Dataset data = load(a.data, a.csv, err);
  std::optional<Scaling> scaling;
  if (a.standardize) {
    auto [z, s] = nnlogit::standardize(data);
    data = std::move(z);
    scaling = std::move(s);
  }
  ReductionConfig config;
  if (a.k > 0) config.k = a.k;
  if (a.m > 0) config.m = a.m;
  config.lambda = parse_lambda(a.lambda);
  config.lambda_cv.folds = a.lambda_folds;
  config.lambda_cv.grid_size = a.lambda_grid;
  config.seed = a.seed;
  auto result = reduce(data, config);
  result.scaling = std::move(scaling);
  if (result.skipped_total() > 0) {
    err << "warning: " << result.skipped_total() << " of " << result.m << " query points skipped\n";
  }
  emit(to_json(result), a.out, out);
  return kOk;
}

struct SelectDimArgs {
  std::string data;
  std::string model;
  CsvFlags csv;
  std::size_t folds = 5;
  std::size_t k_vote = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::string model_out;
};

int cmd_select_dim(const SelectDimArgs& a, std::ostream& out, std::ostream& err) {
  auto model = read_model(a.model);
  const Dataset data = on_model_scale(load(a.data, a.csv, err), model);
  const KnnClassifier knn(a.k_vote, a.seed);
  const CvReport report = select_dimension(data, model.model, a.folds, knn, a.seed);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  json j = to_json(report);
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "dimension_cv";
  j["seed"] = a.seed;
  j["k_vote"] = a.k_vote;
  emit(j, a.out, out);
  if (!a.model_out.empty()) {
    model.model.d = static_cast<std::size_t>(report.chosen);
    write_text(a.model_out, to_json(model).dump(2) + "\n");
  }
  return kOk;
}

struct EvaluateArgs {
  std::string train;
  std::string test;
  std::string model;
  CsvFlags csv;
  std::size_t d = 0;
  std::size_t k_vote = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = read_model(a.model);
  const std::size_t d = a.d > 0 ? a.d : model.model.d;
  if (d == 0) throw std::invalid_argument("--d is required when the model has no chosen dimension");
  const Dataset train = on_model_scale(load(a.train, a.csv, err), model);
  const Dataset test = on_model_scale(load(a.test, a.csv, err), model);
  json j = to_json(evaluate_projection(train, test, model.model, d, a.k_vote, a.seed));
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "evaluation";
  j["seed"] = a.seed;
  emit(j, a.out, out);
  return kOk;
}

struct FiguresArgs {
  FigureConfig config;
  bool no_select_dim = false;
  std::string out;
  std::string csv;
};

int cmd_bench_figures(FiguresArgs a, std::ostream& out) {
  a.config.select_dimension = !a.no_select_dim;
  const auto report = run_figures(a.config);
  emit(to_json(report), a.out, out);
  if (!a.csv.empty()) write_text(a.csv, to_csv(report));
  return kOk;
}

struct RateArgs {
  RateConfig config;
  std::string out;
  std::string csv;
};

int cmd_bench_rate(const RateArgs& a, std::ostream& out) {
  const auto report = run_rate(a.config);
  emit(to_json(report), a.out, out);
  if (!a.csv.empty()) write_text(a.csv, to_csv(report));
  return kOk;
}

}  // namespace

void apply_thread_env(std::ostream& err) {
  const char* value = std::getenv("NNLOGIT_NUM_THREADS");
  if (value == nullptr || *value == '\0') return;
  int threads = 0;
  const std::string_view text(value);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), threads);
  if (ec != std::errc() || ptr != text.data() + text.size() || threads < 1) {
    err << "warning: ignoring NNLOGIT_NUM_THREADS=" << text << '\n';
    return;
  }
  omp_set_num_threads(threads);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient-based dimension reduction for binary classification"};
  app.name("nnlogit");
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset and its oracle sidecar");
  simulate->add_option("--example", sim.example, "Example 1-4")->required()->check(CLI::Range(1, 4));
  simulate->add_option("--n", sim.n, "Sample size")->required();
  simulate->add_option("--p", sim.p, "Number of covariates")->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--out", sim.out, "CSV path")->required();
  simulate->add_option("--oracle-out", sim.oracle_out, "Sidecar path (default: <out>.oracle.json)");

  SplitArgs spl;
  auto* split_cmd = app.add_subcommand("split", "Random train/test partition of a CSV");
  split_cmd->add_option("--data", spl.data)->required();
  add_csv_flags(split_cmd, spl.csv);
  split_cmd->add_option("--train-fraction", spl.fraction)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--seed", spl.seed)->capture_default_str();
  split_cmd->add_option("--train-out", spl.train_out)->required();
  split_cmd->add_option("--test-out", spl.test_out)->required();
  split_cmd->add_option("--out", spl.out, "Summary JSON path (default: stdout)");

  SummaryArgs sum;
  auto* summary = app.add_subcommand("summary", "Shape and class balance of a CSV");
  summary->add_option("--data", sum.data)->required();
  add_csv_flags(summary, sum.csv);
  summary->add_option("--out", sum.out);

  ReduceArgs red;
  auto* reduce_cmd = app.add_subcommand("reduce", "Estimate the gradient subspace and write a model");
  reduce_cmd->add_option("--data", red.data)->required();
  add_csv_flags(reduce_cmd, red.csv);
  reduce_cmd->add_option("--k", red.k, "Neighbors per local fit (default: floor(sqrt(n)))");
  reduce_cmd->add_option("--m", red.m, "Query points (default: ceil(n/4))");
  reduce_cmd->add_option("--lambda", red.lambda, "Penalty, or 'auto' for cross-validation")->capture_default_str();
  reduce_cmd->add_option("--lambda-folds", red.lambda_folds)->capture_default_str();
  reduce_cmd->add_option("--lambda-grid", red.lambda_grid)->capture_default_str();
  reduce_cmd->add_flag("--standardize", red.standardize, "Standardize covariates; the model stores the scaling");
  reduce_cmd->add_option("--seed", red.seed)->capture_default_str();
  reduce_cmd->add_option("--out", red.out, "Model JSON path (default: stdout)");

  SelectDimArgs sel;
  auto* select_cmd = app.add_subcommand("select-dim", "Choose the subspace dimension by kNN cross-validation");
  select_cmd->add_option("--data", sel.data)->required();
  select_cmd->add_option("--model", sel.model)->required();
  add_csv_flags(select_cmd, sel.csv);
  select_cmd->add_option("--folds", sel.folds)->capture_default_str();
  select_cmd->add_option("--k-vote", sel.k_vote)->capture_default_str();
  select_cmd->add_option("--seed", sel.seed)->capture_default_str();
  select_cmd->add_option("--out", sel.out, "Report JSON path (default: stdout)");
  select_cmd->add_option("--model-out", sel.model_out, "Write the model with the chosen d");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "kNN risk and AUC on projected covariates");
  evaluate->add_option("--train", ev.train)->required();
  evaluate->add_option("--test", ev.test)->required();
  evaluate->add_option("--model", ev.model)->required();
  add_csv_flags(evaluate, ev.csv);
  evaluate->add_option("--d", ev.d, "Projection dimension (default: the model's chosen d)");
  evaluate->add_option("--k-vote", ev.k_vote)->capture_default_str();
  evaluate->add_option("--seed", ev.seed)->capture_default_str();
  evaluate->add_option("--out", ev.out);

  FiguresArgs fig;
  auto* figures = app.add_subcommand("bench-figures", "Subspace distance and risk over replications");
  figures->add_option("--example", fig.config.example)->capture_default_str()->check(CLI::Range(1, 4));
  figures->add_option("--n-grid", fig.config.n_grid)->delimiter(',')->capture_default_str();
  figures->add_option("--p", fig.config.p)->capture_default_str();
  figures->add_option("--reps", fig.config.reps)->capture_default_str();
  figures->add_option("--seed", fig.config.seed)->capture_default_str();
  figures->add_option("--k-vote", fig.config.k_vote)->capture_default_str();
  figures->add_option("--dim-folds", fig.config.dim_folds)->capture_default_str();
  figures->add_option("--test-size", fig.config.test_size, "Test rows per replication (default: n)");
  figures->add_option("--methods", fig.config.methods)->delimiter(',')->capture_default_str();
  figures->add_flag("--no-select-dim", fig.no_select_dim, "Skip the CV choice of d");
  figures->add_option("--out", fig.out);
  figures->add_option("--csv", fig.csv, "Also write the records as CSV");

  RateArgs rate;
  auto* rate_cmd = app.add_subcommand("bench-rate", "Gradient error slope against n on Example 1");
  rate_cmd->add_option("--p", rate.config.p)->capture_default_str();
  rate_cmd->add_option("--n-grid", rate.config.n_grid)->delimiter(',')->capture_default_str();
  rate_cmd->add_option("--reps", rate.config.reps)->capture_default_str();
  rate_cmd->add_option("--seed", rate.config.seed)->capture_default_str();
  rate_cmd->add_option("--lambda", rate.config.lambda)->capture_default_str();
  rate_cmd->add_option("--out", rate.out);
  rate_cmd->add_option("--csv", rate.csv, "Also write the points as CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*split_cmd) return cmd_split(spl, out, err);
    if (*summary) return cmd_summary(sum, out);
    if (*reduce_cmd) return cmd_reduce(red, out, err);
    if (*select_cmd) return cmd_select_dim(sel, out, err);
    if (*evaluate) return cmd_evaluate(ev, out, err);
    if (*figures) return cmd_bench_figures(fig, out);
    if (*rate_cmd) return cmd_bench_rate(rate, out);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  }
  return kUsage;
}

}  // namespace nnlogit::cli
