#include "nnlogit/dataio.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nnlogit/rng.hpp"

namespace nnlogit {

std::size_t Dataset::count_positive() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

void Dataset::validate() const {
  if (labels.size() != n()) throw DataError("dataset: label count does not match row count");
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("dataset: labels must be 0 or 1");
  }
  if (!covariates.allFinite()) throw DataError("dataset: non-finite covariate");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.covariates.resize(static_cast<Eigen::Index>(indices.size()), covariates.cols());
  out.labels.resize(indices.size());
  for (std::size_t t = 0; t < indices.size(); ++t) {
    out.covariates.row(static_cast<Eigen::Index>(t)) = covariates.row(static_cast<Eigen::Index>(indices[t]));
    out.labels[t] = labels[indices[t]];
  }
  out.feature_names = feature_names;
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_number(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::size_t resolve_index(int index, std::size_t width, const char* what) {
  const long resolved = index < 0 ? static_cast<long>(width) + index : index;
  if (resolved < 0 || resolved >= static_cast<long>(width)) {
    throw DataError(std::string(what) + " column out of range");
  }
  return static_cast<std::size_t>(resolved);
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

LoadResult load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  LoadResult result;
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  if (opts.has_header) {
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    ++line_no;
    header = split_line(line);
  }

  std::size_t width = header.size();
  std::size_t label_col = 0;
  std::vector<bool> dropped_col;
  std::vector<std::vector<double>> rows;
  Labels labels;
  std::optional<std::string> negative = opts.negative_label;

  auto configure = [&](std::size_t w) {
    width = w;
    dropped_col.assign(width, false);
    if (opts.label_name) {
      if (header.empty()) throw DataError("label column by name requires a header");
      const auto it = std::find(header.begin(), header.end(), *opts.label_name);
      if (it == header.end()) throw DataError("label column '" + *opts.label_name + "' not found");
      label_col = static_cast<std::size_t>(it - header.begin());
    } else {
      label_col = resolve_index(opts.label_index, width, "label");
    }
    for (const auto& name : opts.drop_columns) {
      std::size_t col = 0;
      const auto it = std::find(header.begin(), header.end(), name);
      if (it != header.end()) {
        col = static_cast<std::size_t>(it - header.begin());
      } else {
        int pos = 0;
        const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), pos);
        if (ec != std::errc() || ptr != name.data() + name.size()) {
          throw DataError("drop column '" + name + "' not found");
        }
        col = resolve_index(pos, width, "drop");
      }
      dropped_col[col] = true;
    }
    if (dropped_col[label_col]) throw DataError("label column is also dropped");
  };
  if (!header.empty()) configure(header.size());

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (width == 0) configure(cells.size());
    if (cells.size() != width) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(width) + " cells, found " + std::to_string(cells.size()));
    }
    bool missing = false;
    for (std::size_t c = 0; c < width; ++c) {
      if (dropped_col[c]) continue;
      if (std::find(opts.missing_tokens.begin(), opts.missing_tokens.end(), cells[c]) !=
          opts.missing_tokens.end()) {
        missing = true;
      }
    }
    if (missing) {
      ++result.dropped_rows;
      continue;
    }

    const std::string& tag = cells[label_col];
    int y = 0;
    if (tag == opts.positive_label) {
      y = 1;
    } else if (!negative) {
      negative = tag;
    } else if (tag != *negative) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": unknown label value '" +
                      tag + "'");
    }

    std::vector<double> values;
    values.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (c == label_col || dropped_col[c]) continue;
      double v = 0.0;
      if (!parse_number(cells[c], v)) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" +
                        cells[c] + "'");
      }
      values.push_back(v);
    }
    rows.push_back(std::move(values));
    labels.push_back(y);
  }

  if (rows.empty()) throw DataError(path.string() + ": no usable rows");
  if (result.dropped_rows > 0) {
    result.warnings.push_back("dropped " + std::to_string(result.dropped_rows) +
                              " row(s) with missing values");
  }

  auto& data = result.dataset;
  const std::size_t p = rows.front().size();
  if (p == 0) throw DataError(path.string() + ": no covariate columns");
  data.covariates.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      data.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  data.labels = std::move(labels);
  for (std::size_t c = 0; c < width; ++c) {
    if (c == label_col || dropped_col[c]) continue;
    data.feature_names.push_back(header.empty() ? "x" + std::to_string(data.feature_names.size() + 1)
                                                : header[c]);
  }
  return result;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t j = 0; j < data.p(); ++j) {
    out << (j < data.feature_names.size() ? data.feature_names[j] : "x" + std::to_string(j + 1))
        << ',';
  }
  out << "label\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < data.p(); ++j) {
      out << format_double(data.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
          << ',';
    }
    out << data.labels[i] << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

RowMatrix Scaling::apply(const RowMatrix& x) const {
  if (x.cols() != center.size()) throw std::invalid_argument("Scaling: dimension mismatch");
  return ((x.rowwise() - center.transpose()).array().rowwise() / scale.transpose().array()).matrix();
}

RowMatrix Scaling::invert(const RowMatrix& z) const {
  if (z.cols() != center.size()) throw std::invalid_argument("Scaling: dimension mismatch");
  return ((z.array().rowwise() * scale.transpose().array()).rowwise() +
          center.transpose().array())
      .matrix();
}

Dataset Scaling::apply(const Dataset& data) const {
  Dataset out = data;
  out.covariates = apply(data.covariates);
  return out;
}

Scaling fit_scaling(const RowMatrix& x) {
  if (x.rows() < 2) throw std::invalid_argument("standardize: need at least two rows");
  Scaling s;
  s.center = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  s.zero_variance.assign(static_cast<std::size_t>(x.cols()), false);
  const double denom = static_cast<double>(x.rows() - 1);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.center[j]).square().sum() / denom;
    if (var > 0.0) {
      s.scale[j] = std::sqrt(var);
    } else {
      s.scale[j] = 1.0;
      s.zero_variance[static_cast<std::size_t>(j)] = true;
    }
  }
  return s;
}

std::pair<Dataset, Scaling> standardize(const Dataset& data) {
  Scaling s = fit_scaling(data.covariates);
  return {s.apply(data), std::move(s)};
}

nlohmann::json to_json(const Scaling& scaling) {
  return {{"center", std::vector<double>(scaling.center.data(), scaling.center.data() + scaling.center.size())},
          {"scale", std::vector<double>(scaling.scale.data(), scaling.scale.data() + scaling.scale.size())},
          {"zero_variance", scaling.zero_variance}};
}

Scaling scaling_from_json(const nlohmann::json& j) {
  Scaling s;
  const auto c = j.at("center").get<std::vector<double>>();
  const auto sc = j.at("scale").get<std::vector<double>>();
  if (c.size() != sc.size()) throw DataError("scaling: center/scale length mismatch");
  s.center = Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
  s.scale = Eigen::Map<const Vector>(sc.data(), static_cast<Eigen::Index>(sc.size()));
  s.zero_variance = j.at("zero_variance").get<std::vector<bool>>();
  return s;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split: fraction must lie in (0, 1)");
  }
  const std::size_t n = data.n();
  const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(n)));
  RandomStream stream(seed, {stream_tag::split});
  auto perm = shuffle(stream, n);
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  auto parts = std::make_pair(data.subset(train), data.subset(test));
  for (const Dataset* part : {&parts.first, &parts.second}) {
    const std::size_t pos = part->count_positive();
    if (part->n() == 0 || pos == 0 || pos == part->n()) {
      throw DataError("split: a part is missing one of the classes");
    }
  }
  return parts;
}

nlohmann::json summary_json(const Dataset& data, std::size_t dropped_rows) {
  const std::size_t pos = data.count_positive();
  return {{"n", data.n()},
          {"p", data.p()},
          {"positives", pos},
          {"negatives", data.n() - pos},
          {"positive_fraction", data.n() ? static_cast<double>(pos) / static_cast<double>(data.n()) : 0.0},
          {"dropped_rows", dropped_rows}};
}

}  // namespace nnlogit
