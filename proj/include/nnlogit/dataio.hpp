#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nnlogit/types.hpp"

namespace nnlogit {

/// Comma-separated, '.' decimal point, optional header row.
struct CsvOptions {
  bool has_header = true;
  /// Label column by header name; takes precedence over label_index.
  std::optional<std::string> label_name;
  /// Label column by position; negative counts from the end (-1 = last).
  int label_index = -1;
  std::string positive_label = "1";
  /// When unset, the first non-positive value seen becomes the negative
  /// class and any third value is an error.
  std::optional<std::string> negative_label;
  /// Columns ignored entirely (names need a header; otherwise positions).
  std::vector<std::string> drop_columns;
  std::vector<std::string> missing_tokens = {"", "NA", "?", "nan", "NaN"};
};

struct LoadResult {
  Dataset dataset;
  std::size_t dropped_rows = 0;
  std::vector<std::string> warnings;
};

/// Throws DataError on an unreadable file, an unparseable cell, an unknown
/// label value or when no usable row remains.
LoadResult load_csv(const std::filesystem::path& path, const CsvOptions& opts = {});

/// Header x1..xp (or feature names) then "label"; values printed with
/// round-trip precision.
void write_csv(const Dataset& data, const std::filesystem::path& path);

/// Per-column centering and scaling. Zero-variance columns are centered only.
struct Scaling {
  Vector center;
  Vector scale;
  std::vector<bool> zero_variance;

  RowMatrix apply(const RowMatrix& x) const;
  RowMatrix invert(const RowMatrix& z) const;
  Dataset apply(const Dataset& data) const;
};

Scaling fit_scaling(const RowMatrix& x);

/// Centers each column and scales it to unit sample standard deviation.
std::pair<Dataset, Scaling> standardize(const Dataset& data);

nlohmann::json to_json(const Scaling& scaling);
Scaling scaling_from_json(const nlohmann::json& j);

/// Random partition with round(fraction * n) training rows. Rows keep their
/// original order inside each part. Throws DataError if a part lacks a class.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, std::uint64_t seed);

/// n, p, class balance and dropped rows.
nlohmann::json summary_json(const Dataset& data, std::size_t dropped_rows = 0);

}  // namespace nnlogit
