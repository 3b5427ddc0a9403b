#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "nnlogit/dataio.hpp"
#include "nnlogit/rng.hpp"

using namespace nnlogit;
namespace fs = std::filesystem;

namespace {

fs::path scratch_file(const std::string& name, const std::string& contents) {
  const fs::path dir = fs::temp_directory_path() / "nnlogit_test_dataio";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream(path, std::ios::binary) << contents;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Dataset random_dataset(std::size_t n, std::size_t p, std::uint64_t seed) {
  RandomStream s(seed);
  Dataset d;
  d.covariates.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      d.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 3.0 * s.gaussian() + static_cast<double>(j);
    }
    d.labels.push_back(i % 3 == 0 ? 1 : 0);
  }
  for (std::size_t j = 0; j < p; ++j) d.feature_names.push_back("f" + std::to_string(j));
  return d;
}

}  // namespace

TEST_CASE("labels mapped by name with a header") {
  const auto path = scratch_file("bm.csv", "id,diagnosis,r,t\n1,B,1.5,2\n2,M,3,4e-1\n3,B,-1,0\n");
  CsvOptions o;
  o.label_name = "diagnosis";
  o.positive_label = "M";
  o.drop_columns = {"id"};
  const auto r = load_csv(path, o);
  CHECK(r.dataset.labels == Labels{0, 1, 0});
  CHECK(r.dataset.n() == 3);
  CHECK(r.dataset.p() == 2);
  CHECK(r.dataset.feature_names == std::vector<std::string>{"r", "t"});
  CHECK(r.dataset.covariates(1, 1) == 0.4);
  CHECK(r.dropped_rows == 0);
}

TEST_CASE("a row with a missing cell is dropped with a warning") {
  const auto path = scratch_file("missing.csv", "a,b,label\n1,2,1\n3,,0\n5,6,0\n7,NA,1\n");
  const auto r = load_csv(path);
  CHECK(r.dataset.n() == 2);
  CHECK(r.dropped_rows == 2);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("load errors") {
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);
  CHECK_THROWS_AS(load_csv(scratch_file("bad_cell.csv", "a,label\nx1,1\n")), DataError);
  CHECK_THROWS_AS(load_csv(scratch_file("three.csv", "a,label\n1,1\n2,0\n3,2\n")), DataError);
  CHECK_THROWS_AS(load_csv(scratch_file("empty_rows.csv", "a,label\n,1\n?,0\n")), DataError);
  CHECK_THROWS_AS(load_csv(scratch_file("ragged.csv", "a,b,label\n1,2,1\n3,0\n")), DataError);
  CsvOptions o;
  o.label_name = "nope";
  CHECK_THROWS_AS(load_csv(scratch_file("ok.csv", "a,label\n1,1\n2,0\n"), o), DataError);
  o = {};
  o.negative_label = "0";
  CHECK_THROWS_AS(load_csv(scratch_file("unknown.csv", "a,label\n1,1\n2,7\n"), o), DataError);
}

TEST_CASE("headerless file with label by position") {
  CsvOptions o;
  o.has_header = false;
  o.label_index = 0;
  o.positive_label = "yes";
  const auto r = load_csv(scratch_file("nohead.csv", "yes,1,2\nno,3,4\n"), o);
  CHECK(r.dataset.labels == Labels{1, 0});
  CHECK(r.dataset.covariates(1, 0) == 3.0);
}

TEST_CASE("write then load round-trips exactly") {
  const auto d = random_dataset(40, 3, 1);
  const fs::path path = fs::temp_directory_path() / "nnlogit_test_dataio" / "roundtrip.csv";
  write_csv(d, path);
  const auto back = load_csv(path).dataset;
  CHECK(back.covariates == d.covariates);
  CHECK(back.labels == d.labels);
  CHECK(back.feature_names == d.feature_names);
  const std::string first = slurp(path);
  write_csv(d, path);
  CHECK(slurp(path) == first);
}

TEST_CASE("standardize") {
  auto d = random_dataset(200, 3, 2);
  d.covariates.col(2).setConstant(4.0);
  const auto [z, s] = standardize(d);
  CHECK(z.covariates.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  const double sd = std::sqrt((z.covariates.col(0).array() - z.covariates.col(0).mean()).square().sum() / 199.0);
  CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(z.covariates.col(2).isZero(0.0));
  CHECK(s.zero_variance == std::vector<bool>{false, false, true});

  const auto [zz, s2] = standardize(z);
  CHECK((zz.covariates - z.covariates).cwiseAbs().maxCoeff() < 1e-12);

  const auto undone = s.invert(z.covariates);
  CHECK((undone - d.covariates).cwiseAbs().maxCoeff() < 1e-10);

  const auto back = scaling_from_json(nlohmann::json::parse(to_json(s).dump()));
  CHECK(back.center == s.center);
  CHECK(back.scale == s.scale);
  CHECK(back.zero_variance == s.zero_variance);
  CHECK(back.apply(d).covariates == z.covariates);
}

TEST_CASE("split") {
  auto d = random_dataset(10, 2, 3);
  const auto [train, test] = split(d, 0.7, 5);
  CHECK(train.n() == 7);
  CHECK(test.n() == 3);

  const auto big = random_dataset(300, 2, 4);
  const auto [a, b] = split(big, 0.7, 9);
  const auto [a2, b2] = split(big, 0.7, 9);
  CHECK(a.covariates == a2.covariates);
  CHECK(b.covariates == b2.covariates);
  CHECK(a.n() + b.n() == 300);
  std::set<double> seen;
  for (const auto* part : {&a, &b}) {
    for (std::size_t i = 0; i < part->n(); ++i) seen.insert(part->covariates(static_cast<Eigen::Index>(i), 0));
  }
  CHECK(seen.size() == 300);

  Dataset lonely = random_dataset(10, 1, 5);
  std::fill(lonely.labels.begin(), lonely.labels.end(), 0);
  lonely.labels[0] = 1;
  CHECK_THROWS_AS(split(lonely, 0.5, 0), DataError);
}

TEST_CASE("dataset helpers") {
  auto d = random_dataset(9, 2, 6);
  CHECK(d.count_positive() == 3);
  const std::vector<std::size_t> rows{4, 0};
  const auto sub = d.subset(rows);
  CHECK(sub.n() == 2);
  CHECK(sub.covariates.row(0) == d.covariates.row(4));
  CHECK(sub.labels == Labels{d.labels[4], d.labels[0]});
  d.labels[0] = 3;
  CHECK_THROWS_AS(d.validate(), DataError);
  const auto j = summary_json(random_dataset(9, 2, 6), 1);
  CHECK(j["n"] == 9);
  CHECK(j["positives"] == 3);
  CHECK(j["dropped_rows"] == 1);
}
