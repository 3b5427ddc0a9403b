#include "nnlogit/synthetic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nnlogit/local_logistic.hpp"
#include "nnlogit/rng.hpp"

namespace nnlogit {

namespace {

double example_response(int example_id, std::span<const double> x, double noise) {
  switch (example_id) {
    case 2:
      return std::sin(x[0]) + x[1] * x[1] + 0.2 * noise;
    case 3: {
      const double s = x[1] - 0.5;
      return (x[0] + 0.5) * s * s + 0.2 * noise;
    }
    case 4: {
      // log(X1^2) = 2 log|X1|; an exact zero draw is replaced by the
      // smallest positive normal magnitude.
      const double mag = x[0] == 0.0 ? std::numeric_limits<double>::min() : std::abs(x[0]);
      return 2.0 * std::log(mag) * (x[1] * x[1] + x[2]) + 0.2 * noise;
    }
    default:
      throw std::invalid_argument("unknown example id " + std::to_string(example_id));
  }
}

}  // namespace

void SyntheticSpec::validate() const {
  const std::size_t d = true_dimension(example_id);
  if (n == 0) throw std::invalid_argument("SyntheticSpec: n must be positive");
  if (p < d) throw std::invalid_argument("SyntheticSpec: p smaller than the true dimension");
}

std::size_t true_dimension(int example_id) {
  switch (example_id) {
    case 1: return 1;
    case 2: return 2;
    case 3: return 2;
    case 4: return 3;
    default: throw std::invalid_argument("unknown example id " + std::to_string(example_id));
  }
}

OracleInfo oracle_for(int example_id, std::size_t p) {
  OracleInfo info;
  info.true_d = true_dimension(example_id);
  info.basis = Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(info.true_d));
  if (example_id == 1) {
    info.logit_gradient = Vector::Unit(static_cast<Eigen::Index>(p), 0);
  }
  return info;
}

int label_rule(int example_id, std::span<const double> x, double noise) {
  if (x.size() < true_dimension(example_id)) {
    throw std::invalid_argument("label_rule: too few coordinates");
  }
  if (example_id == 1) return noise < expit(x[0] + 1.0) ? 1 : 0;
  return example_response(example_id, x, noise) >= 0.0 ? 1 : 0;
}

SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticData out;
  auto& data = out.data;
  data.covariates.resize(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.p));
  data.labels.resize(spec.n);
  data.feature_names.reserve(spec.p);
  for (std::size_t j = 0; j < spec.p; ++j) data.feature_names.push_back("x" + std::to_string(j + 1));

  RandomStream cov(spec.seed, {stream_tag::covariates});
  RandomStream noise(spec.seed, {stream_tag::noise});
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t j = 0; j < spec.p; ++j) {
      data.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cov.gaussian();
    }
    const double e = spec.example_id == 1 ? noise.uniform() : noise.gaussian();
    data.labels[i] = label_rule(spec.example_id, data.row(i), e);
  }
  out.oracle = oracle_for(spec.example_id, spec.p);
  return out;
}

nlohmann::json to_json(const OracleInfo& oracle, const SyntheticSpec& spec) {
  nlohmann::json j;
  j["example"] = spec.example_id;
  j["n"] = spec.n;
  j["p"] = spec.p;
  j["seed"] = spec.seed;
  j["true_d"] = oracle.true_d;
  std::vector<std::size_t> axes;
  for (std::size_t k = 0; k < oracle.true_d; ++k) axes.push_back(k);
  j["basis_axes"] = axes;
  if (oracle.logit_gradient) {
    const auto& g = *oracle.logit_gradient;
    j["logit_gradient"] = std::vector<double>(g.data(), g.data() + g.size());
  }
  return j;
}

}  // namespace nnlogit
