#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "json.hpp"
#include "nnlogit/types.hpp"

namespace nnlogit {

/// Simulation designs with standard Gaussian covariates:
///   1: Y ~ Bernoulli(expit(X1 + 1))
///   2: Y = 1{sin(X1) + X2^2 + 0.2 e >= 0}
///   3: Y = 1{(X1 + 0.5)(X2 - 0.5)^2 + 0.2 e >= 0}
///   4: Y = 1{log(X1^2)(X2^2 + X3) + 0.2 e >= 0}
/// with e ~ N(0, 1).
struct SyntheticSpec {
  int example_id = 1;
  std::size_t n = 0;
  std::size_t p = 8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct OracleInfo {
  /// p x true_d, the leading canonical vectors.
  Matrix basis;
  std::size_t true_d = 0;
  /// Gradient of the true logit; constant, known for Example 1 only.
  std::optional<Vector> logit_gradient;
};

struct SyntheticData {
  Dataset data;
  OracleInfo oracle;
};

std::size_t true_dimension(int example_id);

OracleInfo oracle_for(int example_id, std::size_t p);

/// Label of one observation. `noise` is the uniform draw for Example 1 and
/// the Gaussian e otherwise; only the first true_dimension coordinates of x
/// are read. Exact zero of the response maps to label 1.
int label_rule(int example_id, std::span<const double> x, double noise);

/// Draws the dataset. Covariates come from stream (seed, {covariates}) and
/// label noise from (seed, {noise}).
SyntheticData generate(const SyntheticSpec& spec);

nlohmann::json to_json(const OracleInfo& oracle, const SyntheticSpec& spec);

}  // namespace nnlogit
