#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "nnlogit/local_logistic.hpp"
#include "nnlogit/neighbors.hpp"
#include "nnlogit/types.hpp"

namespace nnlogit {

enum class SkipReason {
  none,
  class_imbalance,  // a class has fewer than min_class_count neighbors
  degenerate,       // the local fit saturated
};

std::string_view to_string(SkipReason reason);

/// Local estimate of the logit and its gradient at one center, with the
/// plug-in probability and probability gradient.
struct GradientEstimate {
  Vector center;
  double intercept = 0.0;
  Vector gradient;
  double pi_hat = 0.5;
  Vector grad_pi_hat;
  SkipReason skipped = SkipReason::none;
  bool converged = true;

  bool is_skipped() const { return skipped != SkipReason::none; }
};

struct FieldOptions {
  std::size_t min_class_count = 5;
  SolverOptions solver;
};

/// Default number of query points, ceil(n / 4).
std::size_t default_query_count(std::size_t n);
/// Default neighborhood size, floor(sqrt(n)).
std::size_t default_neighbor_count(std::size_t n);

LocalProblem make_local_problem(const Dataset& data, const NeighborSet& neighbors,
                                std::span<const double> center, double lambda);

GradientEstimate estimate_at(const Dataset& data, const NeighborIndex& index,
                             std::span<const double> x, std::size_t k, double lambda,
                             const FieldOptions& opts = {});

/// Estimates at m data points drawn without replacement (stream tag
/// query_draw of `seed`). Results are in draw order. Parallel over queries.
std::vector<GradientEstimate> estimate_field(const Dataset& data, const NeighborIndex& index,
                                             std::size_t m, std::size_t k, double lambda,
                                             std::uint64_t seed, const FieldOptions& opts = {});

std::vector<GradientEstimate> estimate_field(const Dataset& data, std::size_t m, std::size_t k,
                                             double lambda, std::uint64_t seed,
                                             const FieldOptions& opts = {});

/// Single-threaded reference for estimate_field.
std::vector<GradientEstimate> estimate_field_serial(const Dataset& data,
                                                    const NeighborIndex& index, std::size_t m,
                                                    std::size_t k, double lambda,
                                                    std::uint64_t seed,
                                                    const FieldOptions& opts = {});

/// The query rows estimate_field uses for (n, m, seed).
std::vector<std::size_t> draw_query_points(std::size_t n, std::size_t m, std::uint64_t seed);

}  // namespace nnlogit
