#include "nnlogit/gradient_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nnlogit/rng.hpp"

namespace nnlogit {

std::string_view to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::none: return "none";
    case SkipReason::class_imbalance: return "class_imbalance";
    case SkipReason::degenerate: return "degenerate";
  }
  return "unknown";
}

std::size_t default_query_count(std::size_t n) { return (n + 3) / 4; }

std::size_t default_neighbor_count(std::size_t n) {
  auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (k * k > n) --k;
  while ((k + 1) * (k + 1) <= n) ++k;
  return std::max<std::size_t>(k, 1);
}

LocalProblem make_local_problem(const Dataset& data, const NeighborSet& neighbors,
                                std::span<const double> center, double lambda) {
  LocalProblem problem;
  const auto k = static_cast<Eigen::Index>(neighbors.size());
  problem.deltas.resize(k, static_cast<Eigen::Index>(data.p()));
  problem.labels.resize(neighbors.size());
  const auto c = as_vector(center).transpose();
  for (Eigen::Index r = 0; r < k; ++r) {
    const std::size_t i = neighbors.indices[static_cast<std::size_t>(r)];
    problem.deltas.row(r) = data.covariates.row(static_cast<Eigen::Index>(i)) - c;
    problem.labels[static_cast<std::size_t>(r)] = data.labels[i];
  }
  problem.lambda = lambda;
  return problem;
}

GradientEstimate estimate_at(const Dataset& data, const NeighborIndex& index,
                             std::span<const double> x, std::size_t k, double lambda,
                             const FieldOptions& opts) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("estimate_at: lambda must be nonnegative");
  const NeighborSet neighbors = index.k_nearest(x, k);

  GradientEstimate est;
  est.center = as_vector(x);
  est.gradient = Vector::Zero(static_cast<Eigen::Index>(data.p()));
  est.grad_pi_hat = est.gradient;

  std::size_t positives = 0;
  for (std::size_t i : neighbors.indices) positives += static_cast<std::size_t>(data.labels[i]);
  if (std::min(positives, k - positives) < opts.min_class_count || positives == 0 ||
      positives == k) {
    est.skipped = SkipReason::class_imbalance;
    return est;
  }

  const LocalProblem problem = make_local_problem(data, neighbors, x, lambda);
  const LocalFit fit = fit_penalized(problem, opts.solver);
  est.converged = fit.converged;
  if (fit.degenerate) {
    est.skipped = SkipReason::degenerate;
    return est;
  }
  est.intercept = fit.intercept;
  est.gradient = fit.gradient;
  est.pi_hat = expit(fit.intercept);
  est.grad_pi_hat = (est.pi_hat * (1.0 - est.pi_hat)) * fit.gradient;
  return est;
}

std::vector<std::size_t> draw_query_points(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (m > n) throw std::invalid_argument("estimate_field: m exceeds n");
  RandomStream stream(seed, {stream_tag::query_draw});
  return uniform_choice(stream, n, m);
}

std::vector<GradientEstimate> estimate_field(const Dataset& data, const NeighborIndex& index,
                                             std::size_t m, std::size_t k, double lambda,
                                             std::uint64_t seed, const FieldOptions& opts) {
  if (k == 0 || k > data.n()) throw std::invalid_argument("estimate_field: k out of range");
  if (!(lambda >= 0.0)) throw std::invalid_argument("estimate_field: lambda must be nonnegative");
  const auto queries = draw_query_points(data.n(), m, seed);
  std::vector<GradientEstimate> out(m);
  // Every precondition is checked above; nothing inside the region throws.
  const auto count = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t q = 0; q < count; ++q) {
    const auto u = static_cast<std::size_t>(q);
    out[u] = estimate_at(data, index, data.row(queries[u]), k, lambda, opts);
  }
  return out;
}

std::vector<GradientEstimate> estimate_field(const Dataset& data, std::size_t m, std::size_t k,
                                             double lambda, std::uint64_t seed,
                                             const FieldOptions& opts) {
  const NeighborIndex index(data.covariates);
  return estimate_field(data, index, m, k, lambda, seed, opts);
}

std::vector<GradientEstimate> estimate_field_serial(const Dataset& data,
                                                    const NeighborIndex& index, std::size_t m,
                                                    std::size_t k, double lambda,
                                                    std::uint64_t seed,
                                                    const FieldOptions& opts) {
  const auto queries = draw_query_points(data.n(), m, seed);
  std::vector<GradientEstimate> out;
  out.reserve(m);
  for (std::size_t q : queries) {
    out.push_back(estimate_at(data, index, data.row(q), k, lambda, opts));
  }
  return out;
}

}  // namespace nnlogit
