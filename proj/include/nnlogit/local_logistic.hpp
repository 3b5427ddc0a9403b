#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nnlogit/types.hpp"

namespace nnlogit {

double expit(double t);
double logit(double p);
/// log(1 + exp(t)) without overflow.
double softplus(double t);

/// The penalized local logistic problem at one center point: maximize
///   L(a, b) - lambda * ||b||_1,
///   L(a, b) = sum_i Y_i (a + b'd_i) - log(1 + exp(a + b'd_i)),
/// where d_i = X_i - x runs over the neighbors of the center x.
struct LocalProblem {
  RowMatrix deltas;  // k x p, row i = X_i - x
  Labels labels;     // k values in {0, 1}
  double lambda = 0.0;

  std::size_t k() const { return static_cast<std::size_t>(deltas.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(deltas.cols()); }

  /// Throws std::invalid_argument on an inconsistent problem.
  void validate() const;
};

struct SolverOptions {
  double rel_tol = 1e-8;
  /// Maximum optimality violation on the averaged (1/k) scale.
  double kkt_tol = 1e-8;
  int max_sweeps = 10000;
  /// Bound on |a| and on |b_j| * max_i |d_ij|.
  double eta_cap = 30.0;
};

struct LocalFit {
  double intercept = 0.0;
  Vector gradient;
  /// Penalized log-likelihood L(a, b) - lambda ||b||_1 at the returned point.
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Constant labels or a coefficient pinned at the cap.
  bool degenerate = false;
};

/// -L(a, b).
double neg_loglik(const LocalProblem& problem, double a, const Vector& b);

/// L(a, b) - lambda ||b||_1.
double penalized_objective(const LocalProblem& problem, double a, const Vector& b);

/// Score of L: (dL/da, dL/db).
struct Score {
  double intercept = 0.0;
  Vector gradient;
};
Score score(const LocalProblem& problem, double a, const Vector& b);

/// sign(z) * max(|z| - gamma, 0).
double soft_threshold(double z, double gamma);

/// Smallest lambda at which b = 0 is optimal: max_j |sum_i (Y_i - ybar) d_ij|.
/// Throws std::invalid_argument when the labels are constant.
double lambda_max(const LocalProblem& problem);

/// Largest violation of the subgradient optimality conditions of the
/// penalized problem at (a, b), on the unscaled likelihood. Coordinates
/// resting on the cap are ignored.
double kkt_violation(const LocalProblem& problem, const LocalFit& fit,
                     const SolverOptions& opts = {});

/// Cyclic coordinate descent; the intercept is not penalized.
LocalFit fit_penalized(const LocalProblem& problem, const SolverOptions& opts = {});

/// Same, started from `warm` when that is better than the null model.
LocalFit fit_penalized(const LocalProblem& problem, const SolverOptions& opts,
                       const LocalFit& warm);

/// Fits along `lambdas` (expected decreasing), warm-starting each from the
/// previous solution. problem.lambda is ignored.
std::vector<LocalFit> fit_path(const LocalProblem& problem, std::span<const double> lambdas,
                               const SolverOptions& opts = {});

}  // namespace nnlogit
