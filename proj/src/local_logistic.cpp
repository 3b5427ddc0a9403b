#include "nnlogit/local_logistic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nnlogit {

double expit(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

namespace {

// Every per-observation quantity is written so that (Y, eta) -> (1 - Y, -eta)
// maps it to itself or to its exact negative. The solver then commutes with
// label flipping bit for bit.
inline double obs_loss(int y, double eta) { return y ? softplus(-eta) : softplus(eta); }
inline double obs_residual(int y, double eta) { return y ? expit(-eta) : -expit(eta); }
inline double obs_weight(double eta) { return expit(eta) * expit(-eta); }

double l1_norm(const Vector& b) { return b.cwiseAbs().sum(); }

void check_coefficients(const LocalProblem& problem, const Vector& b) {
  if (static_cast<std::size_t>(b.size()) != problem.p()) {
    throw std::invalid_argument("coefficient vector length does not match problem dimension");
  }
}

std::size_t count_positive(const Labels& y) {
  return static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
}

class CoordinateSolver {
 public:
  CoordinateSolver(const LocalProblem& problem, const SolverOptions& opts)
      : problem_(problem),
        opts_(opts),
        k_(problem.k()),
        p_(problem.p()),
        inv_k_(1.0 / static_cast<double>(problem.k())),
        penalty_(problem.lambda * inv_k_),
        eta_(k_),
        scratch_(k_),
        resid_(k_),
        weight_(k_),
        bound_(p_, 0.0),
        majorizer_(p_, 0.0),
        active_(p_, false) {
    for (std::size_t j = 0; j < p_; ++j) {
      const auto col = problem_.deltas.col(static_cast<Eigen::Index>(j));
      const double spread = col.maxCoeff() - col.minCoeff();
      const double reach = col.cwiseAbs().maxCoeff();
      // A column with no spread is collinear with the intercept.
      active_[j] = spread > 0.0;
      bound_[j] = active_[j] ? opts_.eta_cap / reach : 0.0;
      majorizer_[j] = 0.25 * inv_k_ * col.squaredNorm();
    }
  }

  LocalFit run(double a0, const Vector& b0) {
    a_ = std::clamp(a0, -opts_.eta_cap, opts_.eta_cap);
    b_ = b0;
    for (std::size_t j = 0; j < p_; ++j) {
      auto& bj = b_[static_cast<Eigen::Index>(j)];
      bj = active_[j] ? std::clamp(bj, -bound_[j], bound_[j]) : 0.0;
    }
    for (std::size_t i = 0; i < k_; ++i) {
      eta_[i] = a_ + problem_.deltas.row(static_cast<Eigen::Index>(i)).dot(b_);
    }
    refresh_observations();
    loss_sum_ = loss_of(eta_);

    LocalFit fit;
    double objective = current_objective();
    for (int sweep = 1; sweep <= opts_.max_sweeps; ++sweep) {
      update_intercept();
      for (std::size_t j = 0; j < p_; ++j) {
        if (active_[j]) update_coefficient(j);
      }
      loss_sum_ = loss_of(eta_);
      const double next = current_objective();
      const double change = std::abs(objective - next);
      objective = next;
      fit.iterations = sweep;
      if (change <= opts_.rel_tol * std::abs(next) && averaged_kkt() <= opts_.kkt_tol) {
        fit.converged = true;
        break;
      }
    }

    fit.intercept = a_;
    fit.gradient = b_;
    fit.objective = penalized_objective(problem_, a_, b_);
    fit.degenerate = std::abs(a_) >= opts_.eta_cap;
    for (std::size_t j = 0; j < p_; ++j) {
      if (active_[j] && std::abs(b_[static_cast<Eigen::Index>(j)]) >= bound_[j]) {
        fit.degenerate = true;
      }
    }
    return fit;
  }

  double objective_at(double a, const Vector& b) {
    for (std::size_t i = 0; i < k_; ++i) {
      scratch_[i] = a + problem_.deltas.row(static_cast<Eigen::Index>(i)).dot(b);
    }
    return inv_k_ * loss_of(scratch_) + penalty_ * l1_norm(b);
  }

 private:
  double loss_of(const std::vector<double>& eta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < k_; ++i) s += obs_loss(problem_.labels[i], eta[i]);
    return s;
  }

  double current_objective() const { return inv_k_ * loss_sum_ + penalty_ * l1_norm(b_); }

  void refresh_observations() {
    for (std::size_t i = 0; i < k_; ++i) {
      resid_[i] = obs_residual(problem_.labels[i], eta_[i]);
      weight_[i] = obs_weight(eta_[i]);
    }
  }

  // Moves eta along `direction * step` into scratch_ and returns the change in
  // the loss sum. Each term uses
  //   softplus(t + s) - softplus(t) = log1p(expit(t) * expm1(s)),
  // which stays accurate for tiny steps where a difference of two sums would
  // be lost to rounding.
  template <class Direction>
  double trial_change(const Direction& direction, double step) {
    double change = 0.0;
    for (std::size_t i = 0; i < k_; ++i) {
      const double delta = step * direction(i);
      scratch_[i] = eta_[i] + delta;
      change += problem_.labels[i] ? std::log1p(resid_[i] * std::expm1(-delta))
                                   : std::log1p(-resid_[i] * std::expm1(delta));
    }
    return change;
  }

  void accept(double change) {
    eta_.swap(scratch_);
    loss_sum_ += change;
    refresh_observations();
  }

  void update_intercept() {
    double g = 0.0, h = 0.0;
    for (std::size_t i = 0; i < k_; ++i) {
      g -= resid_[i];
      h += weight_[i];
    }
    g *= inv_k_;
    h *= inv_k_;
    const double cap = opts_.eta_cap;
    auto one = [](std::size_t) { return 1.0; };
    for (double curvature : {h, 0.25}) {
      if (!(curvature > 0.0)) continue;
      const double target = std::clamp(a_ - g / curvature, -cap, cap);
      const double step = target - a_;
      if (step == 0.0) return;
      const double change = trial_change(one, step);
      if (change <= 0.0) {
        a_ = target;
        accept(change);
        return;
      }
    }
  }

  void update_coefficient(std::size_t j) {
    const auto col = problem_.deltas.col(static_cast<Eigen::Index>(j));
    double g = 0.0, h = 0.0;
    for (std::size_t i = 0; i < k_; ++i) {
      const double d = col[static_cast<Eigen::Index>(i)];
      g -= resid_[i] * d;
      h += weight_[i] * d * d;
    }
    g *= inv_k_;
    h *= inv_k_;
    const double bj = b_[static_cast<Eigen::Index>(j)];
    auto direction = [&](std::size_t i) { return col[static_cast<Eigen::Index>(i)]; };
    for (double curvature : {h, majorizer_[j]}) {
      if (!(curvature > 0.0)) continue;
      const double target =
          std::clamp(soft_threshold(curvature * bj - g, penalty_) / curvature, -bound_[j], bound_[j]);
      const double step = target - bj;
      if (step == 0.0) return;
      const double change = trial_change(direction, step);
      if (inv_k_ * change + penalty_ * (std::abs(target) - std::abs(bj)) <= 0.0) {
        b_[static_cast<Eigen::Index>(j)] = target;
        accept(change);
        return;
      }
    }
  }

  double averaged_kkt() const {
    double worst = 0.0;
    if (std::abs(a_) < opts_.eta_cap) {
      double g = 0.0;
      for (std::size_t i = 0; i < k_; ++i) g -= resid_[i];
      worst = std::abs(g) * inv_k_;
    }
    for (std::size_t j = 0; j < p_; ++j) {
      const double bj = b_[static_cast<Eigen::Index>(j)];
      if (!active_[j] || std::abs(bj) >= bound_[j]) continue;
      const auto col = problem_.deltas.col(static_cast<Eigen::Index>(j));
      double g = 0.0;
      for (std::size_t i = 0; i < k_; ++i) g -= resid_[i] * col[static_cast<Eigen::Index>(i)];
      g *= inv_k_;
      const double v = bj == 0.0 ? std::max(0.0, std::abs(g) - penalty_)
                                 : std::abs(g + penalty_ * (bj > 0.0 ? 1.0 : -1.0));
      worst = std::max(worst, v);
    }
    return worst;
  }

  const LocalProblem& problem_;
  const SolverOptions& opts_;
  std::size_t k_, p_;
  double inv_k_;
  double penalty_;
  double a_ = 0.0;
  Vector b_;
  std::vector<double> eta_, scratch_, resid_, weight_;
  std::vector<double> bound_, majorizer_;
  std::vector<bool> active_;
  double loss_sum_ = 0.0;
};

LocalFit constant_label_fit(const LocalProblem& problem, const SolverOptions& opts) {
  LocalFit fit;
  const bool all_positive = count_positive(problem.labels) == problem.k();
  fit.intercept = all_positive ? opts.eta_cap : -opts.eta_cap;
  fit.gradient = Vector::Zero(static_cast<Eigen::Index>(problem.p()));
  fit.objective = penalized_objective(problem, fit.intercept, fit.gradient);
  fit.converged = true;
  fit.degenerate = true;
  return fit;
}

double null_intercept(const LocalProblem& problem) {
  const auto c1 = static_cast<double>(count_positive(problem.labels));
  const double c0 = static_cast<double>(problem.k()) - c1;
  return std::log(c1) - std::log(c0);
}

}  // namespace

void LocalProblem::validate() const {
  if (deltas.rows() == 0) throw std::invalid_argument("LocalProblem: no neighbors");
  if (deltas.cols() == 0) throw std::invalid_argument("LocalProblem: zero dimension");
  if (labels.size() != k()) throw std::invalid_argument("LocalProblem: label count mismatch");
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("LocalProblem: labels must be 0 or 1");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("LocalProblem: lambda must be finite and nonnegative");
  }
  if (!deltas.allFinite()) throw std::invalid_argument("LocalProblem: non-finite deltas");
}

double neg_loglik(const LocalProblem& problem, double a, const Vector& b) {
  check_coefficients(problem, b);
  double s = 0.0;
  for (std::size_t i = 0; i < problem.k(); ++i) {
    const double eta = a + problem.deltas.row(static_cast<Eigen::Index>(i)).dot(b);
    s += obs_loss(problem.labels[i], eta);
  }
  return s;
}

double penalized_objective(const LocalProblem& problem, double a, const Vector& b) {
  return -neg_loglik(problem, a, b) - problem.lambda * l1_norm(b);
}

Score score(const LocalProblem& problem, double a, const Vector& b) {
  check_coefficients(problem, b);
  Score s;
  s.gradient = Vector::Zero(static_cast<Eigen::Index>(problem.p()));
  for (std::size_t i = 0; i < problem.k(); ++i) {
    const auto row = problem.deltas.row(static_cast<Eigen::Index>(i));
    const double r = obs_residual(problem.labels[i], a + row.dot(b));
    s.intercept += r;
    s.gradient += r * row.transpose();
  }
  return s;
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double lambda_max(const LocalProblem& problem) {
  problem.validate();
  const std::size_t c1 = count_positive(problem.labels);
  if (problem.k() == 1) return 0.0;
  if (c1 == 0 || c1 == problem.k()) {
    throw std::invalid_argument("lambda_max: labels are constant");
  }
  const double ybar = static_cast<double>(c1) / static_cast<double>(problem.k());
  Vector s = Vector::Zero(static_cast<Eigen::Index>(problem.p()));
  for (std::size_t i = 0; i < problem.k(); ++i) {
    s += (problem.labels[i] - ybar) * problem.deltas.row(static_cast<Eigen::Index>(i)).transpose();
  }
  return s.cwiseAbs().maxCoeff();
}

double kkt_violation(const LocalProblem& problem, const LocalFit& fit, const SolverOptions& opts) {
  const Score s = score(problem, fit.intercept, fit.gradient);
  double worst = std::abs(fit.intercept) < opts.eta_cap ? std::abs(s.intercept) : 0.0;
  for (std::size_t j = 0; j < problem.p(); ++j) {
    const auto col = problem.deltas.col(static_cast<Eigen::Index>(j));
    const double spread = col.maxCoeff() - col.minCoeff();
    if (spread == 0.0) continue;
    const double bj = fit.gradient[static_cast<Eigen::Index>(j)];
    if (std::abs(bj) * col.cwiseAbs().maxCoeff() >= opts.eta_cap) continue;
    // L is maximized, so dL/db_j must equal lambda * sign(b_j) on the support.
    const double g = s.gradient[static_cast<Eigen::Index>(j)];
    const double v = bj == 0.0 ? std::max(0.0, std::abs(g) - problem.lambda)
                               : std::abs(g - problem.lambda * (bj > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

LocalFit fit_penalized(const LocalProblem& problem, const SolverOptions& opts) {
  problem.validate();
  const std::size_t c1 = count_positive(problem.labels);
  if (c1 == 0 || c1 == problem.k()) return constant_label_fit(problem, opts);
  CoordinateSolver solver(problem, opts);
  return solver.run(null_intercept(problem), Vector::Zero(static_cast<Eigen::Index>(problem.p())));
}

LocalFit fit_penalized(const LocalProblem& problem, const SolverOptions& opts,
                       const LocalFit& warm) {
  problem.validate();
  const std::size_t c1 = count_positive(problem.labels);
  if (c1 == 0 || c1 == problem.k()) return constant_label_fit(problem, opts);
  check_coefficients(problem, warm.gradient);
  CoordinateSolver solver(problem, opts);
  const double a0 = null_intercept(problem);
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(problem.p()));
  const double null_value = solver.objective_at(a0, zero);
  const double warm_value = solver.objective_at(warm.intercept, warm.gradient);
  if (std::isfinite(warm_value) && warm_value < null_value) {
    return solver.run(warm.intercept, warm.gradient);
  }
  return solver.run(a0, zero);
}

std::vector<LocalFit> fit_path(const LocalProblem& problem, std::span<const double> lambdas,
                               const SolverOptions& opts) {
  LocalProblem current = problem;
  std::vector<LocalFit> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    current.lambda = lambda;
    out.push_back(out.empty() ? fit_penalized(current, opts)
                              : fit_penalized(current, opts, out.back()));
  }
  return out;
}

}  // namespace nnlogit
