#pragma once

// Smoothing proximal gradient solver for
//
//   min_beta  g(beta) + Omega(beta) + lambda ||beta||_1
//
// Omega is replaced by its smooth approximation f_mu and the resulting problem is solved with
// the accelerated proximal gradient engine in fista.hpp. Reported objectives are always the
// exact f; the smoothed f~ is recorded alongside in the trace.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spg/error.hpp"
#include "spg/fista.hpp"
#include "spg/losses.hpp"
#include "spg/penalty.hpp"
#include "spg/smoothing.hpp"

namespace spg {

struct Problem {
  Dataset data;
  LossKind loss = LossKind::squared;
  /// Structured penalty; its gamma is the structure weight. Absent or gamma = 0 means plain lasso.
  std::optional<PenaltySpec> penalty;
  double lambda = 0.0;

  double gamma() const { return penalty ? penalty_gamma(*penalty) : 0.0; }
};

struct SolverConfig {
  /// Target accuracy; when set, mu = epsilon / (2D).
  std::optional<double> epsilon;
  /// Explicit smoothing parameter. Ignored when epsilon is set. Default 1e-4.
  std::optional<double> mu;
  StopRule stop;
  std::optional<Vector> beta0;
  GramMode gram = GramMode::automatic;
  SmoothingOptions smoothing;
};

struct MuChoice {
  double mu = kDefaultMu;
  std::string source = "default";
};

inline MuChoice choose_mu(const SolverConfig& config, double D) {
  if (config.epsilon) {
    if (D > 0.0) return {select_mu(*config.epsilon, D), "epsilon"};
    if (!(*config.epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
    return {kDefaultMu, "epsilon"};
  }
  if (config.mu) {
    if (!(*config.mu > 0.0)) throw ArgumentError("mu must be positive");
    return {std::max(*config.mu, kMuFloor), "explicit"};
  }
  return {kDefaultMu, "default"};
}

// ---------------------------------------------------------------------------
// scalar helpers

/// L = lambda_max(X'X) + ||C||^2 / mu.
inline double total_lipschitz(double loss_lipschitz, double coupling_norm, double mu) {
  if (!(mu > 0.0)) throw ArgumentError("total_lipschitz: mu must be positive");
  if (loss_lipschitz < 0.0 || coupling_norm < 0.0) throw ArgumentError("total_lipschitz: negative input");
  return loss_lipschitz + coupling_norm * coupling_norm / mu;
}

/// Iteration bound for reaching f(beta^t) - f(beta*) <= epsilon with mu = epsilon / (2D):
///   sqrt( 4 ||beta* - beta0||^2 / epsilon * (lambda_max(X'X) + 2 D ||C||^2 / epsilon) ).
inline double iteration_bound(double dist0, double epsilon, double loss_lipschitz, double D, double coupling_norm) {
  if (!(epsilon > 0.0)) throw ArgumentError("iteration_bound: epsilon must be positive");
  if (dist0 < 0.0 || loss_lipschitz < 0.0 || D < 0.0 || coupling_norm < 0.0)
    throw ArgumentError("iteration_bound: negative input");
  return std::sqrt(4.0 * dist0 * dist0 / epsilon *
                   (loss_lipschitz + 2.0 * D * coupling_norm * coupling_norm / epsilon));
}

// ---------------------------------------------------------------------------
// univariate model

/// Smoothed structured penalty on a coefficient vector. Inactive when there is no penalty
/// or gamma = 0.
class VectorPenaltyTerm {
 public:
  VectorPenaltyTerm() = default;
  explicit VectorPenaltyTerm(SmoothingSpec s) : spec_(std::move(s)) {}

  bool active() const { return spec_.has_value(); }
  const SmoothingSpec& spec() const { return *spec_; }
  double lipschitz() const { return spec_ ? spec_->lipschitz() : 0.0; }

  void add_gradient(const Vector& beta, Vector& grad) const {
    if (!spec_) return;
    grad.noalias() += spec_->coupling.matrix.transpose() * alpha_star(*spec_, beta);
  }

  /// {exact Omega, f_mu}
  std::pair<double, double> values(const Vector& beta) const {
    if (!spec_) return {0.0, 0.0};
    const Vector image = spec_->coupling.matrix * beta;
    Vector alpha;
    const double smooth = smooth_value_from_image(*spec_, image, alpha);
    return {exact_value_from_image(*spec_, image), smooth};
  }

 private:
  std::optional<SmoothingSpec> spec_;
};

template <class Loss>
class UnivariateModel {
 public:
  using coef_type = Vector;
  using image_type = typename Loss::image_type;

  UnivariateModel(Loss loss, VectorPenaltyTerm penalty, double lambda)
      : loss_(std::move(loss)), penalty_(std::move(penalty)), lambda_(lambda) {
    loss_lipschitz_ = loss_.lipschitz().value;
  }

  image_type image(const Vector& b) const { return loss_.image(b); }

  void gradient(const Vector& b, const image_type& img, Vector& grad) const {
    loss_.gradient(b, img, grad);
    penalty_.add_gradient(b, grad);
  }

  ObjectiveValues objective(const Vector& b, const image_type& img) const {
    const double g = loss_.value(b, img);
    const auto [exact, smooth] = penalty_.values(b);
    const double l1 = lambda_ * b.lpNorm<1>();
    return {g + exact + l1, g + smooth + l1};
  }

  double loss_lipschitz() const { return loss_lipschitz_; }
  double lipschitz() const { return loss_lipschitz_ + penalty_.lipschitz(); }
  double lambda() const { return lambda_; }
  const VectorPenaltyTerm& penalty() const { return penalty_; }

 private:
  Loss loss_;
  VectorPenaltyTerm penalty_;
  double lambda_;
  double loss_lipschitz_ = 0.0;
};

inline void check_problem(const Problem& p) {
  check_dataset(p.data);
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) throw ArgumentError("lambda must be finite and non-negative");
  if (p.loss == LossKind::logistic) check_logistic_labels(p.data.y);
}

inline VectorPenaltyTerm make_penalty_term(const Problem& p, const SolverConfig& config, MuChoice& mu) {
  if (!p.penalty || p.gamma() == 0.0) {
    mu = {0.0, "none"};
    return {};
  }
  const double D = dual_domain_bound(*p.penalty);
  if (D == 0.0) {  // no groups or no edges: Omega is identically zero
    mu = {0.0, "none"};
    build_coupling(*p.penalty, p.data.features());  // still validates the structure
    return {};
  }
  mu = choose_mu(config, D);
  return VectorPenaltyTerm(make_smoothing(*p.penalty, p.data.features(), mu.mu, config.smoothing));
}

/// Calls fn(model) with the univariate model matching the problem's loss.
template <class Fn>
decltype(auto) with_univariate_model(const Problem& problem, const SolverConfig& config, MuChoice& mu, Fn&& fn) {
  check_problem(problem);
  VectorPenaltyTerm term = make_penalty_term(problem, config, mu);
  if (problem.loss == LossKind::logistic) {
    UnivariateModel<LogisticLossModel> model(LogisticLossModel(problem.data.X, problem.data.y), std::move(term),
                                             problem.lambda);
    return fn(model);
  }
  UnivariateModel<SquaredLossModel<Vector>> model(
      SquaredLossModel<Vector>(problem.data.X, problem.data.y, config.gram), std::move(term), problem.lambda);
  return fn(model);
}

inline SolveResult<Vector> solve(const Problem& problem, const SolverConfig& config = {}) {
  Vector beta0 = config.beta0 ? *config.beta0 : Vector::Zero(problem.data.features());
  detail::require_dims(beta0.size() == problem.data.features(), "beta0 length vs X columns");
  MuChoice mu;
  return with_univariate_model(problem, config, mu, [&](const auto& model) {
    Trace header;
    header.method = "proxgrad";
    header.mu = mu.mu;
    header.mu_source = mu.source;
    header.gamma = problem.gamma();
    return run_fista(model, beta0, config.stop, std::move(header));
  });
}

/// Exact objective f(beta) = g(beta) + Omega(beta) + lambda ||beta||_1.
inline double objective_value(const Problem& problem, const Vector& beta) {
  check_problem(problem);
  const double g = problem.loss == LossKind::logistic ? logistic_loss(problem.data, beta).value
                                                      : squared_loss(problem.data, beta).value;
  const double omega = problem.penalty ? penalty_value(*problem.penalty, beta) : 0.0;
  return g + omega + problem.lambda * beta.lpNorm<1>();
}

// ---------------------------------------------------------------------------
// regularization path

struct PathPoint {
  double lambda = 0.0;
  double gamma = 0.0;
  Vector beta;
  Trace trace;
};

struct PathOptions {
  /// Set gamma = lambda at every point of the path.
  bool couple_gamma = false;
  /// Start every point from beta0 instead of the previous solution.
  bool cold_start = false;
};

inline std::vector<PathPoint> regularization_path(const Problem& problem, const std::vector<double>& lambdas,
                                                  const SolverConfig& config = {}, PathOptions options = {}) {
  if (lambdas.empty()) throw ArgumentError("regularization path: no lambda values");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] < lambdas[i - 1])) throw ArgumentError("regularization path: lambdas must be strictly descending");

  std::vector<PathPoint> path;
  path.reserve(lambdas.size());
  Problem current = problem;
  SolverConfig cfg = config;
  for (double lambda : lambdas) {
    current.lambda = lambda;
    if (options.couple_gamma && current.penalty) current.penalty = with_gamma(*current.penalty, lambda);
    if (!path.empty() && !options.cold_start) cfg.beta0 = path.back().beta;
    auto result = solve(current, cfg);
    path.push_back({lambda, current.gamma(), std::move(result.beta), std::move(result.trace)});
  }
  return path;
}

}  // namespace spg
