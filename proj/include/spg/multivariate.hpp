#pragma once

// Multi-task regression with structure over the K outputs:
//
//   min_B  0.5 ||Y - X B||_F^2 + Omega(B) + lambda ||B||_1      (B is J x K)
//
// The output-side coupling matrix C (rows x K) acts on every row of B, so
// Omega(B) = max_{A in Q} <C B', A> with one copy of the univariate dual set per input j.
// Hence A* is the univariate alpha* applied column by column to C B', grad f_mu(B) = A*' C,
// and
//
//   D_multi = max_{A in Q} ||A||_F^2 / 2 = J * D_univariate
//
// (each of the J replicated blocks contributes |G|/2 for groups or |E|/2 for edges).
// ||C|| is unchanged because B -> C B' is C applied to the columns of B'.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "spg/error.hpp"
#include "spg/fista.hpp"
#include "spg/losses.hpp"
#include "spg/penalty.hpp"
#include "spg/smoothing.hpp"
#include "spg/solver.hpp"

namespace spg {

struct MultiProblem {
  Matrix X;  ///< N x J
  Matrix Y;  ///< N x K
  /// Structure over outputs {0..K-1}.
  std::optional<PenaltySpec> penalty;
  double lambda = 0.0;

  Index outputs() const { return Y.cols(); }
  Index features() const { return X.cols(); }
  double gamma() const { return penalty ? penalty_gamma(*penalty) : 0.0; }
};

inline void check_problem(const MultiProblem& p) {
  if (p.X.rows() < 1 || p.X.cols() < 1 || p.Y.cols() < 1) throw DimensionError("multivariate problem: empty X or Y");
  detail::require_dims(p.X.rows() == p.Y.rows(), "X has " + std::to_string(p.X.rows()) + " rows, Y has " +
                                                     std::to_string(p.Y.rows()));
  if (!p.X.allFinite() || !p.Y.allFinite()) throw ArgumentError("multivariate problem: non-finite entries");
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda)) throw ArgumentError("lambda must be finite and non-negative");
}

/// D = max over Q of 0.5 ||A||_F^2. Q is J copies of the univariate dual set (one column of A
/// per input), so D is J times the univariate bound.
inline double multi_dual_domain_bound(const MultiProblem& p) {
  return p.penalty ? static_cast<double>(p.features()) * dual_domain_bound(*p.penalty) : 0.0;
}

/// Exact Omega(B), evaluated from the penalty definitions (not through C).
inline double multi_penalty_value(const MultiProblem& problem, const Matrix& B) {
  detail::require_dims(B.rows() == problem.features() && B.cols() == problem.outputs(), "B must be J x K");
  if (!problem.penalty) return 0.0;
  double total = 0.0;
  for (Index j = 0; j < B.rows(); ++j) total += penalty_value(*problem.penalty, B.row(j).transpose());
  return total;
}

/// Smoothed output-side penalty applied to every row of B.
class RowwisePenaltyTerm {
 public:
  RowwisePenaltyTerm() = default;
  explicit RowwisePenaltyTerm(SmoothingSpec s) : spec_(std::move(s)) {}

  bool active() const { return spec_.has_value(); }
  const SmoothingSpec& spec() const { return *spec_; }
  double lipschitz() const { return spec_ ? spec_->lipschitz() : 0.0; }

  /// U = C B' (rows x J).
  Matrix image(const Matrix& B) const { return spec_->coupling.matrix * B.transpose(); }

  /// A* from U: per column, ball projection per row block (groups) or clipping (graphs).
  Matrix alpha_star(const Matrix& U) const {
    Matrix A = U / spec_->mu;
    for (Index j = 0; j < A.cols(); ++j) project_dual(A.col(j), spec_->kind, spec_->coupling.row_blocks);
    return A;
  }

  void add_gradient(const Matrix& B, Matrix& grad) const {
    if (!spec_) return;
    const Matrix A = alpha_star(image(B));
    grad.noalias() += (spec_->coupling.matrix.transpose() * A).transpose();
  }

  std::pair<double, double> values(const Matrix& B) const {
    if (!spec_) return {0.0, 0.0};
    const Matrix U = image(B);
    const Matrix A = alpha_star(U);
    const double smooth = A.cwiseProduct(U).sum() - 0.5 * spec_->mu * A.squaredNorm();
    double exact = 0.0;
    for (Index j = 0; j < U.cols(); ++j) exact += exact_value_from_image(*spec_, U.col(j));
    return {exact, smooth};
  }

 private:
  std::optional<SmoothingSpec> spec_;
};

class MultivariateModel {
 public:
  using coef_type = Matrix;
  using image_type = Matrix;

  MultivariateModel(SquaredLossModel<Matrix> loss, RowwisePenaltyTerm penalty, double lambda)
      : loss_(std::move(loss)), penalty_(std::move(penalty)), lambda_(lambda) {
    loss_lipschitz_ = loss_.lipschitz().value;
  }

  image_type image(const Matrix& B) const { return loss_.image(B); }

  void gradient(const Matrix& B, const image_type& img, Matrix& grad) const {
    loss_.gradient(B, img, grad);
    penalty_.add_gradient(B, grad);
  }

  ObjectiveValues objective(const Matrix& B, const image_type& img) const {
    const double g = loss_.value(B, img);
    const auto [exact, smooth] = penalty_.values(B);
    const double l1 = lambda_ * B.lpNorm<1>();
    return {g + exact + l1, g + smooth + l1};
  }

  double loss_lipschitz() const { return loss_lipschitz_; }
  double lipschitz() const { return loss_lipschitz_ + penalty_.lipschitz(); }
  double lambda() const { return lambda_; }
  const RowwisePenaltyTerm& penalty() const { return penalty_; }

 private:
  SquaredLossModel<Matrix> loss_;
  RowwisePenaltyTerm penalty_;
  double lambda_;
  double loss_lipschitz_ = 0.0;
};

inline RowwisePenaltyTerm make_rowwise_penalty(const MultiProblem& p, double mu, SmoothingOptions opts = {}) {
  if (!p.penalty || p.gamma() == 0.0 || dual_domain_bound(*p.penalty) == 0.0) return {};
  return RowwisePenaltyTerm(make_smoothing(*p.penalty, p.outputs(), mu, opts));
}

/// A* (rows x J) maximizing <C B', A> - (mu/2) ||A||_F^2 over Q.
inline Matrix multi_alpha_star(const MultiProblem& problem, double mu, const Matrix& B) {
  detail::require_dims(B.rows() == problem.features() && B.cols() == problem.outputs(), "B must be J x K");
  if (!problem.penalty) return Matrix(0, B.rows());
  RowwisePenaltyTerm term(make_smoothing(*problem.penalty, problem.outputs(), mu));
  return term.alpha_star(term.image(B));
}

/// f_mu(B) and its gradient A*' C, for testing and diagnostics.
inline double multi_smooth_penalty_value(const MultiProblem& problem, double mu, const Matrix& B) {
  if (!problem.penalty) return 0.0;
  RowwisePenaltyTerm term(make_smoothing(*problem.penalty, problem.outputs(), mu));
  return term.values(B).second;
}

inline Matrix multi_smooth_penalty_gradient(const MultiProblem& problem, double mu, const Matrix& B) {
  Matrix grad = Matrix::Zero(B.rows(), B.cols());
  if (!problem.penalty) return grad;
  RowwisePenaltyTerm term(make_smoothing(*problem.penalty, problem.outputs(), mu));
  term.add_gradient(B, grad);
  return grad;
}

inline MultivariateModel make_multivariate_model(const MultiProblem& problem, const SolverConfig& config, MuChoice& mu) {
  check_problem(problem);
  const double D = multi_dual_domain_bound(problem);
  RowwisePenaltyTerm term;
  if (problem.penalty && problem.gamma() > 0.0 && D > 0.0) {
    mu = choose_mu(config, D);
    term = make_rowwise_penalty(problem, mu.mu, config.smoothing);
  } else {
    if (problem.penalty) build_coupling(*problem.penalty, problem.outputs());
    mu = {0.0, "none"};
  }
  return MultivariateModel(SquaredLossModel<Matrix>(problem.X, problem.Y, config.gram), std::move(term),
                           problem.lambda);
}

struct MultiSolverConfig {
  SolverConfig base;
  std::optional<Matrix> B0;
};

inline SolveResult<Matrix> solve_multivariate(const MultiProblem& problem, const MultiSolverConfig& config = {}) {
  MuChoice mu;
  const MultivariateModel model = make_multivariate_model(problem, config.base, mu);
  Matrix B0 = config.B0 ? *config.B0 : Matrix::Zero(problem.features(), problem.outputs());
  detail::require_dims(B0.rows() == problem.features() && B0.cols() == problem.outputs(), "B0 must be J x K");
  Trace header;
  header.method = "proxgrad";
  header.mu = mu.mu;
  header.mu_source = mu.source;
  header.gamma = problem.gamma();
  return run_fista(model, B0, config.base.stop, std::move(header));
}

inline double multi_objective_value(const MultiProblem& problem, const Matrix& B) {
  check_problem(problem);
  return 0.5 * (problem.Y - problem.X * B).squaredNorm() + multi_penalty_value(problem, B) +
         problem.lambda * B.lpNorm<1>();
}

/// Univariate group spec with one singleton group per feature: gamma * w * ||beta||_1.
/// A K = 1 multivariate problem with the output group {1} maps onto this exactly.
inline GroupPenaltySpec singleton_groups(Index J, double gamma, double weight = 1.0) {
  GroupPenaltySpec spec;
  spec.gamma = gamma;
  for (Index j = 0; j < J; ++j) spec.groups.push_back({j});
  spec.weights.assign(static_cast<std::size_t>(J), weight);
  return spec;
}

}  // namespace spg
