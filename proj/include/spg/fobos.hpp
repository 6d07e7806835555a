#pragma once

// FOBOS-style baseline: subgradient step on l(beta) = g(beta) + Omega(beta), then the l1 prox,
// with step size c / sqrt(t), t = 1, 2, ...
//
//   beta^{t+1} = soft_threshold(beta^t - s_t (grad g(beta^t) + sg(beta^t)), s_t lambda)
//
// Subgradient methods are not monotone, so the best iterate seen so far is returned.

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <variant>

#include "spg/error.hpp"
#include "spg/fista.hpp"
#include "spg/losses.hpp"
#include "spg/multivariate.hpp"
#include "spg/penalty.hpp"
#include "spg/smoothing.hpp"
#include "spg/solver.hpp"

namespace spg {

struct FobosConfig {
  /// Step-size scale; when unset, 0.1 / sqrt(N J K).
  std::optional<double> c;
  StopRule stop;
  GramMode gram = GramMode::automatic;
};

inline double default_c(Index N, Index J, Index K = 1) {
  if (N < 1 || J < 1 || K < 1) throw ArgumentError("default_c: dimensions must be positive");
  return 0.1 / std::sqrt(static_cast<double>(N) * static_cast<double>(J) * static_cast<double>(K));
}

/// Subgradient selector for alpha: the l2-normalized block (zero block at the origin) for
/// groups, sign() with sign(0) = 0 for the box. Returns sg = C' alpha.
inline Vector dual_subgradient_direction(const Vector& c_beta, PenaltyKind kind, const std::vector<RowBlock>& blocks) {
  Vector alpha = c_beta;
  if (kind == PenaltyKind::group) {
    for (const auto& b : blocks) {
      auto seg = alpha.segment(b.offset, b.size);
      const double n = seg.norm();
      if (n > 0.0)
        seg /= n;
      else
        seg.setZero();
    }
  } else {
    alpha = alpha.unaryExpr([](double x) { return sign_of(x); });
  }
  return alpha;
}

/// A subgradient of the exact penalty at beta.
inline Vector penalty_subgradient(const PenaltySpec& penalty, const Vector& beta) {
  const CouplingMatrix C = build_coupling(penalty, beta.size());
  const PenaltyKind kind = std::holds_alternative<GroupPenaltySpec>(penalty) ? PenaltyKind::group : PenaltyKind::graph;
  return C.matrix.transpose() * dual_subgradient_direction(C.matrix * beta, kind, C.row_blocks);
}

namespace detail {

struct SubgradientPenalty {
  CouplingMatrix coupling;
  PenaltyKind kind = PenaltyKind::graph;
};

inline std::optional<SubgradientPenalty> make_subgradient_penalty(const std::optional<PenaltySpec>& penalty, Index dim) {
  if (!penalty || penalty_gamma(*penalty) == 0.0) {
    if (penalty) build_coupling(*penalty, dim);
    return std::nullopt;
  }
  SubgradientPenalty p;
  p.coupling = build_coupling(*penalty, dim);
  p.kind = std::holds_alternative<GroupPenaltySpec>(*penalty) ? PenaltyKind::group : PenaltyKind::graph;
  return p;
}

inline double exact_from_image(const SubgradientPenalty& p, const Vector& image) {
  if (p.kind == PenaltyKind::graph) return image.lpNorm<1>();
  double total = 0.0;
  for (const auto& b : p.coupling.row_blocks) total += image.segment(b.offset, b.size).norm();
  return total;
}

/// Shared iteration loop. `Ops` provides image/loss_value/loss_gradient/penalty (value, subgradient).
template <class Coef, class Ops>
SolveResult<Coef> run_fobos(const Ops& ops, Coef beta, double c, double lambda, const StopRule& stop, Trace trace) {
  stop.validate();
  if (!(c > 0.0)) throw ArgumentError("FOBOS step scale c must be positive");
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  trace.mu = 0.0;
  trace.mu_source = "none";
  trace.lambda = lambda;

  auto image = ops.image(beta);
  double f = ops.objective(beta, image);
  if (!std::isfinite(f)) throw SolverError("non-finite objective at the starting point");
  if (stop.record_trace) trace.records.push_back({0, f, f, seconds()});
  Coef best = beta;
  double best_f = f;
  Index t = 0;
  Coef grad;

  if (stop.target_objective && f <= *stop.target_objective) {
    trace.status = SolverStatus::target_reached;
  } else {
    while (true) {
      ++t;
      const double step = c / std::sqrt(static_cast<double>(t));
      ops.gradient(beta, image, grad);
      if (!grad.allFinite()) throw SolverError("non-finite subgradient at iteration " + std::to_string(t));
      beta = soft_threshold(beta - step * grad, step * lambda);
      image = ops.image(beta);
      const double previous = f;
      f = ops.objective(beta, image);
      if (!std::isfinite(f)) throw SolverError("non-finite objective at iteration " + std::to_string(t));
      if (f < best_f) {
        best_f = f;
        best = beta;
      }
      if (stop.record_trace) trace.records.push_back({t, f, f, seconds()});
      if (stop.target_objective && f <= *stop.target_objective) {
        trace.status = SolverStatus::target_reached;
        break;
      }
      if (relative_change_below(f, previous, stop.rel_tol)) {
        trace.status = SolverStatus::converged;
        break;
      }
      if (t >= stop.max_iter) {
        trace.status = SolverStatus::max_iter;
        break;
      }
    }
  }
  trace.iterations = t;
  trace.objective = best_f;
  trace.best_objective = best_f;
  trace.nnz = count_nonzeros(best);
  trace.elapsed_s = seconds();
  return {std::move(best), std::move(trace)};
}

template <class Loss>
struct VectorFobosOps {
  const Loss& loss;
  const std::optional<SubgradientPenalty>& penalty;
  double lambda;

  auto image(const Vector& b) const { return loss.image(b); }
  void gradient(const Vector& b, const typename Loss::image_type& img, Vector& grad) const {
    loss.gradient(b, img, grad);
    if (penalty) {
      const Vector cb = penalty->coupling.matrix * b;
      grad.noalias() += penalty->coupling.matrix.transpose() * dual_subgradient_direction(cb, penalty->kind,
                                                                                           penalty->coupling.row_blocks);
    }
  }
  double objective(const Vector& b, const typename Loss::image_type& img) const {
    double omega = penalty ? exact_from_image(*penalty, penalty->coupling.matrix * b) : 0.0;
    return loss.value(b, img) + omega + lambda * b.lpNorm<1>();
  }
};

struct MatrixFobosOps {
  const SquaredLossModel<Matrix>& loss;
  const std::optional<SubgradientPenalty>& penalty;
  double lambda;

  Matrix image(const Matrix& B) const { return loss.image(B); }
  void gradient(const Matrix& B, const Matrix& img, Matrix& grad) const {
    loss.gradient(B, img, grad);
    if (penalty) {
      const Matrix U = penalty->coupling.matrix * B.transpose();
      Matrix A(U.rows(), U.cols());
      for (Index j = 0; j < U.cols(); ++j)
        A.col(j) = dual_subgradient_direction(U.col(j), penalty->kind, penalty->coupling.row_blocks);
      grad.noalias() += (penalty->coupling.matrix.transpose() * A).transpose();
    }
  }
  double objective(const Matrix& B, const Matrix& img) const {
    double omega = 0.0;
    if (penalty) {
      const Matrix U = penalty->coupling.matrix * B.transpose();
      for (Index j = 0; j < U.cols(); ++j) omega += exact_from_image(*penalty, U.col(j));
    }
    return loss.value(B, img) + omega + lambda * B.lpNorm<1>();
  }
};

}  // namespace detail

inline SolveResult<Vector> solve_fobos(const Problem& problem, const FobosConfig& config = {},
                                       std::optional<Vector> beta0 = std::nullopt) {
  check_problem(problem);
  const Index J = problem.data.features();
  const auto penalty = detail::make_subgradient_penalty(problem.penalty, J);
  const double c = config.c ? *config.c : default_c(problem.data.samples(), J);
  Vector start = beta0 ? *beta0 : Vector::Zero(J);
  detail::require_dims(start.size() == J, "beta0 length vs X columns");
  Trace header;
  header.method = "fobos";
  header.gamma = problem.gamma();
  if (problem.loss == LossKind::logistic) {
    LogisticLossModel loss(problem.data.X, problem.data.y);
    return detail::run_fobos(detail::VectorFobosOps<LogisticLossModel>{loss, penalty, problem.lambda}, start, c,
                             problem.lambda, config.stop, std::move(header));
  }
  SquaredLossModel<Vector> loss(problem.data.X, problem.data.y, config.gram);
  return detail::run_fobos(detail::VectorFobosOps<SquaredLossModel<Vector>>{loss, penalty, problem.lambda}, start, c,
                           problem.lambda, config.stop, std::move(header));
}

inline SolveResult<Matrix> solve_fobos(const MultiProblem& problem, const FobosConfig& config = {}) {
  check_problem(problem);
  const auto penalty = detail::make_subgradient_penalty(problem.penalty, problem.outputs());
  const double c = config.c ? *config.c : default_c(problem.X.rows(), problem.features(), problem.outputs());
  SquaredLossModel<Matrix> loss(problem.X, problem.Y, config.gram);
  Trace header;
  header.method = "fobos";
  header.gamma = problem.gamma();
  return detail::run_fobos(detail::MatrixFobosOps{loss, penalty, problem.lambda},
                           Matrix(Matrix::Zero(problem.features(), problem.outputs())), c, problem.lambda, config.stop,
                           std::move(header));
}

}  // namespace spg
