#pragma once

// Accelerated proximal gradient on  h(x) + lambda ||x||_1  with the momentum sequence
// theta_t = 2 / (t + 2):
//
//   x^{t+1}     = soft_threshold(w^t - grad h(w^t) / L, lambda / L)
//   theta_{t+1} = 2 / (t + 3)
//   w^{t+1}     = x^{t+1} + ((1 - theta_t) / theta_t) theta_{t+1} (x^{t+1} - x^t)
//
// The engine is generic over the coefficient type (vector or J x K matrix) through a model:
//
//   image_type image(const coef_type&)                 linear map used by the loss
//   void gradient(const coef_type&, const image_type&, coef_type& out)   grad h
//   ObjectiveValues objective(const coef_type&, const image_type&)       exact f and smoothed f~
//   double lipschitz(), double lambda()

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spg/error.hpp"
#include "spg/penalty.hpp"

namespace spg {

/// Entrywise sign(v) * max(0, |v| - threshold). Entries with |v| <= threshold become exactly +0.0.
template <class Derived>
auto soft_threshold(const Eigen::DenseBase<Derived>& v, double threshold) {
  if (!(threshold >= 0.0)) throw ArgumentError("soft_threshold: threshold must be non-negative");
  using Plain = typename Derived::PlainObject;
  Plain out = v.derived().unaryExpr([threshold](double x) {
    return std::abs(x) <= threshold ? 0.0 : x - std::copysign(threshold, x);
  });
  return out;
}

enum class SolverStatus { running, converged, max_iter, target_reached, error };

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::running: return "running";
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iter: return "max_iter";
    case SolverStatus::target_reached: return "target_reached";
    case SolverStatus::error: return "error";
  }
  return "unknown";
}

struct TraceRecord {
  Index t = 0;
  double f = 0.0;         ///< exact objective
  double f_smooth = 0.0;  ///< objective with Omega replaced by f_mu
  double elapsed_s = 0.0;
};

struct Trace {
  std::string method;
  double mu = 0.0;
  std::string mu_source;  ///< "epsilon", "explicit", "default", or "none"
  double lipschitz = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;

  std::vector<TraceRecord> records;

  SolverStatus status = SolverStatus::running;
  Index iterations = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();       ///< exact f at the returned point
  double best_objective = std::numeric_limits<double>::quiet_NaN();  ///< lowest f seen
  Index nnz = 0;
  double elapsed_s = 0.0;
  std::string message;

  /// First iteration whose exact objective is <= target, if any (needs record_trace).
  std::optional<Index> first_iteration_below(double target) const {
    for (const auto& r : records)
      if (r.f <= target) return r.t;
    return std::nullopt;
  }
  std::optional<double> first_time_below(double target) const {
    for (const auto& r : records)
      if (r.f <= target) return r.elapsed_s;
    return std::nullopt;
  }
};

struct ObjectiveValues {
  double f = 0.0;
  double f_smooth = 0.0;
};

/// Stopping controls shared by the accelerated solver and the subgradient baseline.
struct StopRule {
  Index max_iter = 20000;
  /// Stop when |f_t - f_{t-1}| / max(1, |f_{t-1}|) < rel_tol; 0 disables the rule.
  double rel_tol = 1e-6;
  /// Stop as soon as the exact objective reaches this value.
  std::optional<double> target_objective;
  bool record_trace = true;

  void validate() const {
    if (max_iter < 1) throw ArgumentError("max_iter must be >= 1");
    if (!(rel_tol >= 0.0)) throw ArgumentError("rel_tol must be non-negative");
  }
};

template <class Coef>
Index count_nonzeros(const Coef& x) {
  return static_cast<Index>((x.array() != 0.0).count());
}

template <class Model>
struct SolverState {
  using coef_type = typename Model::coef_type;
  using image_type = typename Model::image_type;

  Index t = 0;
  coef_type beta;
  coef_type w;
  double theta = 1.0;
  double L = 0.0;
  image_type beta_image;
  image_type w_image;
};

template <class Model>
SolverState<Model> initial_state(const Model& model, const typename Model::coef_type& beta0) {
  SolverState<Model> s;
  s.t = 0;
  s.beta = beta0;
  s.w = beta0;
  s.theta = 1.0;
  s.L = model.lipschitz();
  if (!(s.L > 0.0) || !std::isfinite(s.L)) throw SolverError("Lipschitz constant must be positive and finite");
  s.beta_image = model.image(beta0);
  s.w_image = s.beta_image;
  return s;
}

/// One iteration of the accelerated proximal gradient method.
template <class Model>
SolverState<Model> fista_step(SolverState<Model> state, const Model& model) {
  using coef_type = typename Model::coef_type;
  coef_type grad;
  model.gradient(state.w, state.w_image, grad);
  if (!grad.allFinite())
    throw SolverError("non-finite gradient at iteration " + std::to_string(state.t + 1) +
                      " (check the data scale and the smoothing parameter)");

  coef_type next = soft_threshold(state.w - grad / state.L, model.lambda() / state.L);
  auto next_image = model.image(next);

  const double theta_next = 2.0 / (static_cast<double>(state.t) + 3.0);
  const double momentum = (1.0 - state.theta) / state.theta * theta_next;

  state.w = next + momentum * (next - state.beta);
  state.w_image = next_image + momentum * (next_image - state.beta_image);
  state.beta = std::move(next);
  state.beta_image = std::move(next_image);
  state.theta = theta_next;
  ++state.t;
  return state;
}

template <class Coef>
struct SolveResult {
  Coef beta;
  Trace trace;
};

namespace detail {

inline bool relative_change_below(double current, double previous, double rel_tol) {
  return std::abs(current - previous) / std::max(1.0, std::abs(previous)) < rel_tol;
}

}  // namespace detail

/// Runs fista_step until the stop rule fires. `trace` arrives with its header filled in.
template <class Model>
SolveResult<typename Model::coef_type> run_fista(const Model& model, const typename Model::coef_type& beta0,
                                                 const StopRule& stop, Trace trace) {
  stop.validate();
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  auto state = initial_state(model, beta0);
  trace.lipschitz = state.L;
  trace.lambda = model.lambda();

  ObjectiveValues obj = model.objective(state.beta, state.beta_image);
  if (!std::isfinite(obj.f)) throw SolverError("non-finite objective at the starting point");
  if (stop.record_trace) trace.records.push_back({0, obj.f, obj.f_smooth, seconds()});
  trace.best_objective = obj.f;

  if (stop.target_objective && obj.f <= *stop.target_objective) {
    trace.status = SolverStatus::target_reached;
  } else {
    while (true) {
      const double previous = obj.f;
      state = fista_step(std::move(state), model);
      obj = model.objective(state.beta, state.beta_image);
      if (!std::isfinite(obj.f)) {
        trace.status = SolverStatus::error;
        trace.message = "non-finite objective at iteration " + std::to_string(state.t);
        throw SolverError(trace.message);
      }
      trace.best_objective = std::min(trace.best_objective, obj.f);
      if (stop.record_trace) trace.records.push_back({state.t, obj.f, obj.f_smooth, seconds()});

      if (stop.target_objective && obj.f <= *stop.target_objective) {
        trace.status = SolverStatus::target_reached;
        break;
      }
      if (detail::relative_change_below(obj.f, previous, stop.rel_tol)) {
        trace.status = SolverStatus::converged;
        break;
      }
      if (state.t >= stop.max_iter) {
        trace.status = SolverStatus::max_iter;
        break;
      }
    }
  }

  trace.iterations = state.t;
  trace.objective = obj.f;
  trace.nnz = count_nonzeros(state.beta);
  trace.elapsed_s = seconds();
  return {std::move(state.beta), std::move(trace)};
}

}  // namespace spg
