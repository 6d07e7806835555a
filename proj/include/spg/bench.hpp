#pragma once

// Side-by-side timing of the smoothing proximal gradient solver ("proxgrad") and the
// subgradient baseline ("fobos") on one instance.
//
// Protocol: a reference objective f_ref is fixed first (given, or taken from a long proxgrad
// run). Every method then stops as soon as its exact objective drops to target_factor * f_ref or
// at the iteration cap; the relative-change rule applies only when there is no reference.
// Methods run sequentially.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spg/error.hpp"
#include "spg/fista.hpp"
#include "spg/fobos.hpp"
#include "spg/multivariate.hpp"
#include "spg/solver.hpp"

namespace spg {

struct BenchOptions {
  Index max_iter = 20000;
  double rel_tol = 1e-6;
  double target_factor = 1.001;
  /// Known reference objective; computed with a long proxgrad run when absent.
  std::optional<double> reference;
  bool compute_reference = true;
  Index reference_max_iter = 50000;
  double reference_rel_tol = 1e-10;
  /// Smoothing parameter for proxgrad (default 1e-4).
  std::optional<double> mu;
  /// FOBOS step scale (default 0.1 / sqrt(N J K)).
  std::optional<double> fobos_c;
};

struct BenchMethodResult {
  std::string name;
  Index iterations = 0;
  double wall_time_s = 0.0;
  double objective = 0.0;
  Index nnz = 0;
  std::string status;
};

struct BenchReport {
  std::string instance;
  Index N = 0, J = 0, K = 1;
  double lambda = 0.0, gamma = 0.0;
  std::optional<double> reference;
  std::string reference_source;
  std::optional<double> target;
  std::vector<BenchMethodResult> methods;

  const BenchMethodResult* find(const std::string& name) const {
    for (const auto& m : methods)
      if (m.name == name) return &m;
    return nullptr;
  }
};

using BenchProblem = std::variant<Problem, MultiProblem>;

namespace detail {

inline BenchMethodResult summarize(const std::string& name, const Trace& t) {
  return {name, t.iterations, t.elapsed_s, t.objective, t.nnz, to_string(t.status)};
}

inline Trace run_method(const BenchProblem& problem, const std::string& method, const StopRule& stop,
                        const BenchOptions& opt) {
  if (method == "proxgrad") {
    if (const auto* p = std::get_if<Problem>(&problem)) {
      SolverConfig cfg;
      cfg.mu = opt.mu;
      cfg.stop = stop;
      return solve(*p, cfg).trace;
    }
    MultiSolverConfig cfg;
    cfg.base.mu = opt.mu;
    cfg.base.stop = stop;
    return solve_multivariate(std::get<MultiProblem>(problem), cfg).trace;
  }
  if (method == "fobos") {
    FobosConfig cfg;
    cfg.c = opt.fobos_c;
    cfg.stop = stop;
    if (const auto* p = std::get_if<Problem>(&problem)) return solve_fobos(*p, cfg).trace;
    return solve_fobos(std::get<MultiProblem>(problem), cfg).trace;
  }
  throw ArgumentError("bench: unknown method \"" + method + "\" (expected proxgrad or fobos)");
}

}  // namespace detail

inline BenchReport run_bench(const BenchProblem& problem, const std::vector<std::string>& methods,
                             const BenchOptions& opt = {}) {
  if (methods.empty()) throw ArgumentError("bench: no methods requested");
  BenchReport report;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        report.lambda = p.lambda;
        report.gamma = p.gamma();
        if constexpr (std::is_same_v<T, Problem>) {
          report.N = p.data.samples();
          report.J = p.data.features();
        } else {
          report.N = p.X.rows();
          report.J = p.X.cols();
          report.K = p.Y.cols();
        }
      },
      problem);

  if (opt.reference) {
    report.reference = opt.reference;
    report.reference_source = "given";
  } else if (opt.compute_reference) {
    StopRule long_run;
    long_run.max_iter = opt.reference_max_iter;
    long_run.rel_tol = opt.reference_rel_tol;
    long_run.record_trace = false;
    const Trace ref = detail::run_method(problem, "proxgrad", long_run, opt);
    report.reference = ref.best_objective;
    report.reference_source = "proxgrad long run (" + std::to_string(ref.iterations) + " iterations)";
  }

  StopRule stop;
  stop.max_iter = opt.max_iter;
  stop.rel_tol = opt.rel_tol;
  stop.record_trace = false;
  if (report.reference) {
    report.target = opt.target_factor * *report.reference;
    stop.target_objective = report.target;
    stop.rel_tol = 0.0;
  }
  for (const auto& m : methods) report.methods.push_back(detail::summarize(m, detail::run_method(problem, m, stop, opt)));
  return report;
}

inline nlohmann::json bench_report_json(const BenchReport& r) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : r.methods)
    methods.push_back({{"name", m.name},
                       {"iterations", m.iterations},
                       {"wall_time_s", m.wall_time_s},
                       {"objective", m.objective},
                       {"nnz", m.nnz},
                       {"status", m.status}});
  nlohmann::json j = {{"instance", r.instance}, {"N", r.N},           {"J", r.J},
                      {"K", r.K},               {"lambda", r.lambda}, {"gamma", r.gamma},
                      {"methods", methods}};
  j["reference_objective"] = r.reference ? nlohmann::json(*r.reference) : nlohmann::json(nullptr);
  j["reference_source"] = r.reference_source;
  j["target_objective"] = r.target ? nlohmann::json(*r.target) : nlohmann::json(nullptr);
  return j;
}

}  // namespace spg
