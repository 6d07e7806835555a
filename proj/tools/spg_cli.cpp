// spg: command-line front end for the structured sparse regression solvers.
//
//   spg solve    --x X.csv --y y.csv [--penalty p.json] --lambda L [--gamma G] [--epsilon E | --mu M]
//                --out beta.csv [--trace trace.jsonl]
//   spg path     --x X.csv --y y.csv [--penalty p.json] --lambdas 1.0,0.5,... --out-dir D
//   spg simulate overlap|graph [--spec spec.json] [--seed S] --out-dir D
//   spg bench    --instance D [--methods proxgrad,fobos] --report report.json

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "spg/spg.hpp"

namespace fs = std::filesystem;
using spg::io::json;

namespace {

struct CommonSolveArgs {
  std::string x_path, y_path, penalty_path;
  std::string loss = "squared";
  std::optional<double> gamma;
  std::optional<double> epsilon, mu;
  spg::Index max_iter = 20000;
  double rel_tol = 1e-6;
  bool exact_graph_norm = false;
};

void add_common_solve_options(CLI::App* cmd, CommonSolveArgs& a) {
  cmd->add_option("--x", a.x_path, "design matrix CSV (N rows, J columns)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--y", a.y_path, "response CSV (N rows; K > 1 columns selects multi-task regression)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--penalty", a.penalty_path, "penalty spec JSON (omit for plain lasso)")->check(CLI::ExistingFile);
  cmd->add_option("--loss", a.loss, "squared or logistic")->check(CLI::IsMember({"squared", "logistic"}));
  cmd->add_option("--gamma", a.gamma, "structure weight; overrides the gamma in the penalty file");
  auto* eps = cmd->add_option("--epsilon", a.epsilon, "target accuracy; sets mu = epsilon / (2D)");
  auto* mu = cmd->add_option("--mu", a.mu, "smoothing parameter (default 1e-4)");
  eps->excludes(mu);
  cmd->add_option("--max-iter", a.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--rel-tol", a.rel_tol, "relative objective change tolerance (0 disables)")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--exact-graph-norm", a.exact_graph_norm, "use power iteration for ||C|| of graph penalties");
}

struct LoadedProblem {
  std::optional<spg::Problem> uni;
  std::optional<spg::MultiProblem> multi;
};

LoadedProblem load_problem(const CommonSolveArgs& a, double lambda) {
  spg::Matrix X = spg::io::read_csv(a.x_path);
  spg::Matrix Y = spg::io::read_csv(a.y_path);
  std::optional<spg::PenaltySpec> penalty;
  if (!a.penalty_path.empty()) penalty = spg::io::read_penalty(a.penalty_path);
  if (penalty && a.gamma) penalty = spg::with_gamma(*penalty, *a.gamma);
  if (!penalty && a.gamma && *a.gamma != 0.0) throw spg::ArgumentError("--gamma given without --penalty");

  LoadedProblem out;
  if (Y.cols() == 1) {
    spg::Problem p;
    p.data.X = std::move(X);
    p.data.y = Y.col(0);
    p.loss = a.loss == "logistic" ? spg::LossKind::logistic : spg::LossKind::squared;
    p.penalty = penalty;
    p.lambda = lambda;
    out.uni = std::move(p);
  } else {
    if (a.loss != "squared") throw spg::ArgumentError("multi-task regression supports the squared loss only");
    spg::MultiProblem p;
    p.X = std::move(X);
    p.Y = std::move(Y);
    p.penalty = penalty;
    p.lambda = lambda;
    out.multi = std::move(p);
  }
  return out;
}

spg::SolverConfig make_config(const CommonSolveArgs& a) {
  spg::SolverConfig cfg;
  cfg.epsilon = a.epsilon;
  cfg.mu = a.mu;
  cfg.stop.max_iter = a.max_iter;
  cfg.stop.rel_tol = a.rel_tol;
  cfg.smoothing.exact_graph_norm = a.exact_graph_norm;
  return cfg;
}

std::vector<double> parse_lambda_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw spg::ArgumentError("--lambdas: cannot parse '" + item + "'");
    }
  }
  return values;
}

void print_summary(const spg::Trace& t) {
  std::cout << t.method << ": status=" << spg::to_string(t.status) << " iterations=" << t.iterations
            << " objective=" << spg::io::format_double(t.objective) << " nnz=" << t.nnz << " mu=" << t.mu << " ("
            << t.mu_source << ")\n";
}

// ---------------------------------------------------------------------------

int run_solve(const CommonSolveArgs& a, double lambda, const std::string& out_path, const std::string& trace_path) {
  const auto loaded = load_problem(a, lambda);
  const auto cfg = make_config(a);
  spg::Trace trace;
  if (loaded.uni) {
    auto result = spg::solve(*loaded.uni, cfg);
    spg::io::write_csv(out_path, result.beta);
    trace = std::move(result.trace);
  } else {
    spg::MultiSolverConfig mcfg;
    mcfg.base = cfg;
    auto result = spg::solve_multivariate(*loaded.multi, mcfg);
    spg::io::write_csv(out_path, result.beta);
    trace = std::move(result.trace);
  }
  if (!trace_path.empty()) spg::io::write_trace_jsonl(trace_path, trace);
  print_summary(trace);
  return 0;
}

int run_path(const CommonSolveArgs& a, const std::string& lambdas_text, const std::string& out_dir, bool couple_gamma,
             bool write_traces) {
  const auto lambdas = parse_lambda_list(lambdas_text);
  if (lambdas.empty()) throw spg::ArgumentError("--lambdas is empty");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] < lambdas[i - 1])) throw spg::ArgumentError("--lambdas must be strictly descending");
  fs::create_directories(out_dir);
  auto loaded = load_problem(a, lambdas.front());
  const auto cfg = make_config(a);

  json summary = json::array();
  auto file_name = [&](std::size_t i, const char* stem, const char* ext) {
    std::ostringstream name;
    name << stem << '_' << std::setw(3) << std::setfill('0') << (i + 1) << ext;
    return (fs::path(out_dir) / name.str()).string();
  };
  auto record = [&](std::size_t i, double lambda, double gamma, const spg::Trace& t) {
    summary.push_back({{"index", i + 1},
                       {"lambda", lambda},
                       {"gamma", gamma},
                       {"objective", t.objective},
                       {"iterations", t.iterations},
                       {"nnz", t.nnz},
                       {"status", spg::to_string(t.status)},
                       {"file", fs::path(file_name(i, "beta", ".csv")).filename().string()}});
    if (write_traces) spg::io::write_trace_jsonl(file_name(i, "trace", ".jsonl"), t);
  };

  if (loaded.uni) {
    spg::PathOptions opts;
    opts.couple_gamma = couple_gamma;
    const auto path = spg::regularization_path(*loaded.uni, lambdas, cfg, opts);
    for (std::size_t i = 0; i < path.size(); ++i) {
      spg::io::write_csv(file_name(i, "beta", ".csv"), path[i].beta);
      record(i, path[i].lambda, path[i].gamma, path[i].trace);
    }
  } else {
    spg::MultiProblem p = *loaded.multi;
    spg::MultiSolverConfig mcfg;
    mcfg.base = cfg;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      p.lambda = lambdas[i];
      if (couple_gamma && p.penalty) p.penalty = spg::with_gamma(*p.penalty, lambdas[i]);
      auto result = spg::solve_multivariate(p, mcfg);
      spg::io::write_csv(file_name(i, "beta", ".csv"), result.beta);
      record(i, lambdas[i], p.gamma(), result.trace);
      mcfg.B0 = std::move(result.beta);
    }
  }
  spg::io::write_json((fs::path(out_dir) / "path.json").string(), summary);
  std::cout << "path: " << lambdas.size() << " solutions written to " << out_dir << '\n';
  return 0;
}

template <class T>
void read_field(const json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

int run_simulate(const std::string& kind, const std::string& spec_path, std::optional<std::uint64_t> seed,
                 const std::string& out_dir) {
  const json spec = spec_path.empty() ? json::object() : spg::io::read_json(spec_path);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  json meta;
  meta["kind"] = kind;
  if (kind == "overlap") {
    spg::OverlapSimSpec s;
    read_field(spec, "num_groups", s.num_groups);
    read_field(spec, "group_size", s.group_size);
    read_field(spec, "overlap", s.overlap);
    read_field(spec, "N", s.N);
    read_field(spec, "noise_sd", s.noise_sd);
    read_field(spec, "seed", s.seed);
    read_field(spec, "gamma", s.gamma);
    read_field(spec, "lambda", s.lambda);
    if (seed) s.seed = *seed;
    const auto inst = spg::gen_overlap_instance(s);
    spg::io::write_csv((dir / "X.csv").string(), inst.data.X);
    spg::io::write_csv((dir / "y.csv").string(), inst.data.y);
    spg::io::write_csv((dir / "beta_true.csv").string(), inst.true_beta);
    spg::io::write_json((dir / "penalty.json").string(), spg::io::penalty_to_json(inst.penalty));
    meta.update({{"num_groups", s.num_groups}, {"group_size", s.group_size}, {"overlap", s.overlap}, {"N", s.N},
                 {"J", s.features()}, {"noise_sd", s.noise_sd}, {"seed", s.seed}, {"gamma", s.gamma},
                 {"lambda", s.lambda}, {"response", "y.csv"}});
  } else if (kind == "graph") {
    spg::GraphSimSpec s;
    read_field(spec, "K", s.K);
    read_field(spec, "J", s.J);
    read_field(spec, "N", s.N);
    read_field(spec, "block_sizes", s.block_sizes);
    read_field(spec, "within_fraction", s.within_fraction);
    read_field(spec, "cross2_fraction", s.cross2_fraction);
    read_field(spec, "cross3_fraction", s.cross3_fraction);
    read_field(spec, "b", s.signal);
    read_field(spec, "rho", s.rho);
    read_field(spec, "noise_sd", s.noise_sd);
    read_field(spec, "seed", s.seed);
    read_field(spec, "gamma", s.gamma);
    read_field(spec, "lambda", s.lambda);
    if (seed) s.seed = *seed;
    const auto inst = spg::gen_graph_instance(s);
    for (spg::Index k : inst.correlation.excluded)
      std::cerr << "warning: output " << k + 1 << " is constant; excluded from the correlation graph\n";
    spg::io::write_csv((dir / "X.csv").string(), inst.problem.X);
    spg::io::write_csv((dir / "Y.csv").string(), inst.problem.Y);
    spg::io::write_csv((dir / "B_true.csv").string(), inst.true_B);
    spg::io::write_csv((dir / "correlation.csv").string(), inst.correlation.correlation);
    spg::io::write_json((dir / "penalty.json").string(), spg::io::penalty_to_json(inst.correlation.graph));
    meta.update({{"K", s.K}, {"J", s.J}, {"N", s.N}, {"block_sizes", s.block_sizes},
                 {"within_fraction", s.within_fraction}, {"cross2_fraction", s.cross2_fraction},
                 {"cross3_fraction", s.cross3_fraction}, {"b", s.signal}, {"rho", s.rho}, {"noise_sd", s.noise_sd},
                 {"seed", s.seed}, {"gamma", s.gamma}, {"lambda", s.lambda}, {"response", "Y.csv"},
                 {"num_edges", inst.correlation.graph.edges.size()}});
  } else {
    throw spg::ArgumentError("simulate: unknown kind '" + kind + "' (expected overlap or graph)");
  }
  spg::io::write_json((dir / "instance.json").string(), meta);
  std::cout << "simulate: " << kind << " instance written to " << out_dir << '\n';
  return 0;
}

int run_bench(const std::string& instance_dir, const std::string& methods_text, const std::string& report_path,
              spg::BenchOptions opt) {
  const fs::path dir(instance_dir);
  const json meta = spg::io::read_json((dir / "instance.json").string());
  const std::string response = meta.value("response", "y.csv");
  spg::Matrix X = spg::io::read_csv((dir / "X.csv").string());
  spg::Matrix Y = spg::io::read_csv((dir / response).string());
  std::optional<spg::PenaltySpec> penalty;
  if (fs::exists(dir / "penalty.json")) penalty = spg::io::read_penalty((dir / "penalty.json").string());
  const double lambda = meta.value("lambda", 0.0);

  spg::BenchProblem problem;
  if (Y.cols() == 1) {
    spg::Problem p;
    p.data.X = std::move(X);
    p.data.y = Y.col(0);
    p.penalty = penalty;
    p.lambda = lambda;
    problem = std::move(p);
  } else {
    spg::MultiProblem p;
    p.X = std::move(X);
    p.Y = std::move(Y);
    p.penalty = penalty;
    p.lambda = lambda;
    problem = std::move(p);
  }

  std::vector<std::string> methods;
  std::stringstream ss(methods_text);
  for (std::string m; std::getline(ss, m, ',');)
    if (!m.empty()) methods.push_back(m);

  auto report = spg::run_bench(problem, methods, opt);
  report.instance = instance_dir;
  spg::io::write_json(report_path, spg::bench_report_json(report));
  for (const auto& m : report.methods)
    std::cout << m.name << ": iterations=" << m.iterations << " wall_time_s=" << m.wall_time_s
              << " objective=" << spg::io::format_double(m.objective) << " nnz=" << m.nnz << " status=" << m.status
              << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured sparse regression with smoothing proximal gradient"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "threads for internal dense products (default 1)")->check(CLI::PositiveNumber);

  CommonSolveArgs solve_args;
  double lambda = 0.0;
  std::string out_path, trace_path;
  auto* solve_cmd = app.add_subcommand("solve", "solve one problem");
  add_common_solve_options(solve_cmd, solve_args);
  solve_cmd->add_option("--lambda", lambda, "l1 weight")->required()->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--out", out_path, "coefficients CSV (J rows, K columns)")->required();
  solve_cmd->add_option("--trace", trace_path, "per-iteration trace (JSON lines)");

  CommonSolveArgs path_args;
  std::string lambdas_text, path_dir;
  bool couple_gamma = false, path_traces = false;
  auto* path_cmd = app.add_subcommand("path", "warm-started regularization path");
  add_common_solve_options(path_cmd, path_args);
  path_cmd->add_option("--lambdas", lambdas_text, "strictly descending comma-separated lambda values")->required();
  path_cmd->add_option("--out-dir", path_dir, "output directory")->required();
  path_cmd->add_flag("--couple-gamma", couple_gamma, "set gamma = lambda at every point");
  path_cmd->add_flag("--traces", path_traces, "also write one trace file per point");

  std::string sim_kind, sim_spec, sim_dir;
  std::optional<std::uint64_t> sim_seed;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic instance");
  sim_cmd->add_option("kind", sim_kind, "overlap or graph")->required()->check(CLI::IsMember({"overlap", "graph"}));
  sim_cmd->add_option("--spec", sim_spec, "simulation parameters JSON")->check(CLI::ExistingFile);
  sim_cmd->add_option("--seed", sim_seed, "random seed (overrides the --spec file)");
  sim_cmd->add_option("--out-dir", sim_dir, "output directory")->required();

  std::string bench_dir, bench_methods = "proxgrad,fobos", bench_report;
  spg::BenchOptions bench_opt;
  std::optional<double> bench_reference, bench_mu, bench_c;
  bool bench_no_reference = false;
  auto* bench_cmd = app.add_subcommand("bench", "compare methods on a simulated instance");
  bench_cmd->add_option("--instance", bench_dir, "instance directory written by simulate")
      ->required()
      ->check(CLI::ExistingDirectory);
  bench_cmd->add_option("--methods", bench_methods, "comma-separated: proxgrad, fobos");
  bench_cmd->add_option("--report", bench_report, "report JSON")->required();
  bench_cmd->add_option("--max-iter", bench_opt.max_iter, "iteration cap per method")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--rel-tol", bench_opt.rel_tol, "relative objective change tolerance when no reference is used");
  bench_cmd->add_option("--target-factor", bench_opt.target_factor, "stop at this multiple of the reference");
  bench_cmd->add_option("--reference", bench_reference, "reference objective (default: long proxgrad run)");
  bench_cmd->add_option("--reference-iters", bench_opt.reference_max_iter, "iteration cap of the reference run");
  bench_cmd->add_flag("--no-reference", bench_no_reference, "stop on relative change only");
  bench_cmd->add_option("--mu", bench_mu, "smoothing parameter for proxgrad");
  bench_cmd->add_option("--fobos-c", bench_c, "FOBOS step scale c");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  Eigen::setNbThreads(threads);
  try {
    if (*solve_cmd) return run_solve(solve_args, lambda, out_path, trace_path);
    if (*path_cmd) return run_path(path_args, lambdas_text, path_dir, couple_gamma, path_traces);
    if (*sim_cmd) return run_simulate(sim_kind, sim_spec, sim_seed, sim_dir);
    if (*bench_cmd) {
      bench_opt.reference = bench_reference;
      bench_opt.compute_reference = !bench_no_reference;
      bench_opt.mu = bench_mu;
      bench_opt.fobos_c = bench_c;
      return run_bench(bench_dir, bench_methods, bench_report, bench_opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "spg: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
