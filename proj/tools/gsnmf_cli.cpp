#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gsnmf/bench.hpp"
#include "gsnmf/datagen.hpp"
#include "gsnmf/error.hpp"
#include "gsnmf/fgm.hpp"
#include "gsnmf/io.hpp"
#include "gsnmf/scaling.hpp"
#include "gsnmf/simd/kernels.hpp"
#include "gsnmf/spa.hpp"

using namespace gsnmf;
using nlohmann::json;

namespace {

// Exit codes.
constexpr int kExitError = 1;
constexpr int kExitParse = 2;
constexpr int kExitScaling = 3;
constexpr int kExitInvalid = 4;
constexpr int kExitUsage = 64;

std::string one_based(const std::vector<Index>& v) {
  std::string s = "{";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(v[k] + 1);
  }
  return s + "}";
}

// "a,b,c" or "log:lo:hi:num" (exponents of ten).
std::vector<double> parse_grid(const std::string& text) {
  if (text.rfind("log:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(4));
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw DomainError("--eps-grid log form is log:lo:hi:num");
    return logspace(std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2]));
  }
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    if (!p.empty()) out.push_back(std::stod(p));
  }
  return out;
}

std::vector<Algorithm> parse_algorithms(const std::string& text) {
  std::vector<Algorithm> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) {
    if (!p.empty()) out.push_back(parse_algorithm(p));
  }
  return out;
}

int workers_from_env() {
  if (const char* v = std::getenv("GSNMF_WORKERS")) {
    const int w = std::atoi(v);
    if (w >= 1) return w;
  }
  return 1;
}

struct FgmFlags {
  double lambda_tilde = 0.25;
  double delta = 1e-4;
  int max_iter = 1000;

  void add_to(CLI::App* app) {
    app->add_option("--lambda-tilde", lambda_tilde, "GS-FGM penalty scale")->check(CLI::NonNegativeNumber);
    app->add_option("--delta", delta, "GS-FGM stopping tolerance")->check(CLI::Range(0.0, 1.0));
    app->add_option("--max-iter", max_iter, "GS-FGM iteration cap")->check(CLI::PositiveNumber);
  }
  FgmConfig config() const {
    FgmConfig cfg;
    cfg.lambda_tilde = lambda_tilde;
    cfg.delta = delta;
    cfg.max_iter = max_iter;
    return cfg;
  }
};

struct RunArgs {
  std::string input;
  std::string algo = "gspa";
  Index rank = 0;
  Index r1 = 0;
  Index r2 = 0;
  bool no_scale = false;
  bool lambda_grid = false;
  std::string post = "diagonal";
  std::string out;
  std::string trace;
  std::string log;
  int nmf_iters = 1000;
  std::uint64_t seed = 1;
  FgmFlags fgm;
};

int cmd_run(const RunArgs& a) {
  const DenseMatrix original = io::read_matrix(a.input);
  if (!is_nonnegative(original)) throw DomainError("input matrix has negative entries");
  const Algorithm algo = parse_algorithm(a.algo);

  Index r1 = a.r1, r2 = a.r2;
  const bool split_needed = algo == Algorithm::gsfgm || algo == Algorithm::spa_star;
  if (split_needed) {
    if (r1 + r2 == 0) throw DomainError(a.algo + " needs --r1 and --r2");
  } else {
    if (a.rank == 0 && r1 + r2 == 0) throw DomainError(a.algo + " needs --rank");
    if (a.rank != 0) r1 = a.rank, r2 = 0;
  }
  const Index r = r1 + r2;
  if (r > original.rows() + original.cols()) throw DomainError("rank exceeds m + n");

  DenseMatrix work = original;
  bool scaled = false, scaling_converged = true;
  if (!a.no_scale) {
    ScalingResult s = sinkhorn_scale(original);
    work = std::move(s.scaled);
    scaled = true;
    scaling_converged = s.converged;
    if (!s.converged) std::cerr << "warning: scaling did not converge in " << s.iterations << " iterations\n";
  }

  AlgorithmOptions opts;
  opts.fgm = a.fgm.config();
  opts.nmf_iters = a.nmf_iters;
  opts.nmf_seed = a.seed;

  json report{{"input", a.input}, {"algorithm", a.algo}, {"scaled", scaled}, {"scaling_converged", scaling_converged}};
  const auto t0 = std::chrono::steady_clock::now();

  if (algo == Algorithm::nmf) {
    const AlgorithmRun run = run_algorithm(original, algo, r, 0, opts);
    std::cout << "algorithm: nmf\nrank: " << r << "\nrelative_error: " << io::format_double(run.relative_error)
              << "\nseconds: " << run.seconds << '\n';
    if (!a.out.empty()) {
      const std::filesystem::path out(a.out);
      if (!out.parent_path().empty()) std::filesystem::create_directories(out.parent_path());
      const std::string stem = out.stem().string();
      io::write_matrix(out.parent_path() / (stem + "_w.csv"), run.factors.w);
      io::write_matrix(out.parent_path() / (stem + "_h.csv"), run.factors.h);
      report["rank"] = r;
      report["relative_error"] = run.relative_error;
      report["seconds"] = run.seconds;
      report["w_file"] = stem + "_w.csv";
      report["h_file"] = stem + "_h.csv";
      std::ofstream(out) << report.dump(2) << '\n';
    }
    return 0;
  }

  IndexSets sets;
  double lambda_tilde_used = a.fgm.lambda_tilde;
  switch (algo) {
    case Algorithm::gspa: {
      GspaResult g = gspa(work, r);
      sets = g.sets;
      if (!a.trace.empty()) {
        std::ofstream tr(a.trace);
        write_trace_jsonl(tr, g.trace);
      }
      break;
    }
    case Algorithm::gsfgm: {
      std::vector<double> grid{a.fgm.lambda_tilde};
      if (a.lambda_grid) grid = logspace(-3.0, 1.0, 10);
      std::ofstream log_file;
      if (!a.log.empty()) log_file.open(a.log);
      double best = std::numeric_limits<double>::infinity();
      for (double lt : grid) {
        FgmConfig cfg = opts.fgm;
        cfg.lambda_tilde = lt;
        const SelfExpressiveSolution sol =
            gsfgm_solve(work, r1, r2, cfg, std::nullopt, log_file.is_open() && grid.size() == 1 ? &log_file : nullptr);
        const IndexSets cand = a.post == "real" ? post_process_real_data(work, sol.x, sol.y, r)
                                                : post_process_diagonal(sol.x, sol.y, r1, r2);
        const double err = fit_weights(work, cand).relative_error;
        if (err < best) {
          best = err;
          sets = cand;
          lambda_tilde_used = lt;
        }
      }
      break;
    }
    case Algorithm::spa_star:
      sets = spa_star(work, r1, r2);
      break;
    case Algorithm::spa_c:
      sets = spa_c(work, r);
      break;
    case Algorithm::spa_r:
      sets = spa_r(work, r);
      break;
    case Algorithm::nmf:
      break;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (sets.total() == 0) throw Error("no columns or rows were selected");

  // Selection runs on the scaled matrix; the weights and the reported error are for the input matrix.
  const GsDecomposition dec = fit_weights(original, sets);

  std::cout << "algorithm: " << a.algo << "\nK1: " << one_based(dec.sets.cols) << "\nK2: " << one_based(dec.sets.rows)
            << "\nrelative_error: " << io::format_double(dec.relative_error) << "\nseconds: " << seconds << '\n';
  if (algo == Algorithm::gsfgm && a.lambda_grid) std::cout << "lambda_tilde: " << lambda_tilde_used << '\n';

  if (!a.out.empty()) {
    const std::filesystem::path out(a.out);
    save_decomposition(out, dec);
    json doc;
    std::ifstream(out) >> doc;
    doc.update(report);
    doc["seconds"] = seconds;
    if (algo == Algorithm::gsfgm) doc["lambda_tilde"] = lambda_tilde_used;
    std::ofstream(out) << doc.dump(2) << '\n';
  }
  return 0;
}

struct SynthArgs {
  std::string generator = "fully-random";
  Index m = 60, n = 60, r1 = 10, r2 = 10;
  double eps = 0.0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  const SyntheticInstance inst = parse_generator(a.generator) == Generator::middle_point
                                     ? gen_middle_point(a.eps, a.seed)
                                     : gen_fully_random(a.m, a.n, a.r1, a.r2, a.eps, a.seed);
  save_instance(a.out, inst);
  std::cout << "wrote " << inst.m.rows() << "x" << inst.m.cols() << " instance to " << a.out
            << "\nK1*: " << one_based(inst.truth.sets.cols) << "\nK2*: " << one_based(inst.truth.sets.rows)
            << "\nnoise_ratio: " << io::format_double(inst.noise_ratio) << '\n';
  return 0;
}

struct SweepArgs {
  std::string generator = "fully-random";
  std::string eps_grid = "log:-3:0:20";
  int trials = 25;
  std::string algos = "gspa,gsfgm,spa-star,spa-c,spa-r,nmf";
  Index m = 60, n = 60, r1 = 10, r2 = 10;
  std::uint64_t seed = 1;
  int nmf_iters = 1000;
  std::string out;
  FgmFlags fgm;
};

int cmd_sweep(const SweepArgs& a) {
  SweepConfig cfg;
  cfg.generator = parse_generator(a.generator);
  cfg.noise_levels = parse_grid(a.eps_grid);
  cfg.trials = a.trials;
  cfg.algorithms = parse_algorithms(a.algos);
  cfg.m = a.m;
  cfg.n = a.n;
  cfg.r1 = a.r1;
  cfg.r2 = a.r2;
  cfg.base_seed = a.seed;
  cfg.options.fgm = a.fgm.config();
  cfg.options.nmf_iters = a.nmf_iters;
  cfg.workers = workers_from_env();
  const SweepResult res = run_sweep(cfg);
  emit_figure_data(cfg, res, a.out);

  int failed = 0;
  for (const auto& r : res.records) failed += r.failed ? 1 : 0;
  std::cout << "records: " << res.records.size() << " (failed " << failed << ")\n";
  std::cout << "algorithm,epsilon,accuracy,relative_error,distance\n";
  for (const auto& row : res.aggregates) {
    std::cout << algorithm_name(row.algorithm) << ',' << io::format_double(row.epsilon) << ','
              << (row.accuracy ? io::format_double(*row.accuracy) : "") << ',' << io::format_double(row.relative_error)
              << ',' << io::format_double(row.distance) << '\n';
  }
  return 0;
}

struct ScaleArgs {
  std::string input, out, factors;
  double k1 = 0.0, k2 = 0.0;
  double tol = 1e-9;
  int max_iter = 10000;
};

int cmd_scale(const ScaleArgs& a) {
  const DenseMatrix m = io::read_matrix(a.input);
  if (!is_nonnegative(m)) throw DomainError("input matrix has negative entries");
  const double k1 = a.k1 > 0 ? a.k1 : static_cast<double>(m.rows());
  const double k2 = a.k2 > 0 ? a.k2 : static_cast<double>(m.cols());
  const ScalingResult s = sinkhorn_scale(m, k1, k2, {a.tol, a.max_iter});
  if (a.out.empty()) {
    io::write_csv(std::cout, s.scaled);
  } else {
    io::write_matrix(a.out, s.scaled);
  }
  if (!a.factors.empty()) {
    std::ofstream(a.factors) << json{{"row_factors", s.row_factors},
                                     {"col_factors", s.col_factors},
                                     {"converged", s.converged},
                                     {"iterations", s.iterations}}
                                    .dump(2)
                             << '\n';
  }
  std::cerr << "converged: " << (s.converged ? "yes" : "no") << ", iterations: " << s.iterations << '\n';
  return s.converged ? 0 : kExitScaling;
}

struct MetricsArgs {
  std::string instance, result;
};

int cmd_metrics(const MetricsArgs& a) {
  const SyntheticInstance inst = load_instance(a.instance);
  const GsDecomposition dec = load_decomposition(a.result);
  dec.sets.validate(inst.m.rows(), inst.m.cols());
  const double acc = accuracy(dec.sets, inst.truth.sets);
  const double err = relative_error(inst.m, dec);
  const Factors f = assemble_factors(inst.m, dec);
  json out{{"accuracy", acc}, {"relative_error", err}};
  if (f.w.cols() == inst.truth.w_star.cols()) {
    out["distance"] = distance_to_ground_truth(f.w, f.h, inst.truth);
  } else {
    out["distance"] = nullptr;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized separable NMF: column and row subset selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("gsnmf 0.1 (kernels: ") + std::string(simd::isa_name(simd::active_isa())) + ")");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "select columns and rows of a matrix file and fit the weights");
  run_cmd->add_option("input", run.input, "matrix file (.csv or .mtx)")->required();
  run_cmd->add_option("--algo", run.algo, "gspa | gsfgm | spa-star | spa-c | spa-r | nmf");
  run_cmd->add_option("--rank", run.rank, "total number of indices (gspa, spa-c, spa-r, nmf)");
  run_cmd->add_option("--r1", run.r1, "number of columns (gsfgm, spa-star)");
  run_cmd->add_option("--r2", run.r2, "number of rows (gsfgm, spa-star)");
  run_cmd->add_flag("--no-scale", run.no_scale, "skip equilibration before selection");
  run_cmd->add_flag("--lambda-grid", run.lambda_grid, "gsfgm: try 10 log-spaced lambda-tilde values in [1e-3, 10]");
  run_cmd->add_option("--post", run.post, "gsfgm post-processing: diagonal | real")
      ->check(CLI::IsMember({"diagonal", "real"}));
  run_cmd->add_option("--out", run.out, "JSON report path (weights written alongside)");
  run_cmd->add_option("--trace", run.trace, "gspa: write the extraction trace as JSON lines");
  run_cmd->add_option("--log", run.log, "gsfgm: write the per-iteration log as CSV");
  run_cmd->add_option("--nmf-iters", run.nmf_iters, "nmf: outer iterations")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "nmf: initialization seed");
  run.fgm.add_to(run_cmd);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic instance into a directory");
  synth_cmd->add_option("--generator", synth.generator, "fully-random | middle-point")
      ->check(CLI::IsMember({"fully-random", "middle-point"}));
  synth_cmd->add_option("--m", synth.m, "rows (fully-random)");
  synth_cmd->add_option("--n", synth.n, "columns (fully-random)");
  synth_cmd->add_option("--r1", synth.r1, "planted columns (fully-random)");
  synth_cmd->add_option("--r2", synth.r2, "planted rows (fully-random)");
  synth_cmd->add_option("--eps", synth.eps, "noise level")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--out", synth.out, "output directory")->required();

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "noise sweep with repeated trials; writes figure tables");
  sweep_cmd->add_option("--generator", sweep.generator, "fully-random | middle-point")
      ->check(CLI::IsMember({"fully-random", "middle-point"}));
  sweep_cmd->add_option("--eps-grid", sweep.eps_grid, "comma list, or log:lo:hi:num");
  sweep_cmd->add_option("--trials", sweep.trials, "trials per noise level")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--algo", sweep.algos, "comma-separated algorithms");
  sweep_cmd->add_option("--m", sweep.m, "rows (fully-random)");
  sweep_cmd->add_option("--n", sweep.n, "columns (fully-random)");
  sweep_cmd->add_option("--r1", sweep.r1, "planted columns (fully-random)");
  sweep_cmd->add_option("--r2", sweep.r2, "planted rows (fully-random)");
  sweep_cmd->add_option("--seed", sweep.seed, "base seed");
  sweep_cmd->add_option("--nmf-iters", sweep.nmf_iters, "nmf: outer iterations")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep.out, "output directory")->required();
  sweep.fgm.add_to(sweep_cmd);

  ScaleArgs scale;
  auto* scale_cmd = app.add_subcommand("scale", "equilibrate a matrix (column sums k1, row sums k2)");
  scale_cmd->add_option("input", scale.input, "matrix file")->required();
  scale_cmd->add_option("--k1", scale.k1, "column sum target (default m)");
  scale_cmd->add_option("--k2", scale.k2, "row sum target (default n)");
  scale_cmd->add_option("--tol", scale.tol, "relative tolerance")->check(CLI::PositiveNumber);
  scale_cmd->add_option("--max-iter", scale.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  scale_cmd->add_option("--out", scale.out, "output matrix file (default stdout)");
  scale_cmd->add_option("--factors", scale.factors, "write the diagonal factors as JSON");

  MetricsArgs metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "score a run report against a synthetic instance");
  metrics_cmd->add_option("--instance", metrics.instance, "directory written by synth")->required();
  metrics_cmd->add_option("--result", metrics.result, "JSON report written by run --out")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*synth_cmd) return cmd_synth(synth);
    if (*sweep_cmd) return cmd_sweep(sweep);
    if (*scale_cmd) return cmd_scale(scale);
    if (*metrics_cmd) return cmd_metrics(metrics);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const ScalingError& e) {
    std::cerr << "scaling error: " << e.what() << '\n';
    return kExitScaling;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ShapeError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
