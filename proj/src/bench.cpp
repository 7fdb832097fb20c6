#include "gsnmf/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

#include <json.hpp>

#include "gsnmf/error.hpp"
#include "gsnmf/io.hpp"
#include "gsnmf/random.hpp"
#include "gsnmf/spa.hpp"

namespace gsnmf {

namespace {

constexpr std::pair<Algorithm, std::string_view> kAlgorithmNames[] = {
    {Algorithm::gspa, "gspa"},   {Algorithm::gsfgm, "gsfgm"}, {Algorithm::spa_star, "spa-star"},
    {Algorithm::spa_c, "spa-c"}, {Algorithm::spa_r, "spa-r"}, {Algorithm::nmf, "nmf"},
};

}  // namespace

std::string_view algorithm_name(Algorithm a) noexcept {
  for (const auto& [alg, name] : kAlgorithmNames)
    if (alg == a) return name;
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [alg, n] : kAlgorithmNames)
    if (n == name) return alg;
  throw DomainError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view generator_name(Generator g) noexcept {
  return g == Generator::fully_random ? "fully-random" : "middle-point";
}

Generator parse_generator(std::string_view name) {
  if (name == "fully-random") return Generator::fully_random;
  if (name == "middle-point") return Generator::middle_point;
  throw DomainError("unknown generator '" + std::string(name) + "'");
}

std::vector<double> logspace(double lo, double hi, int num) {
  std::vector<double> out;
  if (num <= 0) return out;
  if (num == 1) return {std::pow(10.0, hi)};
  for (int k = 0; k < num; ++k) {
    const double e = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(num - 1);
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

AlgorithmRun run_algorithm(const DenseMatrix& m, Algorithm algo, Index r1, Index r2, const AlgorithmOptions& opts) {
  AlgorithmRun run{algo, std::nullopt, {}, 1.0, 0.0};
  const Index r = r1 + r2;
  const auto t0 = std::chrono::steady_clock::now();

  if (algo == Algorithm::nmf) {
    NmfResult res = nmf_ahals(m, r, opts.nmf_iters, opts.nmf_seed);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.relative_error = frobenius_norm(m - multiply(res.w, res.h)) / frobenius_norm(m);
    run.factors = {std::move(res.w), std::move(res.h)};
    return run;
  }

  IndexSets sets;
  switch (algo) {
    case Algorithm::gspa:
      sets = gspa(m, r).sets;
      break;
    case Algorithm::gsfgm: {
      const FgmInit init = init_fgm(m, r, opts.fgm.lambda_tilde, opts.fit);
      const SelfExpressiveSolution sol = gsfgm_solve(m, r1, r2, opts.fgm, init);
      sets = post_process_diagonal(sol.x, sol.y, r1, r2);
      break;
    }
    case Algorithm::spa_star:
      sets = spa_star(m, r1, r2);
      break;
    case Algorithm::spa_c:
      sets = spa_c(m, r);
      break;
    case Algorithm::spa_r:
      sets = spa_r(m, r);
      break;
    case Algorithm::nmf:
      break;
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (sets.total() == 0) throw Error(std::string(algorithm_name(algo)) + " selected no columns or rows");
  GsDecomposition dec = fit_weights(m, sets, opts.fit);
  run.relative_error = dec.relative_error;
  run.factors = assemble_factors(m, dec);
  run.decomposition = std::move(dec);
  return run;
}

void SweepConfig::validate() const {
  if (noise_levels.empty()) throw DomainError("sweep: no noise levels");
  for (std::size_t k = 0; k < noise_levels.size(); ++k) {
    if (!(noise_levels[k] >= 0.0) || !std::isfinite(noise_levels[k]))
      throw DomainError("sweep: noise levels must be finite and >= 0");
    if (k > 0 && !(noise_levels[k] > noise_levels[k - 1])) throw DomainError("sweep: noise levels must ascend");
  }
  if (trials < 1) throw DomainError("sweep: trials must be >= 1");
  if (algorithms.empty()) throw DomainError("sweep: no algorithms selected");
  if (workers < 1) throw DomainError("sweep: workers must be >= 1");
  if (generator == Generator::fully_random) {
    if (r1 + r2 == 0 || r1 + r2 > std::min(m, n)) throw DomainError("sweep: ranks do not fit the dimensions");
  }
}

std::uint64_t trial_seed(std::uint64_t base_seed, Index eps_index, int trial) {
  return derive_seed(base_seed, eps_index, static_cast<std::uint64_t>(trial));
}

SyntheticInstance generate(const SweepConfig& cfg, double eps, std::uint64_t seed) {
  if (cfg.generator == Generator::middle_point) return gen_middle_point(eps, seed);
  return gen_fully_random(cfg.m, cfg.n, cfg.r1, cfg.r2, eps, seed);
}

namespace {

// Pads W with zero columns and H with zero rows up to rank r.
Factors pad_factors(Factors f, Index r) {
  const Index have = f.w.cols();
  if (have >= r) return f;
  DenseMatrix w(f.w.rows(), r), h(r, f.h.cols());
  for (Index i = 0; i < f.w.rows(); ++i)
    for (Index k = 0; k < have; ++k) w(i, k) = f.w(i, k);
  for (Index k = 0; k < have; ++k) std::ranges::copy(f.h.row(k), h.row(k).begin());
  return {std::move(w), std::move(h)};
}

}  // namespace

ExperimentRecord score_run(const SyntheticInstance& inst, const AlgorithmRun& run) {
  ExperimentRecord rec;
  rec.algorithm = run.algorithm;
  rec.epsilon = inst.noise_level;
  rec.seed = inst.seed;
  rec.relative_error = run.relative_error;
  rec.wall_seconds = run.seconds;
  const Index r = inst.truth.w_star.cols();
  if (run.decomposition) {
    rec.accuracy = accuracy(run.decomposition->sets, inst.truth.sets);
    rec.r1_found = run.decomposition->sets.cols.size();
    rec.r2_found = run.decomposition->sets.rows.size();
  }
  const Factors padded = pad_factors(run.factors, r);
  rec.distance = distance_to_ground_truth(padded.w, padded.h, inst.truth);
  return rec;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const Index n_eps = cfg.noise_levels.size();
  const Index n_alg = cfg.algorithms.size();
  const Index jobs = n_eps * static_cast<Index>(cfg.trials);
  const bool middle = cfg.generator == Generator::middle_point;
  const Index r1 = middle ? kMiddlePointR1 : cfg.r1;
  const Index r2 = middle ? kMiddlePointR2 : cfg.r2;
  std::vector<ExperimentRecord> records(jobs * n_alg);

  auto run_job = [&](Index job) {
    const Index e = job / static_cast<Index>(cfg.trials);
    const int trial = static_cast<int>(job % static_cast<Index>(cfg.trials));
    const double eps = cfg.noise_levels[e];
    const std::uint64_t seed = trial_seed(cfg.base_seed, e, trial);
    std::optional<SyntheticInstance> inst;
    std::string gen_error;
    try {
      inst = generate(cfg, eps, seed);
    } catch (const std::exception& ex) {
      gen_error = ex.what();
    }
    for (Index a = 0; a < n_alg; ++a) {
      ExperimentRecord rec;
      rec.algorithm = cfg.algorithms[a];
      if (inst) {
        try {
          AlgorithmOptions opts = cfg.options;
          opts.nmf_seed = derive_seed(seed, 0x6e6d66);
          const AlgorithmRun run = run_algorithm(inst->m, cfg.algorithms[a], r1, r2, opts);
          rec = score_run(*inst, run);
        } catch (const std::exception& ex) {
          rec.failed = true;
          rec.error = ex.what();
        }
      } else {
        rec.failed = true;
        rec.error = gen_error;
      }
      rec.algorithm = cfg.algorithms[a];
      rec.eps_index = e;
      rec.epsilon = eps;
      rec.trial = trial;
      rec.seed = seed;
      records[job * n_alg + a] = std::move(rec);
    }
  };

  const Index workers = std::min<Index>(static_cast<Index>(cfg.workers), jobs);
  if (workers <= 1) {
    for (Index job = 0; job < jobs; ++job) run_job(job);
  } else {
    std::atomic<Index> next{0};
    std::vector<std::thread> pool;
    for (Index w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (Index job = next++; job < jobs; job = next++) run_job(job);
      });
    }
    for (auto& t : pool) t.join();
  }

  SweepResult result;
  result.records = std::move(records);
  result.aggregates = aggregate(result.records);
  return result;
}

std::vector<AggregateRow> aggregate(const std::vector<ExperimentRecord>& records) {
  struct Acc {
    double acc = 0.0, err = 0.0, dist = 0.0, secs = 0.0;
    int n = 0, n_acc = 0;
  };
  // Keyed by (eps index, algorithm) so the result does not depend on record order.
  std::map<std::pair<Index, int>, std::pair<double, Acc>> table;
  for (const auto& r : records) {
    auto& [eps, acc] = table[{r.eps_index, static_cast<int>(r.algorithm)}];
    eps = r.epsilon;
    if (r.failed) continue;
    acc.err += r.relative_error;
    acc.dist += r.distance;
    acc.secs += r.wall_seconds;
    ++acc.n;
    if (r.accuracy) {
      acc.acc += *r.accuracy;
      ++acc.n_acc;
    }
  }
  std::vector<AggregateRow> rows;
  for (const auto& [key, value] : table) {
    const auto& [eps, acc] = value;
    AggregateRow row;
    row.algorithm = static_cast<Algorithm>(key.second);
    row.epsilon = eps;
    row.count = acc.n;
    if (acc.n > 0) {
      row.relative_error = acc.err / acc.n;
      row.distance = acc.dist / acc.n;
      row.wall_seconds = acc.secs / acc.n;
    }
    if (acc.n_acc > 0) row.accuracy = acc.acc / acc.n_acc;
    rows.push_back(row);
  }
  return rows;
}

namespace {

void write_metric_csv(const std::filesystem::path& path, const SweepConfig& cfg, const SweepResult& res,
                      const std::function<std::optional<double>(const AggregateRow&)>& pick) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epsilon";
  for (Algorithm a : cfg.algorithms) out << ',' << algorithm_name(a);
  out << '\n';
  for (double eps : cfg.noise_levels) {
    out << io::format_double(eps);
    for (Algorithm a : cfg.algorithms) {
      out << ',';
      for (const auto& row : res.aggregates) {
        if (row.algorithm == a && row.epsilon == eps && row.count > 0) {
          if (const auto v = pick(row)) out << io::format_double(*v);
        }
      }
    }
    out << '\n';
  }
}

nlohmann::json config_json(const SweepConfig& cfg) {
  nlohmann::json algos = nlohmann::json::array();
  for (Algorithm a : cfg.algorithms) algos.push_back(std::string(algorithm_name(a)));
  return {
      {"generator", std::string(generator_name(cfg.generator))},
      {"noise_levels", cfg.noise_levels},
      {"trials", cfg.trials},
      {"algorithms", algos},
      {"m", cfg.m},
      {"n", cfg.n},
      {"r1", cfg.r1},
      {"r2", cfg.r2},
      {"base_seed", cfg.base_seed},
      {"lambda_tilde", cfg.options.fgm.lambda_tilde},
      {"delta", cfg.options.fgm.delta},
      {"max_iter", cfg.options.fgm.max_iter},
      {"nmf_iters", cfg.options.nmf_iters},
      {"fit_inner_iters", cfg.options.fit.inner_iters},
      {"fit_tol", cfg.options.fit.tol},
  };
}

}  // namespace

void emit_figure_data(const SweepConfig& cfg, const SweepResult& result, const std::filesystem::path& out_dir) {
  if (result.records.empty()) throw DomainError("emit_figure_data: no records");
  std::filesystem::create_directories(out_dir);
  write_metric_csv(out_dir / "accuracy.csv", cfg, result, [](const AggregateRow& r) { return r.accuracy; });
  write_metric_csv(out_dir / "relative_error.csv", cfg, result,
                   [](const AggregateRow& r) { return std::optional<double>(r.relative_error); });
  write_metric_csv(out_dir / "distance.csv", cfg, result,
                   [](const AggregateRow& r) { return std::optional<double>(r.distance); });

  {
    std::ofstream out(out_dir / "records.csv");
    if (!out) throw Error("cannot write records.csv");
    out << "algorithm,eps_index,epsilon,trial,seed,accuracy,relative_error,distance,r1_found,r2_found,failed\n";
    for (const auto& r : result.records) {
      out << algorithm_name(r.algorithm) << ',' << r.eps_index << ',' << io::format_double(r.epsilon) << ','
          << r.trial << ',' << r.seed << ',' << (r.accuracy ? io::format_double(*r.accuracy) : "") << ','
          << (r.failed ? "" : io::format_double(r.relative_error)) << ','
          << (r.failed ? "" : io::format_double(r.distance)) << ',' << r.r1_found << ',' << r.r2_found << ','
          << (r.failed ? 1 : 0) << '\n';
    }
  }

  {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& r : result.records) {
      if (r.failed) {
        failures.push_back({{"algorithm", std::string(algorithm_name(r.algorithm))},
                            {"eps_index", r.eps_index},
                            {"trial", r.trial},
                            {"error", r.error}});
      }
    }
    std::ofstream out(out_dir / "manifest.json");
    out << nlohmann::json{{"config", config_json(cfg)},
                          {"files", {"accuracy.csv", "relative_error.csv", "distance.csv", "records.csv"}},
                          {"failures", failures}}
               .dump(2)
        << '\n';
  }

  {
    nlohmann::json timing = nlohmann::json::array();
    for (const auto& row : result.aggregates) {
      timing.push_back({{"algorithm", std::string(algorithm_name(row.algorithm))},
                        {"epsilon", row.epsilon},
                        {"mean_seconds", row.wall_seconds}});
    }
    std::ofstream out(out_dir / "timing.json");
    out << timing.dump(2) << '\n';
  }
}

void save_decomposition(const std::filesystem::path& json_path, const GsDecomposition& dec) {
  const auto dir = json_path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  const std::string stem = json_path.stem().string();
  const std::string p1_name = stem + "_p1.csv";
  const std::string p2_name = stem + "_p2.csv";
  io::write_matrix(dir / p1_name, dec.p1);
  io::write_matrix(dir / p2_name, dec.p2);
  std::vector<Index> cols = dec.sets.cols, rows = dec.sets.rows;
  for (Index& c : cols) ++c;
  for (Index& r : rows) ++r;
  std::ofstream out(json_path);
  if (!out) throw Error("cannot write " + json_path.string());
  out << nlohmann::json{{"cols", cols},
                        {"rows", rows},
                        {"index_base", 1},
                        {"m", dec.p2.rows()},
                        {"n", dec.p1.cols()},
                        {"relative_error", dec.relative_error},
                        {"p1_file", p1_name},
                        {"p2_file", p2_name}}
             .dump(2)
      << '\n';
}

GsDecomposition load_decomposition(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ParseError("cannot open " + json_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(json_path.string() + ": " + ex.what());
  }
  try {
    const Index base = doc.value("index_base", 1);
    auto shift = [&](std::vector<Index> v) {
      for (Index& x : v) {
        if (x < base) throw ParseError(json_path.string() + ": index below base");
        x -= base;
      }
      return v;
    };
    GsDecomposition dec;
    dec.sets = IndexSets(shift(doc.at("cols").get<std::vector<Index>>()), shift(doc.at("rows").get<std::vector<Index>>()));
    const auto dir = json_path.parent_path();
    const Index m = doc.at("m").get<Index>(), n = doc.at("n").get<Index>();
    const Index r1 = dec.sets.cols.size(), r2 = dec.sets.rows.size();
    // An empty block is written as an empty file, so only the non-empty ones are read.
    dec.p1 = r1 == 0 ? DenseMatrix(0, n) : io::read_matrix(dir / doc.at("p1_file").get<std::string>());
    dec.p2 = r2 == 0 ? DenseMatrix(m, 0) : io::read_matrix(dir / doc.at("p2_file").get<std::string>());
    if (dec.p1.rows() != r1 || dec.p1.cols() != n || dec.p2.rows() != m || dec.p2.cols() != r2)
      throw ParseError(json_path.string() + ": weight matrix shapes do not match the index sets");
    dec.relative_error = doc.value("relative_error", 1.0);
    return dec;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(json_path.string() + ": " + ex.what());
  }
}

}  // namespace gsnmf
