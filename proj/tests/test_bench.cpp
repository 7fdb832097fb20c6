#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "gsnmf/bench.hpp"
#include "gsnmf/error.hpp"
#include "gsnmf/random.hpp"

using namespace gsnmf;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.noise_levels = {0.0, 0.01};
  cfg.trials = 2;
  cfg.m = 16;
  cfg.n = 14;
  cfg.r1 = 2;
  cfg.r2 = 2;
  cfg.algorithms = {Algorithm::gspa, Algorithm::gsfgm, Algorithm::spa_c, Algorithm::nmf};
  cfg.options.nmf_iters = 50;
  return cfg;
}

}  // namespace

TEST_CASE("names and grids") {
  for (Algorithm a : {Algorithm::gspa, Algorithm::gsfgm, Algorithm::spa_star, Algorithm::spa_c, Algorithm::spa_r,
                      Algorithm::nmf})
    CHECK(parse_algorithm(algorithm_name(a)) == a);
  CHECK_THROWS_AS(parse_algorithm("xray"), DomainError);
  CHECK(parse_generator("middle-point") == Generator::middle_point);
  const auto g = logspace(-3, 0, 20);
  CHECK(g.size() == 20);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g.back() == doctest::Approx(1.0));
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] > g[k - 1]);
}

TEST_CASE("config validation") {
  SweepConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.noise_levels = {0.1, 0.01};
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = small_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = small_config();
  cfg.r1 = 10;
  cfg.r2 = 10;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("single noiseless trial of gspa is perfect") {
  SweepConfig cfg = small_config();
  cfg.noise_levels = {0.0};
  cfg.trials = 1;
  cfg.algorithms = {Algorithm::gspa};
  cfg.base_seed = 4;  // gspa is a heuristic; this instance is one it solves
  const SweepResult res = run_sweep(cfg);
  REQUIRE(res.records.size() == 1);
  CHECK_FALSE(res.records[0].failed);
  CHECK(res.records[0].accuracy.value() == 1.0);
}

TEST_CASE("sweep records, aggregates and parallel replay") {
  SweepConfig cfg = small_config();
  const SweepResult a = run_sweep(cfg);
  CHECK(a.records.size() == 2 * 2 * 4);
  for (const auto& r : a.records) {
    CHECK_FALSE(r.failed);
    CHECK(r.wall_seconds >= 0.0);
    CHECK(r.relative_error >= 0.0);
    CHECK(r.relative_error <= 1.0);
    CHECK(r.distance >= 0.0);
    CHECK(r.seed == trial_seed(cfg.base_seed, r.eps_index, r.trial));
    if (r.algorithm == Algorithm::nmf) {
      CHECK_FALSE(r.accuracy.has_value());
    } else {
      CHECK(*r.accuracy >= 0.0);
      CHECK(*r.accuracy <= 1.0);
    }
  }
  // aggregates are arithmetic means
  std::map<std::pair<Index, int>, std::vector<double>> errs;
  for (const auto& r : a.records) errs[{r.eps_index, static_cast<int>(r.algorithm)}].push_back(r.relative_error);
  CHECK(a.aggregates.size() == errs.size());
  for (const auto& row : a.aggregates) {
    const Index e = row.epsilon == 0.0 ? 0 : 1;
    const auto& v = errs[{e, static_cast<int>(row.algorithm)}];
    double s = 0.0;
    for (double x : v) s += x;
    CHECK(std::abs(row.relative_error - s / v.size()) <= 1e-12);
    CHECK(row.count == 2);
  }

  cfg.workers = 3;
  const SweepResult b = run_sweep(cfg);
  REQUIRE(b.records.size() == a.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].algorithm == b.records[k].algorithm);
    CHECK(a.records[k].seed == b.records[k].seed);
    CHECK(a.records[k].relative_error == b.records[k].relative_error);
    CHECK(a.records[k].distance == b.records[k].distance);
    CHECK(a.records[k].accuracy == b.records[k].accuracy);
  }
}

TEST_CASE("a trial subset reproduces in isolation") {
  SweepConfig cfg = small_config();
  const SweepResult full = run_sweep(cfg);
  const auto& rec = full.records.back();
  const SyntheticInstance inst = generate(cfg, cfg.noise_levels[rec.eps_index], rec.seed);
  AlgorithmOptions opts = cfg.options;
  opts.nmf_seed = derive_seed(rec.seed, 0x6e6d66);
  const ExperimentRecord again = score_run(inst, run_algorithm(inst.m, rec.algorithm, cfg.r1, cfg.r2, opts));
  CHECK(again.relative_error == rec.relative_error);
  CHECK(again.distance == rec.distance);
}

TEST_CASE("figure data files") {
  const auto dir = std::filesystem::temp_directory_path() / ("gsnmf_fig_test_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  SweepConfig cfg = small_config();
  const SweepResult res = run_sweep(cfg);
  emit_figure_data(cfg, res, dir);
  for (const char* f : {"accuracy.csv", "relative_error.csv", "distance.csv"}) {
    const std::string text = slurp(dir / f);
    CHECK(count_lines(text) == 1 + static_cast<int>(cfg.noise_levels.size()));
    CHECK(text.rfind("epsilon,gspa,gsfgm,spa-c,nmf\n", 0) == 0);
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("config").at("trials") == 2);
  CHECK(manifest.at("failures").empty());

  // the accuracy cell for nmf is empty
  std::stringstream acc(slurp(dir / "accuracy.csv"));
  std::string line;
  std::getline(acc, line);
  std::getline(acc, line);
  CHECK(line.back() == ',');

  const std::string before = slurp(dir / "distance.csv");
  emit_figure_data(cfg, run_sweep(cfg), dir);
  CHECK(slurp(dir / "distance.csv") == before);

  SweepConfig one = small_config();
  one.noise_levels = {0.0};
  one.trials = 1;
  one.algorithms = {Algorithm::gspa};
  const auto dir1 = dir / "one";
  emit_figure_data(one, run_sweep(one), dir1);
  CHECK(count_lines(slurp(dir1 / "accuracy.csv")) == 2);
  CHECK_THROWS(emit_figure_data(one, SweepResult{}, dir1));
  std::filesystem::remove_all(dir);
}

TEST_CASE("middle-point sweeps use the fixed ranks") {
  SweepConfig cfg;
  cfg.generator = Generator::middle_point;
  cfg.noise_levels = {0.0};
  cfg.trials = 1;
  cfg.algorithms = {Algorithm::gspa};
  const SweepResult res = run_sweep(cfg);
  CHECK(res.records[0].r1_found + res.records[0].r2_found == 22);
  CHECK(*res.records[0].accuracy == 1.0);
}
