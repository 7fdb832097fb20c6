#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gsnmf/datagen.hpp"
#include "gsnmf/decomposition.hpp"
#include "gsnmf/fgm.hpp"

namespace gsnmf {

enum class Algorithm { gspa, gsfgm, spa_star, spa_c, spa_r, nmf };
enum class Generator { fully_random, middle_point };

std::string_view algorithm_name(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view name);  // throws DomainError
std::string_view generator_name(Generator g) noexcept;
Generator parse_generator(std::string_view name);  // throws DomainError

// num points log-spaced in [10^lo, 10^hi], like MATLAB's logspace.
std::vector<double> logspace(double lo, double hi, int num);

struct AlgorithmOptions {
  FgmConfig fgm;
  FitOptions fit;
  int nmf_iters = 1000;
  std::uint64_t nmf_seed = 1;
};

// Output of one algorithm call. GS algorithms fill `decomposition` and
// `factors` from it; NMF fills only `factors`.
struct AlgorithmRun {
  Algorithm algorithm;
  std::optional<GsDecomposition> decomposition;
  Factors factors;
  double relative_error = 1.0;
  double seconds = 0.0;  // selection only: excludes weight fitting and metrics
};

// Runs the selection step on `m` (as given: no rescaling), then fits weights.
// gspa and nmf use r1 + r2 as the rank.
AlgorithmRun run_algorithm(const DenseMatrix& m, Algorithm algo, Index r1, Index r2, const AlgorithmOptions& opts);

struct SweepConfig {
  Generator generator = Generator::fully_random;
  std::vector<double> noise_levels = logspace(-3.0, 0.0, 20);
  int trials = 25;
  std::vector<Algorithm> algorithms{Algorithm::gspa,  Algorithm::gsfgm, Algorithm::spa_star,
                                    Algorithm::spa_c, Algorithm::spa_r, Algorithm::nmf};
  // Dimensions and ranks of fully-random instances; middle-point ones are fixed.
  Index m = 60;
  Index n = 60;
  Index r1 = 10;
  Index r2 = 10;
  std::uint64_t base_seed = 1;
  AlgorithmOptions options;
  int workers = 1;

  // Throws DomainError on an invalid configuration.
  void validate() const;
};

struct ExperimentRecord {
  Algorithm algorithm;
  Index eps_index = 0;
  double epsilon = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::optional<double> accuracy;  // absent for NMF
  double relative_error = 0.0;
  double distance = 0.0;
  double wall_seconds = 0.0;
  Index r1_found = 0;
  Index r2_found = 0;
  bool failed = false;
  std::string error;
};

struct AggregateRow {
  Algorithm algorithm;
  double epsilon = 0.0;
  std::optional<double> accuracy;
  double relative_error = 0.0;
  double distance = 0.0;
  double wall_seconds = 0.0;
  int count = 0;  // successful trials
};

struct SweepResult {
  std::vector<ExperimentRecord> records;  // ordered by (eps, trial, algorithm)
  std::vector<AggregateRow> aggregates;   // ordered by (eps, algorithm)
};

// seed for (eps index, trial): derive_seed(base_seed, eps_index, trial)
std::uint64_t trial_seed(std::uint64_t base_seed, Index eps_index, int trial);

SyntheticInstance generate(const SweepConfig& cfg, double eps, std::uint64_t seed);

// Scores one algorithm run against an instance's ground truth.
ExperimentRecord score_run(const SyntheticInstance& inst, const AlgorithmRun& run);

SweepResult run_sweep(const SweepConfig& cfg);

std::vector<AggregateRow> aggregate(const std::vector<ExperimentRecord>& records);

// accuracy.csv, relative_error.csv, distance.csv (rows = eps, columns =
// algorithms, cells = means), records.csv, manifest.json, and timing.json.
// Everything except timing.json is a deterministic function of the config.
void emit_figure_data(const SweepConfig& cfg, const SweepResult& result, const std::filesystem::path& out_dir);

// {cols, rows (1-based), relative_error, p1_file, p2_file} with the weight
// matrices written as CSV next to the JSON file.
void save_decomposition(const std::filesystem::path& json_path, const GsDecomposition& dec);
// Reads what save_decomposition wrote; sidecar paths resolve against the JSON file's
// directory. Throws ParseError on malformed input.
GsDecomposition load_decomposition(const std::filesystem::path& json_path);

}  // namespace gsnmf
