#pragma once

#include <string>
#include <vector>

#include "svrc/algorithms.hpp"
#include "svrc/problems.hpp"

namespace svrc {

// Telemetry CSV schema (stable within a major version):
//   k,t,batch_g,batch_h,xi_norm,F,grad_norm,lambda_min,cum_bg,cum_bh,wall_ns
void write_telemetry_csv(const std::string& path, const RunResult& result);

// Recommended cubic coefficient for a problem: 13 rho + 4 L + 1 for the
// adaptive method, 3 rho / 4 rho for the non-adaptive variants, 2 rho for CR.
double default_sigma(Algorithm algo, const ProblemInstance& problem);

struct ExperimentSpec {
  ProblemKind kind = ProblemKind::kTrigSum;
  std::vector<int> n_grid;
  int d = 20;
  std::vector<double> eps_grid = {0.05};
  std::vector<Algorithm> algorithms = {Algorithm::kAdaptiveSvrc};
  int seeds = 10;
  std::uint64_t base_seed = 1;
  std::uint64_t problem_seed = 12345;
  SamplingMode sampling = SamplingMode::kWithReplacement;
  double sigma = 0;  // 0 = per-problem default
  std::string out_dir;  // empty: no files written
};

struct ScalingCell {
  Algorithm algo = Algorithm::kAdaptiveSvrc;
  int n = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::uint64_t inner_bh = 0;     // Hessian samples from inner iterations
  std::uint64_t snapshot_bh = 0;  // K * N
  std::uint64_t total_bh = 0;
  std::uint64_t total_bg = 0;
};

struct ScalingRow {
  Algorithm algo = Algorithm::kAdaptiveSvrc;
  int n = 0;
  int ok_seeds = 0;
  int failed_seeds = 0;
  double mean_inner_bh = 0;
  double mean_snapshot_bh = 0;
  double mean_total_bh = 0;
};

struct ScalingSummary {
  std::vector<ScalingRow> rows;
  std::vector<std::pair<Algorithm, double>> slopes;        // log mean inner B_H vs log N
  std::vector<std::pair<Algorithm, double>> slopes_total;  // log mean total B_H vs log N
  std::vector<ScalingCell> cells;
};

// Runs (algorithm x N x seed) cells in a worker pool and fits the log-log
// slope of mean inner-loop Hessian samples against N. Needs at least 4 grid
// values spanning a factor of 16.
ScalingSummary scaling_experiment(const ExperimentSpec& spec);

// Benchmark CLI; returns the process exit code (0 ok, 2 config error,
// 3 run failure).
int run_cli(int argc, const char* const* argv);

}  // namespace svrc
