#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "svrc/bench.hpp"

using namespace svrc;

namespace {

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"svrc_bench"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Everything before the wall_ns column.
std::string strip_wall(const std::string& line) {
  const std::size_t pos = line.find_last_of(',');
  return line.substr(0, pos);
}

}  // namespace

TEST_CASE("cli: smoke run writes telemetry and summary") {
  const std::string out = temp_file("svrc_smoke.csv");
  CHECK(cli({"--algo", "full_cr", "--problem", "trig", "--n", "8", "--d", "2", "--eps", "0.1",
             "--seed", "1", "--out", out}) == 0);
  const auto lines = read_lines(out);
  REQUIRE(!lines.empty());
  CHECK(lines[0] == "k,t,batch_g,batch_h,xi_norm,F,grad_norm,lambda_min,cum_bg,cum_bh,wall_ns");
  CHECK(lines.size() > 1);
  const std::string summary = temp_file("svrc_smoke_summary.csv");
  CHECK(read_lines(summary).size() == 2);
  std::remove(out.c_str());
  std::remove(summary.c_str());
}

TEST_CASE("cli: config errors exit with 2") {
  CHECK(cli({"--algo", "full_cr", "--problem", "trig", "--n", "4", "--d", "2"}) == 2);
  CHECK(cli({"--frobnicate", "1"}) == 2);
  CHECK(cli({"--algo", "no_such_algo", "--eps", "0.1"}) == 2);
  CHECK(cli({"scaling", "--n-grid", "100", "--eps", "0.1"}) == 2);  // needs >= 4 values
  CHECK(cli({"scaling", "--n-grid", "100,120,140,160", "--eps", "0.1"}) == 2);  // span < 16x
}

TEST_CASE("cli: config file supplies defaults, flags override") {
  const std::string cfg = temp_file("svrc_cfg.ini");
  {
    std::ofstream out(cfg);
    out << "# benchmark defaults\n"
        << "algo=full_cr\n"
        << "problem=trig\n"
        << "n=8\n"
        << "d=2\n"
        << "eps=0.25\n";
  }
  const std::string out_a = temp_file("svrc_cfg_a.csv");
  CHECK(cli({"--config", cfg, "--out", out_a}) == 0);
  const std::string summary_a = temp_file("svrc_cfg_a_summary.csv");
  const auto rows = read_lines(summary_a);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].find("full_cr") == 0);
  CHECK(rows[1].find("0.25") != std::string::npos);

  // A flag beats the file.
  const std::string out_b = temp_file("svrc_cfg_b.csv");
  CHECK(cli({"--config", cfg, "--eps", "0.5", "--out", out_b}) == 0);
  const std::string summary_b = temp_file("svrc_cfg_b_summary.csv");
  const auto rows_b = read_lines(summary_b);
  REQUIRE(rows_b.size() == 2);
  CHECK(rows_b[1].find("0.5") != std::string::npos);

  for (const std::string& p : {cfg, out_a, summary_a, out_b, summary_b}) std::remove(p.c_str());
}

TEST_CASE("cli: reruns produce identical telemetry except wall_ns") {
  const std::string out1 = temp_file("svrc_rep1.csv");
  const std::string out2 = temp_file("svrc_rep2.csv");
  const std::vector<std::string> base{"--algo", "adaptive_svrc", "--problem", "trig",
                                      "--n",    "32",            "--d",       "3",
                                      "--eps",  "0.1",           "--seed",    "5"};
  auto with_out = [&](const std::string& out) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back(out);
    return args;
  };
  CHECK(cli(with_out(out1)) == 0);
  CHECK(cli(with_out(out2)) == 0);
  const auto lines1 = read_lines(out1);
  const auto lines2 = read_lines(out2);
  REQUIRE(lines1.size() == lines2.size());
  REQUIRE(lines1.size() > 2);
  for (std::size_t i = 0; i < lines1.size(); ++i)
    CHECK(strip_wall(lines1[i]) == strip_wall(lines2[i]));
  std::remove(out1.c_str());
  std::remove(out2.c_str());
  const std::string s1 = temp_file("svrc_rep1_summary.csv");
  const std::string s2 = temp_file("svrc_rep2_summary.csv");
  std::remove(s1.c_str());
  std::remove(s2.c_str());
}

TEST_CASE("cli: multi-seed runs write one telemetry file per seed") {
  const std::string out = temp_file("svrc_multi.csv");
  const std::string summary = temp_file("svrc_multi_sum.csv");
  CHECK(cli({"--algo", "full_cr", "--problem", "trig", "--n", "8", "--d", "2", "--eps", "0.2",
             "--seed", "4", "--seeds", "3", "--out", out, "--summary", summary}) == 0);
  const auto rows = read_lines(summary);
  REQUIRE(rows.size() == 4);  // header + one row per seed
  for (std::uint64_t seed = 4; seed <= 6; ++seed) {
    const std::string path = temp_file("svrc_multi_seed" + std::to_string(seed) + ".csv");
    CHECK(!read_lines(path).empty());
    std::remove(path.c_str());
  }
  std::remove(summary.c_str());
}

TEST_CASE("paired sampling modes: gradient samples shrink, Hessian samples grow") {
  // The harmonic gradient rule is dominated by the with-replacement one, so
  // B_G can only shrink. The Hessian rule carries the sqrt(33) slack and asks
  // for larger batches until it saturates near N, so B_H typically grows.
  auto problem = generate(ProblemKind::kNonconvexLogistic, 500, 25, 17);
  RunConfig config;
  config.algorithm = Algorithm::kAdaptiveSvrc;
  config.sigma = default_sigma(Algorithm::kAdaptiveSvrc, *problem);
  config.epsilon = 0.05;
  config.m = 4;
  config.seed = 3;
  config.sampling = SamplingMode::kWithReplacement;
  const RunResult with = run(*problem, config);
  config.sampling = SamplingMode::kWithoutReplacement;
  const RunResult without = run(*problem, config);
  REQUIRE(!with.aborted);
  REQUIRE(!without.aborted);
  CHECK(without.ledger.gradient_samples < with.ledger.gradient_samples);
  CHECK(without.ledger.hessian_samples > with.ledger.hessian_samples);
}

TEST_CASE("scaling experiment: validation") {
  ExperimentSpec spec;
  spec.n_grid = {100};
  CHECK_THROWS_AS(scaling_experiment(spec), ConfigError);
  spec.n_grid = {100, 120, 140, 160};
  CHECK_THROWS_AS(scaling_experiment(spec), ConfigError);
  spec.n_grid = {32, 64, 128, 512};
  spec.seeds = 0;
  CHECK_THROWS_AS(scaling_experiment(spec), ConfigError);
}

TEST_CASE("scaling experiment: full CR total Hessian samples scale linearly in N") {
  ExperimentSpec spec;
  spec.kind = ProblemKind::kTrigSum;
  spec.n_grid = {32, 64, 128, 512};
  spec.d = 4;
  spec.eps_grid = {0.2};
  spec.algorithms = {Algorithm::kFullCr};
  spec.seeds = 1;
  const ScalingSummary summary = scaling_experiment(spec);
  REQUIRE(summary.slopes_total.size() == 1);
  CHECK(summary.slopes_total[0].second == doctest::Approx(1.0).epsilon(0.05));
  for (const ScalingRow& row : summary.rows) {
    CHECK(row.failed_seeds == 0);
    CHECK(row.mean_inner_bh == 0.0);  // every full CR charge sits in a snapshot
  }
}
