#include "svrc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "svrc/rng.hpp"

namespace svrc {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_telemetry_csv(const std::string& path, const RunResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "k,t,batch_g,batch_h,xi_norm,F,grad_norm,lambda_min,cum_bg,cum_bh,wall_ns\n";
  for (const IterationRecord& rec : result.history) {
    out << rec.stage << ',' << rec.inner << ',' << rec.batch_g << ',' << rec.batch_h << ','
        << fmt_double(rec.xi_norm) << ',' << fmt_double(rec.f_value) << ','
        << fmt_double(rec.exact_grad_norm) << ',' << fmt_double(rec.lambda_min) << ','
        << rec.cum_bg << ',' << rec.cum_bh << ',' << rec.wall_ns << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

double default_sigma(Algorithm algo, const ProblemInstance& problem) {
  const double rho = problem.hess_lipschitz();
  const double big_l = problem.grad_lipschitz();
  switch (algo) {
    case Algorithm::kAdaptiveSvrc: return 13.0 * rho + 4.0 * big_l + 1.0;
    case Algorithm::kFullGradSvrc: return std::max(3.0 * rho, 1e-6);
    case Algorithm::kCorrectedSvrc: return std::max(4.0 * rho, 1e-6);
    case Algorithm::kFullCr: return std::max(2.0 * rho, 1e-6);
  }
  return 1.0;
}

namespace {

std::uint64_t stages_run(const RunResult& result) {
  return result.history.empty() ? 0 : static_cast<std::uint64_t>(result.history.back().stage);
}

struct FitResult {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = 0;
};

FitResult fit_loglog(const std::vector<std::pair<double, double>>& points) {
  FitResult fit;
  if (points.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : points) {
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points.size());
  const double denom = sxx - sx * sx / n;
  if (denom <= 0) return fit;
  fit.slope = (sxy - sx * sy / n) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace

ScalingSummary scaling_experiment(const ExperimentSpec& spec) {
  if (spec.n_grid.size() < 4) throw ConfigError("scaling experiment needs >= 4 values of N");
  const auto [min_it, max_it] = std::minmax_element(spec.n_grid.begin(), spec.n_grid.end());
  if (*min_it < 1) throw ConfigError("scaling experiment: N must be positive");
  if (static_cast<double>(*max_it) / *min_it < 16.0)
    throw ConfigError("scaling experiment: N grid must span at least a factor of 16");
  if (spec.seeds < 1) throw ConfigError("scaling experiment: seeds must be >= 1");
  if (spec.eps_grid.size() != 1 || !(spec.eps_grid.front() > 0))
    throw ConfigError("scaling experiment: needs one fixed positive epsilon");
  if (spec.algorithms.empty()) throw ConfigError("scaling experiment: no algorithms");
  const double epsilon = spec.eps_grid.front();

  // One immutable problem per N, shared across seed cells.
  std::map<int, std::unique_ptr<ProblemInstance>> problems;
  for (int n : spec.n_grid)
    if (!problems.count(n))
      problems[n] = generate(spec.kind, n, spec.d, derive_stream(spec.problem_seed, n));

  ScalingSummary summary;
  for (Algorithm algo : spec.algorithms)
    for (int n : spec.n_grid)
      for (int s = 0; s < spec.seeds; ++s) {
        ScalingCell cell;
        cell.algo = algo;
        cell.n = n;
        cell.seed = spec.base_seed + static_cast<std::uint64_t>(s);
        summary.cells.push_back(cell);
      }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= summary.cells.size()) return;
      ScalingCell& cell = summary.cells[i];
      try {
        const ProblemInstance& problem = *problems.at(cell.n);
        RunConfig config;
        config.algorithm = cell.algo;
        config.epsilon = epsilon;
        config.sigma = spec.sigma > 0 ? spec.sigma : default_sigma(cell.algo, problem);
        config.sampling = spec.sampling;
        config.seed = cell.seed;
        const RunResult result = run(problem, config);
        if (result.aborted) throw std::runtime_error(result.abort_reason);
        cell.snapshot_bh = stages_run(result) * static_cast<std::uint64_t>(cell.n);
        cell.total_bh = result.ledger.hessian_samples;
        cell.total_bg = result.ledger.gradient_samples;
        cell.inner_bh = cell.total_bh - cell.snapshot_bh;
      } catch (const std::exception& err) {
        cell.failed = true;
        cell.error = err.what();
      }
    }
  };
  const unsigned pool = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                        summary.cells.size()));
  std::vector<std::thread> threads;
  for (unsigned i = 0; i < pool; ++i) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  for (Algorithm algo : spec.algorithms) {
    std::vector<std::pair<double, double>> points;
    std::vector<std::pair<double, double>> points_total;
    for (int n : spec.n_grid) {
      ScalingRow row;
      row.algo = algo;
      row.n = n;
      double inner = 0, snap = 0, total = 0;
      for (const ScalingCell& cell : summary.cells) {
        if (cell.algo != algo || cell.n != n) continue;
        if (cell.failed) {
          ++row.failed_seeds;
          continue;
        }
        ++row.ok_seeds;
        inner += static_cast<double>(cell.inner_bh);
        snap += static_cast<double>(cell.snapshot_bh);
        total += static_cast<double>(cell.total_bh);
      }
      if (row.ok_seeds > 0) {
        row.mean_inner_bh = inner / row.ok_seeds;
        row.mean_snapshot_bh = snap / row.ok_seeds;
        row.mean_total_bh = total / row.ok_seeds;
        if (row.mean_inner_bh > 0) points.emplace_back(n, row.mean_inner_bh);
        if (row.mean_total_bh > 0) points_total.emplace_back(n, row.mean_total_bh);
      }
      summary.rows.push_back(row);
    }
    summary.slopes.emplace_back(algo, fit_loglog(points).slope);
    summary.slopes_total.emplace_back(algo, fit_loglog(points_total).slope);
  }

  if (!spec.out_dir.empty()) {
    std::filesystem::create_directories(spec.out_dir);
    std::ofstream out(spec.out_dir + "/scaling_summary.csv");
    out << "algo,n,ok_seeds,failed_seeds,mean_inner_bh,mean_snapshot_bh,mean_total_bh\n";
    for (const ScalingRow& row : summary.rows)
      out << to_string(row.algo) << ',' << row.n << ',' << row.ok_seeds << ',' << row.failed_seeds
          << ',' << fmt_double(row.mean_inner_bh) << ',' << fmt_double(row.mean_snapshot_bh) << ','
          << fmt_double(row.mean_total_bh) << '\n';
    for (const auto& [algo, slope] : summary.slopes)
      out << "# slope " << to_string(algo) << " = " << fmt_double(slope) << '\n';
  }
  return summary;
}

namespace {

std::string seed_suffixed(const std::string& path, std::uint64_t seed, bool multi) {
  if (!multi) return path;
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return path + "_seed" + std::to_string(seed);
  return path.substr(0, dot) + "_seed" + std::to_string(seed) + path.substr(dot);
}

int run_single_mode(const CLI::App& app, ProblemKind kind, const std::string& dataset,
                    int n, int d, double eps, double sigma, int m, int stages,
                    std::uint64_t seed, int seeds, const std::string& sampling,
                    const std::string& out_csv, std::string summary_csv, const std::string& diag,
                    const std::string& output_option, int batch_b, int batch_s, double alpha,
                    double gamma, std::uint64_t problem_seed, const std::string& algo_name) {
  if (!(eps > 0)) {
    std::cerr << "error: --eps must be set to a positive tolerance\n";
    return 2;
  }
  if (seeds < 1) {
    std::cerr << "error: --seeds must be >= 1\n";
    return 2;
  }
  const Algorithm algo = parse_algorithm(algo_name);

  std::unique_ptr<ProblemInstance> problem;
  if (!dataset.empty())
    problem = load_dataset(dataset);
  else
    problem = generate(kind, n, d, derive_stream(problem_seed, n));

  RunConfig config;
  config.algorithm = algo;
  config.epsilon = eps;
  config.sigma = sigma > 0 ? sigma : default_sigma(algo, *problem);
  config.m = m;
  config.stages = stages;
  config.sampling = parse_sampling_mode(sampling);
  config.output = parse_output_option(output_option);
  config.batch_b = batch_b;
  config.batch_s = batch_s;
  config.alpha = alpha;
  if (gamma > 0) config.gamma_override = gamma;
  config.diag = diag == "full" ? DiagLevel::kFull : DiagLevel::kOutputOnly;

  if (summary_csv.empty()) {
    const std::size_t dot = out_csv.find_last_of('.');
    summary_csv = (dot == std::string::npos ? out_csv : out_csv.substr(0, dot)) + "_summary.csv";
  }
  std::ofstream summary(summary_csv);
  if (!summary) {
    std::cerr << "error: cannot open " << summary_csv << "\n";
    return 3;
  }
  summary << "algo,problem,n,d,eps,sigma,sampling,seed,iters,k_star,t_star,f_initial,f_out,"
             "grad_norm,lambda_min,bg,bh,solves\n";

  int exit_code = 0;
  for (int s = 0; s < seeds; ++s) {
    config.seed = seed + static_cast<std::uint64_t>(s);
    try {
      const RunResult result = run(*problem, config);
      for (const std::string& warning : result.warnings)
        std::cerr << "warning: " << warning << "\n";
      write_telemetry_csv(seed_suffixed(out_csv, config.seed, seeds > 1), result);
      if (result.aborted) {
        std::cerr << "run aborted: " << result.abort_reason << "\n";
        exit_code = 3;
        continue;
      }
      const double f_out = result.history.empty() ? result.f_initial
                                                  : objective_value(*problem, result.x_out);
      summary << to_string(algo) << ','
              << (dataset.empty() ? to_string(kind) : std::string("dataset")) << ','
              << problem->component_count() << ',' << problem->dimension() << ','
              << fmt_double(eps) << ',' << fmt_double(config.sigma) << ','
              << to_string(config.sampling) << ',' << config.seed << ',' << result.history.size()
              << ',' << result.k_star << ',' << result.t_star << ','
              << fmt_double(result.f_initial) << ',' << fmt_double(f_out) << ','
              << fmt_double(result.grad_norm) << ',' << fmt_double(result.lambda_min_out) << ','
              << result.ledger.gradient_samples << ',' << result.ledger.hessian_samples << ','
              << result.ledger.subproblem_solves << '\n';
      std::cout << to_string(algo) << " seed=" << config.seed
                << " grad_norm=" << result.grad_norm << " lambda_min=" << result.lambda_min_out
                << " B_G=" << result.ledger.gradient_samples
                << " B_H=" << result.ledger.hessian_samples << "\n";
    } catch (const ConfigError& err) {
      std::cerr << "error: " << err.what() << "\n";
      return 2;
    } catch (const std::exception& err) {
      std::cerr << "run failed: " << err.what() << "\n";
      exit_code = 3;
    }
  }
  (void)app;
  return exit_code;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Finite-sum cubic-regularized Newton benchmark"};
  app.set_config("--config")->description("key=value config file; flags override");
  app.get_config_formatter_base()->comment('#');

  std::string algo = "adaptive_svrc";
  std::string problem_name = "trig";
  std::string dataset;
  int n = 64, d = 5;
  double eps = 0;
  double sigma = 0;
  int m = 0, stages = 0;
  std::uint64_t seed = 1;
  int seeds = 1;
  std::string sampling = "with";
  std::string out_csv = "run.csv";
  std::string summary_csv;
  std::string diag = "output";
  std::string output_option = "argmin";
  int batch_b = 0, batch_s = 0;
  double alpha = 0, gamma = 0;
  std::uint64_t problem_seed = 12345;

  app.add_option("--algo", algo, "algorithm")
      ->check(CLI::IsMember({"adaptive_svrc", "full_grad_svrc", "corrected_svrc", "full_cr"}));
  app.add_option("--problem", problem_name, "problem family")
      ->check(CLI::IsMember({"trig", "robust", "logistic"}));
  app.add_option("--dataset", dataset, "logistic dataset file (label then features per row)");
  app.add_option("--n", n, "component count for generated problems");
  app.add_option("--d", d, "dimension for generated problems");
  app.add_option("--eps", eps, "target tolerance");
  app.add_option("--sigma", sigma, "cubic coefficient (default: per-algorithm policy)");
  app.add_option("--m", m, "inner-loop length (0 = default)");
  app.add_option("--k", stages, "number of stages (0 = default)");
  app.add_option("--seed", seed, "run seed");
  app.add_option("--seeds", seeds, "number of consecutive seeds to run");
  app.add_option("--sampling", sampling, "index sampling mode")
      ->check(CLI::IsMember({"with", "without"}));
  app.add_option("--out", out_csv, "telemetry CSV path");
  app.add_option("--summary", summary_csv, "summary CSV path");
  app.add_option("--diag", diag, "diagnostics level")->check(CLI::IsMember({"output", "full"}));
  app.add_option("--output-option", output_option, "output selection rule")
      ->check(CLI::IsMember({"argmin", "random"}));
  app.add_option("--b", batch_b, "fixed Hessian batch size");
  app.add_option("--s", batch_s, "fixed gradient batch size (corrected variant)");
  app.add_option("--alpha", alpha, "batch-size constant");
  app.add_option("--gamma", gamma, "output-weighting gamma override");
  app.add_option("--problem-seed", problem_seed, "seed for instance generation");

  CLI::App* scaling = app.add_subcommand("scaling", "Hessian-sample scaling experiment over N");
  std::vector<int> n_grid;
  double sc_eps = 0.05;
  int sc_d = 20, sc_seeds = 10;
  std::string sc_algo = "adaptive_svrc";
  std::string sc_problem = "trig";
  std::string sc_sampling = "with";
  std::string out_dir;
  double sc_sigma = 0;
  std::uint64_t sc_problem_seed = 12345, sc_base_seed = 1;
  scaling->add_option("--n-grid", n_grid, "comma-separated N values (>= 4, spanning >= 16x)")
      ->required()
      ->delimiter(',');
  scaling->add_option("--eps", sc_eps, "tolerance");
  scaling->add_option("--d", sc_d, "dimension");
  scaling->add_option("--seeds", sc_seeds, "seeds per cell");
  scaling->add_option("--algo", sc_algo, "algorithm")
      ->check(CLI::IsMember({"adaptive_svrc", "full_grad_svrc", "corrected_svrc", "full_cr"}));
  scaling->add_option("--problem", sc_problem, "problem family")
      ->check(CLI::IsMember({"trig", "robust", "logistic"}));
  scaling->add_option("--sampling", sc_sampling, "index sampling mode")
      ->check(CLI::IsMember({"with", "without"}));
  scaling->add_option("--out-dir", out_dir, "directory for the summary CSV");
  scaling->add_option("--sigma", sc_sigma, "cubic coefficient override");
  scaling->add_option("--problem-seed", sc_problem_seed, "instance generation seed");
  scaling->add_option("--seed", sc_base_seed, "base run seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& err) {
    std::cerr << err.what() << "\n(use --help for usage)\n";
    return 2;
  }

  try {
    if (scaling->parsed()) {
      ExperimentSpec spec;
      spec.kind = parse_problem_kind(sc_problem);
      spec.n_grid = n_grid;
      spec.d = sc_d;
      spec.eps_grid = {sc_eps};
      spec.algorithms = {parse_algorithm(sc_algo)};
      spec.seeds = sc_seeds;
      spec.base_seed = sc_base_seed;
      spec.problem_seed = sc_problem_seed;
      spec.sampling = parse_sampling_mode(sc_sampling);
      spec.sigma = sc_sigma;
      spec.out_dir = out_dir;
      const ScalingSummary summary = scaling_experiment(spec);
      std::cout << "algo,n,ok_seeds,failed_seeds,mean_inner_bh,mean_snapshot_bh,mean_total_bh\n";
      for (const ScalingRow& row : summary.rows)
        std::cout << to_string(row.algo) << ',' << row.n << ',' << row.ok_seeds << ','
                  << row.failed_seeds << ',' << row.mean_inner_bh << ',' << row.mean_snapshot_bh
                  << ',' << row.mean_total_bh << '\n';
      bool any_failed = false;
      for (const auto& [algo_id, slope] : summary.slopes)
        std::cout << "slope(" << to_string(algo_id) << ") = " << slope << "\n";
      for (const ScalingCell& cell : summary.cells)
        if (cell.failed) {
          any_failed = true;
          std::cerr << "failed cell: " << to_string(cell.algo) << " n=" << cell.n
                    << " seed=" << cell.seed << ": " << cell.error << "\n";
        }
      return any_failed ? 3 : 0;
    }
    return run_single_mode(app, parse_problem_kind(problem_name), dataset, n, d, eps, sigma, m,
                           stages, seed, seeds, sampling, out_csv, summary_csv, diag,
                           output_option, batch_b, batch_s, alpha, gamma, problem_seed, algo);
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "run failed: " << err.what() << "\n";
    return 3;
  }
}

}  // namespace svrc
