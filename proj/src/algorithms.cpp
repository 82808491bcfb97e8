#include "svrc/algorithms.hpp"

#include <chrono>
#include <cmath>

#include "svrc/rng.hpp"
#include "svrc/sampling.hpp"

namespace svrc {

LyapunovSchedule lyapunov_schedule(LyapunovVariant variant, int m, int batch_b, int batch_s,
                                   double rho, double sigma, double theta1, double theta2) {
  if (m < 1) throw std::invalid_argument("lyapunov_schedule: m must be >= 1");
  if (batch_b < 1) throw std::invalid_argument("lyapunov_schedule: B must be >= 1");
  if (variant == LyapunovVariant::kCorrected && batch_s < 1)
    throw std::invalid_argument("lyapunov_schedule: S must be >= 1 for the corrected variant");
  if (theta1 <= 0 || theta2 <= 0 || sigma <= 0 || rho < 0)
    throw std::invalid_argument("lyapunov_schedule: bad parameters");

  LyapunovSchedule sched;
  sched.variant = variant;
  sched.theta1 = theta1;
  sched.theta2 = theta2;
  const double growth =
      1.0 + 2.0 / std::pow(theta1, 3) + 1.0 / std::pow(theta2, 6);
  double increment = 3.0 * rho / std::pow(static_cast<double>(batch_b), 1.5);
  if (variant == LyapunovVariant::kCorrected)
    increment += std::sqrt(2.0) * rho / (3.0 * std::pow(static_cast<double>(batch_s), 0.75));
  sched.c.assign(m + 1, 0.0);
  for (int t = m - 1; t >= 0; --t) sched.c[t] = growth * sched.c[t + 1] + increment;

  const double multiplier = 1.0 + std::pow(theta1, 6) + 2.0 * std::pow(theta2, 3);
  const double base =
      variant == LyapunovVariant::kFullGradient ? sigma / 4.0 - rho / 2.0
                                                : sigma / 4.0 - 5.0 * rho / 6.0;
  double gamma = std::numeric_limits<double>::infinity();
  for (int t = 0; t < m; ++t) gamma = std::min(gamma, base - sched.c[t + 1] * multiplier);
  if (!(gamma > 0))
    throw InvalidScheduleError("lyapunov_schedule: gamma = " + std::to_string(gamma) +
                               " <= 0; parameters violate the schedule regime");
  sched.gamma = gamma;
  return sched;
}

namespace {

// Stage length m = (1/3) N^{1/3} truncated to an integer ((1/3) N^{1/5} for
// the corrected variant). Rounding up instead would inflate m by up to 43% at
// small N and visibly bias the measured B_H-vs-N slope.
int default_inner_length(Algorithm algo, int n) {
  switch (algo) {
    case Algorithm::kAdaptiveSvrc:
    case Algorithm::kFullGradSvrc:
      return std::max(1, static_cast<int>(std::cbrt(static_cast<double>(n)) / 3.0));
    case Algorithm::kCorrectedSvrc:
      return std::max(1, static_cast<int>(std::pow(static_cast<double>(n), 0.2) / 3.0));
    case Algorithm::kFullCr:
      return 1;
  }
  return 1;
}

int clamp_batch(double raw, int n) {
  return std::min(n, std::max(1, static_cast<int>(std::ceil(raw))));
}

}  // namespace

ResolvedRun resolve_run(const ProblemInstance& problem, const RunConfig& config) {
  if (!(config.sigma > 0)) throw ConfigError("sigma must be positive");
  if (!(config.epsilon > 0)) throw ConfigError("epsilon must be positive");
  if (config.m < 0 || config.stages < 0) throw ConfigError("m and K must be positive");

  const int n = problem.component_count();
  const int d = problem.dimension();
  const double rho = problem.hess_lipschitz();
  const double big_l = problem.grad_lipschitz();

  ResolvedRun rr;
  rr.sigma = config.sigma;
  rr.m = config.m > 0 ? config.m : default_inner_length(config.algorithm, n);
  rr.stages = config.stages > 0
                  ? config.stages
                  : static_cast<int>(std::ceil(std::pow(config.epsilon, -1.5) / rr.m));
  rr.stages = std::max(1, rr.stages);

  switch (config.algorithm) {
    case Algorithm::kAdaptiveSvrc:
      if (!(config.sigma > 13.0 * rho + 4.0 * big_l))
        rr.warnings.push_back("sigma <= 13 rho + 4 L: the adaptive guarantee assumes more");
      break;
    case Algorithm::kFullGradSvrc: {
      if (config.sigma < 3.0 * rho) rr.warnings.push_back("sigma < 3 rho for full_grad_svrc");
      rr.alpha = config.alpha > 0 ? config.alpha : 8.0;
      rr.batch_b = config.batch_b > 0 ? std::min(config.batch_b, n)
                                      : clamp_batch(rr.alpha * std::pow(n, 2.0 / 3.0), n);
      break;
    }
    case Algorithm::kCorrectedSvrc: {
      if (config.sigma < 4.0 * rho) rr.warnings.push_back("sigma < 4 rho for corrected_svrc");
      rr.alpha = config.alpha > 0 ? config.alpha : 12.0;
      rr.batch_b = config.batch_b > 0 ? std::min(config.batch_b, n)
                                      : clamp_batch(rr.alpha * std::pow(n, 0.4), n);
      rr.batch_s = config.batch_s > 0
                       ? std::min(config.batch_s, n)
                       : clamp_batch(static_cast<double>(rr.batch_b) * rr.batch_b, n);
      break;
    }
    case Algorithm::kFullCr:
      break;
  }

  // Output-option-1 weighting needs gamma for the drift-weighted variants.
  if (config.algorithm == Algorithm::kFullGradSvrc ||
      config.algorithm == Algorithm::kCorrectedSvrc) {
    if (config.gamma_override) {
      if (!(*config.gamma_override > 0)) throw ConfigError("gamma override must be positive");
      rr.gamma = *config.gamma_override;
    } else {
      const bool corrected = config.algorithm == Algorithm::kCorrectedSvrc;
      const double theta1 = std::pow(n, corrected ? 1.0 / 15.0 : 1.0 / 9.0);
      const double theta2 = std::pow(n, corrected ? 1.0 / 30.0 : 1.0 / 18.0);
      try {
        rr.gamma = lyapunov_schedule(
                       corrected ? LyapunovVariant::kCorrected : LyapunovVariant::kFullGradient,
                       rr.m, rr.batch_b, rr.batch_s, rho, config.sigma, theta1, theta2)
                       .gamma;
      } catch (const InvalidScheduleError&) {
        // Any Theta(rho) value is a valid output weight; fall back when the
        // (m, B, sigma) combination is outside the schedule regime.
        rr.gamma = rho > 0 ? rho / 3.0 : 1.0;
        rr.warnings.push_back("lyapunov schedule has gamma <= 0 here; weighting with rho/3");
      }
    }
  }

  if (config.x0.size() > 0) {
    if (config.x0.size() != d) throw ConfigError("x0 dimension mismatch");
    rr.x0 = config.x0;
  } else {
    std::mt19937_64 rng(derive_stream(config.seed, stream::kInitialPoint));
    rr.x0.resize(d);
    for (int j = 0; j < d; ++j) rr.x0(j) = normal_double(rng);
    const double norm = rr.x0.norm();
    if (norm > 0) rr.x0 *= 1.5 / norm;
  }
  return rr;
}

namespace {

struct Estimates {
  Vector g;
  Matrix h;
  std::int64_t charged_g = 0;
  std::int64_t charged_h = 0;
};

Estimates make_estimates(const ProblemInstance& problem, const RunConfig& config,
                         const ResolvedRun& rr, const EpochSnapshot& snap, const Vector& x,
                         int stage, int inner, double drift, double xi_prev_norm,
                         SampleLedger& ledger) {
  const int n = problem.component_count();
  const std::uint64_t g_before = ledger.gradient_samples;
  const std::uint64_t h_before = ledger.hessian_samples;
  Estimates est;

  const bool exact = config.force_exact_oracles || config.algorithm == Algorithm::kFullCr;
  if (exact) {
    if (inner == 0) {
      est.g = snap.g_tilde;  // the snapshot is the exact oracle at x_0
      est.h = snap.h_tilde;
    } else {
      est.g = full_gradient(problem, x, ledger);
      est.h = full_hessian(problem, x, ledger);
    }
  } else if (config.algorithm == Algorithm::kAdaptiveSvrc) {
    const Thresholds th = epsilon_thresholds(xi_prev_norm, config.epsilon);
    const BatchSizes sizes =
        batch_sizes({config.epsilon, config.sampling, n}, drift, th.eps_g, th.eps_h);
    if (sizes.gradient == 0) {
      est.g = snap.g_tilde;
    } else if (sizes.gradient_exact) {
      est.g = full_gradient(problem, x, ledger);
    } else {
      IndexSampler sampler(config.sampling,
                           derive_stream(config.seed, stage, inner, stream::kGradientBatch));
      const std::vector<int> idx = sampler.draw(n, sizes.gradient);
      est.g = svr_gradient(problem, snap, x, idx, ledger, config.count_pairs_once);
    }
    if (sizes.hessian == 0) {
      est.h = snap.h_tilde;
    } else if (sizes.hessian_exact) {
      est.h = full_hessian(problem, x, ledger);
    } else {
      IndexSampler sampler(config.sampling,
                           derive_stream(config.seed, stage, inner, stream::kHessianBatch));
      const std::vector<int> idx = sampler.draw(n, sizes.hessian);
      est.h = svr_hessian(problem, snap, x, idx, ledger, config.count_pairs_once);
    }
  } else if (config.algorithm == Algorithm::kFullGradSvrc) {
    est.g = inner == 0 ? snap.g_tilde : full_gradient(problem, x, ledger);
    if (rr.batch_b >= n) {
      est.h = full_hessian(problem, x, ledger);
    } else {
      IndexSampler sampler(config.sampling,
                           derive_stream(config.seed, stage, inner, stream::kHessianBatch));
      const std::vector<int> idx = sampler.draw(n, rr.batch_b);
      est.h = svr_hessian(problem, snap, x, idx, ledger, config.count_pairs_once);
    }
  } else {  // corrected SVRC
    if (rr.batch_s >= n) {
      est.g = full_gradient(problem, x, ledger);
    } else {
      IndexSampler sampler(config.sampling,
                           derive_stream(config.seed, stage, inner, stream::kGradientBatch));
      const std::vector<int> idx = sampler.draw(n, rr.batch_s);
      est.g = corrected_svr_gradient(problem, snap, x, idx, ledger, config.count_pairs_once);
    }
    if (rr.batch_b >= n) {
      est.h = full_hessian(problem, x, ledger);
    } else {
      IndexSampler sampler(config.sampling,
                           derive_stream(config.seed, stage, inner, stream::kHessianBatch));
      const std::vector<int> idx = sampler.draw(n, rr.batch_b);
      est.h = svr_hessian(problem, snap, x, idx, ledger, config.count_pairs_once);
    }
  }
  est.charged_g = static_cast<std::int64_t>(ledger.gradient_samples - g_before);
  est.charged_h = static_cast<std::int64_t>(ledger.hessian_samples - h_before);
  return est;
}

double option1_score(Algorithm algo, const ResolvedRun& rr, double rho, double xi_norm,
                     double xi_prev_norm, double drift) {
  const double cube = xi_norm * xi_norm * xi_norm;
  switch (algo) {
    case Algorithm::kAdaptiveSvrc:
    case Algorithm::kFullCr:
      return cube + xi_prev_norm * xi_prev_norm * xi_prev_norm;
    case Algorithm::kFullGradSvrc: {
      const double w = (rho / rr.gamma) / (2.0 * std::pow(static_cast<double>(rr.batch_b), 1.5));
      return cube + w * drift * drift * drift;
    }
    case Algorithm::kCorrectedSvrc: {
      const double w1 = (rho / rr.gamma) / (2.0 * std::pow(static_cast<double>(rr.batch_b), 1.5));
      const double w2 = (rho / rr.gamma) /
                        (3.0 * std::sqrt(2.0) * std::pow(static_cast<double>(rr.batch_s), 0.75));
      return cube + (w1 + w2) * drift * drift * drift;
    }
  }
  return cube;
}

RunResult run_driver(const ProblemInstance& problem, const RunConfig& config,
                     const IterationObserver& observer) {
  const ResolvedRun rr = resolve_run(problem, config);
  const double rho = problem.hess_lipschitz();
  const double sqrt_eps = std::sqrt(config.epsilon);

  RunResult out;
  out.warnings = rr.warnings;
  out.f_initial = objective_value(problem, rr.x0);

  std::vector<Vector> iterates;
  iterates.reserve(static_cast<size_t>(rr.stages) * rr.m);
  double best_score = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;

  Vector x_tilde = rr.x0;
  bool stop = false;
  try {
    for (int k = 1; k <= rr.stages && !stop; ++k) {
      const EpochSnapshot snap = take_snapshot(problem, x_tilde, k, out.ledger);
      Vector x = x_tilde;
      double xi_prev_norm = 0.0;
      for (int t = 0; t < rr.m && !stop; ++t) {
        const auto started = std::chrono::steady_clock::now();
        const double drift = (x - snap.x_tilde).norm();
        const Estimates est =
            make_estimates(problem, config, rr, snap, x, k, t, drift, xi_prev_norm, out.ledger);
        const CubicModel model{est.g, est.h, rr.sigma};
        const StepResult step = solve_cubic(model);
        ++out.ledger.subproblem_solves;
        Vector x_next = x + step.xi;

        IterationRecord rec;
        rec.stage = k;
        rec.inner = t;
        rec.batch_g = est.charged_g;
        rec.batch_h = est.charged_h;
        rec.xi_norm = step.r;
        rec.f_value = objective_value(problem, x_next);
        if (config.diag == DiagLevel::kFull || config.early_stop) {
          rec.exact_grad_norm = exact_gradient(problem, x_next).norm();
          rec.lambda_min = lambda_min(exact_hessian(problem, x_next));
        }
        rec.cum_bg = out.ledger.gradient_samples;
        rec.cum_bh = out.ledger.hessian_samples;
        rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();
        out.history.push_back(rec);
        iterates.push_back(x_next);

        if (observer) observer({k, t, x, est.g, est.h, step, x_next, snap});

        const double score = option1_score(config.algorithm, rr, rho, step.r, xi_prev_norm, drift);
        if (score < best_score) {
          best_score = score;
          best_index = iterates.size() - 1;
        }
        if (config.early_stop && rec.exact_grad_norm <= config.epsilon &&
            rec.lambda_min >= -sqrt_eps)
          stop = true;

        xi_prev_norm = step.r;
        x = std::move(x_next);
      }
      x_tilde = std::move(x);
    }
  } catch (const NonFiniteOracleError& err) {
    out.aborted = true;
    out.abort_reason = err.what();
  }

  if (out.history.empty()) {
    out.x_out = rr.x0;
    return out;
  }
  std::size_t chosen = best_index;
  if (config.output == OutputOption::kUniformRandom) {
    std::mt19937_64 rng(derive_stream(config.seed, stream::kOutputChoice));
    chosen = static_cast<std::size_t>(uniform_below(rng, iterates.size()));
  }
  out.k_star = out.history[chosen].stage;
  out.t_star = out.history[chosen].inner;
  out.x_out = iterates[chosen];
  out.grad_norm = exact_gradient(problem, out.x_out).norm();
  out.lambda_min_out = lambda_min(exact_hessian(problem, out.x_out));
  return out;
}

void require_algorithm(const RunConfig& config, Algorithm expected) {
  if (config.algorithm != expected)
    throw ConfigError("config.algorithm does not match the requested driver");
}

}  // namespace

RunResult run_adaptive_svrc(const ProblemInstance& problem, const RunConfig& config,
                            const IterationObserver& observer) {
  require_algorithm(config, Algorithm::kAdaptiveSvrc);
  return run_driver(problem, config, observer);
}

RunResult run_full_cr(const ProblemInstance& problem, const RunConfig& config,
                      const IterationObserver& observer) {
  require_algorithm(config, Algorithm::kFullCr);
  return run_driver(problem, config, observer);
}

RunResult run_full_grad_svrc(const ProblemInstance& problem, const RunConfig& config,
                             const IterationObserver& observer) {
  require_algorithm(config, Algorithm::kFullGradSvrc);
  return run_driver(problem, config, observer);
}

RunResult run_corrected_svrc(const ProblemInstance& problem, const RunConfig& config,
                             const IterationObserver& observer) {
  require_algorithm(config, Algorithm::kCorrectedSvrc);
  return run_driver(problem, config, observer);
}

RunResult run(const ProblemInstance& problem, const RunConfig& config,
              const IterationObserver& observer) {
  return run_driver(problem, config, observer);
}

}  // namespace svrc
