#pragma once

#include <functional>
#include <string>
#include <vector>

#include "svrc/core.hpp"
#include "svrc/cubic_solver.hpp"
#include "svrc/estimators.hpp"

namespace svrc {

enum class LyapunovVariant { kFullGradient, kCorrected };

// Backward-recursive coefficients of the potential F(x_t) + c_t ||x_t - x~||^3
// used by the non-adaptive analyses, with c_m = 0 and
//   c_t = c_{t+1} (1 + 2 theta1^-3 + theta2^-6) + 3 rho / B^{3/2}
// (the corrected variant adds sqrt(2) rho / (3 S^{3/4})). gamma is the exact
// minimum over t of  sigma/4 - rho/2 - c_{t+1}(1 + theta1^6 + 2 theta2^3)
// (corrected: sigma/4 - 5 rho/6 - ...), and must be positive.
struct LyapunovSchedule {
  std::vector<double> c;  // c[0..m]
  double gamma = 0;
  double theta1 = 0;
  double theta2 = 0;
  LyapunovVariant variant = LyapunovVariant::kFullGradient;
};

LyapunovSchedule lyapunov_schedule(LyapunovVariant variant, int m, int batch_b, int batch_s,
                                   double rho, double sigma, double theta1, double theta2);

struct RunResult {
  Vector x_out;
  int k_star = 0;  // 1-based stage of the selected iterate
  int t_star = 0;  // 0-based inner index; x_out = x^{k*}_{t*+1}
  std::vector<IterationRecord> history;
  SampleLedger ledger;
  double f_initial = 0;
  double grad_norm = std::numeric_limits<double>::quiet_NaN();       // ||grad F(x_out)||
  double lambda_min_out = std::numeric_limits<double>::quiet_NaN();  // lambda_min(hess F(x_out))
  bool aborted = false;
  std::string abort_reason;
  std::vector<std::string> warnings;
};

// Test/telemetry hook: invoked once per inner iteration with the quantities
// the step was built from. Never touches the RNG streams or the ledger.
struct IterationScope {
  int stage;
  int inner;
  const Vector& x;
  const Vector& grad_estimate;
  const Matrix& hess_estimate;
  const StepResult& step;
  const Vector& x_next;
  const EpochSnapshot& snapshot;
};
using IterationObserver = std::function<void(const IterationScope&)>;

// Config with defaults filled in (inner length, stage count, fixed batch
// sizes, start point, output-weighting gamma).
struct ResolvedRun {
  int m = 0;
  int stages = 0;
  int batch_b = 0;
  int batch_s = 0;
  double alpha = 0;
  double sigma = 0;
  double gamma = 0;  // 0 when the algorithm does not weight by drift
  Vector x0;
  std::vector<std::string> warnings;
};

ResolvedRun resolve_run(const ProblemInstance& problem, const RunConfig& config);

// Algorithm drivers. Every stage charges N gradient and N Hessian samples for
// the snapshot; inner iterations charge whatever their estimators consume.
RunResult run_adaptive_svrc(const ProblemInstance& problem, const RunConfig& config,
                            const IterationObserver& observer = {});
RunResult run_full_cr(const ProblemInstance& problem, const RunConfig& config,
                      const IterationObserver& observer = {});
RunResult run_full_grad_svrc(const ProblemInstance& problem, const RunConfig& config,
                             const IterationObserver& observer = {});
RunResult run_corrected_svrc(const ProblemInstance& problem, const RunConfig& config,
                             const IterationObserver& observer = {});

// Dispatch on config.algorithm.
RunResult run(const ProblemInstance& problem, const RunConfig& config,
              const IterationObserver& observer = {});

}  // namespace svrc
