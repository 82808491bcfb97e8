#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "svrc/errors.hpp"
#include "svrc/types.hpp"

namespace svrc {

// Finite-sum objective F(x) = (1/N) sum_i f_i(x) exposed through per-component
// value/gradient/Hessian oracles together with the Lipschitz constants of the
// components: ||grad f_i(x) - grad f_i(y)|| <= L ||x - y|| and
// ||hess f_i(x) - hess f_i(y)||_F <= rho ||x - y||.
//
// Oracles must be pure: identical inputs give bit-identical outputs, and
// concurrent calls on one instance are safe.
class ProblemInstance {
 public:
  virtual ~ProblemInstance() = default;

  int component_count() const { return n_; }
  int dimension() const { return d_; }
  double grad_lipschitz() const { return grad_lipschitz_; }
  double hess_lipschitz() const { return hess_lipschitz_; }

  virtual std::optional<double> objective_lower_bound() const { return std::nullopt; }

  virtual double component_value(int i, const Vector& x) const = 0;
  virtual Vector component_gradient(int i, const Vector& x) const = 0;
  virtual Matrix component_hessian(int i, const Vector& x) const = 0;

 protected:
  ProblemInstance(int n, int d, double grad_lipschitz, double hess_lipschitz);
  void set_lipschitz(double grad_lipschitz, double hess_lipschitz);

 private:
  int n_ = 0;
  int d_ = 0;
  double grad_lipschitz_ = 0;
  double hess_lipschitz_ = 0;
};

// Monotone oracle-call counters for one run. A full gradient costs N gradient
// samples, a full Hessian N Hessian samples. One owner per run.
struct SampleLedger {
  std::uint64_t gradient_samples = 0;
  std::uint64_t hessian_samples = 0;
  std::uint64_t subproblem_solves = 0;

  void charge_gradient(std::uint64_t n) { gradient_samples += n; }
  void charge_hessian(std::uint64_t n) { hessian_samples += n; }
};

struct RunConfig {
  Algorithm algorithm = Algorithm::kAdaptiveSvrc;
  double sigma = 1.0;    // cubic coefficient, > 0
  double epsilon = 0.1;  // target tolerance, > 0
  int m = 0;             // inner-loop length; 0 picks the per-algorithm default
  int stages = 0;        // K; 0 picks ceil(eps^{-3/2} / m)
  SamplingMode sampling = SamplingMode::kWithReplacement;
  std::uint64_t seed = 1;
  OutputOption output = OutputOption::kArgmin;
  int batch_b = 0;   // fixed Hessian batch for the non-adaptive variants; 0 = default
  int batch_s = 0;   // fixed gradient batch for corrected SVRC; 0 = default
  double alpha = 0;  // batch-size constant behind the defaults; 0 = per-algorithm value
  std::optional<double> gamma_override;  // output-weighting gamma; any Theta(rho) value
  // Accounting for the two-point variance-reduced estimators: true charges one
  // sample per index (the convention behind the K*N + sum|B| totals), false
  // charges both evaluation points.
  bool count_pairs_once = true;
  bool force_exact_oracles = false;  // replace every estimator with the full oracle
  bool early_stop = false;  // stop once ||grad F|| <= eps and lambda_min >= -sqrt(eps)
  DiagLevel diag = DiagLevel::kOutputOnly;
  Vector x0;  // empty: seeded default start
};

// Per-iteration telemetry row. batch_g/batch_h are the samples charged by that
// iteration, so cumulative counters always satisfy
// cum = sum of per-iteration charges + N per snapshot.
struct IterationRecord {
  int stage = 0;  // k, 1-based
  int inner = 0;  // t, 0-based
  std::int64_t batch_g = 0;
  std::int64_t batch_h = 0;
  double xi_norm = 0;
  double f_value = 0;  // F(x_{t+1})
  double exact_grad_norm = std::numeric_limits<double>::quiet_NaN();  // diagnostic
  double lambda_min = std::numeric_limits<double>::quiet_NaN();      // diagnostic
  std::uint64_t cum_bg = 0;
  std::uint64_t cum_bh = 0;
  std::int64_t wall_ns = 0;
};

// Mean objective value; not an oracle the ledger counts.
double objective_value(const ProblemInstance& problem, const Vector& x);

// (1/N) sum_i grad f_i(x); charges N gradient samples.
Vector full_gradient(const ProblemInstance& problem, const Vector& x, SampleLedger& ledger);

// (1/N) sum_i hess f_i(x), symmetrized as (H + H^T)/2; charges N Hessian samples.
Matrix full_hessian(const ProblemInstance& problem, const Vector& x, SampleLedger& ledger);

// Arithmetic mean over a nonempty index multiset, reduced in ascending-index
// order so results are bit-reproducible; charges |indices| samples.
Vector batch_mean_gradient(const ProblemInstance& problem, const Vector& x,
                           std::span<const int> indices, SampleLedger& ledger);
Matrix batch_mean_hessian(const ProblemInstance& problem, const Vector& x,
                          std::span<const int> indices, SampleLedger& ledger);

// Uncounted exact quantities for diagnostics and tests; they exist for
// verification, not for the algorithms.
Vector exact_gradient(const ProblemInstance& problem, const Vector& x);
Matrix exact_hessian(const ProblemInstance& problem, const Vector& x);

// Empirical check of the declared Lipschitz constants on random nearby pairs.
struct LipschitzAudit {
  double max_grad_ratio = 0;
  double max_hess_ratio = 0;
  bool within_declared = false;
};
LipschitzAudit lipschitz_audit(const ProblemInstance& problem, int pairs, std::uint64_t seed);

}  // namespace svrc
