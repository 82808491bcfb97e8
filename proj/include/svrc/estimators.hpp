#pragma once

#include <span>

#include "svrc/core.hpp"

namespace svrc {

// Stage anchor: x_tilde with its full-batch gradient and Hessian.
struct EpochSnapshot {
  Vector x_tilde;
  Vector g_tilde;
  Matrix h_tilde;
  int stage = 0;
};

// Full gradient and Hessian at x; charges N + N samples.
EpochSnapshot take_snapshot(const ProblemInstance& problem, const Vector& x, int stage,
                            SampleLedger& ledger);

struct Thresholds {
  double eps_g = 0;  // max{ ||xi_prev||^4, eps^2 }
  double eps_h = 0;  // max{ ||xi_prev||^2, eps }
};

Thresholds epsilon_thresholds(double xi_prev_norm, double epsilon);

struct BatchSizeRule {
  double epsilon = 0;
  SamplingMode mode = SamplingMode::kWithReplacement;
  int cap = 0;  // N
};

// exact means the rule demanded at least a full pass; the caller should then
// evaluate the exact quantity (zero variance) for the same N samples.
struct BatchSizes {
  int gradient = 0;
  int hessian = 0;
  bool gradient_exact = false;
  bool hessian_exact = false;
};

// With replacement: ceil(drift^2/eps_g) and ceil(drift^2/eps_h), clamped to
// [0, N]. Without replacement: the harmonic rules
//   |S| >= 1 / (1/N + eps_g / drift^2)
//   |B| >= 1 / (1/N + eps_h / (sqrt(33) drift^2)).
// drift = 0 returns (0, 0): the snapshot is already exact there.
BatchSizes batch_sizes(const BatchSizeRule& rule, double drift, double eps_g, double eps_h);

// (1/|S|) sum_{i in S} (grad_i(x) - grad_i(x_tilde)) + g_tilde; the empty batch
// returns g_tilde. Charges |S| gradient samples when count_pairs_once, else
// 2|S| (both evaluation points).
Vector svr_gradient(const ProblemInstance& problem, const EpochSnapshot& snapshot,
                    const Vector& x, std::span<const int> indices, SampleLedger& ledger,
                    bool count_pairs_once = true);

Matrix svr_hessian(const ProblemInstance& problem, const EpochSnapshot& snapshot, const Vector& x,
                   std::span<const int> indices, SampleLedger& ledger,
                   bool count_pairs_once = true);

// Variance-reduced gradient with the second-order correction
//   (1/|S|) sum_j (grad_j(x) - grad_j(x_tilde)) + g_tilde
//   + (1/|S|) sum_j (H_tilde - hess_j(x_tilde)) (x - x_tilde).
// Also charges |S| Hessian samples for the per-component Hessians at x_tilde.
Vector corrected_svr_gradient(const ProblemInstance& problem, const EpochSnapshot& snapshot,
                              const Vector& x, std::span<const int> indices, SampleLedger& ledger,
                              bool count_pairs_once = true);

}  // namespace svrc
