#include "svrc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace svrc {

EpochSnapshot take_snapshot(const ProblemInstance& problem, const Vector& x, int stage,
                            SampleLedger& ledger) {
  EpochSnapshot snap;
  snap.x_tilde = x;
  snap.g_tilde = full_gradient(problem, x, ledger);
  snap.h_tilde = full_hessian(problem, x, ledger);
  snap.stage = stage;
  return snap;
}

Thresholds epsilon_thresholds(double xi_prev_norm, double epsilon) {
  if (xi_prev_norm < 0) throw std::invalid_argument("epsilon_thresholds: negative step norm");
  if (epsilon <= 0) throw std::invalid_argument("epsilon_thresholds: epsilon must be positive");
  const double sq = xi_prev_norm * xi_prev_norm;
  return {std::max(sq * sq, epsilon * epsilon), std::max(sq, epsilon)};
}

namespace {

constexpr double kSqrt33 = 5.744562646538029;

std::pair<int, bool> with_replacement_size(double drift_sq, double eps, int cap) {
  const double raw = drift_sq / eps;
  if (raw >= static_cast<double>(cap)) return {cap, true};
  const int size = std::max(1, static_cast<int>(std::ceil(raw)));
  return {size, size >= cap};
}

std::pair<int, bool> without_replacement_size(double drift_sq, double eps, double slack, int cap) {
  const double raw = 1.0 / (1.0 / cap + eps / (slack * drift_sq));
  const int size = std::min(cap, std::max(1, static_cast<int>(std::ceil(raw))));
  return {size, size >= cap};
}

}  // namespace

BatchSizes batch_sizes(const BatchSizeRule& rule, double drift, double eps_g, double eps_h) {
  if (drift < 0 || !std::isfinite(drift)) throw std::invalid_argument("batch_sizes: bad drift");
  if (eps_g <= 0 || eps_h <= 0) throw std::invalid_argument("batch_sizes: thresholds must be > 0");
  if (rule.cap < 1) throw std::invalid_argument("batch_sizes: cap must be >= 1");
  BatchSizes sizes;
  if (drift == 0) return sizes;
  const double drift_sq = drift * drift;
  if (rule.mode == SamplingMode::kWithReplacement) {
    std::tie(sizes.gradient, sizes.gradient_exact) = with_replacement_size(drift_sq, eps_g, rule.cap);
    std::tie(sizes.hessian, sizes.hessian_exact) = with_replacement_size(drift_sq, eps_h, rule.cap);
  } else {
    std::tie(sizes.gradient, sizes.gradient_exact) =
        without_replacement_size(drift_sq, eps_g, 1.0, rule.cap);
    std::tie(sizes.hessian, sizes.hessian_exact) =
        without_replacement_size(drift_sq, eps_h, kSqrt33, rule.cap);
  }
  return sizes;
}

namespace {

std::vector<int> ascending(std::span<const int> indices) {
  std::vector<int> order(indices.begin(), indices.end());
  std::sort(order.begin(), order.end());
  return order;
}

void check_indices(const ProblemInstance& problem, const std::vector<int>& order) {
  for (int i : order)
    if (i < 0 || i >= problem.component_count())
      throw std::invalid_argument("estimator index out of range: " + std::to_string(i));
}

void ensure_finite_vec(const Vector& v, int i) {
  if (!v.allFinite()) throw NonFiniteOracleError("non-finite component gradient", i);
}

void ensure_finite_mat(const Matrix& m, int i) {
  if (!m.allFinite()) throw NonFiniteOracleError("non-finite component Hessian", i);
}

}  // namespace

Vector svr_gradient(const ProblemInstance& problem, const EpochSnapshot& snapshot, const Vector& x,
                    std::span<const int> indices, SampleLedger& ledger, bool count_pairs_once) {
  if (indices.empty()) return snapshot.g_tilde;
  const std::vector<int> order = ascending(indices);
  check_indices(problem, order);
  Vector acc = Vector::Zero(problem.dimension());
  for (int i : order) {
    Vector gx = problem.component_gradient(i, x);
    ensure_finite_vec(gx, i);
    Vector gt = problem.component_gradient(i, snapshot.x_tilde);
    ensure_finite_vec(gt, i);
    acc += gx - gt;
  }
  ledger.charge_gradient((count_pairs_once ? 1 : 2) * order.size());
  return acc / static_cast<double>(order.size()) + snapshot.g_tilde;
}

Matrix svr_hessian(const ProblemInstance& problem, const EpochSnapshot& snapshot, const Vector& x,
                   std::span<const int> indices, SampleLedger& ledger, bool count_pairs_once) {
  if (indices.empty()) return snapshot.h_tilde;
  const std::vector<int> order = ascending(indices);
  check_indices(problem, order);
  const int d = problem.dimension();
  Matrix acc = Matrix::Zero(d, d);
  for (int i : order) {
    Matrix hx = problem.component_hessian(i, x);
    ensure_finite_mat(hx, i);
    Matrix ht = problem.component_hessian(i, snapshot.x_tilde);
    ensure_finite_mat(ht, i);
    acc += hx - ht;
  }
  ledger.charge_hessian((count_pairs_once ? 1 : 2) * order.size());
  return acc / static_cast<double>(order.size()) + snapshot.h_tilde;
}

Vector corrected_svr_gradient(const ProblemInstance& problem, const EpochSnapshot& snapshot,
                              const Vector& x, std::span<const int> indices, SampleLedger& ledger,
                              bool count_pairs_once) {
  const Vector dx = x - snapshot.x_tilde;
  if (indices.empty()) {
    if (dx.norm() == 0) return snapshot.g_tilde;
    throw EmptyBatchError("corrected_svr_gradient: empty batch away from the anchor");
  }
  const std::vector<int> order = ascending(indices);
  check_indices(problem, order);
  Vector acc_g = Vector::Zero(problem.dimension());
  Vector acc_c = Vector::Zero(problem.dimension());
  for (int i : order) {
    Vector gx = problem.component_gradient(i, x);
    ensure_finite_vec(gx, i);
    Vector gt = problem.component_gradient(i, snapshot.x_tilde);
    ensure_finite_vec(gt, i);
    acc_g += gx - gt;
    Matrix ht = problem.component_hessian(i, snapshot.x_tilde);
    ensure_finite_mat(ht, i);
    acc_c += (snapshot.h_tilde - ht) * dx;
  }
  const double s = static_cast<double>(order.size());
  ledger.charge_gradient((count_pairs_once ? 1 : 2) * order.size());
  ledger.charge_hessian(order.size());
  return acc_g / s + snapshot.g_tilde + acc_c / s;
}

}  // namespace svrc
