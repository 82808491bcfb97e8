#include "svrc/core.hpp"

#include <algorithm>
#include <cmath>

#include "svrc/rng.hpp"

namespace svrc {

std::string to_string(SamplingMode mode) {
  return mode == SamplingMode::kWithReplacement ? "with" : "without";
}

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::kAdaptiveSvrc: return "adaptive_svrc";
    case Algorithm::kFullGradSvrc: return "full_grad_svrc";
    case Algorithm::kCorrectedSvrc: return "corrected_svrc";
    case Algorithm::kFullCr: return "full_cr";
  }
  return "?";
}

std::string to_string(OutputOption option) {
  return option == OutputOption::kArgmin ? "argmin" : "uniform_random";
}

SamplingMode parse_sampling_mode(const std::string& name) {
  if (name == "with" || name == "with_replacement") return SamplingMode::kWithReplacement;
  if (name == "without" || name == "without_replacement") return SamplingMode::kWithoutReplacement;
  throw ConfigError("unknown sampling mode: " + name);
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "adaptive_svrc") return Algorithm::kAdaptiveSvrc;
  if (name == "full_grad_svrc") return Algorithm::kFullGradSvrc;
  if (name == "corrected_svrc") return Algorithm::kCorrectedSvrc;
  if (name == "full_cr") return Algorithm::kFullCr;
  throw ConfigError("unknown algorithm: " + name);
}

OutputOption parse_output_option(const std::string& name) {
  if (name == "argmin") return OutputOption::kArgmin;
  if (name == "random" || name == "uniform_random") return OutputOption::kUniformRandom;
  throw ConfigError("unknown output option: " + name);
}

ProblemInstance::ProblemInstance(int n, int d, double grad_lipschitz, double hess_lipschitz)
    : n_(n), d_(d), grad_lipschitz_(grad_lipschitz), hess_lipschitz_(hess_lipschitz) {
  if (n < 1 || d < 1) throw std::invalid_argument("problem needs N >= 1 and d >= 1");
  if (grad_lipschitz < 0 || hess_lipschitz < 0)
    throw std::invalid_argument("Lipschitz constants must be nonnegative");
}

void ProblemInstance::set_lipschitz(double grad_lipschitz, double hess_lipschitz) {
  grad_lipschitz_ = grad_lipschitz;
  hess_lipschitz_ = hess_lipschitz;
}

namespace {

void check_index(const ProblemInstance& problem, int i) {
  if (i < 0 || i >= problem.component_count())
    throw std::invalid_argument("component index out of range: " + std::to_string(i));
}

void check_point(const ProblemInstance& problem, const Vector& x) {
  if (x.size() != problem.dimension())
    throw std::invalid_argument("point dimension mismatch: got " + std::to_string(x.size()) +
                                ", expected " + std::to_string(problem.dimension()));
}

Vector component_gradient_checked(const ProblemInstance& problem, int i, const Vector& x) {
  Vector g = problem.component_gradient(i, x);
  if (!g.allFinite()) throw NonFiniteOracleError("non-finite component gradient", i);
  return g;
}

Matrix component_hessian_checked(const ProblemInstance& problem, int i, const Vector& x) {
  Matrix h = problem.component_hessian(i, x);
  if (!h.allFinite()) throw NonFiniteOracleError("non-finite component Hessian", i);
  return h;
}

}  // namespace

double objective_value(const ProblemInstance& problem, const Vector& x) {
  check_point(problem, x);
  double acc = 0;
  for (int i = 0; i < problem.component_count(); ++i) {
    const double v = problem.component_value(i, x);
    if (!std::isfinite(v)) throw NonFiniteOracleError("non-finite component value", i);
    acc += v;
  }
  return acc / problem.component_count();
}

Vector exact_gradient(const ProblemInstance& problem, const Vector& x) {
  check_point(problem, x);
  Vector acc = Vector::Zero(problem.dimension());
  for (int i = 0; i < problem.component_count(); ++i)
    acc += component_gradient_checked(problem, i, x);
  return acc / problem.component_count();
}

Matrix exact_hessian(const ProblemInstance& problem, const Vector& x) {
  check_point(problem, x);
  const int d = problem.dimension();
  Matrix acc = Matrix::Zero(d, d);
  for (int i = 0; i < problem.component_count(); ++i)
    acc += component_hessian_checked(problem, i, x);
  acc /= problem.component_count();
  return 0.5 * (acc + acc.transpose());
}

Vector full_gradient(const ProblemInstance& problem, const Vector& x, SampleLedger& ledger) {
  Vector g = exact_gradient(problem, x);
  ledger.charge_gradient(static_cast<std::uint64_t>(problem.component_count()));
  return g;
}

Matrix full_hessian(const ProblemInstance& problem, const Vector& x, SampleLedger& ledger) {
  Matrix h = exact_hessian(problem, x);
  ledger.charge_hessian(static_cast<std::uint64_t>(problem.component_count()));
  return h;
}

Vector batch_mean_gradient(const ProblemInstance& problem, const Vector& x,
                           std::span<const int> indices, SampleLedger& ledger) {
  check_point(problem, x);
  if (indices.empty()) throw EmptyBatchError("batch_mean_gradient: empty index set");
  std::vector<int> order(indices.begin(), indices.end());
  std::sort(order.begin(), order.end());
  Vector acc = Vector::Zero(problem.dimension());
  for (int i : order) {
    check_index(problem, i);
    acc += component_gradient_checked(problem, i, x);
  }
  ledger.charge_gradient(order.size());
  return acc / static_cast<double>(order.size());
}

Matrix batch_mean_hessian(const ProblemInstance& problem, const Vector& x,
                          std::span<const int> indices, SampleLedger& ledger) {
  check_point(problem, x);
  if (indices.empty()) throw EmptyBatchError("batch_mean_hessian: empty index set");
  std::vector<int> order(indices.begin(), indices.end());
  std::sort(order.begin(), order.end());
  const int d = problem.dimension();
  Matrix acc = Matrix::Zero(d, d);
  for (int i : order) {
    check_index(problem, i);
    acc += component_hessian_checked(problem, i, x);
  }
  acc /= static_cast<double>(order.size());
  ledger.charge_hessian(order.size());
  return 0.5 * (acc + acc.transpose());
}

LipschitzAudit lipschitz_audit(const ProblemInstance& problem, int pairs, std::uint64_t seed) {
  const int d = problem.dimension();
  std::mt19937_64 rng(splitmix64(seed));
  LipschitzAudit audit;
  for (int p = 0; p < pairs; ++p) {
    Vector x(d), step(d);
    for (int j = 0; j < d; ++j) x(j) = normal_double(rng);
    for (int j = 0; j < d; ++j) step(j) = normal_double(rng);
    const double radius = uniform_double(rng);  // ||x - y|| <= 1
    Vector y = x + step * (radius / std::max(step.norm(), 1e-300));
    const double dist = (x - y).norm();
    if (dist == 0) continue;
    for (int i = 0; i < problem.component_count(); ++i) {
      const double gr =
          (problem.component_gradient(i, x) - problem.component_gradient(i, y)).norm() / dist;
      const double hr =
          (problem.component_hessian(i, x) - problem.component_hessian(i, y)).norm() / dist;
      audit.max_grad_ratio = std::max(audit.max_grad_ratio, gr);
      audit.max_hess_ratio = std::max(audit.max_hess_ratio, hr);
    }
  }
  audit.within_declared = audit.max_grad_ratio <= problem.grad_lipschitz() * (1 + 1e-9) &&
                          audit.max_hess_ratio <= problem.hess_lipschitz() * (1 + 1e-9);
  return audit;
}

}  // namespace svrc
