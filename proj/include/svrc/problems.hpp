#pragma once

#include <memory>
#include <string>

#include "svrc/core.hpp"

namespace svrc {

enum class ProblemKind { kTrigSum, kRobustRegression, kNonconvexLogistic };

std::string to_string(ProblemKind kind);
ProblemKind parse_problem_kind(const std::string& name);

// f_i(x) = cos(a_i'x + b_i); L = max ||a_i||^2, rho = max ||a_i||^3.
class TrigSum final : public ProblemInstance {
 public:
  TrigSum(Matrix a, Vector b);

  std::optional<double> objective_lower_bound() const override { return -1.0; }
  double component_value(int i, const Vector& x) const override;
  Vector component_gradient(int i, const Vector& x) const override;
  Matrix component_hessian(int i, const Vector& x) const override;

  const Matrix& features() const { return a_; }
  const Vector& offsets() const { return b_; }

 private:
  Matrix a_;
  Vector b_;
};

// f_i(x) = phi(a_i'x - b_i) with phi(z) = z^2 / (1 + z^2);
// L = 2 max ||a_i||^2, rho = c3 max ||a_i||^3 where c3 = max_z |phi'''(z)|.
class RobustRegression final : public ProblemInstance {
 public:
  RobustRegression(Matrix a, Vector b);

  std::optional<double> objective_lower_bound() const override { return 0.0; }
  double component_value(int i, const Vector& x) const override;
  Vector component_gradient(int i, const Vector& x) const override;
  Matrix component_hessian(int i, const Vector& x) const override;

  static double third_derivative_bound();  // c3, from the 1-D maximization oracle

 private:
  Matrix a_;
  Vector b_;
};

// f_i(x) = log(1 + exp(-y_i a_i'x)) + lambda sum_j x_j^2/(1 + x_j^2), y in {-1,+1}.
// L and rho are derived numerically at construction from 1-D curvature maxima.
class NonconvexLogistic final : public ProblemInstance {
 public:
  NonconvexLogistic(Matrix a, Vector labels, double lambda);

  std::optional<double> objective_lower_bound() const override { return 0.0; }
  double component_value(int i, const Vector& x) const override;
  Vector component_gradient(int i, const Vector& x) const override;
  Matrix component_hessian(int i, const Vector& x) const override;

  const Matrix& features() const { return a_; }
  const Vector& labels() const { return y_; }
  double regularization() const { return lambda_; }

 private:
  Matrix a_;
  Vector y_;
  double lambda_ = 0;
};

// Seeded synthetic instances. Rows are standard Gaussian rescaled to
// ||a_i|| <= 1; each family plants a well near a seeded x* so runs have a
// genuine descent path.
std::unique_ptr<ProblemInstance> generate(ProblemKind kind, int n, int d, std::uint64_t seed);

// Whitespace-separated text, one component per row: label then d features.
// Produces a NonconvexLogistic instance with rows rescaled to ||a_i|| <= 1.
std::unique_ptr<ProblemInstance> load_dataset(const std::string& path, double lambda = 0.1);

void write_dataset(const std::string& path, const Matrix& features, const Vector& labels);

}  // namespace svrc
