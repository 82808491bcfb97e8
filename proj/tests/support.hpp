#pragma once

#include <functional>
#include <random>
#include <vector>

#include "svrc/core.hpp"
#include "svrc/rng.hpp"

namespace svrc::test {

inline bool bitwise_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

inline bool bitwise_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

inline Vector random_vector(std::mt19937_64& rng, int d, double scale = 1.0) {
  Vector v(d);
  for (int j = 0; j < d; ++j) v(j) = scale * normal_double(rng);
  return v;
}

inline Matrix random_symmetric(std::mt19937_64& rng, int d, double scale = 1.0) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = scale * normal_double(rng);
  return 0.5 * (m + m.transpose());
}

// Central finite differences; the independent oracle for gradient/Hessian
// checks.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
  Vector g(x.size());
  Vector probe = x;
  for (int j = 0; j < x.size(); ++j) {
    const double step = h * (1 + std::abs(x(j)));
    probe(j) = x(j) + step;
    const double fwd = f(probe);
    probe(j) = x(j) - step;
    const double bwd = f(probe);
    probe(j) = x(j);
    g(j) = (fwd - bwd) / (2 * step);
  }
  return g;
}

inline Matrix fd_hessian(const std::function<Vector(const Vector&)>& grad, const Vector& x,
                         double h = 1e-5) {
  const int d = static_cast<int>(x.size());
  Matrix out(d, d);
  Vector probe = x;
  for (int j = 0; j < d; ++j) {
    const double step = h * (1 + std::abs(x(j)));
    probe(j) = x(j) + step;
    const Vector fwd = grad(probe);
    probe(j) = x(j) - step;
    const Vector bwd = grad(probe);
    probe(j) = x(j);
    out.col(j) = (fwd - bwd) / (2 * step);
  }
  return 0.5 * (out + out.transpose());
}

// Hand-assembled finite-sum problem for oracle-level tests; components are
// arbitrary callables.
class InlineProblem final : public ProblemInstance {
 public:
  struct Component {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Matrix(const Vector&)> hessian;
  };

  InlineProblem(int d, std::vector<Component> components, double grad_l, double hess_l)
      : ProblemInstance(static_cast<int>(components.size()), d, grad_l, hess_l),
        components_(std::move(components)) {}

  double component_value(int i, const Vector& x) const override {
    return components_[i].value(x);
  }
  Vector component_gradient(int i, const Vector& x) const override {
    return components_[i].gradient(x);
  }
  Matrix component_hessian(int i, const Vector& x) const override {
    return components_[i].hessian(x);
  }

 private:
  std::vector<Component> components_;
};

}  // namespace svrc::test
