#include "svrc/problems.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "svrc/rng.hpp"

namespace svrc {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kTrigSum: return "trig";
    case ProblemKind::kRobustRegression: return "robust";
    case ProblemKind::kNonconvexLogistic: return "logistic";
  }
  return "?";
}

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "trig" || name == "trig_sum") return ProblemKind::kTrigSum;
  if (name == "robust" || name == "robust_regression") return ProblemKind::kRobustRegression;
  if (name == "logistic" || name == "nonconvex_logistic") return ProblemKind::kNonconvexLogistic;
  throw ConfigError("unknown problem kind: " + name);
}

namespace {

double max_row_norm(const Matrix& a) {
  double m = 0;
  for (int i = 0; i < a.rows(); ++i) m = std::max(m, a.row(i).norm());
  return m;
}

// max |f| over [lo, hi]: dense grid then golden-section refinement around the
// best cell.
double grid_max_abs(double (*f)(double), double lo, double hi, int points) {
  double best = 0, best_z = lo;
  for (int i = 0; i < points; ++i) {
    const double z = lo + (hi - lo) * i / (points - 1);
    const double v = std::abs(f(z));
    if (v > best) {
      best = v;
      best_z = z;
    }
  }
  const double cell = (hi - lo) / (points - 1);
  double a = std::max(lo, best_z - cell), b = std::min(hi, best_z + cell);
  const double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = std::abs(f(x1)), f2 = std::abs(f(x2));
  for (int it = 0; it < 200; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = std::abs(f(x2));
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = std::abs(f(x1));
    }
  }
  return std::max(best, std::max(f1, f2));
}

double robust_phi(double z) { return z * z / (1 + z * z); }
double robust_phi_d1(double z) {
  const double w = 1 + z * z;
  return 2 * z / (w * w);
}
double robust_phi_d2(double z) {
  const double w = 1 + z * z;
  return (2 - 6 * z * z) / (w * w * w);
}
double robust_phi_d3(double z) {
  const double w = 1 + z * z;
  return 24 * z * (z * z - 1) / (w * w * w * w);
}

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}
double softplus(double t) {  // log(1 + e^t)
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}
double sigmoid_d1(double t) {
  const double s = sigmoid(t);
  return s * (1 - s);
}
double sigmoid_d2(double t) {
  const double s = sigmoid(t);
  return s * (1 - s) * (1 - 2 * s);
}

double robust_c3() {
  static const double c3 = grid_max_abs(&robust_phi_d3, -10.0, 10.0, 1000000);
  return c3;
}
double logistic_curvature_max() {
  static const double v = grid_max_abs(&sigmoid_d1, -10.0, 10.0, 100001);
  return v;  // = 1/4
}
double logistic_curvature_lipschitz() {
  static const double v = grid_max_abs(&sigmoid_d2, -10.0, 10.0, 1000000);
  return v;  // = 1/(6 sqrt(3))
}

}  // namespace

TrigSum::TrigSum(Matrix a, Vector b) : ProblemInstance(a.rows(), a.cols(), 0, 0), a_(std::move(a)), b_(std::move(b)) {
  if (b_.size() != a_.rows()) throw std::invalid_argument("TrigSum: offset count mismatch");
  const double mx = max_row_norm(a_);
  set_lipschitz(mx * mx, mx * mx * mx);
}

double TrigSum::component_value(int i, const Vector& x) const {
  return std::cos(a_.row(i).dot(x) + b_(i));
}

Vector TrigSum::component_gradient(int i, const Vector& x) const {
  const double theta = a_.row(i).dot(x) + b_(i);
  return -std::sin(theta) * a_.row(i).transpose();
}

Matrix TrigSum::component_hessian(int i, const Vector& x) const {
  const double theta = a_.row(i).dot(x) + b_(i);
  return -std::cos(theta) * (a_.row(i).transpose() * a_.row(i));
}

RobustRegression::RobustRegression(Matrix a, Vector b)
    : ProblemInstance(a.rows(), a.cols(), 0, 0), a_(std::move(a)), b_(std::move(b)) {
  if (b_.size() != a_.rows()) throw std::invalid_argument("RobustRegression: target count mismatch");
  const double mx = max_row_norm(a_);
  set_lipschitz(2.0 * mx * mx, robust_c3() * mx * mx * mx);
}

double RobustRegression::third_derivative_bound() { return robust_c3(); }

double RobustRegression::component_value(int i, const Vector& x) const {
  return robust_phi(a_.row(i).dot(x) - b_(i));
}

Vector RobustRegression::component_gradient(int i, const Vector& x) const {
  return robust_phi_d1(a_.row(i).dot(x) - b_(i)) * a_.row(i).transpose();
}

Matrix RobustRegression::component_hessian(int i, const Vector& x) const {
  return robust_phi_d2(a_.row(i).dot(x) - b_(i)) * (a_.row(i).transpose() * a_.row(i));
}

NonconvexLogistic::NonconvexLogistic(Matrix a, Vector labels, double lambda)
    : ProblemInstance(a.rows(), a.cols(), 0, 0),
      a_(std::move(a)),
      y_(std::move(labels)),
      lambda_(lambda) {
  if (y_.size() != a_.rows()) throw std::invalid_argument("NonconvexLogistic: label count mismatch");
  if (lambda_ < 0) throw std::invalid_argument("NonconvexLogistic: lambda must be >= 0");
  for (int i = 0; i < y_.size(); ++i)
    if (y_(i) != 1.0 && y_(i) != -1.0)
      throw std::invalid_argument("NonconvexLogistic: labels must be +-1");
  const double mx = max_row_norm(a_);
  const double grad_l = logistic_curvature_max() * mx * mx + 2.0 * lambda_;
  const double hess_l = logistic_curvature_lipschitz() * mx * mx * mx + lambda_ * robust_c3();
  set_lipschitz(grad_l, hess_l);
}

double NonconvexLogistic::component_value(int i, const Vector& x) const {
  double reg = 0;
  for (int j = 0; j < x.size(); ++j) reg += robust_phi(x(j));
  return softplus(-y_(i) * a_.row(i).dot(x)) + lambda_ * reg;
}

Vector NonconvexLogistic::component_gradient(int i, const Vector& x) const {
  const double z = a_.row(i).dot(x);
  Vector g = (-y_(i) * sigmoid(-y_(i) * z)) * a_.row(i).transpose();
  for (int j = 0; j < x.size(); ++j) g(j) += lambda_ * robust_phi_d1(x(j));
  return g;
}

Matrix NonconvexLogistic::component_hessian(int i, const Vector& x) const {
  const double z = a_.row(i).dot(x);
  Matrix h = sigmoid_d1(z) * (a_.row(i).transpose() * a_.row(i));
  for (int j = 0; j < x.size(); ++j) h(j, j) += lambda_ * robust_phi_d2(x(j));
  return h;
}

namespace {

// Rescale each row to norm <= 1, idempotently: rows already inside the ball
// keep their exact bits.
void rescale_rows(Matrix& a) {
  for (int i = 0; i < a.rows(); ++i) {
    double norm = a.row(i).norm();
    while (norm > 1.0) {
      a.row(i) /= norm;
      norm = a.row(i).norm();
    }
  }
}

Matrix gaussian_rows(int n, int d, std::uint64_t stream) {
  std::mt19937_64 rng(stream);
  Matrix a(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = normal_double(rng);
  rescale_rows(a);
  return a;
}

Vector planted_center(int d, std::uint64_t stream, double radius) {
  std::mt19937_64 rng(stream);
  Vector x(d);
  for (int j = 0; j < d; ++j) x(j) = normal_double(rng);
  const double norm = x.norm();
  if (norm > 0) x *= radius / norm;
  return x;
}

}  // namespace

std::unique_ptr<ProblemInstance> generate(ProblemKind kind, int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("generate: need N >= 1 and d >= 1");
  const auto tag = static_cast<std::uint64_t>(kind);
  Matrix a = gaussian_rows(n, d, derive_stream(seed, tag, 1));
  std::mt19937_64 aux(derive_stream(seed, tag, 2));
  const Vector center = planted_center(d, derive_stream(seed, tag, 3), 1.5);
  switch (kind) {
    case ProblemKind::kTrigSum: {
      // b_i = pi - a_i'x* + jitter puts a deep basin near x*.
      Vector b(n);
      for (int i = 0; i < n; ++i)
        b(i) = 3.14159265358979323846 - a.row(i).dot(center) + 0.6 * (uniform_double(aux) - 0.5);
      return std::make_unique<TrigSum>(std::move(a), std::move(b));
    }
    case ProblemKind::kRobustRegression: {
      Vector b(n);
      for (int i = 0; i < n; ++i) b(i) = a.row(i).dot(center) + 0.1 * normal_double(aux);
      return std::make_unique<RobustRegression>(std::move(a), std::move(b));
    }
    case ProblemKind::kNonconvexLogistic: {
      // A far-out separator keeps the data nearly separable, so runs have a
      // long descent ramp before the losses flatten.
      const Vector separator = planted_center(d, derive_stream(seed, tag, 3), 6.0);
      Vector y(n);
      for (int i = 0; i < n; ++i)
        y(i) = (a.row(i).dot(separator) + 0.05 * normal_double(aux)) > 0 ? 1.0 : -1.0;
      return std::make_unique<NonconvexLogistic>(std::move(a), std::move(y), 0.01);
    }
  }
  throw std::invalid_argument("generate: unknown problem kind");
}

std::unique_ptr<ProblemInstance> load_dataset(const std::string& path, double lambda) {
  std::ifstream file(path);
  if (!file) throw DatasetFormatError("cannot open " + path, 0);
  std::vector<double> labels;
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  int d = -1;
  while (std::getline(file, line)) {
    ++line_no;
    std::istringstream in(line);
    double label;
    if (!(in >> label)) {
      std::string probe;
      std::istringstream check(line);
      if (!(check >> probe)) continue;  // blank line
      throw DatasetFormatError("cannot parse label", line_no);
    }
    std::vector<double> row;
    double v;
    while (in >> v) row.push_back(v);
    if (!in.eof()) throw DatasetFormatError("cannot parse feature value", line_no);
    if (row.empty()) throw DatasetFormatError("row has no features", line_no);
    if (d < 0) d = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != d)
      throw DatasetFormatError("expected " + std::to_string(d) + " features, got " +
                                   std::to_string(row.size()),
                               line_no);
    labels.push_back(label > 0 ? 1.0 : -1.0);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DatasetFormatError("dataset has no rows", line_no);
  Matrix a(rows.size(), d);
  Vector y(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    y(static_cast<int>(i)) = labels[i];
    for (int j = 0; j < d; ++j) a(static_cast<int>(i), j) = rows[i][j];
  }
  rescale_rows(a);
  auto problem = std::make_unique<NonconvexLogistic>(std::move(a), std::move(y), lambda);
  const LipschitzAudit audit = lipschitz_audit(*problem, 20, 0x10ad);
  if (!audit.within_declared)
    throw std::logic_error("load_dataset: derived Lipschitz constants failed the audit");
  return problem;
}

void write_dataset(const std::string& path, const Matrix& features, const Vector& labels) {
  if (labels.size() != features.rows())
    throw std::invalid_argument("write_dataset: label count mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset: cannot open " + path);
  char buf[64];
  for (int i = 0; i < features.rows(); ++i) {
    out << (labels(i) > 0 ? 1 : -1);
    for (int j = 0; j < features.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", features(i, j));
      out << ' ' << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_dataset: write failed for " + path);
}

}  // namespace svrc
