#include "svrc/cubic_solver.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "svrc/errors.hpp"

namespace svrc {

double lambda_min(const Matrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("lambda_min: matrix must be square");
  if (h.rows() == 0) throw std::invalid_argument("lambda_min: empty matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw LinearAlgebraError("eigendecomposition failed");
  return es.eigenvalues()(0);
}

double model_value(const CubicModel& model, const Vector& xi) {
  const double r = xi.norm();
  return model.g.dot(xi) + 0.5 * xi.dot(model.h * xi) + model.sigma / 6.0 * r * r * r;
}

Certificate certify(const CubicModel& model, const Vector& xi, double tol_stat, double tol_psd) {
  Certificate cert;
  const double r = xi.norm();
  cert.stationarity_residual = (model.g + model.h * xi + 0.5 * model.sigma * r * xi).norm();
  cert.curvature_margin = lambda_min(model.h) + 0.5 * model.sigma * r;
  const double stat_scale = model.g.norm() + model.sigma * std::max(1.0, r * r);
  cert.ok = cert.stationarity_residual <= tol_stat * stat_scale &&
            cert.curvature_margin >= -tol_psd;
  return cert;
}

namespace {

void validate_model(const CubicModel& model) {
  if (model.sigma <= 0 || !std::isfinite(model.sigma))
    throw std::invalid_argument("solve_cubic: sigma must be positive and finite");
  if (model.h.rows() != model.h.cols() || model.h.rows() != model.g.size())
    throw std::invalid_argument("solve_cubic: dimension mismatch");
  if (!model.g.allFinite() || !model.h.allFinite())
    throw std::invalid_argument("solve_cubic: non-finite model");
}

}  // namespace

StepResult solve_cubic(const CubicModel& model, double tol_stat, double tol_psd) {
  validate_model(model);
  const int d = static_cast<int>(model.g.size());
  const double sigma = model.sigma;

  Eigen::SelfAdjointEigenSolver<Matrix> es(model.h);
  if (es.info() != Eigen::Success) throw LinearAlgebraError("eigendecomposition failed");
  const Vector& lam = es.eigenvalues();  // ascending
  const Matrix& q = es.eigenvectors();
  const double lam_bottom = lam(0);
  const Vector gp = q.transpose() * model.g;
  const double g_norm = model.g.norm();

  StepResult out;
  out.xi = Vector::Zero(d);

  auto finish = [&](bool hard) {
    out.hard_case = hard;
    out.r = out.xi.norm();
    out.stationarity_residual =
        (model.g + model.h * out.xi + 0.5 * sigma * out.r * out.xi).norm();
    out.curvature_margin = lam_bottom + 0.5 * sigma * out.r;
    const double stat_scale = g_norm + sigma * std::max(1.0, out.r * out.r);
    if (out.stationarity_residual > tol_stat * stat_scale || out.curvature_margin < -tol_psd) {
      std::ostringstream msg;
      msg << "solve_cubic: certificates out of tolerance, stationarity="
          << out.stationarity_residual << " (allowed " << tol_stat * stat_scale
          << "), curvature margin=" << out.curvature_margin << " (allowed " << -tol_psd << ")";
      throw SolverStallError(msg.str());
    }
    return out;
  };

  if (g_norm == 0.0 && lam_bottom >= 0.0) return finish(false);

  const double r_floor = std::max(0.0, -2.0 * lam_bottom / sigma);

  // Bottom eigenspace of H and the hard-case screen: components of g below
  // 1e-12 ||g|| on that subspace count as zero.
  const double eig_tol = 1e-10 * std::max(1.0, std::abs(lam_bottom));
  const double hard_tol = 1e-12 * g_norm;
  bool bottom_clean = true;
  std::vector<bool> bottom(d, false);
  for (int j = 0; j < d; ++j) {
    if (lam(j) - lam_bottom <= eig_tol) {
      bottom[j] = true;
      if (std::abs(gp(j)) > hard_tol) bottom_clean = false;
    }
  }

  Vector coeff = gp;
  const bool masked = lam_bottom < 0.0 && bottom_clean;
  if (masked) {
    for (int j = 0; j < d; ++j)
      if (bottom[j]) coeff(j) = 0.0;
  }

  // The secular equation is solved in the shifted variable
  // delta = lam_min + (sigma/2) r, in which the denominators are
  // gap_j + delta with gap_j = lam_j - lam_min >= 0. Near-degenerate roots
  // (tiny leverage on the bottom eigenspace) are ill-conditioned in r but
  // perfectly conditioned in delta.
  Vector gap(d);
  for (int j = 0; j < d; ++j) gap(j) = lam(j) - lam_bottom;
  const double delta_lo_limit = std::max(0.0, lam_bottom);

  auto radius_of = [&](double delta) { return 2.0 * (delta - lam_bottom) / sigma; };
  auto norm_at = [&](double delta) {
    double s = 0;
    for (int j = 0; j < d; ++j) {
      if (coeff(j) == 0.0) continue;
      const double den = gap(j) + delta;
      const double v = coeff(j) / den;
      s += v * v;
    }
    return std::sqrt(s);
  };
  auto phi_at = [&](double delta) { return norm_at(delta) - radius_of(delta); };

  if (masked && norm_at(0.0) <= r_floor) {
    // Hard case: pin r at the floor and add a bottom-eigenspace component so
    // that ||xi|| = r. Sign picked to make g'xi <= 0, + on an exact tie.
    Vector xi_p = Vector::Zero(d);
    for (int j = 0; j < d; ++j) {
      if (coeff(j) == 0.0) continue;
      xi_p(j) = -coeff(j) / gap(j);
    }
    const double tau = std::sqrt(std::max(0.0, r_floor * r_floor - xi_p.squaredNorm()));
    const Vector q_bottom = q.col(0);
    const double sign = (tau * model.g.dot(q_bottom) > 0) ? -1.0 : 1.0;
    out.xi = q * xi_p + (sign * tau) * q_bottom;
    return finish(true);
  }

  // Easy case: phi is strictly decreasing on (delta_lo, inf) with a sign
  // change; sigma r^2/2 + lam_min r <= ||g|| bounds the root from above.
  double lo = delta_lo_limit;
  double hi = 0.5 * (lam_bottom + std::sqrt(lam_bottom * lam_bottom + 2.0 * sigma * g_norm));
  if (!(hi > lo)) hi = lo + std::max(1.0, std::abs(lo)) * 1e-8;
  int doublings = 0;
  while (phi_at(hi) > 0) {
    hi = 2.0 * hi + 1.0;
    if (++doublings > 200) {
      std::ostringstream msg;
      msg << "solve_cubic: no sign change after 200 doublings, phi(lo=" << lo
          << ")=" << phi_at(lo) << ", phi(hi=" << hi << ")=" << phi_at(hi);
      throw SolverStallError(msg.str());
    }
  }

  double delta = 0.5 * (lo + hi);
  if (!(delta > lo) || !(delta < hi)) delta = hi;
  for (int it = 0; it < 300; ++it) {
    double s2 = 0, s3 = 0;
    for (int j = 0; j < d; ++j) {
      if (coeff(j) == 0.0) continue;
      const double den = gap(j) + delta;
      const double v = coeff(j) / den;
      s2 += v * v;
      s3 += v * v / den;
    }
    const double nrm = std::sqrt(s2);
    const double radius = radius_of(delta);
    const double phi = nrm - radius;
    if (phi > 0)
      lo = delta;
    else
      hi = delta;
    if (hi - lo <= 4e-16 * std::max(hi, 1e-300)) break;
    if (std::abs(phi) <= 1e-15 * std::max(1.0, std::max(radius, nrm))) break;
    const double dphi = (nrm > 0 && std::isfinite(nrm)) ? -s3 / nrm - 2.0 / sigma : -2.0 / sigma;
    double next = delta - phi / dphi;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    delta = next;
  }

  Vector xi_p = Vector::Zero(d);
  for (int j = 0; j < d; ++j) {
    if (coeff(j) == 0.0) continue;
    xi_p(j) = -coeff(j) / (gap(j) + delta);
  }
  out.xi = q * xi_p;
  return finish(false);
}

}  // namespace svrc
