#pragma once

#include "svrc/types.hpp"

namespace svrc {

// The regularized model min_xi  g'xi + (1/2) xi'H xi + (sigma/6) ||xi||^3.
struct CubicModel {
  Vector g;
  Matrix h;  // symmetric
  double sigma = 1.0;
};

// Global minimizer with its optimality certificates. The first-order condition
// is g + H xi + (sigma/2)||xi|| xi = 0, the second-order one
// H + (sigma/2)||xi|| I >= 0; stationarity_residual and curvature_margin
// measure how tightly each holds.
struct StepResult {
  Vector xi;
  double r = 0;  // ||xi||
  double stationarity_residual = 0;
  double curvature_margin = 0;
  bool hard_case = false;
};

struct Certificate {
  bool ok = false;
  double stationarity_residual = 0;
  double curvature_margin = 0;
};

// Smallest eigenvalue of a symmetric matrix via full eigendecomposition.
double lambda_min(const Matrix& h);

// Exact solve through the eigendecomposition H = Q diag(lam) Q' and the scalar
// secular equation ||(lam + (sigma/2) r I)^{-1} Q'g|| = r on
// r in (max(0, -2 lam_min / sigma), inf), bracketed bisection refined with
// Newton steps. When g has no component on the bottom eigenspace of an
// indefinite H and the interior equation has no root (the hard case),
// r = -2 lam_min / sigma and a bottom-eigenspace direction restores ||xi|| = r.
//
// Throws SolverStallError if the requested certificates cannot be met.
StepResult solve_cubic(const CubicModel& model, double tol_stat = 1e-9, double tol_psd = 1e-9);

// Independent recomputation of both optimality residuals at a candidate xi.
// True iff stationarity_residual <= tol_stat (||g|| + sigma max(1, r^2)) and
// curvature_margin >= -tol_psd.
Certificate certify(const CubicModel& model, const Vector& xi, double tol_stat = 1e-9,
                    double tol_psd = 1e-9);

// Model objective at xi, for oracles and probes.
double model_value(const CubicModel& model, const Vector& xi);

}  // namespace svrc
