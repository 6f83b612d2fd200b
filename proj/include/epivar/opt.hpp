#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "epivar/linalg.hpp"

namespace epivar {

// ---- dense LP (simplex) -----------------------------------------------
//
//   maximize c^T x   subject to  A x <= b,   x free.
//
// Intended for the small polyhedral certificates in this project; uses
// Bland's rule, so it terminates on degenerate data.

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status;
  Vector x;
  double value = 0.0;
};

LpResult solve_lp(const Vector& c, const Matrix& A, const Vector& b);

// ---- nonnegative least squares -----------------------------------------
//
// min || V y - z ||  subject to y >= 0  (Lawson-Hanson active set).
Vector nnls(const Matrix& V, const Vector& z, double tol = 1e-12);

// ---- Dykstra's alternating projections ----------------------------------

struct DykstraResult {
  Vector point;
  bool converged = false;
  int iterations = 0;
  double last_change = 0.0;
};

using ProjectionFn = std::function<Vector(const Vector&)>;

// Projection onto the intersection of closed convex sets.
DykstraResult dykstra(const Vector& z, const std::vector<ProjectionFn>& projections,
                      int max_iter = 20000, double tol = 1e-10);

// Projection onto the (closure of the) Minkowski sum K1 + ... + Kp by block
// coordinate descent on || z - sum a_i ||^2 with a_i in K_i.
DykstraResult project_onto_sum(const Vector& z, const std::vector<ProjectionFn>& projections,
                               int max_iter = 20000, double tol = 1e-11);

// ---- 1-D convex minimization ---------------------------------------------

// Golden-section on [lo, hi]; f convex (or unimodal).
double minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                       double tol = 1e-12, int max_iter = 200);

// Expands a bracket around x0 until the minimum is interior, then golden.
double minimize_scalar_unbounded(const std::function<double(double)>& f, double x0,
                                 double initial_step = 1.0, double tol = 1e-12);

// ---- projection of eigen/singular values ---------------------------------

// Project s onto { y : 0 <= y <= cap, sum(y) <= budget } (bisection on the
// multiplier of the sum constraint).
Vector project_capped_simplex_le(const Vector& s, double cap, double budget, double tol = 1e-12);

// Same with sum(y) == budget.
Vector project_capped_simplex_eq(const Vector& s, double cap, double budget, double tol = 1e-12);

}  // namespace epivar
