#pragma once

#include <array>

#include "epivar/decomposable.hpp"

namespace epivar {

struct ProxResult {
  Vector input;
  double tau = 1.0;
  Vector point;     // prox_{tau phi}(z)
  Vector v;         // (z - point) / tau, a subgradient at point
  double envelope = 0.0;
  int iterations = 0;
  bool converged = true;
  std::string route;  // "moreau" | "projection" | "split"
};

// Proximity operator of phi = offset + sigma_Q(F(.)) through the declared
// oracle; refuses when tau * rho >= 1 or no route is available.
ProxResult prox(const DecomposablePair& pair, double tau, const Vector& z);

double moreau_envelope(const DecomposablePair& pair, double tau, const Vector& z);

struct ProxJacobianReport {
  Matrix jacobian;            // central differences
  bool differentiable = true;
  double one_sided_mismatch = 0.0;  // max relative gap between one-sided slopes
  Vector sym_eigenvalues;     // of the symmetrized Jacobian
  double lower_violation = 0.0;   // amount below 0
  double upper_violation = 0.0;   // amount above 1/(1 - tau rho)
};

ProxJacobianReport prox_jacobian_fd(const DecomposablePair& pair, double tau, const Vector& z);

// ---- equivalence suite ------------------------------------------------
//
// Numerical proxies for the six equivalent statements tying strict twice
// epi-differentiability, strict complementarity, and smoothness of the
// proximity operator together.

struct EquivalenceReport {
  // 0: strict twice epi-differentiability proxy at the base point
  // 1: the same on sampled nearby graph points
  // 2: vbar in ri(dphi(xbar)) (sampled margin test)
  // 3: lambda_bar in ri(Q)
  // 4: prox continuously differentiable near zbar (shrinking-net proxy)
  // 5: prox differentiable at zbar
  std::array<int, 6> items{};  // 1 true, 0 false, -1 inconclusive
  bool consistent = false;     // all decided items agree
  bool all_true = false;
  bool all_false = false;
  std::string detail;
};

EquivalenceReport equivalence_suite(const DecomposablePair& pair, const Vector& lambda_bar,
                                    double tau, Rng& rng);

// ---- envelope convergence probe ----------------------------------------

struct EnvelopeProbeFunction {
  std::function<double(const Vector&)> f;
  int dim = 1;
  // closed-form envelope when the numeric minimization cannot reach the
  // function (indicator-type epi-limits)
  std::function<double(const Vector&, double)> envelope_override = nullptr;
};

struct EnvelopeProbeReport {
  std::vector<double> sup_gaps;  // per sequence element, max over the grid
  bool monotone_trend = false;   // gaps decrease (allowing 10% slack)
  double final_gap = kInf;
};

// Pointwise Moreau-envelope convergence of f_k toward f over the grid, the
// workable surrogate for epi-convergence of weakly convex functions.
EnvelopeProbeReport envelope_convergence_probe(const std::vector<EnvelopeProbeFunction>& fs,
                                               const EnvelopeProbeFunction& flimit, double tau,
                                               const std::vector<Vector>& grid);

}  // namespace epivar
