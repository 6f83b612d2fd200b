#pragma once

#include <functional>
#include <optional>
#include <string>

#include "epivar/cone.hpp"
#include "epivar/rng.hpp"
#include "epivar/smooth_map.hpp"
#include "epivar/support_set.hpp"

namespace epivar {

struct UsotpNotEstablished : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// How the proximity operator of the pair is computed. Inner-solver splits
// are declared by the instance; the generic route refuses.
struct ProxOracle {
  // phi(y) = moreau_offset + sigma_{moreau_set}(y) globally: Moreau route
  std::optional<SupportSet> moreau_set;
  double moreau_offset = 0.0;
  // phi = const + indicator of a set: prox is the projection
  std::optional<SupportSet> projection_set;
  // phi = f + g with smooth f and prox-friendly g
  struct Split {
    std::function<double(const Vector&)> f;
    std::function<Vector(const Vector&)> grad_f;
    double grad_lipschitz = 1.0;
    std::function<double(const Vector&)> g;
    std::function<Vector(const Vector&, double)> prox_g;  // prox_{t g}
  };
  std::optional<Split> split;
};

enum class UsotpStatus { kUnknown, kCertified, kDeclared, kRefuted };

// phi(x) = offset + sigma_Q(F(x)) near basepoint, with F(basepoint) = 0.
struct DecomposablePair {
  std::string name;
  SupportSet Q;
  SmoothMap F;
  Vector basepoint;
  double offset = 0.0;

  double weak_convexity = 0.0;  // declared global prox-regularity constant rho
  double tau = 1.0;             // default prox parameter with tau * rho < 1
  ProxOracle prox_oracle;
  UsotpStatus usotp = UsotpStatus::kUnknown;

  double eval(const Vector& x) const { return offset + Q.support(F.value(x)); }
  std::string validate() const;  // empty string when the invariants hold
};

struct GraphPoint {
  Vector x, v, lambda;
  double stationarity_residual = 0.0;  // ||DF(x)^T lambda - v||
  double complementarity_residual = 0.0;  // |<lambda, F(x)> - sigma_Q(F(x))|
};

struct MultiplierResult {
  bool feasible = false;  // v in dphi(x) within tolerance
  Vector lambda;          // minimum-norm element of Lambda(x, v) when feasible
  double residual = kInf;
  SupportSet face;        // the subdifferential face dsigma_Q(F(x))
};

// Lambda(x, v) = { lambda in dsigma_Q(F(x)) : DF(x)^T lambda = v }.
MultiplierResult multipliers(const DecomposablePair& pair, const Vector& x, const Vector& v);

// dphi(x)(h) = sigma_Q(DF(x) h)
double subderivative(const DecomposablePair& pair, const Vector& x, const Vector& h);

// membership test for v in dphi(x) = DF(x)^T dsigma_Q(F(x))
bool subgradient_contains(const DecomposablePair& pair, const Vector& x, const Vector& v,
                          double tol = 1e-8);

GraphPoint make_graph_point(const DecomposablePair& pair, const Vector& x, const Vector& v);

// ---- constraint qualifications -----------------------------------------

enum class CqKind { kRobinson, kStrict, kNondegeneracy };

struct CqCertificate {
  CqKind which = CqKind::kRobinson;
  CertVerdict verdict = CertVerdict::kInconclusive;
  Vector witness;  // nonzero intersection element when the CQ fails
  std::string method;
  std::string detail;
};

CqCertificate robinson_cq(const DecomposablePair& pair, Rng& rng);
CqCertificate strict_cq(const DecomposablePair& pair, const Vector& lambda_bar, Rng& rng);
CqCertificate nondegeneracy_cq(const DecomposablePair& pair, const Vector& lambda_bar, Rng& rng);

// ---- second-order objects ------------------------------------------------

// Critical cone C(xbar, vbar) = DF(xbar)^{-1} N_Q(lambda_bar) with membership
// through the inner normal cone.
Cone critical_cone(const DecomposablePair& pair, const Vector& lambda_bar);

// Orthonormal basis of aff(C) = DF(xbar)^{-1} aff(N_Q(lambda_bar)).
Matrix critical_cone_aff_basis(const DecomposablePair& pair, const Vector& lambda_bar);

// Direct critical-cone membership: dphi(xbar)(h) = <vbar, h>.
bool in_critical_cone(const DecomposablePair& pair, const Vector& vbar, const Vector& h,
                      double tol = 1e-9);

// d2 phi(xbar | vbar)(h) = max_{lambda in Lambda} <lambda, D2F[h,h]> on the
// critical cone, +inf outside.
double second_subderivative(const DecomposablePair& pair, const Vector& vbar, const Vector& h);

// the maximum of <lambda, w> over Lambda(xbar, vbar); LP on polyhedral faces,
// projected gradient on spectral ones
double maximize_over_multipliers(const DecomposablePair& pair, const Vector& x, const Vector& v,
                                 const Vector& w);

struct StrictSecondSubderivative {
  Vector lambda;
  Matrix aff_basis;  // aff(DF^{-1} N)
  double quadratic(const DecomposablePair& pair, const Vector& h) const;
  double operator()(const DecomposablePair& pair, const Vector& h, double tol = 1e-9) const;
};

// Closed form under strict CQ + the tangent-path property; throws
// UsotpNotEstablished when the gate is not satisfied.
StrictSecondSubderivative strict_second_subderivative_formula(const DecomposablePair& pair,
                                                              const Vector& lambda_bar,
                                                              Rng& rng);

// ---- certificates ---------------------------------------------------------

enum class SaddleVerdict { kStrictSaddle, kLocalMinCandidate, kNotApplicable };

struct SaddleCertificate {
  SaddleVerdict verdict = SaddleVerdict::kNotApplicable;
  Vector witness;
  double min_eigenvalue = 0.0;
  std::string detail;
};

SaddleCertificate is_strict_saddle(const DecomposablePair& pair, Rng& rng);

enum class SmrVerdict { kSmr, kNotSmr, kSmrTrivialSubspace };

struct SmrCertificate {
  SmrVerdict verdict = SmrVerdict::kNotSmr;
  double min_eigenvalue = 0.0;
  bool growth_checked = false;
  bool growth_holds = false;
  int growth_samples = 0;
  std::string detail;
};

// graph_points: sampled elements of gph(dphi) near the base point used for
// the quadratic-growth corroboration; may be empty.
SmrCertificate strong_metric_regularity_certificate(const DecomposablePair& pair,
                                                    const Vector& lambda_bar,
                                                    const std::vector<GraphPoint>& graph_points,
                                                    Rng& rng);

// ---- affine-hull lemma check ----------------------------------------------

struct AffineHullCheck {
  bool cq_certified = false;
  bool equal = false;
  double angle_gap = kInf;
  int lhs_dim = -1, rhs_dim = -1;
};

// Verifies aff(A^{-1} N) = A^{-1} aff(N) for a certified instance; the left
// side is estimated by sampling generators of A^{-1} N.
AffineHullCheck affine_hull_preimage_check(const Matrix& A, const Cone& N, Rng& rng);

}  // namespace epivar
