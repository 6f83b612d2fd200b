#include "epivar/decomposable.hpp"

#include <cmath>
#include <sstream>

#include "epivar/opt.hpp"

namespace epivar {

namespace {

constexpr double kAdmissionTol = 1e-8;  // residual tolerance for v in dphi(x)

}  // namespace

std::string DecomposablePair::validate() const {
  std::ostringstream os;
  const Vector f0 = F.value(basepoint);
  if (f0.norm() > 1e-10) os << "normalization violated: ||F(xbar)|| = " << f0.norm() << "; ";
  if (weak_convexity < 0) os << "negative weak-convexity constant; ";
  if (tau * weak_convexity >= 1.0) os << "tau * rho >= 1; ";
  return os.str();
}

double subderivative(const DecomposablePair& pair, const Vector& x, const Vector& h) {
  return pair.Q.support(pair.F.jacobian(x) * h);
}

MultiplierResult multipliers(const DecomposablePair& pair, const Vector& x, const Vector& v) {
  MultiplierResult out;
  const Vector fx = pair.F.value(x);
  out.face = pair.Q.face(fx);
  const Matrix J = pair.F.jacobian(x);
  const Matrix Jt = J.transpose();

  // minimum-norm element of face ∩ {Jt lambda = v}: Dykstra from the origin
  const Matrix JtPinv = pinv(Jt);
  std::vector<ProjectionFn> projs;
  const SupportSet face = out.face;
  projs.push_back([face](const Vector& y) { return face.project(y); });
  projs.push_back(
      [Jt, JtPinv, v](const Vector& y) -> Vector { return y - JtPinv * (Jt * y - v); });
  DykstraResult r = dykstra(Vector::Zero(pair.Q.dim()), projs, 20000, 1e-12);
  Vector lam = out.face.project(r.point);
  out.lambda = lam;
  out.residual = (Jt * lam - v).norm();
  out.feasible = out.residual <= kAdmissionTol * (1.0 + v.norm());

  if (!out.feasible) {
    // polish with projected gradient on the residual (Dykstra may stall when
    // the intersection is empty)
    const double L = std::max(1e-12, spectral_norm(J));
    const double step = 1.0 / (L * L);
    Vector y = lam;
    for (int it = 0; it < 500; ++it) {
      y = out.face.project(Vector(y - step * (J * (Jt * y - v))));
      const double res = (Jt * y - v).norm();
      if (res < out.residual) {
        out.residual = res;
        out.lambda = y;
      }
      if (res <= 1e-12 * (1.0 + v.norm())) break;
    }
    out.feasible = out.residual <= kAdmissionTol * (1.0 + v.norm());
  }
  return out;
}

bool subgradient_contains(const DecomposablePair& pair, const Vector& x, const Vector& v,
                          double tol) {
  MultiplierResult m = multipliers(pair, x, v);
  return m.residual <= tol * (1.0 + v.norm());
}

GraphPoint make_graph_point(const DecomposablePair& pair, const Vector& x, const Vector& v) {
  GraphPoint g;
  g.x = x;
  g.v = v;
  MultiplierResult m = multipliers(pair, x, v);
  g.lambda = m.lambda;
  g.stationarity_residual = m.residual;
  const Vector fx = pair.F.value(x);
  g.complementarity_residual = std::abs(g.lambda.dot(fx) - pair.Q.support(fx));
  return g;
}

// ---- constraint qualifications ---------------------------------------

CqCertificate robinson_cq(const DecomposablePair& pair, Rng& rng) {
  CqCertificate out;
  out.which = CqKind::kRobinson;
  const Matrix J = pair.F.jacobian(pair.basepoint);
  Matrix ker = nullspace(Matrix(J.transpose()));
  if (ker.cols() == 0) {
    out.verdict = CertVerdict::kHolds;
    out.method = "surjective-jacobian";
    return out;
  }
  try {
    Cone dom = pair.Q.domain_cone();
    FullSpaceCert c = cone_sum_is_full_space(J, dom, rng);
    out.verdict = c.verdict;
    out.witness = c.witness;
    out.method = c.method;
    out.detail = c.detail;
  } catch (const InnerSolverRequired&) {
    // sampled recession probe: u in ker(J^T) with -u in rec(Q) breaks the CQ
    out.method = "sampled-recession";
    const Vector q0 = pair.Q.any_point();
    const double big = 64.0;
    for (int s = 0; s < 32; ++s) {
      Vector u = ker * rng.unit_vector(static_cast<int>(ker.cols()));
      const Vector probe = q0 - big * u;
      if (pair.Q.distance(probe) <= 1e-6 * big) {
        out.verdict = CertVerdict::kFails;
        out.witness = u;
        return out;
      }
    }
    out.verdict = CertVerdict::kHolds;
    out.detail = "no recession witness among samples";
  }
  return out;
}

CqCertificate strict_cq(const DecomposablePair& pair, const Vector& lambda_bar, Rng& rng) {
  CqCertificate out;
  out.which = CqKind::kStrict;
  const Matrix J = pair.F.jacobian(pair.basepoint);
  Matrix ker = nullspace(Matrix(J.transpose()));
  Cone mt = pair.Q.tangent_cone(lambda_bar).negate();
  FullSpaceCert c = subspace_cone_intersection_trivial(ker, mt, rng);
  out.verdict = c.verdict;
  out.witness = c.witness;
  out.method = c.method;
  out.detail = c.detail;
  return out;
}

CqCertificate nondegeneracy_cq(const DecomposablePair& pair, const Vector& lambda_bar,
                               Rng& rng) {
  (void)lambda_bar;  // the condition does not depend on the multiplier
  (void)rng;
  CqCertificate out;
  out.which = CqKind::kNondegeneracy;
  const Matrix J = pair.F.jacobian(pair.basepoint);
  Matrix ker = nullspace(Matrix(J.transpose()));
  Matrix par = pair.Q.parallel_subspace();
  Matrix inter = subspace_intersection(ker, par);
  out.method = "subspace";
  if (inter.cols() == 0) {
    out.verdict = CertVerdict::kHolds;
  } else {
    out.verdict = CertVerdict::kFails;
    out.witness = inter.col(0);
  }
  return out;
}

// ---- second-order objects ---------------------------------------------

Cone critical_cone(const DecomposablePair& pair, const Vector& lambda_bar) {
  return cones::preimage(pair.F.jacobian(pair.basepoint), pair.Q.normal_cone(lambda_bar));
}

Matrix critical_cone_aff_basis(const DecomposablePair& pair, const Vector& lambda_bar) {
  Cone N = pair.Q.normal_cone(lambda_bar);
  auto aff = N.affine_hull();
  if (!aff) throw std::runtime_error("normal cone affine hull unavailable");
  return preimage_of_subspace(pair.F, pair.basepoint, *aff);
}

bool in_critical_cone(const DecomposablePair& pair, const Vector& vbar, const Vector& h,
                      double tol) {
  const double d = subderivative(pair, pair.basepoint, h);
  if (!std::isfinite(d)) return false;
  return std::abs(d - vbar.dot(h)) <= tol * (1.0 + std::abs(d) + h.norm());
}

double maximize_over_multipliers(const DecomposablePair& pair, const Vector& x, const Vector& v,
                                 const Vector& w) {
  MultiplierResult m = multipliers(pair, x, v);
  if (!m.feasible) throw std::invalid_argument("v is not a subgradient at x");
  const Matrix J = pair.F.jacobian(x);
  const Matrix Jt = J.transpose();

  if (auto ineq = polyhedral_description(m.face)) {
    // LP over the polytope face with the equality rows appended
    const auto& [A, b] = *ineq;
    Matrix A2(A.rows() + 2 * Jt.rows(), A.cols());
    Vector b2(b.size() + 2 * Jt.rows());
    A2 << A, Jt, -Jt;
    b2 << b, v, -v;
    LpResult r = solve_lp(w, A2, b2);
    if (r.status == LpStatus::kOptimal) return r.value;
  }
  // projected gradient ascent on <lambda, w> over the face-and-equality set
  const Matrix JtPinv = pinv(Jt);
  const SupportSet face = m.face;
  auto project_feasible = [&](const Vector& y0) -> Vector {
    std::vector<ProjectionFn> projs;
    projs.push_back([face](const Vector& y) { return face.project(y); });
    projs.push_back(
        [Jt, JtPinv, v](const Vector& y) -> Vector { return y - JtPinv * (Jt * y - v); });
    return dykstra(y0, projs, 4000, 1e-11).point;
  };
  Vector lam = project_feasible(m.lambda);
  double best = lam.dot(w);
  double step = 1.0 / (1.0 + w.norm());
  for (int it = 0; it < 500; ++it) {
    Vector cand = project_feasible(Vector(lam + step * w));
    const double val = cand.dot(w);
    if (val > best + 1e-14) {
      best = val;
      lam = cand;
    } else {
      step *= 0.7;
      if (step < 1e-9) break;
    }
  }
  return best;
}

double second_subderivative(const DecomposablePair& pair, const Vector& vbar, const Vector& h) {
  if (!in_critical_cone(pair, vbar, h)) return kInf;
  const Vector w = pair.F.second_directional(pair.basepoint, h);
  return maximize_over_multipliers(pair, pair.basepoint, vbar, w);
}

double StrictSecondSubderivative::quadratic(const DecomposablePair& pair, const Vector& h) const {
  return lambda.dot(pair.F.second_directional(pair.basepoint, h));
}

double StrictSecondSubderivative::operator()(const DecomposablePair& pair, const Vector& h,
                                             double tol) const {
  if (subspace_distance(aff_basis, h) > tol * (1.0 + h.norm())) return kInf;
  return quadratic(pair, h);
}

StrictSecondSubderivative strict_second_subderivative_formula(const DecomposablePair& pair,
                                                              const Vector& lambda_bar,
                                                              Rng& rng) {
  if (pair.usotp != UsotpStatus::kCertified && pair.usotp != UsotpStatus::kDeclared)
    throw UsotpNotEstablished("usotp-not-established");
  CqCertificate sc = strict_cq(pair, lambda_bar, rng);
  if (sc.verdict != CertVerdict::kHolds)
    throw std::invalid_argument("strict constraint qualification not certified");
  StrictSecondSubderivative out;
  out.lambda = lambda_bar;
  out.aff_basis = critical_cone_aff_basis(pair, lambda_bar);
  return out;
}

// ---- certificates -------------------------------------------------------

namespace {

Matrix reduced_quadratic_form(const DecomposablePair& pair, const Vector& lambda,
                              const Matrix& W) {
  const int d = static_cast<int>(W.cols());
  Matrix R(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const double rij =
          lambda.dot(pair.F.second_bilinear(pair.basepoint, W.col(i), W.col(j)));
      R(i, j) = R(j, i) = rij;
    }
  return Matrix(0.5 * (R + R.transpose()));
}

}  // namespace

SaddleCertificate is_strict_saddle(const DecomposablePair& pair, Rng& rng) {
  SaddleCertificate out;
  MultiplierResult m = multipliers(pair, pair.basepoint, Vector::Zero(pair.F.domain_dim()));
  if (!m.feasible) {
    out.detail = "0 is not a subgradient at the base point";
    return out;
  }
  bool strict_comp = false;
  try {
    strict_comp = pair.Q.ri_contains(m.lambda, 1e-7);
  } catch (const InnerSolverRequired&) {
    out.detail = "not-applicable (ri test unavailable for this set)";
    return out;
  }
  if (!strict_comp) {
    out.detail = "not-applicable (no active-manifold certificate)";
    return out;
  }
  (void)rng;
  Matrix W = critical_cone_aff_basis(pair, m.lambda);
  if (W.cols() == 0) {
    out.verdict = SaddleVerdict::kLocalMinCandidate;
    out.detail = "critical subspace is trivial";
    return out;
  }
  Matrix R = reduced_quadratic_form(pair, m.lambda, W);
  EigResult e = eigh_jacobi(R);
  out.min_eigenvalue = e.values[e.values.size() - 1];
  const double tol = 1e-8 * std::max(1.0, R.norm());
  if (out.min_eigenvalue < -tol) {
    out.verdict = SaddleVerdict::kStrictSaddle;
    out.witness = W * e.vectors.col(e.values.size() - 1);
  } else {
    out.verdict = SaddleVerdict::kLocalMinCandidate;
  }
  return out;
}

SmrCertificate strong_metric_regularity_certificate(const DecomposablePair& pair,
                                                    const Vector& lambda_bar,
                                                    const std::vector<GraphPoint>& graph_points,
                                                    Rng& rng) {
  StrictSecondSubderivative formula = strict_second_subderivative_formula(pair, lambda_bar, rng);
  SmrCertificate out;
  const Matrix& W = formula.aff_basis;
  if (W.cols() == 0) {
    out.verdict = SmrVerdict::kSmrTrivialSubspace;
    out.detail = "SMR (trivial subspace)";
    return out;
  }
  Matrix R = reduced_quadratic_form(pair, lambda_bar, W);
  EigResult e = eigh_jacobi(R);
  out.min_eigenvalue = e.values[e.values.size() - 1];
  const double tol = 1e-8 * std::max(1.0, R.norm());
  out.verdict = out.min_eigenvalue > tol ? SmrVerdict::kSmr : SmrVerdict::kNotSmr;

  if (out.verdict == SmrVerdict::kSmr && !graph_points.empty()) {
    // corroborating quadratic-growth sampling at sigma = mu / 2
    const double sigma = 0.5 * out.min_eigenvalue;
    const Vector vbar = pair.F.jacobian(pair.basepoint).transpose() * lambda_bar;
    out.growth_checked = true;
    out.growth_holds = true;
    for (const auto& gp : graph_points) {
      for (int s = 0; s < 8; ++s) {
        const Vector xp =
            pair.basepoint + 1e-2 * rng.uniform() * rng.unit_vector(pair.F.domain_dim());
        const double lhs = pair.eval(xp);
        const double rhs = pair.eval(gp.x) + vbar.dot(xp - gp.x) +
                           0.5 * sigma * (gp.x - xp).squaredNorm();
        ++out.growth_samples;
        if (std::isfinite(lhs) && lhs < rhs - 1e-7 * (1.0 + std::abs(rhs)))
          out.growth_holds = false;
      }
    }
  }
  return out;
}

// ---- affine-hull lemma ----------------------------------------------------

AffineHullCheck affine_hull_preimage_check(const Matrix& A, const Cone& N, Rng& rng) {
  AffineHullCheck out;
  FullSpaceCert cq = cone_sum_is_full_space(A, N, rng);
  out.cq_certified = cq.verdict == CertVerdict::kHolds;
  if (!out.cq_certified)
    throw std::invalid_argument("affine-hull check requires the certified range condition");

  const int n = static_cast<int>(A.cols());
  const int m = static_cast<int>(A.rows());
  Matrix range = range_basis(A);
  Matrix Apinv = pinv(A);
  Matrix kerA = nullspace(A);

  // sample generators of A^{-1} N: alternating projections drive random
  // points into range(A) ∩ N, then pull back
  Matrix gens(n, 0);
  Matrix Pr = range.cols() ? Matrix(range * range.transpose()) : Matrix(Matrix::Zero(m, m));
  for (int s = 0; s < 48; ++s) {
    Vector y = rng.unit_vector(m);
    bool ok = true;
    for (int it = 0; it < 400; ++it) {
      auto p = N.project(Pr * y);
      if (!p) {
        ok = false;
        break;
      }
      y = *p;
      if (y.norm() < 1e-12) break;
    }
    if (!ok || y.norm() < 1e-10) continue;
    if ((y - Pr * y).norm() > 1e-9 * y.norm()) continue;
    Vector x = Apinv * y;
    if (x.norm() > 1e-10) gens = subspace_sum(gens, Matrix(x / x.norm()));
  }
  Matrix lhs = subspace_sum(gens, kerA);

  auto affn = N.affine_hull();
  if (!affn) throw std::runtime_error("affine hull of N unavailable");
  Matrix P = affn->cols() ? Matrix((*affn) * affn->transpose()) : Matrix(Matrix::Zero(m, m));
  Matrix rhs = nullspace(Matrix((Matrix::Identity(m, m) - P) * A), 1e-10);

  out.lhs_dim = static_cast<int>(lhs.cols());
  out.rhs_dim = static_cast<int>(rhs.cols());
  out.angle_gap = subspace_gap(lhs, rhs);
  out.equal = (out.lhs_dim == out.rhs_dim) && out.angle_gap < 1e-8;
  return out;
}

}  // namespace epivar
