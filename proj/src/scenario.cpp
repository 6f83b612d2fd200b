#include "epivar/scenario.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "epivar/instances.hpp"
#include "epivar/opt.hpp"

namespace epivar {

using json = nlohmann::json;
namespace ss = support_sets;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---- chart-based pairs ---------------------------------------------------

// phi = iota of the sliced second-order cone through the chart (G, K)
struct SocSliceData {
  Matrix A;
  Vector b;
  Vector xbar;
};

DecomposablePair soc_slice_pair(const ReductionPair& chart, const SupportSet& Q,
                                const std::string& name) {
  DecomposablePair p;
  p.name = name;
  p.Q = Q;
  p.F = chart.G;
  p.basepoint = chart.sbar;
  p.offset = 0.0;
  p.weak_convexity = 0.0;
  p.tau = 1.0;
  p.prox_oracle.projection_set = chart.set;
  p.usotp = UsotpStatus::kUnknown;  // certified at run time
  return p;
}

Scenario make_soc_slice(const std::string& which) {
  Scenario s;
  s.name = "soc-slice-" + which;
  Matrix A(1, 4);
  Vector b = Vector::Zero(1);
  Vector xbar(4);
  if (which == "interior") {
    A << 0, 0, 0, 1;
    xbar << 1, 0.3, 0.2, 0;
  } else if (which == "boundary") {
    A << 0, 0, 0, 1;
    xbar << 1, 0.6, 0.8, 0;
  } else {  // apex
    A << 0, 1, 0, -1;
    xbar.setZero();
  }
  ReductionPair chart = build_reduction_soc_slice(A, b, xbar);
  s.charts.push_back(chart);

  SupportSet Q;
  const int m = chart.G.codomain_dim();
  if (which == "interior") {
    Q = ss::subspace(Matrix::Identity(m, m), m);  // sigma_Q = iota_{0}
    s.lambda_bar = Vector::Zero(m);
  } else if (which == "boundary") {
    Q = ss::product({ss::subspace(Matrix::Identity(m - 1, m - 1), m - 1),
                     ss::box(Vector::Constant(1, -kInf), Vector::Zero(1))});
    s.lambda_bar = Vector::Zero(m);
    s.lambda_bar[m - 1] = -1.0;
  } else {
    // K = SOC(d) x {0}: polar is -SOC(d) x R^{m-d}
    const int d = 3;
    std::vector<SupportSet> parts;
    parts.push_back(ss::second_order_cone(d, -1));
    if (m - d > 0) parts.push_back(ss::subspace(Matrix::Identity(m - d, m - d), m - d));
    Q = ss::product(parts);
    s.lambda_bar = Vector::Zero(m);
  }
  s.pair = soc_slice_pair(chart, Q, s.name);
  s.vbar = s.pair.F.jacobian(s.pair.basepoint).transpose() * s.lambda_bar;
  return s;
}

Scenario make_matrix_interval(const std::string& which) {
  Scenario s;
  s.name = "matrix-interval-" + which;
  Matrix L, U, X;
  if (which == "interior") {
    L = -Matrix::Identity(3, 3);
    U = Matrix::Identity(3, 3);
    X = Matrix::Zero(3, 3);
  } else if (which == "face") {
    L = Matrix::Zero(2, 2);
    U = Matrix::Identity(2, 2);
    X = Matrix::Zero(2, 2);
    X(0, 0) = 1.0;
  } else {  // corner
    L = Matrix::Zero(3, 3);
    U = Matrix::Identity(3, 3);
    X = Matrix::Zero(3, 3);
    X(0, 0) = X(1, 1) = 1.0;
  }
  ReductionPair chart = build_reduction_matrix_interval(L, U, svec(X));
  s.charts.push_back(chart);

  DecomposablePair p;
  p.name = s.name;
  p.basepoint = chart.sbar;
  p.offset = 0.0;
  p.weak_convexity = 0.0;
  p.tau = 1.0;
  p.prox_oracle.projection_set = chart.set;
  p.usotp = UsotpStatus::kUnknown;

  if (which == "interior") {
    // the chart has an R^0 codomain; use the literal degenerate pair
    p.F = SmoothMap(
        svec_dim(3), 1, [](const Vector&) { return Vector::Zero(1); },
        [](const Vector& x) { return Matrix::Zero(1, x.size()); },
        [](const Vector&, const Vector&) { return Vector::Zero(1); }, nullptr, true);
    p.Q = ss::singleton(Vector::Zero(1));
    s.lambda_bar = Vector::Zero(1);
  } else if (which == "face") {
    p.F = chart.G;
    p.Q = ss::box(v2(0, -kInf), v2(kInf, 0));
    s.lambda_bar = v2(1, -1);
  } else {
    p.F = chart.G;
    p.Q = ss::product({ss::psd_cone(2), ss::negative_psd_cone(1)});
    Matrix M1(2, 2);
    M1 << 1.0, 0.2, 0.2, 0.5;
    Vector lam(svec_dim(2) + 1);
    lam << svec(M1), -0.7;
    s.lambda_bar = lam;
  }
  s.pair = p;
  s.vbar = s.pair.F.jacobian(s.pair.basepoint).transpose() * s.lambda_bar;
  return s;
}

SupportSet fantope(int r, double k0) {
  return ss::equality_slice(
      ss::matrix_interval(Matrix(Matrix::Zero(r, r)), Matrix(Matrix::Identity(r, r))),
      Matrix(svec(Matrix(Matrix::Identity(r, r))).transpose()), Vector::Constant(1, k0));
}

// Ky Fan k-norm on 3x3 matrices; case 1 bases at diag(3, 2, 2) (positive
// tied cluster at sigma_k), case 2 at diag(2, 0, 0) (zero cluster).
Scenario make_kyfan(int case_id) {
  Scenario s;
  s.name = case_id == 1 ? "kyfan-case1" : "kyfan-case2";
  const int msz = 3;
  Matrix Xbar = Matrix::Zero(msz, msz);
  if (case_id == 1) {
    Xbar.diagonal() << 3, 2, 2;
  } else {
    Xbar.diagonal() << 2, 0, 0;
  }
  const int nd = 2 * msz;
  Matrix T0 = Matrix::Zero(nd, nd);
  T0.block(0, msz, msz, msz) = Xbar;
  T0.block(msz, 0, msz, msz) = Xbar.transpose();
  EigResult et = eigh_jacobi(T0);

  auto vec3 = [msz](const Matrix& B) {
    Vector x(msz * msz);
    for (int i = 0; i < msz; ++i)
      for (int j = 0; j < msz; ++j) x[i * msz + j] = B(i, j);
    return x;
  };
  auto unvec3 = [msz](const Vector& x) {
    Matrix B(msz, msz);
    for (int i = 0; i < msz; ++i)
      for (int j = 0; j < msz; ++j) B(i, j) = x[i * msz + j];
    return B;
  };

  if (case_id == 1) {
    // top cluster {3} (a = 1) and the tied cluster {2, 2} with budget k0 = 1
    Matrix Etop(nd, 1), Emid(nd, 2);
    Etop.col(0) = et.vectors.col(0);
    Emid.col(0) = et.vectors.col(1);
    Emid.col(1) = et.vectors.col(2);
    const double band = 0.45;
    auto value = [vec3, unvec3, Etop, Emid, band, msz, nd](const Vector& xv) -> Vector {
      Matrix X = unvec3(xv);
      Matrix T = Matrix::Zero(nd, nd);
      T.block(0, msz, msz, msz) = X;
      T.block(msz, 0, msz, msz) = X.transpose();
      Matrix Qt = cluster_frame(T, Etop, 3.0 - band, 3.0 + band);
      Matrix Qm = cluster_frame(T, Emid, 2.0 - band, 2.0 + band);
      Vector out(1 + svec_dim(2));
      out[0] = (Qt.transpose() * T * Qt).trace() - 3.0;
      Matrix mid = Qm.transpose() * T * Qm - 2.0 * Matrix::Identity(2, 2);
      out.tail(svec_dim(2)) = svec(Matrix(0.5 * (mid + mid.transpose())));
      return out;
    };
    DecomposablePair p;
    p.name = s.name;
    p.F = SmoothMap(msz * msz, 1 + svec_dim(2), value);
    p.Q = ss::product({ss::singleton(Vector::Ones(1)), fantope(2, 1.0)});
    p.basepoint = vec3(Xbar);
    p.offset = 5.0;  // sigma_1 + sigma_2 of the base point
    p.weak_convexity = 0.0;
    p.tau = 1.0;
    p.prox_oracle.moreau_set = ss::kyfan_ball(msz, msz, 2.0);
    p.usotp = UsotpStatus::kUnknown;
    s.pair = p;
    Matrix B = Matrix::Zero(2, 2);
    B(0, 0) = 0.6;
    B(1, 1) = 0.4;
    Vector lam(1 + svec_dim(2));
    lam << 1.0, svec(B);
    s.lambda_bar = lam;
    ReductionPair chart = build_reduction_kyfan_case1(2, 1, Vector(svec(B)));
    s.charts.push_back(chart);
    // the boundary chart of the case table
    Matrix Bb = Matrix::Zero(2, 2);
    Bb(0, 0) = 1.0;
    s.charts.push_back(build_reduction_kyfan_case1(2, 1, Vector(svec(Bb))));
  } else {
    Matrix Etop(nd, 1);
    Etop.col(0) = et.vectors.col(0);
    // zero clusters of X X^T and X^T X at the base point
    Matrix EL = Matrix::Zero(msz, 2), ER = Matrix::Zero(msz, 2);
    EL(1, 0) = 1;
    EL(2, 1) = 1;
    ER(1, 0) = 1;
    ER(2, 1) = 1;
    const double band = 0.9;
    auto value = [vec3, unvec3, Etop, EL, ER, band, msz, nd](const Vector& xv) -> Vector {
      Matrix X = unvec3(xv);
      Matrix T = Matrix::Zero(nd, nd);
      T.block(0, msz, msz, msz) = X;
      T.block(msz, 0, msz, msz) = X.transpose();
      Matrix Qt = cluster_frame(T, Etop, 2.0 - band, 2.0 + band);
      Matrix Lq = cluster_frame(Matrix(X * X.transpose()), EL, -band, band);
      Matrix Rq = cluster_frame(Matrix(X.transpose() * X), ER, -band, band);
      Matrix block = Lq.transpose() * X * Rq;
      Vector out(1 + 4);
      out[0] = (Qt.transpose() * T * Qt).trace() - 2.0;
      out[1] = block(0, 0);
      out[2] = block(0, 1);
      out[3] = block(1, 0);
      out[4] = block(1, 1);
      return out;
    };
    DecomposablePair p;
    p.name = s.name;
    p.F = SmoothMap(msz * msz, 5, value);
    p.Q = ss::product({ss::singleton(Vector::Ones(1)), ss::kyfan_ball(2, 2, 1.0)});
    p.basepoint = vec3(Xbar);
    p.offset = 2.0;
    p.weak_convexity = 0.0;
    p.tau = 1.0;
    p.prox_oracle.moreau_set = ss::kyfan_ball(msz, msz, 2.0);
    p.usotp = UsotpStatus::kUnknown;
    s.pair = p;
    Vector lam = Vector::Zero(5);
    lam[0] = 1.0;
    s.lambda_bar = lam;
    s.charts.push_back(build_reduction_kyfan_case2(2, 2, 1, Vector(Vector::Zero(4))));
    Vector bb = Vector::Zero(4);
    bb[0] = 1.0;  // both constraints active at diag(1, 0) with k0 = 1
    s.charts.push_back(build_reduction_kyfan_case2(2, 2, 1, bb));
  }
  s.vbar = s.pair.F.jacobian(s.pair.basepoint).transpose() * s.lambda_bar;
  return s;
}

// ---- generic checks --------------------------------------------------------

std::pair<bool, std::string> check_pair_valid(const Scenario& s, Rng& rng) {
  const std::string v = s.pair.validate();
  if (!v.empty()) return {false, v};
  CqCertificate rc = robinson_cq(s.pair, rng);
  if (rc.verdict == CertVerdict::kFails) return {false, "robinson CQ fails"};
  MultiplierResult m = multipliers(s.pair, s.pair.basepoint, s.vbar);
  if (!m.feasible) return {false, "vbar is not a subgradient (residual " + fmt(m.residual) + ")"};
  if ((m.lambda - s.lambda_bar).norm() > 1e-6 &&
      (s.pair.F.jacobian(s.pair.basepoint).transpose() * s.lambda_bar - s.vbar).norm() > 1e-8)
    return {false, "declared multiplier is inconsistent"};
  return {true, "robinson " + rc.method};
}

std::pair<bool, std::string> check_strict_cq(const Scenario& s, Rng& rng) {
  CqCertificate c = strict_cq(s.pair, s.lambda_bar, rng);
  if (c.verdict != CertVerdict::kHolds)
    return {false, "strict CQ verdict not holds (" + c.method + ")"};
  return {true, c.method};
}

std::vector<Vector> direction_net(const Scenario& s, int count, Rng& rng) {
  const int n = s.pair.F.domain_dim();
  std::vector<Vector> net;
  for (int i = 0; i < n && static_cast<int>(net.size()) < count; ++i) {
    Vector e = Vector::Zero(n);
    e[i] = 1.0;
    net.push_back(e);
    if (static_cast<int>(net.size()) < count) net.push_back(Vector(-e));
  }
  while (static_cast<int>(net.size()) < count) net.push_back(rng.unit_vector(n));
  return net;
}

std::pair<bool, std::string> check_basic_formula(const Scenario& s, Rng& rng) {
  EstimatorConfig cfg;
  int mismatches = 0;
  std::ostringstream os;
  auto net = direction_net(s, 12, rng);
  for (const auto& h : net) {
    const double formula = second_subderivative(s.pair, s.vbar, h);
    QuotientEstimate est = basic_second_subderivative_estimate(s.pair, s.vbar, h, cfg);
    if (std::isfinite(formula)) {
      const double tol = std::max(1e-3, 1e-2 * std::abs(formula));
      if (!est.finite() || std::abs(est.value - formula) > tol) {
        ++mismatches;
        os << " dir-miss(formula=" << fmt(formula)
           << ", est=" << (est.finite() ? fmt(est.value) : "non-finite") << ")";
      }
    } else {
      if (!est.divergent()) {
        ++mismatches;
        os << " expected-divergent-miss";
      }
    }
  }
  if (mismatches) return {false, "mismatches=" + std::to_string(mismatches) + os.str()};
  return {true, "12 directions agree"};
}

std::pair<bool, std::string> check_strict_formula(const Scenario& s, Rng& rng) {
  DecomposablePair pair = s.pair;
  if (pair.usotp == UsotpStatus::kUnknown) pair.usotp = UsotpStatus::kDeclared;
  StrictSecondSubderivative f = strict_second_subderivative_formula(pair, s.lambda_bar, rng);
  EstimatorConfig cfg;
  cfg.graph_points_per_radius = 16;
  std::ostringstream os;
  int bad = 0;

  // directions inside aff(C)
  const Matrix& W = f.aff_basis;
  std::vector<Vector> on;
  for (int j = 0; j < std::min<int>(3, W.cols()); ++j) {
    on.push_back(W.col(j));
    on.push_back(Vector(-W.col(j)));
  }
  if (W.cols() > 1) on.push_back(Vector(W * rng.unit_vector(static_cast<int>(W.cols()))));
  for (const auto& h : on) {
    const double quad = f.quadratic(pair, h);
    QuotientEstimate est = strict_second_subderivative_estimate(pair, s.vbar, h, cfg,
                                                                s.user_sequence);
    const double tol = std::max(1e-3, 1e-2 * std::abs(quad));
    if (!est.finite() || std::abs(est.value - quad) > tol) {
      ++bad;
      os << " on-aff-miss(quad=" << fmt(quad)
         << ", est=" << (est.finite() ? fmt(est.value) : "non-finite") << ")";
    }
  }

  // >= 4 directions off aff(C) must diverge
  Matrix C = subspace_complement(W);
  int off_checked = 0;
  for (int j = 0; j < C.cols() && off_checked < 4; ++j) {
    for (double mix : {0.0, 0.3}) {
      if (off_checked >= 4) break;
      Vector h = C.col(j);
      if (mix > 0 && W.cols() > 0) h = (h + mix * W.col(0)).normalized();
      QuotientEstimate est = strict_second_subderivative_estimate(pair, s.vbar, h, cfg,
                                                                  s.user_sequence);
      ++off_checked;
      if (!est.divergent()) {
        ++bad;
        os << " off-aff-not-divergent";
      }
    }
  }
  if (C.cols() == 0) os << " (aff C is the whole space; no off directions)";
  if (bad) return {false, os.str()};
  return {true, "on-aff agreement, " + std::to_string(off_checked) + " off-aff divergent"};
}

std::pair<bool, std::string> check_usotp(const Scenario& s, Rng& rng, bool expect_holds) {
  UsotpVerdict v = verify_usotp(s.pair.Q, s.lambda_bar, {}, rng);
  if (expect_holds) {
    if (!v.holds) return {false, "expected the tangent-path property: " + v.detail};
    return {true, "holds, M=" + fmt(v.M)};
  }
  if (!v.counter_witness) return {false, "expected a counter-witness"};
  std::ostringstream os;
  os << "counter-witness along (" << fmt(v.witness_direction[0]);
  for (int i = 1; i < v.witness_direction.size(); ++i)
    os << ", " << fmt(v.witness_direction[i]);
  os << "): " << v.detail;
  return {true, os.str()};
}

std::pair<bool, std::string> check_equivalence(const Scenario& s, Rng& rng, int expect) {
  // expect: +1 all true, -1 all false
  EquivalenceReport r = equivalence_suite(s.pair, s.lambda_bar, s.pair.tau, rng);
  std::ostringstream os;
  os << "items=[";
  for (int i = 0; i < 6; ++i) os << (i ? "," : "") << r.items[i];
  os << "]";
  if (!r.consistent) return {false, "mixed verdicts " + os.str()};
  if (expect > 0 && !r.all_true) return {false, "expected all-true " + os.str()};
  if (expect < 0 && !r.all_false) return {false, "expected all-false " + os.str()};
  return {true, os.str()};
}

std::pair<bool, std::string> check_prox_bounds(const Scenario& s, Rng& rng) {
  int nondiff = 0;
  for (int i = 0; i < 20; ++i) {
    Vector z = s.pair.basepoint + 0.8 * rng.normal_vector(s.pair.F.domain_dim());
    ProxJacobianReport r = prox_jacobian_fd(s.pair, s.pair.tau, z);
    if (!r.differentiable) {
      ++nondiff;
      continue;
    }
    if (r.lower_violation > 1e-6 || r.upper_violation > 1e-6)
      return {false, "eigenvalue bound violated by " +
                         fmt(std::max(r.lower_violation, r.upper_violation))};
  }
  return {true, std::to_string(20 - nondiff) + " differentiable points within bounds"};
}

std::pair<bool, std::string> check_moreau_gradient(const Scenario& s, Rng& rng) {
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    Vector z = s.pair.basepoint + 0.5 * rng.normal_vector(s.pair.F.domain_dim());
    ProxResult pr = prox(s.pair, s.pair.tau, z);
    const double h = 1e-6 * (1.0 + z.norm());
    for (int c = 0; c < z.size(); ++c) {
      Vector e = Vector::Zero(z.size());
      e[c] = h;
      const double g = (moreau_envelope(s.pair, s.pair.tau, Vector(z + e)) -
                        moreau_envelope(s.pair, s.pair.tau, Vector(z - e))) /
                       (2 * h);
      worst = std::max(worst, std::abs(g - pr.v[c]));
    }
  }
  if (worst > 1e-6) return {false, "gradient identity off by " + fmt(worst)};
  return {true, "max deviation " + fmt(worst)};
}

std::pair<bool, std::string> check_charts(const Scenario& s, Rng& rng) {
  for (const auto& chart : s.charts) {
    ChartSoundness c = check_chart(chart, 200, 1e-3, rng);
    if (!c.ok)
      return {false, chart.name + ": disagreements=" + std::to_string(c.disagreements) +
                         " margin=" + fmt(c.surjectivity_margin)};
  }
  return {true, std::to_string(s.charts.size()) + " charts sound"};
}

std::pair<bool, std::string> check_saddle(const Scenario& s, Rng& rng) {
  SaddleCertificate c = is_strict_saddle(s.pair, rng);
  if (s.name == "saddle-demo") {
    if (c.verdict != SaddleVerdict::kStrictSaddle) return {false, "expected strict saddle"};
    if (std::abs(c.min_eigenvalue + 2.0) > 1e-6)
      return {false, "reduced eigenvalue " + fmt(c.min_eigenvalue)};
    if (std::abs(std::abs(c.witness[1]) - 1.0) > 1e-6 || std::abs(c.witness[0]) > 1e-6)
      return {false, "witness misaligned"};
    return {true, "strict saddle, mu=" + fmt(c.min_eigenvalue)};
  }
  if (c.verdict == SaddleVerdict::kStrictSaddle) return {false, "unexpected strict saddle"};
  return {true, "verdict as expected"};
}

std::pair<bool, std::string> check_smr(const Scenario& s, Rng& rng, SmrVerdict expect,
                                       double expect_mu, double mu_tol) {
  DecomposablePair pair = s.pair;
  if (pair.usotp == UsotpStatus::kUnknown) pair.usotp = UsotpStatus::kDeclared;
  auto pts = graph_sampler(pair, s.vbar, 1e-2, 4, rng);
  SmrCertificate c = strong_metric_regularity_certificate(pair, s.lambda_bar, pts, rng);
  if (c.verdict != expect) return {false, "verdict mismatch, mu=" + fmt(c.min_eigenvalue)};
  if (std::isfinite(expect_mu) && std::abs(c.min_eigenvalue - expect_mu) > mu_tol)
    return {false, "mu=" + fmt(c.min_eigenvalue)};
  if (c.growth_checked && !c.growth_holds) return {false, "quadratic growth sampling failed"};
  return {true, "mu=" + fmt(c.min_eigenvalue)};
}

// ---- the counterexample scenario -------------------------------------------

std::vector<GraphPoint> counterexample_sequence(const DecomposablePair& pair, double kmax) {
  std::vector<GraphPoint> seq;
  for (double k = 2.0; k <= kmax; k *= 2.0) {
    GraphPoint gp;
    gp.x = v2(1.0 / (k * k * k), -1.0 / k);
    gp.lambda = v2(1.0 / std::pow(k, 4), 2.0 / (3.0 * std::pow(k, 6)));
    gp.v = gp.lambda;
    gp.stationarity_residual = 0.0;
    gp.complementarity_residual =
        std::abs(gp.lambda.dot(gp.x) - pair.Q.support(pair.F.value(gp.x)));
    seq.push_back(gp);
  }
  return seq;
}

std::pair<bool, std::string> check_counterexample_strict_zero(const Scenario& s, Rng& rng) {
  EstimatorConfig cfg;
  int good = 0;
  std::vector<Vector> dirs = {v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)};
  while (dirs.size() < 8) dirs.push_back(rng.unit_vector(2));
  for (const auto& h : dirs) {
    QuotientEstimate e =
        strict_second_subderivative_estimate(s.pair, s.vbar, h, cfg, s.user_sequence);
    if (e.finite() && std::abs(e.value) <= 1e-3) ++good;
  }
  if (good < 8) return {false, "finite(0) on " + std::to_string(good) + "/8 directions"};
  return {true, "finite(0) on all 8 directions"};
}

std::pair<bool, std::string> check_counterexample_hessian(const Scenario& s, Rng&) {
  // closed-form Hessian of |x1|^3/(3 x2^2) along x^k = (1/k^3, -1/k);
  // monotone decrease holds, the k = 100 threshold is evaluated literally
  (void)s;
  double prev = kInf;
  bool monotone = true;
  double at100 = kInf;
  for (int k = 1; k <= 100; ++k) {
    const double x1 = 1.0 / (double(k) * k * k), x2 = -1.0 / k;
    Matrix H(2, 2);
    H << 2 * x1 / (x2 * x2), -2 * x1 * x1 / std::pow(x2, 3), -2 * x1 * x1 / std::pow(x2, 3),
        2 * std::pow(x1, 3) / std::pow(x2, 4);
    const double nrm = spectral_norm(H);
    if (nrm >= prev) monotone = false;
    prev = nrm;
    if (k == 100) at100 = nrm;
  }
  std::ostringstream os;
  os << "||H(x^k)|| decreases monotonically; value at k=100 is " << fmt(at100);
  if (!monotone) return {false, "hessian norms are not monotone"};
  if (at100 >= 1e-4)
    return {false, os.str() + " (the 2/k closed-form rate cannot reach 1e-4 by k=100)"};
  return {true, os.str()};
}

std::pair<bool, std::string> check_counterexample_refusal(const Scenario& s, Rng& rng) {
  try {
    strict_second_subderivative_formula(s.pair, s.lambda_bar, rng);
  } catch (const UsotpNotEstablished&) {
    return {true, "closed form refused with usotp-not-established"};
  }
  return {false, "the closed form did not refuse"};
}

// ---- envelope probe scenario ------------------------------------------------

std::pair<bool, std::string> check_envelope_probe(const Scenario&, Rng&) {
  std::vector<EnvelopeProbeFunction> fs;
  for (int k = 1; k <= 8; ++k)
    fs.push_back({[k](const Vector& x) { return std::abs(x[0] - 1.0 / k); }, 1});
  EnvelopeProbeFunction lim{[](const Vector& x) { return std::abs(x[0]); }, 1};
  std::vector<Vector> grid;
  for (double x = -2.0; x <= 2.0; x += 0.2) grid.push_back(Vector::Constant(1, x));
  EnvelopeProbeReport r = envelope_convergence_probe(fs, lim, 1.0, grid);
  for (size_t k = 0; k < fs.size(); ++k)
    if (r.sup_gaps[k] > 1.0 / (k + 1) + 1e-8)
      return {false, "gap exceeds the shift bound at k=" + std::to_string(k + 1)};
  if (!r.monotone_trend) return {false, "gaps not monotone"};

  // second-order quotients of |.|_1 at 0 for v = (1, 0) with t_k = 1/k:
  // pointwise envelope convergence is the twice-epi-differentiability witness
  std::vector<EnvelopeProbeFunction> quot;
  for (int k = 2; k <= 16; k *= 2) {
    const double t = 1.0 / k;
    quot.push_back({[t](const Vector& h) {
                      const double phi0 = 0.0;
                      const double phit = std::abs(t * h[0]) + std::abs(t * h[1]);
                      return (phit - phi0 - t * h[0]) / (0.5 * t * t);
                    },
                    2});
  }
  // the epi-limit is 0 on R+ x {0} and +inf elsewhere; its envelope is the
  // squared distance to the ray
  EnvelopeProbeFunction limq{[](const Vector& h) {
                               return (h[0] >= 0 && std::abs(h[1]) < 1e-12) ? 0.0 : kInf;
                             },
                             2,
                             [](const Vector& x, double tau) {
                               const double dx = std::min(x[0], 0.0);
                               return (dx * dx + x[1] * x[1]) / (2.0 * tau);
                             }};
  std::vector<Vector> grid2;
  for (double a = -1.0; a <= 1.0; a += 0.5)
    for (double b = -1.0; b <= 1.0; b += 0.5) grid2.push_back(v2(a, b));
  EnvelopeProbeReport r2 = envelope_convergence_probe(quot, limq, 0.5, grid2);
  if (!(r2.sup_gaps.back() < r2.sup_gaps.front()))
    return {false, "quotient envelopes do not converge"};
  return {true, "sup gaps " + fmt(r.final_gap) + " and " + fmt(r2.sup_gaps.back())};
}

// ---- catalog ----------------------------------------------------------------

void add_common_checks(Scenario& s, bool usotp_expected, int equivalence_expect) {
  s.checks.push_back({"pair-valid", "trivial",
                      [](const Scenario& sc, Rng& r) { return check_pair_valid(sc, r); }});
  s.checks.push_back({"strict-cq", "derived-oracle",
                      [](const Scenario& sc, Rng& r) { return check_strict_cq(sc, r); }});
  s.checks.push_back({"basic-formula-vs-estimator", "derived-oracle",
                      [](const Scenario& sc, Rng& r) { return check_basic_formula(sc, r); }});
  s.checks.push_back({"usotp", usotp_expected ? std::string("derived-oracle")
                                              : std::string("paper"),
                      [usotp_expected](const Scenario& sc, Rng& r) {
                        return check_usotp(sc, r, usotp_expected);
                      }});
  if (usotp_expected) {
    s.checks.push_back(
        {"strict-formula-vs-estimator", "derived-oracle",
         [](const Scenario& sc, Rng& r) { return check_strict_formula(sc, r); }});
  }
  if (equivalence_expect != 0) {
    s.checks.push_back({"equivalence-suite",
                        equivalence_expect > 0 ? "derived-oracle" : "trivial",
                        [equivalence_expect](const Scenario& sc, Rng& r) {
                          return check_equivalence(sc, r, equivalence_expect);
                        }});
  }
  s.checks.push_back({"moreau-gradient", "derived-oracle",
                      [](const Scenario& sc, Rng& r) { return check_moreau_gradient(sc, r); }});
  if (s.convex) {
    s.checks.push_back({"prox-jacobian-bounds", "derived-oracle",
                        [](const Scenario& sc, Rng& r) { return check_prox_bounds(sc, r); }});
  }
  if (!s.charts.empty()) {
    s.checks.push_back({"chart-soundness", "derived-oracle",
                        [](const Scenario& sc, Rng& r) { return check_charts(sc, r); }});
  }
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"counterexample",        "saddle-demo",
          "l1-interior",           "l1-boundary",
          "euclid-norm",           "soc-slice-interior",
          "soc-slice-boundary",    "soc-slice-apex",
          "matrix-interval-interior", "matrix-interval-face",
          "matrix-interval-corner",   "kyfan-case1",
          "kyfan-case2",           "envelope-probe"};
}

Scenario build_scenario(const std::string& name, std::uint64_t seed) {
  (void)seed;
  Scenario s;
  if (name == "l1-interior") {
    s.name = name;
    s.pair = instances::l1_pair();
    s.vbar = v2(0.5, -0.25);
    s.lambda_bar = s.vbar;
    add_common_checks(s, /*usotp=*/true, /*equiv=*/+1);
  } else if (name == "l1-boundary") {
    s.name = name;
    s.pair = instances::l1_pair();
    s.vbar = v2(1, 0);
    s.lambda_bar = s.vbar;
    add_common_checks(s, true, -1);
  } else if (name == "euclid-norm") {
    s.name = name;
    s.pair = instances::euclid_pair();
    s.vbar = v2(0.5, 0);
    s.lambda_bar = s.vbar;
    add_common_checks(s, true, +1);
    s.checks.push_back({"saddle-certificate", "trivial",
                        [](const Scenario& sc, Rng& r) { return check_saddle(sc, r); }});
    s.checks.push_back(
        {"smr-certificate", "trivial", [](const Scenario& sc, Rng& r) {
           return check_smr(sc, r, SmrVerdict::kSmrTrivialSubspace, kInf, 0.0);
         }});
  } else if (name == "saddle-demo") {
    s.name = name;
    s.pair = instances::saddle_demo_pair();
    s.convex = false;
    s.vbar = Vector::Zero(2);
    s.lambda_bar = v2(1, 0);
    add_common_checks(s, true, +1);
    s.checks.push_back({"saddle-certificate", "derived-oracle",
                        [](const Scenario& sc, Rng& r) { return check_saddle(sc, r); }});
    s.checks.push_back({"smr-certificate", "derived-oracle",
                        [](const Scenario& sc, Rng& r) {
                          return check_smr(sc, r, SmrVerdict::kNotSmr, -2.0, 1e-6);
                        }});
  } else if (name == "counterexample") {
    s.name = name;
    s.pair = instances::counterexample_pair();
    s.vbar = Vector::Zero(2);
    s.lambda_bar = Vector::Zero(2);
    s.user_sequence = counterexample_sequence(s.pair, double(1 << 20));
    s.checks.push_back({"pair-valid", "trivial",
                        [](const Scenario& sc, Rng& r) { return check_pair_valid(sc, r); }});
    s.checks.push_back({"strict-cq", "trivial",
                        [](const Scenario& sc, Rng& r) { return check_strict_cq(sc, r); }});
    s.checks.push_back(
        {"basic-formula-vs-estimator", "derived-oracle",
         [](const Scenario& sc, Rng& r) { return check_basic_formula(sc, r); }});
    s.checks.push_back({"strict-estimate-zero", "paper",
                        [](const Scenario& sc, Rng& r) {
                          return check_counterexample_strict_zero(sc, r);
                        }});
    s.checks.push_back({"hessian-decay", "paper",
                        [](const Scenario& sc, Rng& r) {
                          return check_counterexample_hessian(sc, r);
                        }});
    s.checks.push_back({"usotp", "paper",
                        [](const Scenario& sc, Rng& r) { return check_usotp(sc, r, false); }});
    s.checks.push_back({"strict-formula-refusal", "paper",
                        [](const Scenario& sc, Rng& r) {
                          return check_counterexample_refusal(sc, r);
                        }});
    s.checks.push_back({"moreau-gradient", "derived-oracle",
                        [](const Scenario& sc, Rng& r) { return check_moreau_gradient(sc, r); }});
  } else if (name.rfind("soc-slice-", 0) == 0) {
    s = make_soc_slice(name.substr(10));
    const bool boundary = name == "soc-slice-boundary";
    add_common_checks(s, true, boundary ? +1 : 0);
  } else if (name.rfind("matrix-interval-", 0) == 0) {
    s = make_matrix_interval(name.substr(16));
    add_common_checks(s, true, name == "matrix-interval-interior" ? +1 : 0);
    if (name == "matrix-interval-face") {
      s.checks.push_back({"smr-certificate", "derived-oracle",
                          [](const Scenario& sc, Rng& r) {
                            return check_smr(sc, r, SmrVerdict::kSmr, 2.0, 1e-5);
                          }});
    }
  } else if (name == "kyfan-case1") {
    s = make_kyfan(1);
    add_common_checks(s, true, 0);
  } else if (name == "kyfan-case2") {
    s = make_kyfan(2);
    add_common_checks(s, true, 0);
  } else if (name == "envelope-probe") {
    s.name = name;
    DecomposablePair p;
    p.name = "abs-1d";
    p.Q = ss::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
    p.F = maps::identity(1);
    p.basepoint = Vector::Zero(1);
    p.prox_oracle.moreau_set = p.Q;
    p.usotp = UsotpStatus::kDeclared;
    s.pair = p;
    s.vbar = Vector::Constant(1, 0.5);
    s.lambda_bar = s.vbar;
    s.checks.push_back({"envelope-convergence", "derived-oracle",
                        [](const Scenario& sc, Rng& r) { return check_envelope_probe(sc, r); }});
    s.checks.push_back(
        {"basic-formula-vs-estimator", "derived-oracle",
         [](const Scenario& sc, Rng& r) { return check_basic_formula(sc, r); }});
  } else {
    throw std::invalid_argument("unknown scenario: " + name);
  }
  // every check must carry a provenance tag; refuse untagged expectations
  for (const auto& c : s.checks)
    if (c.provenance.empty()) throw std::logic_error("untagged expectation in " + s.name);
  return s;
}

ScenarioReport run_scenario(const std::string& name, std::uint64_t seed) {
  Scenario s = build_scenario(name, seed);
  ScenarioReport rep;
  rep.scenario = name;
  rep.seed = seed;
  rep.all_pass = true;
  for (const auto& check : s.checks) {
    CheckResult r;
    r.name = check.name;
    r.provenance = check.provenance;
    Rng rng = Rng::derive(seed, name + "/" + check.name);
    const auto start = std::chrono::steady_clock::now();
    try {
      auto [pass, detail] = check.fn(s, rng);
      r.pass = pass;
      r.detail = detail;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.all_pass = rep.all_pass && r.pass;
    rep.checks.push_back(std::move(r));
  }
  return rep;
}

std::string report_to_json(const std::vector<ScenarioReport>& reports, bool include_timing) {
  json out;
  out["schema"] = "epivar-report/1";
  json arr = json::array();
  for (const auto& rep : reports) {
    json jr;
    jr["scenario"] = rep.scenario;
    jr["seed"] = rep.seed;
    jr["all_pass"] = rep.all_pass;
    json checks = json::array();
    for (const auto& c : rep.checks) {
      json jc;
      jc["name"] = c.name;
      jc["provenance"] = c.provenance;
      jc["pass"] = c.pass;
      jc["detail"] = c.detail;
      if (include_timing) jc["seconds"] = fmt(c.seconds);
      checks.push_back(jc);
    }
    jr["checks"] = checks;
    arr.push_back(jr);
  }
  out["reports"] = arr;
  return out.dump(2);
}

// ---- CLI instance support ----------------------------------------------------

void ensure_maps_registered() {
  static bool done = false;
  if (done) return;
  done = true;
  maps::register_map("identity", [](const std::string& params) {
    json j = params.empty() ? json::object() : json::parse(params);
    return maps::identity(j.value("dim", 2));
  });
  maps::register_map("saddle-demo",
                     [](const std::string&) { return instances::saddle_demo_pair().F; });
  maps::register_map("counterexample", [](const std::string&) { return maps::identity(2); });
  maps::register_map("soc-slice", [](const std::string& params) {
    json j = json::parse(params);
    const std::string which = j.value("which", "boundary");
    return build_scenario("soc-slice-" + which).pair.F;
  });
  maps::register_map("matrix-interval", [](const std::string& params) {
    json j = json::parse(params);
    const std::string which = j.value("which", "face");
    return build_scenario("matrix-interval-" + which).pair.F;
  });
  maps::register_map("kyfan", [](const std::string& params) {
    json j = json::parse(params);
    const int case_id = j.value("case", 1);
    return build_scenario(case_id == 1 ? "kyfan-case1" : "kyfan-case2").pair.F;
  });
}

DecomposablePair pair_from_json(const std::string& text) {
  ensure_maps_registered();
  json j = json::parse(text);
  DecomposablePair p;
  p.name = j.value("name", "instance");
  p.Q = support_set_from_json(j.at("support_set").dump());
  if (j.at("map").is_string()) {
    p.F = maps::lookup(j.at("map").get<std::string>(),
                       j.value("map_params", json::object()).dump());
  } else {
    throw std::invalid_argument("inline maps are not supported; use a registry name");
  }
  const auto& bp = j.at("basepoint");
  Vector x(bp.size());
  for (size_t i = 0; i < bp.size(); ++i) x[i] = bp[i].get<double>();
  p.basepoint = x;
  p.offset = j.value("offset", 0.0);
  p.weak_convexity = j.value("rho", 0.0);
  p.tau = j.value("tau", 1.0);
  // identity-like maps get the Moreau route automatically
  if (j.at("map").is_string() && j.at("map").get<std::string>() == "identity")
    p.prox_oracle.moreau_set = p.Q;
  return p;
}

}  // namespace epivar
