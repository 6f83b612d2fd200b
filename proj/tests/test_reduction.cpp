#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epivar/reduction.hpp"

using namespace epivar;
namespace ss = epivar::support_sets;

namespace {
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("usotp subspace: affine charts have constant kernels") {
  Matrix A(1, 3);
  A << 1, 1, 1;
  ReductionPair R;
  R.set = ss::subspace(nullspace(A), 3);
  R.G = maps::linear(A);
  R.K = ss::singleton(Vector::Zero(1));
  R.sbar = Vector::Zero(3);
  R.radius = 1.0;
  Matrix k0 = usotp_subspace(R, R.sbar);
  Matrix k1 = usotp_subspace(R, Vector(0.01 * Vector::Ones(3)));
  CHECK(subspace_equal(k0, k1));
  CHECK(k0.cols() == 2);
}

TEST_CASE("tangent path on the unit sphere chart") {
  // G(s) = ||s||^2 - 1 at sbar = e1, v = e2: q = -e1, path stays on the sphere
  ReductionPair R;
  R.name = "sphere";
  R.set = ss::ball(Vector::Zero(3), 1.0);  // projections land on the sphere from outside
  R.G = SmoothMap(
      3, 1,
      [](const Vector& s) { return Vector::Constant(1, s.squaredNorm() - 1.0); },
      [](const Vector& s) -> Matrix { return 2.0 * s.transpose(); },
      [](const Vector&, const Vector& h) { return Vector::Constant(1, 2.0 * h.squaredNorm()); },
      nullptr, true);
  R.K = ss::singleton(Vector::Zero(1));
  R.sbar = Vector::Unit(3, 0);
  R.radius = 0.2;

  Vector v = Vector::Unit(3, 1);
  TangentPath p = tangent_path(R, R.sbar, v);
  CHECK((p.correction + Vector::Unit(3, 0)).norm() < 1e-9);  // q = -e1
  CHECK(p.curvature_bound < 1.6);  // the sphere has curvature 1 (x 1.5 fit factor)
  CHECK(p.curvature_bound > 0.5);

  // direction outside the kernel is rejected
  CHECK_THROWS_AS(tangent_path(R, R.sbar, Vector::Unit(3, 0)), std::invalid_argument);
}

TEST_CASE("verify_usotp: box face and psd cone hold") {
  Rng rng(3);
  SupportSet box = ss::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  UsotpVerdict vb = verify_usotp(box, v2(1, 0), {}, rng);
  CHECK(vb.holds);
  CHECK(vb.M == doctest::Approx(0.0));

  SupportSet psd = ss::psd_cone(2);
  Matrix lam = Matrix::Zero(2, 2);
  lam(0, 0) = 1.0;
  UsotpVerdict vp = verify_usotp(psd, svec(lam), {}, rng);
  CHECK(vp.holds);
  CHECK(std::isfinite(vp.M));
}

TEST_CASE("verify_usotp: counter-witness on the curved epigraph") {
  Rng rng(5);
  SupportSet C = ss::curve_epigraph(2.0 / 3.0, 1.5);
  UsotpVerdict v = verify_usotp(C, Vector::Zero(2), {}, rng);
  CHECK(!v.holds);
  CHECK(v.counter_witness);
  // the lineality direction at the base point is the first axis
  CHECK(std::abs(v.witness_direction[0]) > 0.9);
}

TEST_CASE("soc slice charts") {
  Rng rng(7);
  // interior: H = {x4 = 0} at an interior cone point
  Matrix A(1, 4);
  A << 0, 0, 0, 1;
  Vector b = Vector::Zero(1);
  Vector xbar(4);
  xbar << 1, 0.3, 0.2, 0;
  ReductionPair interior = build_reduction_soc_slice(A, b, xbar);
  ChartSoundness ci = check_chart(interior, 200, 1e-3, rng);
  CHECK(ci.ok);
  CHECK(ci.disagreements == 0);

  // boundary: ||xbar_tail|| = xbar_1 > 0
  Vector xb2(4);
  xb2 << 1, 0.6, 0.8, 0;
  ReductionPair boundary = build_reduction_soc_slice(A, b, xb2);
  ChartSoundness cb = check_chart(boundary, 200, 1e-3, rng);
  CHECK(cb.ok);
  CHECK(cb.surjectivity_margin > 1e-8);

  // apex with a genuine weighted-cone rotation: H = {x2 = x4}
  Matrix A2(1, 4);
  A2 << 0, 1, 0, -1;
  ReductionPair apex = build_reduction_soc_slice(A2, Vector::Zero(1), Vector::Zero(4));
  ChartSoundness ca = check_chart(apex, 200, 1e-3, rng);
  CHECK(ca.ok);
  CHECK(ca.disagreements == 0);
}

TEST_CASE("matrix interval charts") {
  Rng rng(9);
  // interior
  ReductionPair mi = build_reduction_matrix_interval(
      Matrix(-Matrix::Identity(3, 3)), Matrix(Matrix::Identity(3, 3)), svec(Matrix::Zero(3, 3)));
  ChartSoundness c0 = check_chart(mi, 200, 1e-3, rng);
  CHECK(c0.ok);

  // face: L = 0, U = I (n = 2), Xbar = diag(1, 0): both end clusters active
  Matrix X2 = Matrix::Zero(2, 2);
  X2(0, 0) = 1.0;
  ReductionPair face = build_reduction_matrix_interval(Matrix(Matrix::Zero(2, 2)),
                                                       Matrix(Matrix::Identity(2, 2)), svec(X2));
  ChartSoundness c1 = check_chart(face, 200, 1e-3, rng);
  CHECK(c1.ok);
  CHECK(face.G.codomain_dim() == 2);  // one 1x1 nsd block + one 1x1 psd block

  // corner with a multiplicity-2 active cluster
  Matrix X3 = Matrix::Zero(3, 3);
  X3(0, 0) = X3(1, 1) = 1.0;
  ReductionPair corner = build_reduction_matrix_interval(
      Matrix(Matrix::Zero(3, 3)), Matrix(Matrix::Identity(3, 3)), svec(X3));
  ChartSoundness c2 = check_chart(corner, 200, 1e-3, rng);
  CHECK(c2.ok);
  CHECK(corner.G.codomain_dim() == svec_dim(2) + svec_dim(1));

  // commuting-data membership oracle
  Rng rng2(11);
  for (int s = 0; s < 40; ++s) {
    Vector z = rng2.normal_vector(6);
    Matrix Z = smat(z);
    EigResult e = eigh_jacobi(Z);
    const bool by_eigs = e.values.minCoeff() >= -1e-9 && e.values.maxCoeff() <= 1.0 + 1e-9;
    CHECK(corner.set.contains(z, 1e-8) == by_eigs);
  }
}

TEST_CASE("ky fan charts") {
  Rng rng(13);
  // case 1: r = 2, k0 = 1, Bbar = diag(1, 0): nsd block, psd block, trace row
  Matrix B1 = Matrix::Zero(2, 2);
  B1(0, 0) = 1.0;
  ReductionPair kf1 = build_reduction_kyfan_case1(2, 1, svec(B1));
  ChartSoundness c1 = check_chart(kf1, 200, 1e-3, rng);
  CHECK(c1.ok);

  // case 1 at a relative-interior point
  Matrix B2 = Matrix::Zero(2, 2);
  B2(0, 0) = 0.6;
  B2(1, 1) = 0.4;
  ReductionPair kf1i = build_reduction_kyfan_case1(2, 1, svec(B2));
  ChartSoundness c2 = check_chart(kf1i, 200, 1e-3, rng);
  CHECK(c2.ok);

  // case 2 at Bbar = 0: no active constraint, frame-compressed identity
  ReductionPair kf2 = build_reduction_kyfan_case2(2, 2, 1, Vector::Zero(4));
  ChartSoundness c3 = check_chart(kf2, 200, 1e-3, rng);
  CHECK(c3.ok);
  CHECK(kf2.G.codomain_dim() == 4);

  // case 2 with both constraints active: Bbar = diag(1, 0), k0 = 1
  Matrix B3 = Matrix::Zero(2, 2);
  B3(0, 0) = 1.0;
  Vector b3v(4);
  b3v << 1, 0, 0, 0;
  ReductionPair kf2a = build_reduction_kyfan_case2(2, 2, 1, b3v);
  ChartSoundness c4 = check_chart(kf2a, 200, 1e-3, rng);
  CHECK(c4.ok);
}

TEST_CASE("fantope and kyfan ball satisfy the tangent-path property") {
  Rng rng(15);
  Matrix B1 = Matrix::Zero(2, 2);
  B1(0, 0) = 0.6;
  B1(1, 1) = 0.4;
  SupportSet fant = ss::equality_slice(
      ss::matrix_interval(Matrix(Matrix::Zero(2, 2)), Matrix(Matrix::Identity(2, 2))),
      Matrix(svec(Matrix(Matrix::Identity(2, 2))).transpose()), Vector::Ones(1));
  UsotpVerdict vf = verify_usotp(fant, svec(B1), {}, rng);
  CHECK(vf.holds);

  SupportSet ball = ss::kyfan_ball(2, 2, 1.0);
  UsotpVerdict vb = verify_usotp(ball, Vector::Zero(4), {}, rng);
  CHECK(vb.holds);
}
