#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epivar/opt.hpp"
#include "epivar/rng.hpp"
#include "epivar/support_set.hpp"

using namespace epivar;
namespace ss = epivar::support_sets;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

std::vector<SupportSet> closed_form_sets() {
  std::vector<SupportSet> sets;
  sets.push_back(ss::ball(Vector::Zero(2), 1.0));
  sets.push_back(ss::box(v2(-1, -1), v2(1, 1)));
  sets.push_back(ss::box(v2(0, -kInf), v2(kInf, 2)));
  Matrix A(3, 2);
  A << 1, 0, 0, 1, -1, -1;
  Vector b(3);
  b << 1, 1, 1;
  sets.push_back(ss::polyhedron(A, b));
  sets.push_back(ss::second_order_cone(3));
  sets.push_back(ss::psd_cone(2));
  sets.push_back(ss::negative_psd_cone(2));
  sets.push_back(ss::singleton(v2(0.5, -2)));
  sets.push_back(ss::matrix_interval(Matrix(-Matrix::Identity(2, 2)),
                                     Matrix(2.0 * Matrix::Identity(2, 2))));
  sets.push_back(ss::kyfan_ball(2, 3, 1.0));
  sets.push_back(ss::product({ss::singleton(Vector::Ones(1)), ss::box(v2(-1, -1), v2(1, 1))}));
  sets.push_back(ss::curve_epigraph(2.0 / 3.0, 1.5));
  Matrix B(3, 1);
  B << 1, 0, 0;
  sets.push_back(ss::subspace(B, 3));
  return sets;
}

}  // namespace

TEST_CASE("projection is idempotent and contains agrees with distance") {
  Rng rng(21);
  for (const auto& Q : closed_form_sets()) {
    for (int s = 0; s < 15; ++s) {
      Vector z = 2.0 * rng.normal_vector(Q.dim());
      Vector p = Q.project(z);
      CHECK((Q.project(p) - p).norm() < 1e-10);
      CHECK(Q.contains(p, 1e-8));
      const double d = Q.distance(z);
      CHECK(Q.contains(z, d + 1e-9));
      if (d > 1e-6) CHECK(!Q.contains(z, d - 1e-6));
      // projection optimality against sampled members
      for (int t = 0; t < 5; ++t) {
        Vector q = Q.project(2.0 * rng.normal_vector(Q.dim()));
        CHECK((z - p).dot(q - p) <= 1e-7 * (1.0 + z.norm()) * (1.0 + q.norm()));
      }
    }
  }
}

TEST_CASE("support examples from the contract") {
  // unit ball, x = (3,4) -> 5
  CHECK(ss::ball(Vector::Zero(2), 1.0).support(v2(3, 4)) == doctest::Approx(5.0));
  // [0,1]^2, x = (2,-1) -> 2
  CHECK(ss::box(v2(0, 0), v2(1, 1)).support(v2(2, -1)) == doctest::Approx(2.0));
  // Ky Fan 2-norm: {||B||_2<=1, ||B||_*<=2} 3x3, X = diag(3,2,1) -> 5
  Matrix X = Matrix::Zero(3, 3);
  X.diagonal() << 3, 2, 1;
  Vector xv(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) xv[i * 3 + j] = X(i, j);
  CHECK(ss::kyfan_ball(3, 3, 2.0).support(xv) == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("kyfan support equals a brute-force diagonal maximization") {
  // X diagonal: sup over diagonal B in the ball of <B, X>, grid search
  SupportSet Q = ss::kyfan_ball(3, 3, 2.0);
  Vector d(3);
  d << 3, 2, 1;
  double best = 0.0;
  const int N = 40;
  for (int a = 0; a <= N; ++a)
    for (int b = 0; b <= N; ++b)
      for (int c = 0; c <= N; ++c) {
        const double ba = double(a) / N, bb = double(b) / N, bc = double(c) / N;
        if (ba + bb + bc <= 2.0 + 1e-12) best = std::max(best, 3 * ba + 2 * bb + 1 * bc);
      }
  Vector xv = Vector::Zero(9);
  xv[0] = 3;
  xv[4] = 2;
  xv[8] = 1;
  CHECK(Q.support(xv) == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("projection examples from the contract") {
  // SOC, z=(-1,0,0) -> 0
  Vector z(3);
  z << -1, 0, 0;
  CHECK(ss::second_order_cone(3).project(z).norm() < 1e-12);

  // MatrixInterval L=-I, U=I, z=diag(2,0.5) -> diag(1,0.5)
  SupportSet mi =
      ss::matrix_interval(Matrix(-Matrix::Identity(2, 2)), Matrix(Matrix::Identity(2, 2)));
  Matrix Z = Matrix::Zero(2, 2);
  Z.diagonal() << 2.0, 0.5;
  Vector p = mi.project(svec(Z));
  Matrix P = smat(p);
  CHECK(P(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(P(1, 1) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(std::abs(P(0, 1)) < 1e-8);

  // ball r=1, z=(3,4) -> (0.6, 0.8)
  Vector q = ss::ball(Vector::Zero(2), 1.0).project(v2(3, 4));
  CHECK(q[0] == doctest::Approx(0.6));
  CHECK(q[1] == doctest::Approx(0.8));
}

TEST_CASE("dykstra matrix-interval projection matches eigenvalue clipping on commuting data") {
  Rng rng(5);
  // non-scalar commuting example: L, U, Z diagonal in a common basis
  Matrix Qb(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) Qb(i, j) = rng.normal();
  EigResult e = eigh_jacobi(Matrix(Qb + Qb.transpose()));
  Matrix V = e.vectors;
  Vector l(3), u(3), zz(3);
  l << -1, -2, 0;
  u << 1, 0.5, 3;
  zz << 2, -3, 1.5;
  Matrix L = V * l.asDiagonal() * V.transpose();
  Matrix U = V * u.asDiagonal() * V.transpose();
  Matrix Z = V * zz.asDiagonal() * V.transpose();
  SupportSet mi = ss::matrix_interval(L, U);
  Vector p = mi.project(svec(Z));
  Vector clip(3);
  for (int i = 0; i < 3; ++i) clip[i] = std::min(u[i], std::max(l[i], zz[i]));
  Matrix expect = V * clip.asDiagonal() * V.transpose();
  CHECK((smat(p) - expect).norm() < 2e-8);
}

TEST_CASE("normal cone examples") {
  SupportSet Q = ss::box(v2(-1, -1), v2(1, 1));
  // lambda=(1,0): N = R+ x {0}
  Cone N = Q.normal_cone(v2(1, 0));
  CHECK(N.contains(v2(3, 0), 1e-9));
  CHECK(!N.contains(v2(-0.1, 0), 1e-6));
  CHECK(!N.contains(v2(1, 0.2), 1e-6));
  // interior: {0}
  Cone N0 = Q.normal_cone(v2(0, 0));
  CHECK(N0.contains(v2(0, 0), 1e-12));
  CHECK(!N0.contains(v2(1e-3, 0), 1e-6));
  // psd cone at diag(1,0): {V <= 0, V e1 = 0}
  Matrix Lam = Matrix::Zero(2, 2);
  Lam(0, 0) = 1.0;
  Cone Np = ss::psd_cone(2).normal_cone(svec(Lam));
  Matrix Vneg = Matrix::Zero(2, 2);
  Vneg(1, 1) = -3.0;
  CHECK(Np.contains(svec(Vneg), 1e-9));
  Matrix Vbad = Matrix::Zero(2, 2);
  Vbad(0, 0) = -1.0;
  Vbad(1, 1) = -1.0;
  CHECK(!Np.contains(svec(Vbad), 1e-6));  // touches e1
  // derived oracle: <V, X - lam> <= 0 over sampled X psd
  Rng rng(3);
  SupportSet psd = ss::psd_cone(2);
  for (int s = 0; s < 50; ++s) {
    Vector x = psd.project(rng.normal_vector(3));
    CHECK(svec(Vneg).dot(x - svec(Lam)) <= 1e-9);
  }
  // point not in set errors
  CHECK_THROWS_AS(Q.normal_cone(v2(2, 0)), PointNotInSet);
}

TEST_CASE("ri membership") {
  SupportSet Q = ss::box(v2(-1, -1), v2(1, 1));
  CHECK(Q.ri_contains(v2(0, 0), 1e-7));
  CHECK(!Q.ri_contains(v2(1, 0), 1e-7));
  // {1} x [-1,1]: (1,0) is in the relative interior
  SupportSet P = ss::product({ss::singleton(Vector::Ones(1)), ss::box(Vector::Constant(1, -1),
                                                                      Vector::Constant(1, 1))});
  CHECK(P.ri_contains(v2(1, 0), 1e-7));
  CHECK(!P.ri_contains(v2(1, 1), 1e-7));
  CHECK_THROWS_AS(Q.ri_contains(v2(0, 0), 0.0), std::invalid_argument);
}

TEST_CASE("support/normal-cone duality on sampled points") {
  Rng rng(33);
  for (const auto& Q : closed_form_sets()) {
    for (int s = 0; s < 8; ++s) {
      Vector lam = Q.project(1.5 * rng.normal_vector(Q.dim()));
      Cone N;
      try {
        N = Q.normal_cone(lam);
      } catch (const InnerSolverRequired&) {
        continue;  // designed error channel for unrepresentable faces
      }
      auto x = N.project(rng.normal_vector(Q.dim()));
      REQUIRE(x);
      double sup;
      try {
        sup = Q.support(*x);
      } catch (const InnerSolverRequired&) {
        continue;
      }
      if (std::isfinite(sup)) CHECK(sup - lam.dot(*x) < 1e-7 * (1.0 + std::abs(sup)));
    }
  }
}

TEST_CASE("faces expose the support value") {
  Rng rng(8);
  for (const auto& Q : closed_form_sets()) {
    for (int s = 0; s < 6; ++s) {
      Vector y = rng.normal_vector(Q.dim());
      double sup;
      try {
        sup = Q.support(y);
      } catch (const InnerSolverRequired&) {
        continue;
      }
      if (!std::isfinite(sup)) continue;
      SupportSet F;
      try {
        F = Q.face(y);
      } catch (const InnerSolverRequired&) {
        continue;
      }
      Vector q = F.any_point();
      CHECK(q.dot(y) == doctest::Approx(sup).epsilon(1e-6));
      CHECK(Q.contains(q, 1e-6));
    }
  }
}

TEST_CASE("equality slice: fantope support equals the eigenvalue sum") {
  // {B in S^2 : 0 <= B <= I, tr B = 1}: support at S = sum of top eigenvalue
  const int d = 2;
  SupportSet fant = ss::equality_slice(
      ss::matrix_interval(Matrix(Matrix::Zero(d, d)), Matrix(Matrix::Identity(d, d))),
      Matrix(svec(Matrix(Matrix::Identity(d, d))).transpose()), Vector::Ones(1));
  Rng rng(4);
  for (int s = 0; s < 12; ++s) {
    Matrix S(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) S(i, j) = rng.normal();
    S = Matrix(0.5 * (S + S.transpose()));
    EigResult e = eigh_jacobi(S);
    CHECK(fant.support(svec(S)) == doctest::Approx(e.values[0]).epsilon(1e-7));
  }
  // membership and projection stay on the slice
  Vector z = rng.normal_vector(svec_dim(d));
  Vector p = fant.project(z);
  CHECK(fant.contains(p, 1e-7));
  CHECK(smat(p).trace() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("curve epigraph: support formula from the failure example") {
  SupportSet C = ss::curve_epigraph(2.0 / 3.0, 1.5);
  // sigma_C(x) = |x1|^3 / (3 x2^2) for x2 < 0
  CHECK(C.support(v2(1, -1)) == doctest::Approx(1.0 / 3.0));
  CHECK(C.support(v2(2, -1)) == doctest::Approx(8.0 / 3.0));
  CHECK(C.support(v2(1, 1)) == kInf);
  CHECK(C.support(v2(0, 0)) == 0.0);
  // gradient sequence from the failure example: lambda^k = grad sigma at x^k
  const double k = 7.0;
  Vector xk = v2(1.0 / (k * k * k), -1.0 / k);
  SupportSet face = C.face(xk);
  Vector lam = face.any_point();
  CHECK(lam[0] == doctest::Approx(1.0 / std::pow(k, 4)).epsilon(1e-9));
  CHECK(lam[1] == doctest::Approx(2.0 / (3.0 * std::pow(k, 6))).epsilon(1e-9));
}

TEST_CASE("affine preimage supports membership and projection") {
  // {p in R^2 : p in unit ball shifted} via A = I, b = (1,0)
  SupportSet pre =
      ss::affine_preimage(ss::ball(Vector::Zero(2), 1.0), Matrix::Identity(2, 2), v2(1, 0));
  CHECK(pre.contains(v2(-1, 0), 1e-9));
  CHECK(!pre.contains(v2(1.5, 0), 1e-6));
  Vector p = pre.project(v2(3, 0));
  CHECK(p[0] == doctest::Approx(0.0).epsilon(1e-6));
  // support via the invertible transform
  CHECK(pre.support(v2(1, 0)) == doctest::Approx(0.0).epsilon(1e-9));  // -1 + ball support 1
}

TEST_CASE("json round trip") {
  for (const auto& Q : closed_form_sets()) {
    SupportSet R = support_set_from_json(to_json_string(Q));
    CHECK(R.dim() == Q.dim());
    CHECK(R.kind() == Q.kind());
    Rng rng(2);
    for (int s = 0; s < 5; ++s) {
      Vector z = rng.normal_vector(Q.dim());
      CHECK((Q.project(z) - R.project(z)).norm() < 1e-9);
    }
  }
  // infinities survive
  SupportSet b = ss::box(v2(0, -kInf), v2(kInf, 2));
  SupportSet b2 = support_set_from_json(to_json_string(b));
  CHECK(b2.support(v2(-1, 1)) == doctest::Approx(2.0));
  CHECK(b2.support(v2(1, 0)) == kInf);
}
