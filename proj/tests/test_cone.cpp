#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epivar/cone.hpp"
#include "epivar/opt.hpp"
#include "epivar/rng.hpp"

using namespace epivar;
namespace ec = epivar::cones;

namespace {

std::vector<Cone> sample_cones() {
  std::vector<Cone> out;
  out.push_back(ec::zero(3));
  Vector d(3);
  d << 1, 2, -1;
  out.push_back(ec::ray(d));
  Matrix b(3, 1);
  b << 0, 1, 1;
  out.push_back(ec::subspace(b, 3));
  Matrix A(2, 3);
  A << 1, 0, 0, 0, -1, 1;
  out.push_back(ec::polyhedral(A));
  Matrix V(3, 3);
  V << 1, 0, 1, 0, 1, 1, 0, 0, 1;
  out.push_back(ec::generated(V));
  out.push_back(ec::second_order(3));
  out.push_back(ec::second_order(3, -1));
  out.push_back(ec::psd(2));
  out.push_back(ec::psd(2, -1));
  // image of psd(1) under an isometric embedding into R^3
  Matrix B(3, 1);
  B << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0;
  out.push_back(ec::image(B, ec::psd(1)));
  out.push_back(ec::preimage_orth(B, ec::second_order(1)));
  out.push_back(ec::product({ec::second_order(2), ec::ray(Vector::Ones(1))}));
  out.push_back(ec::sum({ec::ray(Vector::Unit(3, 0)), ec::ray(Vector::Unit(3, 1))}));
  out.push_back(
      ec::intersection({ec::second_order(3), ec::polyhedral(Matrix(-Matrix::Identity(3, 3)))}));
  return out;
}

}  // namespace

TEST_CASE("moreau decomposition holds for every cone variant") {
  Rng rng(42);
  for (const auto& K : sample_cones()) {
    Cone P = K.polar();
    for (int s = 0; s < 25; ++s) {
      Vector z = rng.normal_vector(K.dim());
      auto pk = K.project(z);
      auto pp = P.project(z);
      REQUIRE(pk);
      REQUIRE(pp);
      CHECK((*pk + *pp - z).norm() < 1e-9);
      CHECK(std::abs(pk->dot(*pp)) < 1e-9);
    }
  }
}

TEST_CASE("polar of polar agrees on membership") {
  Rng rng(1);
  for (const auto& K : sample_cones()) {
    Cone KK = K.polar().polar();
    for (int s = 0; s < 40; ++s) {
      Vector z = rng.normal_vector(K.dim());
      auto pk = K.project(z);
      REQUIRE(pk);
      CHECK(KK.contains(*pk, 1e-7));
      if (!K.contains(z, 1e-9)) {
        // z strictly outside: double polar should not swallow it either
        if ((z - *pk).norm() > 1e-5) CHECK(!KK.contains(z, 1e-7));
      }
    }
  }
}

TEST_CASE("lineality vectors lie in the cone both ways") {
  for (const auto& K : sample_cones()) {
    Matrix L = K.lineality();
    for (int j = 0; j < L.cols(); ++j) {
      CHECK(K.contains(L.col(j), 1e-8));
      CHECK(K.contains(Vector(-L.col(j)), 1e-8));
    }
  }
}

TEST_CASE("affine hull equals lineality of the polar, orthogonally") {
  for (const auto& K : sample_cones()) {
    auto aff = K.affine_hull();
    if (!aff) continue;
    Matrix lp = K.polar().lineality();
    Matrix expect = subspace_complement(lp);
    CHECK(subspace_equal(*aff, expect, 1e-7));
  }
}

TEST_CASE("spec examples: polar and lineality") {
  // K = R+ x {0}: polar = R- x R
  Matrix V(2, 1);
  V << 1, 0;
  Cone K = ec::generated(V);
  Cone P = K.polar();
  Vector p1(2), p2(2), p3(2);
  p1 << -3, 5;
  p2 << 1e-3, 0;
  p3 << 0.1, 0.1;
  CHECK(P.contains(p1, 1e-9));
  CHECK(!P.contains(p3, 1e-6));

  // SOC(3) pointed
  CHECK(ec::second_order(3).lineality().cols() == 0);

  // halfspace {p : a.p <= 0}: lineality = a-perp
  Vector a(3);
  a << 1, 1, 0;
  Cone H = ec::polyhedral(Matrix(a.transpose()));
  Matrix L = H.lineality();
  CHECK(L.cols() == 2);
  CHECK((a.transpose() * L).norm() < 1e-12);
}

TEST_CASE("ri points are interior with positive margin") {
  for (const auto& K : sample_cones()) {
    auto r = K.ri_point();
    if (!r) continue;
    CHECK(K.contains(*r, 1e-9));
  }
  // polyhedral ri: {x: x1 <= 0, x2 <= x3} has interior
  Matrix A(2, 3);
  A << 1, 0, 0, 0, 1, -1;
  auto r = ec::polyhedral(A).ri_point();
  REQUIRE(r);
  CHECK((A * (*r)).maxCoeff() < -1e-9);
}

TEST_CASE("cone_sum_is_full_space on the spec instances") {
  Rng rng(9);
  // A = R x {0}, B = {0} x R -> true
  Matrix A1(2, 1);
  A1 << 1, 0;
  Matrix B1(2, 1);
  B1 << 0, 1;
  auto c1 = cone_sum_is_full_space(A1, ec::subspace(B1, 2), rng);
  CHECK(c1.verdict == CertVerdict::kHolds);

  // A = R x {0}, B = R+ x {0} -> false (sum = R x {0})
  Matrix V(2, 1);
  V << 1, 0;
  auto c2 = cone_sum_is_full_space(A1, ec::generated(V), rng);
  CHECK(c2.verdict == CertVerdict::kFails);
  CHECK(c2.witness.norm() > 1e-9);

  // A = range((0,1)), B = R x {0} (saddle scenario) -> true
  Matrix A3(2, 1);
  A3 << 0, 1;
  Matrix B3(2, 1);
  B3 << 1, 0;
  auto c3 = cone_sum_is_full_space(A3, ec::subspace(B3, 2), rng);
  CHECK(c3.verdict == CertVerdict::kHolds);
}

TEST_CASE("cone_sum_is_full_space agrees with brute sampling in low dim") {
  Rng rng(17);
  Rng sampler(99);
  for (int trial = 0; trial < 12; ++trial) {
    const int m = 2 + (trial % 2);
    Matrix Ar(m, 1 + sampler.index(m));
    for (int i = 0; i < Ar.rows(); ++i)
      for (int j = 0; j < Ar.cols(); ++j) Ar(i, j) = sampler.normal();
    Matrix G(m, 1 + sampler.index(3));
    for (int i = 0; i < G.rows(); ++i)
      for (int j = 0; j < G.cols(); ++j) G(i, j) = sampler.normal();
    Cone B = ec::generated(G);
    auto cert = cone_sum_is_full_space(Ar, B, rng);

    // brute force: can dense samples of the sphere be written a - b?
    Matrix Abasis = range_basis(Ar);
    bool all_ok = true;
    for (int s = 0; s < 200; ++s) {
      Vector target = sampler.unit_vector(m);
      // solve min || target - (A y - G w) || over y free, w >= 0 by NNLS in
      // the lifted form: variables [y+; y-; w]
      Matrix lifted(m, 2 * Abasis.cols() + G.cols());
      lifted << Abasis, -Abasis, -G;
      Vector coef = nnls(lifted, target);
      if ((lifted * coef - target).norm() > 1e-6) {
        all_ok = false;
        break;
      }
    }
    if (cert.verdict == CertVerdict::kHolds) CHECK(all_ok);
    if (cert.verdict == CertVerdict::kFails) CHECK(!all_ok);
  }
}

TEST_CASE("sum and intersection duality") {
  Cone s = ec::sum({ec::ray(Vector::Unit(2, 0)), ec::ray(Vector::Unit(2, 1))});
  Cone si = s.polar();  // should behave like nonpositive orthant
  Vector q(2);
  q << -1, -0.5;
  CHECK(si.contains(q, 1e-9));
  q << 0.1, -1;
  CHECK(!si.contains(q, 1e-6));
}
