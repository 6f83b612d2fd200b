#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epivar/rng.hpp"
#include "epivar/smooth_map.hpp"

using namespace epivar;

namespace {

SmoothMap saddle_map() {
  // F(x) = (x1^2 - x2^2, x1)
  return SmoothMap(
      2, 2,
      [](const Vector& x) -> Vector {
        Vector f(2);
        f << x[0] * x[0] - x[1] * x[1], x[0];
        return f;
      },
      [](const Vector& x) -> Matrix {
        Matrix J(2, 2);
        J << 2 * x[0], -2 * x[1], 1, 0;
        return J;
      },
      [](const Vector&, const Vector& h) -> Vector {
        Vector s(2);
        s << 2 * h[0] * h[0] - 2 * h[1] * h[1], 0;
        return s;
      },
      [](const Vector&, const Vector& a, const Vector& b) -> Vector {
        Vector s(2);
        s << 2 * a[0] * b[0] - 2 * a[1] * b[1], 0;
        return s;
      },
      /*analytic=*/true);
}

}  // namespace

TEST_CASE("taylor residual vanishes for linear and quadratic maps") {
  Rng rng(2);
  Matrix A(2, 3);
  A << 1, 2, 3, -1, 0, 2;
  SmoothMap lin = maps::linear(A);
  for (int s = 0; s < 5; ++s) {
    Vector x = rng.normal_vector(3), h = rng.normal_vector(3);
    CHECK(taylor_residual(lin, x, h, 0.37).norm() < 1e-12);
  }
  SmoothMap quad = saddle_map();
  Vector x = Vector::Zero(2), h(2);
  h << 1, 0;
  CHECK(taylor_residual(quad, x, h, 0.5).norm() < 1e-12);
  CHECK(taylor_residual(quad, Vector(rng.normal_vector(2)), Vector(rng.normal_vector(2)), 0.1)
            .norm() < 1e-10);
}

TEST_CASE("taylor residual bound for sin") {
  SmoothMap sine(
      1, 1, [](const Vector& x) -> Vector { return Vector::Constant(1, std::sin(x[0])); },
      [](const Vector& x) -> Matrix { return Matrix::Constant(1, 1, std::cos(x[0])); },
      [](const Vector& x, const Vector& h) -> Vector {
        return Vector::Constant(1, -std::sin(x[0]) * h[0] * h[0]);
      },
      nullptr, true);
  Vector x = Vector::Zero(1), h = Vector::Ones(1);
  // third-order remainder bound: |sin'''| * t / 6
  CHECK(taylor_residual(sine, x, h, 1e-2).norm() <= 2e-3);
}

TEST_CASE("finite-difference fallback matches analytic derivatives") {
  SmoothMap fd(
      2, 2,
      [](const Vector& x) -> Vector {
        Vector f(2);
        f << std::sin(x[0]) * std::cos(x[1]), std::exp(0.3 * x[0] * x[1]);
        return f;
      });
  SmoothMap exact(
      2, 2, nullptr,
      [](const Vector& x) -> Matrix {
        Matrix J(2, 2);
        J << std::cos(x[0]) * std::cos(x[1]), -std::sin(x[0]) * std::sin(x[1]),
            0.3 * x[1] * std::exp(0.3 * x[0] * x[1]), 0.3 * x[0] * std::exp(0.3 * x[0] * x[1]);
        return J;
      });
  Rng rng(7);
  for (int s = 0; s < 6; ++s) {
    Vector x = rng.normal_vector(2);
    CHECK((fd.jacobian(x) - exact.jacobian(x)).cwiseAbs().maxCoeff() < 1e-8);
  }
  // second directional against the analytic quadratic form of component 1
  Vector x = Vector::Zero(2);
  Vector h(2);
  h << 1, 1;
  // f1 = sin(x0)cos(x1): D2 f1[h,h] at 0 = -sin(0)... = 0; f2: D2 at 0 = 0.6 h0 h1
  Vector d2 = fd.second_directional(x, h);
  CHECK(std::abs(d2[0] - 0.0) < 1e-6);
  CHECK(d2[1] == doctest::Approx(0.6).epsilon(1e-5));
}

TEST_CASE("analytic maps are exactly homogeneous in the second derivative") {
  SmoothMap F = saddle_map();
  Rng rng(9);
  for (int s = 0; s < 5; ++s) {
    Vector x = rng.normal_vector(2), h = rng.normal_vector(2);
    const Vector one = F.second_directional(x, h);
    const Vector two = F.second_directional(x, Vector(2.0 * h));
    CHECK((two - 4.0 * one).norm() == 0.0);
  }
}

TEST_CASE("preimage of a subspace") {
  // DF = I: preimage of the e1 axis is the e1 axis
  SmoothMap id2 = maps::identity(2);
  Matrix S = Matrix::Identity(2, 2).leftCols(1);
  Matrix P = preimage_of_subspace(id2, Vector::Zero(2), S);
  CHECK(subspace_equal(P, S));

  // DF = 0: everything
  SmoothMap zero(2, 2, [](const Vector&) { return Vector::Zero(2); },
                 [](const Vector&) { return Matrix::Zero(2, 2); });
  CHECK(preimage_of_subspace(zero, Vector::Zero(2), S).cols() == 2);

  // saddle scenario: DF(0) rows {(0,0),(1,0)}; S = R x {0} -> R^2,
  // S = {0} x R -> R^2 as well (DF(0) h = (0, h1))
  SmoothMap F = saddle_map();
  Matrix Sx = Matrix::Identity(2, 2).leftCols(1);
  Matrix Sy = Matrix::Identity(2, 2).rightCols(1);
  CHECK(preimage_of_subspace(F, Vector::Zero(2), Sx).cols() == 1);  // h1 = 0
  CHECK(preimage_of_subspace(F, Vector::Zero(2), Sy).cols() == 2);
}

TEST_CASE("registry lookup") {
  maps::register_map("unit-test-id3", [](const std::string&) { return maps::identity(3); });
  SmoothMap F = maps::lookup("unit-test-id3");
  CHECK(F.domain_dim() == 3);
  CHECK_THROWS_AS(maps::lookup("missing"), std::invalid_argument);
}
