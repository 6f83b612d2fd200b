#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epivar/opt.hpp"
#include "epivar/rng.hpp"

using namespace epivar;

TEST_CASE("lp: bounded maximization") {
  // max x1 + x2 s.t. x1 <= 1, x2 <= 2, -x1 <= 0, -x2 <= 0
  Vector c(2);
  c << 1, 1;
  Matrix A(4, 2);
  A << 1, 0, 0, 1, -1, 0, 0, -1;
  Vector b(4);
  b << 1, 2, 0, 0;
  LpResult r = solve_lp(c, A, b);
  CHECK(r.status == LpStatus::kOptimal);
  CHECK(r.value == doctest::Approx(3.0));
}

TEST_CASE("lp: infeasible and unbounded") {
  Vector c(1);
  c << 1;
  Matrix A(2, 1);
  A << 1, -1;
  Vector b(2);
  b << -1, -1;  // x <= -1 and x >= 1
  CHECK(solve_lp(c, A, b).status == LpStatus::kInfeasible);

  Matrix A2(1, 1);
  A2 << -1;
  Vector b2(1);
  b2 << 0;  // x >= 0, max x
  CHECK(solve_lp(c, A2, b2).status == LpStatus::kUnbounded);
}

TEST_CASE("lp: free variables with negative optimum") {
  // max -x s.t. x >= 2  -> value -2
  Vector c(1);
  c << -1;
  Matrix A(1, 1);
  A << -1;
  Vector b(1);
  b << -2;
  LpResult r = solve_lp(c, A, b);
  CHECK(r.status == LpStatus::kOptimal);
  CHECK(r.value == doctest::Approx(-2.0));
}

TEST_CASE("nnls matches projection onto a simplicial cone") {
  Matrix V(2, 2);
  V << 1, 0, 0, 1;
  Vector z(2);
  z << -1, 2;
  Vector y = nnls(V, z);
  CHECK(y[0] == doctest::Approx(0.0));
  CHECK(y[1] == doctest::Approx(2.0));

  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix G(3, 4);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) G(i, j) = rng.normal();
    Vector zz = rng.normal_vector(3);
    Vector yy = nnls(G, zz);
    Vector p = G * yy;
    // optimality: <z - p, g_j> <= 0 for all generators, = 0 on support
    for (int j = 0; j < 4; ++j) {
      const double s = G.col(j).dot(zz - p);
      CHECK(s < 1e-8);
      if (yy[j] > 1e-10) CHECK(std::abs(s) < 1e-8);
    }
  }
}

TEST_CASE("dykstra projects onto an intersection") {
  // intersection of halfplane x+y<=1 and disk of radius 1: project (2,2)
  std::vector<ProjectionFn> projs;
  projs.push_back([](const Vector& y) -> Vector {
    const double s = y[0] + y[1] - 1.0;
    if (s <= 0) return y;
    Vector out = y;
    out[0] -= s / 2;
    out[1] -= s / 2;
    return out;
  });
  projs.push_back([](const Vector& y) -> Vector {
    const double n = y.norm();
    return (n <= 1.0) ? y : Vector(y / n);
  });
  Vector z(2);
  z << 2, 2;
  DykstraResult r = dykstra(z, projs);
  CHECK(r.converged);
  // true answer: (1/2, 1/2) scaled to satisfy both: point (0.5,0.5)+... the
  // closest point of {x+y<=1} cap disk to (2,2) is (sqrt(2)/2, sqrt(2)/2)
  // intersected with halfplane: x+y = sqrt(2) > 1, so the constraint binds:
  // answer (0.5, 0.5).
  CHECK(r.point[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.point[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("sum projection: R+ x {0} + {0} x R+ equals R^2_+") {
  std::vector<ProjectionFn> projs;
  projs.push_back([](const Vector& y) -> Vector {
    Vector o(2);
    o << std::max(0.0, y[0]), 0.0;
    return o;
  });
  projs.push_back([](const Vector& y) -> Vector {
    Vector o(2);
    o << 0.0, std::max(0.0, y[1]);
    return o;
  });
  Vector z(2);
  z << 3, -2;
  DykstraResult r = project_onto_sum(z, projs);
  CHECK(r.point[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.point[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("scalar minimization") {
  auto f = [](double t) { return (t - 3.0) * (t - 3.0) + 1.0; };
  CHECK(minimize_scalar(f, -10, 10) == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(minimize_scalar_unbounded(f, -100.0) == doctest::Approx(3.0).epsilon(1e-8));
  // piecewise-linear convex
  auto g = [](double t) { return std::abs(t - 0.25) + 0.5 * std::abs(t + 1); };
  CHECK(minimize_scalar(g, -5, 5) == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("capped simplex projection") {
  Vector s(3);
  s << 3, 2, 1;
  // {0 <= y <= 1, sum y <= 2}: answer (1,1,0)
  Vector y = project_capped_simplex_le(s, 1.0, 2.0);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(1.0));
  CHECK(y[2] == doctest::Approx(0.0).epsilon(1e-9));

  // equality: project (0.9, 0.05, 0.05) onto {0<=y<=1, sum=1}
  Vector s2(3);
  s2 << 0.9, 0.05, 0.05;
  Vector y2 = project_capped_simplex_eq(s2, 1.0, 1.0);
  CHECK(y2.sum() == doctest::Approx(1.0).epsilon(1e-9));
  for (int i = 0; i < 3; ++i) {
    CHECK(y2[i] >= -1e-12);
    CHECK(y2[i] <= 1.0 + 1e-12);
  }
}
