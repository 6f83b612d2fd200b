#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epivar/linalg.hpp"
#include "epivar/rng.hpp"

using namespace epivar;

TEST_CASE("svec is an isometry for the trace inner product") {
  Rng rng(7);
  for (int n : {1, 2, 3, 5}) {
    Matrix A(n, n), B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        A(i, j) = rng.normal();
        B(i, j) = rng.normal();
      }
    A = Matrix(0.5 * (A + A.transpose()));
    B = Matrix(0.5 * (B + B.transpose()));
    const double tr = (A * B).trace();
    CHECK(svec(A).dot(svec(B)) == doctest::Approx(tr).epsilon(1e-12));
    CHECK((smat(svec(A)) - A).norm() < 1e-14);
  }
}

TEST_CASE("jacobi eigendecomposition reconstructs and orders") {
  Rng rng(3);
  for (int n : {1, 2, 4, 8, 16}) {
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
    A = Matrix(0.5 * (A + A.transpose()));
    EigResult e = eigh_jacobi(A);
    CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - A).norm() <
          1e-11 * std::max(1.0, A.norm()));
    CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(n, n)).norm() < 1e-11);
    for (int i = 0; i + 1 < n; ++i) CHECK(e.values[i] >= e.values[i + 1]);
  }
}

TEST_CASE("dilation svd reconstructs rectangular matrices") {
  Rng rng(11);
  for (auto [m, n] : std::vector<std::pair<int, int>>{{2, 3}, {3, 2}, {3, 3}, {4, 2}, {1, 5}}) {
    Matrix X(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) X(i, j) = rng.normal();
    SvdResult s = svd_dilation(X);
    const int r = std::min(m, n);
    CHECK((X - s.U * s.sigma.asDiagonal() * s.V.transpose()).norm() < 1e-10);
    CHECK((s.U.transpose() * s.U - Matrix::Identity(r, r)).norm() < 1e-10);
    CHECK((s.V.transpose() * s.V - Matrix::Identity(r, r)).norm() < 1e-10);
    for (int i = 0; i + 1 < r; ++i) CHECK(s.sigma[i] >= s.sigma[i + 1] - 1e-12);
  }
}

TEST_CASE("svd handles rank deficiency") {
  Matrix X(3, 3);
  X << 1, 0, 0, 0, 0, 0, 0, 0, 0;
  SvdResult s = svd_dilation(X);
  CHECK(s.sigma[0] == doctest::Approx(1.0));
  CHECK(s.sigma[1] == doctest::Approx(0.0));
  CHECK((X - s.U * s.sigma.asDiagonal() * s.V.transpose()).norm() < 1e-12);
}

TEST_CASE("nullspace and subspace operations") {
  Matrix A(1, 3);
  A << 1, 1, 1;
  Matrix N = nullspace(A);
  CHECK(N.cols() == 2);
  CHECK((A * N).norm() < 1e-12);

  Matrix e1 = Matrix::Identity(3, 3).leftCols(1);
  Matrix e12 = Matrix::Identity(3, 3).leftCols(2);
  CHECK(subspace_gap(e1, e1) < 1e-14);
  CHECK(subspace_gap(e1, e12) == doctest::Approx(1.0));
  CHECK(subspace_equal(subspace_sum(e1, e12), e12));
  CHECK(subspace_intersection(e12, Matrix::Identity(3, 3).rightCols(2)).cols() == 1);

  // complement
  Matrix C = subspace_complement(e12);
  CHECK(C.cols() == 1);
  CHECK(std::abs(std::abs(C(2, 0)) - 1.0) < 1e-12);
}

TEST_CASE("subspace gap resolves tiny angles") {
  // two lines at angle 1e-8: gap must report ~1e-8, not 0
  Vector a(2), b(2);
  a << 1, 0;
  const double eps = 1e-8;
  b << std::cos(eps), std::sin(eps);
  CHECK(subspace_gap(Matrix(a), Matrix(b)) == doctest::Approx(eps).epsilon(1e-3));
}

TEST_CASE("pseudo-inverse solves consistent systems") {
  Matrix A(2, 3);
  A << 1, 0, 1, 0, 2, 0;
  Vector b(2);
  b << 3, 4;
  Vector x = lsq_solve(A, b);
  CHECK((A * x - b).norm() < 1e-12);
}
