#pragma once

#include <Eigen/Dense>
#include <vector>

namespace epivar {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- symmetric-matrix vectorization -------------------------------------
//
// Scaled upper-triangle storage: off-diagonal entries carry a factor sqrt(2)
// so that <svec(A), svec(B)> = tr(A B) for symmetric A, B.

inline int svec_dim(int n) { return n * (n + 1) / 2; }

// order n from svec length; throws if d is not triangular
int smat_order(int d);

Vector svec(const Matrix& S);
Matrix smat(const Vector& v);

// ---- eigendecomposition ---------------------------------------------------

struct EigResult {
  Vector values;   // descending
  Matrix vectors;  // columns, orthonormal
};

// Cyclic Jacobi rotations, off-diagonal Frobenius norm below 1e-12 * scale.
EigResult eigh_jacobi(const Matrix& S);

struct SvdResult {
  Matrix U;        // m x r, orthonormal columns, r = min(m, n)
  Vector sigma;    // descending, length r
  Matrix V;        // n x r
};

// SVD through the eigendecomposition of the symmetric dilation
// [[0, X], [X^T, 0]].
SvdResult svd_dilation(const Matrix& X);

double spectral_norm(const Matrix& X);
double nuclear_norm(const Matrix& X);

// ---- subspace tools -------------------------------------------------------
//
// Subspaces are represented by matrices with orthonormal columns; an
// n x 0 matrix is the zero subspace of R^n.

// Orthonormal basis of the column span; columns with residual below
// tol * max_col_norm are dropped.
Matrix orthonormal_columns(const Matrix& A, double tol = 1e-10);

// Basis of ker(A); rank cut at rtol * sigma_max.
Matrix nullspace(const Matrix& A, double rtol = 1e-8);

// Basis of range(A).
Matrix range_basis(const Matrix& A, double rtol = 1e-10);

// Orthogonal complement within R^n (n = basis.rows()).
Matrix subspace_complement(const Matrix& basis);

Matrix subspace_sum(const Matrix& a, const Matrix& b);
Matrix subspace_intersection(const Matrix& a, const Matrix& b);

// sin of the largest principal angle, via || P_a - P_b ||_2; resolves
// angles near zero far better than acos of singular values.
double subspace_gap(const Matrix& a, const Matrix& b);

bool subspace_equal(const Matrix& a, const Matrix& b, double tol = 1e-8);

// distance of x to span(basis)
double subspace_distance(const Matrix& basis, const Vector& x);

Matrix identity_basis(int n);

// Least-squares solve (minimum-norm) via SVD.
Vector lsq_solve(const Matrix& A, const Vector& b, double rtol = 1e-12);

// Moore-Penrose pseudoinverse applied to a vector / assembled matrix.
Matrix pinv(const Matrix& A, double rtol = 1e-12);

}  // namespace epivar
