#include "epivar/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace epivar {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

int smat_order(int d) {
  int n = static_cast<int>(std::floor((std::sqrt(8.0 * d + 1.0) - 1.0) / 2.0));
  while (n * (n + 1) / 2 < d) ++n;
  if (n * (n + 1) / 2 != d) throw std::invalid_argument("svec length is not triangular");
  return n;
}

Vector svec(const Matrix& S) {
  const int n = static_cast<int>(S.rows());
  if (S.cols() != n) throw std::invalid_argument("svec: matrix not square");
  Vector v(svec_dim(n));
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) v[k++] = (i == j) ? S(i, j) : kSqrt2 * 0.5 * (S(i, j) + S(j, i));
  return v;
}

Matrix smat(const Vector& v) {
  const int n = smat_order(static_cast<int>(v.size()));
  Matrix S(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      if (i == j) {
        S(i, j) = v[k];
      } else {
        S(i, j) = S(j, i) = v[k] / kSqrt2;
      }
      ++k;
    }
  return S;
}

EigResult eigh_jacobi(const Matrix& Sin) {
  const int n = static_cast<int>(Sin.rows());
  if (Sin.cols() != n) throw std::invalid_argument("eigh: matrix not square");
  Matrix A = 0.5 * (Sin + Sin.transpose());
  Matrix V = Matrix::Identity(n, n);
  const double scale = std::max(1.0, A.norm());

  auto offnorm = [&]() {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < j; ++i) s += A(i, j) * A(i, j);
    return std::sqrt(2.0 * s);
  };

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps && offnorm() > 1e-12 * scale; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the rotation in the (p,q) plane
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  EigResult out;
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = A(i, i);
  // sort descending
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return out.values[a] > out.values[b]; });
  Vector w(n);
  Matrix W(n, n);
  for (int i = 0; i < n; ++i) {
    w[i] = out.values[idx[i]];
    W.col(i) = V.col(idx[i]);
  }
  out.values = w;
  out.vectors = W;
  return out;
}

SvdResult svd_dilation(const Matrix& X) {
  const int m = static_cast<int>(X.rows());
  const int n = static_cast<int>(X.cols());
  const int r = std::min(m, n);
  Matrix T = Matrix::Zero(m + n, m + n);
  T.block(0, m, m, n) = X;
  T.block(m, 0, n, m) = X.transpose();
  EigResult e = eigh_jacobi(T);

  SvdResult out;
  out.U = Matrix::Zero(m, r);
  out.V = Matrix::Zero(n, r);
  out.sigma = Vector::Zero(r);

  const double scale = std::max(1.0, X.norm());
  int filled = 0;
  for (int i = 0; i < m + n && filled < r; ++i) {
    const double sv = e.values[i];
    if (sv <= 1e-13 * scale) break;  // positive part exhausted
    Vector u = kSqrt2 * e.vectors.col(i).head(m);
    Vector v = kSqrt2 * e.vectors.col(i).tail(n);
    out.sigma[filled] = sv;
    out.U.col(filled) = u;
    out.V.col(filled) = v;
    ++filled;
  }
  // complete U, V with orthonormal kernel columns so that X = U diag(sigma) V^T
  auto complete = [](Matrix& B, int have) {
    const int rows = static_cast<int>(B.rows());
    const int want = static_cast<int>(B.cols());
    int got = have;
    for (int c = 0; c < rows && got < want; ++c) {
      Vector cand = Vector::Zero(rows);
      cand[c] = 1.0;
      for (int j = 0; j < got; ++j) cand -= B.col(j).dot(cand) * B.col(j);
      double nn = cand.norm();
      if (nn > 1e-8) B.col(got++) = cand / nn;
    }
  };
  complete(out.U, filled);
  complete(out.V, filled);
  return out;
}

double spectral_norm(const Matrix& X) {
  if (X.size() == 0) return 0.0;
  SvdResult s = svd_dilation(X);
  return s.sigma.size() > 0 ? s.sigma[0] : 0.0;
}

double nuclear_norm(const Matrix& X) {
  if (X.size() == 0) return 0.0;
  return svd_dilation(X).sigma.sum();
}

Matrix orthonormal_columns(const Matrix& A, double tol) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() == 0) return Matrix(n, 0);
  double scale = 0.0;
  for (int j = 0; j < A.cols(); ++j) scale = std::max(scale, A.col(j).norm());
  if (scale == 0.0) return Matrix(n, 0);
  Matrix Q(n, std::min<int>(n, static_cast<int>(A.cols())));
  int got = 0;
  for (int j = 0; j < A.cols() && got < n; ++j) {
    Vector v = A.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < got; ++i) v -= Q.col(i).dot(v) * Q.col(i);
    const double nn = v.norm();
    if (nn > tol * scale) Q.col(got++) = v / nn;
  }
  return Q.leftCols(got);
}

Matrix nullspace(const Matrix& A, double rtol) {
  const int n = static_cast<int>(A.cols());
  if (A.rows() == 0 || A.size() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = (s.size() ? s[0] : 0.0) * rtol;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > cut) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

Matrix range_basis(const Matrix& A, double rtol) {
  return orthonormal_columns(A, rtol);
}

Matrix subspace_complement(const Matrix& basis) {
  if (basis.cols() == 0) return Matrix::Identity(basis.rows(), basis.rows());
  return nullspace(Matrix(basis.transpose()));
}

Matrix subspace_sum(const Matrix& a, const Matrix& b) {
  Matrix ab(a.rows(), a.cols() + b.cols());
  ab << a, b;
  return orthonormal_columns(ab);
}

Matrix subspace_intersection(const Matrix& a, const Matrix& b) {
  const int n = static_cast<int>(a.rows());
  Matrix Pa = (a.cols() == 0) ? Matrix::Zero(n, n) : Matrix(a * a.transpose());
  Matrix Pb = (b.cols() == 0) ? Matrix::Zero(n, n) : Matrix(b * b.transpose());
  Matrix stacked(2 * n, n);
  stacked << Matrix::Identity(n, n) - Pa, Matrix::Identity(n, n) - Pb;
  return nullspace(stacked, 1e-9);
}

double subspace_gap(const Matrix& a, const Matrix& b) {
  const int n = static_cast<int>(a.rows());
  Matrix Pa = (a.cols() == 0) ? Matrix::Zero(n, n) : Matrix(a * a.transpose());
  Matrix Pb = (b.cols() == 0) ? Matrix::Zero(n, n) : Matrix(b * b.transpose());
  return spectral_norm(Pa - Pb);
}

bool subspace_equal(const Matrix& a, const Matrix& b, double tol) {
  if (a.cols() != b.cols()) return false;
  return subspace_gap(a, b) < tol;
}

double subspace_distance(const Matrix& basis, const Vector& x) {
  if (basis.cols() == 0) return x.norm();
  return (x - basis * (basis.transpose() * x)).norm();
}

Matrix identity_basis(int n) { return Matrix::Identity(n, n); }

Vector lsq_solve(const Matrix& A, const Vector& b, double rtol) {
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(rtol);
  return svd.solve(b);
}

Matrix pinv(const Matrix& A, double rtol) {
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cut = (s.size() ? s[0] : 0.0) * rtol;
  Vector inv = Vector::Zero(s.size());
  for (int i = 0; i < s.size(); ++i) inv[i] = (s[i] > cut) ? 1.0 / s[i] : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace epivar
