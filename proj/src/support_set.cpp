#include "epivar/support_set.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "epivar/opt.hpp"

namespace epivar {

using json = nlohmann::json;
namespace ss = support_sets;

namespace {

constexpr double kActiveTol = 1e-7;  // activity threshold for faces/normal cones

// svec-coordinates matrix of the isometric congruence M |-> Z M Z^T,
// mapping svec(S^p) into svec(S^n); Z must have orthonormal columns.
Matrix congruence_map(const Matrix& Z) {
  const int n = static_cast<int>(Z.rows());
  const int p = static_cast<int>(Z.cols());
  Matrix B(svec_dim(n), svec_dim(p));
  int k = 0;
  for (int j = 0; j < p; ++j)
    for (int i = 0; i <= j; ++i) {
      Matrix E;
      if (i == j) {
        E = Z.col(i) * Z.col(i).transpose();
      } else {
        E = (Z.col(i) * Z.col(j).transpose() + Z.col(j) * Z.col(i).transpose()) /
            std::sqrt(2.0);
      }
      B.col(k++) = svec(E);
    }
  return B;
}

Vector clamp_box(const Vector& z, const Vector& lo, const Vector& hi) {
  Vector p = z;
  for (int i = 0; i < z.size(); ++i) p[i] = std::min(hi[i], std::max(lo[i], z[i]));
  return p;
}

// ------------------------------------------------------------- Subspace

class SubspaceSet final : public SetBase {
 public:
  SubspaceSet(Matrix basis, int n) : basis_(std::move(basis)), n_(n) {}
  int dim() const override { return n_; }
  double support(const Vector& x) const override {
    return subspace_distance(subspace_complement(basis_), x) <= 1e-10 * std::max(1.0, x.norm())
               ? 0.0
               : kInf;
  }
  Vector project(const Vector& z) const override {
    return basis_.cols() ? Vector(basis_ * (basis_.transpose() * z)) : Vector(Vector::Zero(n_));
  }
  bool contains(const Vector& p, double tol) const override {
    return subspace_distance(basis_, p) <= tol;
  }
  Cone normal_cone(const Vector&) const override {
    return cones::subspace(subspace_complement(basis_), n_);
  }
  bool ri_contains(const Vector&, double) const override { return true; }
  Matrix parallel_subspace() const override { return basis_; }
  Cone domain_cone() const override {
    return cones::subspace(subspace_complement(basis_), n_);
  }
  SupportSet face(const Vector& y) const override {
    if (!std::isfinite(support(y))) throw PointNotInSet("face: support is +inf");
    return ss::subspace(basis_, n_);
  }
  Vector any_point() const override { return Vector::Zero(n_); }
  std::string kind() const override { return "subspace"; }

  const Matrix& basis() const { return basis_; }

 private:
  Matrix basis_;
  int n_;
};

// ----------------------------------------------------------- Polyhedron

class PolyhedronSet final : public SetBase {
 public:
  PolyhedronSet(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {}
  int dim() const override { return static_cast<int>(A_.cols()); }
  double support(const Vector& x) const override {
    LpResult r = solve_lp(x, A_, b_);
    if (r.status == LpStatus::kUnbounded) return kInf;
    if (r.status == LpStatus::kInfeasible) throw SolverFailure("polyhedron is empty");
    return r.value;
  }
  Vector project(const Vector& z) const override {
    bool inside = true;
    for (int i = 0; i < A_.rows() && inside; ++i)
      if (A_.row(i).dot(z) > b_[i]) inside = false;
    if (inside) return z;
    std::vector<ProjectionFn> projs;
    for (int i = 0; i < A_.rows(); ++i) {
      Vector a = A_.row(i).transpose();
      const double na2 = a.squaredNorm();
      const double bi = b_[i];
      if (na2 == 0.0) continue;
      projs.push_back([a, na2, bi](const Vector& y) -> Vector {
        const double s = a.dot(y) - bi;
        return (s <= 0.0) ? y : Vector(y - (s / na2) * a);
      });
    }
    DykstraResult r = dykstra(z, projs, 20000, 1e-12);
    if (!r.converged) throw SolverFailure("polyhedron projection did not converge");
    return r.point;
  }
  bool contains(const Vector& p, double tol) const override {
    double worst = 0.0;  // largest single-halfspace distance, a lower bound
    bool inside = true;
    for (int i = 0; i < A_.rows(); ++i) {
      const double rn = A_.row(i).norm();
      if (rn == 0.0) continue;
      const double r = (A_.row(i).dot(p) - b_[i]) / rn;
      if (r > 0) inside = false;
      worst = std::max(worst, r);
    }
    if (inside) return true;
    if (worst > tol) return false;
    return (p - project(p)).norm() <= tol;
  }
  Cone normal_cone(const Vector& lambda) const override {
    std::vector<int> act = active_rows(lambda);
    if (act.empty()) return cones::zero(dim());
    Matrix V(dim(), act.size());
    for (size_t k = 0; k < act.size(); ++k) V.col(k) = A_.row(act[k]).transpose();
    return cones::generated(V);
  }
  bool ri_contains(const Vector& lambda, double margin) const override {
    Matrix par = parallel_subspace();
    for (int i = 0; i < A_.rows(); ++i) {
      const Vector a = A_.row(i).transpose();
      const double an = (par.cols() ? (par.transpose() * a).norm() : 0.0);
      if (an <= 1e-12) continue;  // implicit equality or trivial row
      if (A_.row(i).dot(lambda) > b_[i] - margin * an) return false;
    }
    return true;
  }
  Matrix parallel_subspace() const override {
    std::vector<int> impl = implicit_rows();
    if (impl.empty()) return Matrix::Identity(dim(), dim());
    Matrix E(impl.size(), dim());
    for (size_t k = 0; k < impl.size(); ++k) E.row(k) = A_.row(impl[k]);
    return nullspace(E);
  }
  Cone domain_cone() const override { return cones::generated(Matrix(A_.transpose())); }
  SupportSet face(const Vector& y) const override {
    const double s = support(y);
    if (!std::isfinite(s)) throw PointNotInSet("face: support is +inf in this direction");
    Matrix A2(A_.rows() + 2, dim());
    Vector b2(b_.size() + 2);
    A2 << A_, y.transpose(), -y.transpose();
    b2 << b_, s, -s;
    return ss::polyhedron(A2, b2);
  }
  Vector any_point() const override {
    LpResult r = solve_lp(Vector::Zero(dim()), A_, b_);
    if (r.status == LpStatus::kInfeasible) throw SolverFailure("polyhedron is empty");
    return project(r.x);
  }
  std::string kind() const override { return "polyhedron"; }

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }

 private:
  std::vector<int> active_rows(const Vector& lambda) const {
    std::vector<int> act;
    for (int i = 0; i < A_.rows(); ++i)
      if (A_.row(i).dot(lambda) >= b_[i] - kActiveTol * std::max(1.0, A_.row(i).norm()))
        act.push_back(i);
    return act;
  }
  std::vector<int> implicit_rows() const {
    std::vector<int> impl;
    for (int i = 0; i < A_.rows(); ++i) {
      LpResult r = solve_lp(Vector(-A_.row(i).transpose()), A_, b_);
      if (r.status == LpStatus::kOptimal && r.value + b_[i] < 1e-9 * std::max(1.0, std::abs(b_[i])) + 1e-9)
        impl.push_back(i);
    }
    return impl;
  }

  Matrix A_;
  Vector b_;
};

// ------------------------------------------------------------------ Box

class BoxSet final : public SetBase {
 public:
  BoxSet(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    for (int i = 0; i < lo_.size(); ++i)
      if (lo_[i] > hi_[i]) throw std::invalid_argument("box: lo > hi");
  }
  int dim() const override { return static_cast<int>(lo_.size()); }
  double support(const Vector& x) const override {
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) {
      if (x[i] > 0) {
        if (!std::isfinite(hi_[i])) return kInf;
        s += hi_[i] * x[i];
      } else if (x[i] < 0) {
        if (!std::isfinite(lo_[i])) return kInf;
        s += lo_[i] * x[i];
      }
    }
    return s;
  }
  Vector project(const Vector& z) const override { return clamp_box(z, lo_, hi_); }
  bool contains(const Vector& p, double tol) const override {
    return (p - clamp_box(p, lo_, hi_)).norm() <= tol;
  }
  Cone normal_cone(const Vector& lambda) const override {
    std::vector<Cone> parts;
    for (int i = 0; i < lambda.size(); ++i) {
      const double scale =
          1.0 + std::max(std::isfinite(lo_[i]) ? std::abs(lo_[i]) : 0.0,
                         std::isfinite(hi_[i]) ? std::abs(hi_[i]) : 0.0);
      const bool at_lo = std::isfinite(lo_[i]) && lambda[i] <= lo_[i] + kActiveTol * scale;
      const bool at_hi = std::isfinite(hi_[i]) && lambda[i] >= hi_[i] - kActiveTol * scale;
      Vector e = Vector::Ones(1);
      if (at_lo && at_hi) {
        parts.push_back(cones::full(1));
      } else if (at_lo) {
        parts.push_back(cones::ray(Vector(-e)));
      } else if (at_hi) {
        parts.push_back(cones::ray(e));
      } else {
        parts.push_back(cones::zero(1));
      }
    }
    return cones::product(parts);
  }
  bool ri_contains(const Vector& lambda, double margin) const override {
    for (int i = 0; i < lambda.size(); ++i) {
      if (lo_[i] == hi_[i]) continue;  // collapsed coordinate; aff-ball excludes it
      if (std::isfinite(lo_[i]) && lambda[i] < lo_[i] + margin) return false;
      if (std::isfinite(hi_[i]) && lambda[i] > hi_[i] - margin) return false;
    }
    return true;
  }
  Matrix parallel_subspace() const override {
    std::vector<int> free;
    for (int i = 0; i < lo_.size(); ++i)
      if (lo_[i] < hi_[i]) free.push_back(i);
    Matrix P = Matrix::Zero(dim(), free.size());
    for (size_t k = 0; k < free.size(); ++k) P(free[k], k) = 1.0;
    return P;
  }
  Cone domain_cone() const override {
    std::vector<Cone> parts;
    for (int i = 0; i < lo_.size(); ++i) {
      const bool lo_f = std::isfinite(lo_[i]), hi_f = std::isfinite(hi_[i]);
      if (lo_f && hi_f) {
        parts.push_back(cones::full(1));
      } else if (hi_f) {
        parts.push_back(cones::ray(Vector::Ones(1)));
      } else if (lo_f) {
        parts.push_back(cones::ray(Vector(-Vector::Ones(1))));
      } else {
        parts.push_back(cones::zero(1));
      }
    }
    return cones::product(parts);
  }
  SupportSet face(const Vector& y) const override {
    if (!std::isfinite(support(y))) throw PointNotInSet("face: support is +inf");
    Vector flo = lo_, fhi = hi_;
    const double th = 1e-11 * std::max(1.0, y.norm());
    for (int i = 0; i < y.size(); ++i) {
      if (y[i] > th) {
        flo[i] = fhi[i] = hi_[i];
      } else if (y[i] < -th) {
        flo[i] = fhi[i] = lo_[i];
      }
    }
    return ss::box(flo, fhi);
  }
  Vector any_point() const override {
    Vector p(dim());
    for (int i = 0; i < dim(); ++i) {
      double v = 0.0;
      v = std::max(v, std::isfinite(lo_[i]) ? lo_[i] : v);
      v = std::min(v, std::isfinite(hi_[i]) ? hi_[i] : v);
      p[i] = v;
    }
    return p;
  }
  std::string kind() const override { return "box"; }

  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }

 private:
  Vector lo_, hi_;
};

// ----------------------------------------------------------------- Ball

class BallSet final : public SetBase {
 public:
  BallSet(Vector c, double r) : c_(std::move(c)), r_(r) {
    if (r < 0) throw std::invalid_argument("ball: negative radius");
  }
  int dim() const override { return static_cast<int>(c_.size()); }
  double support(const Vector& x) const override { return c_.dot(x) + r_ * x.norm(); }
  Vector project(const Vector& z) const override {
    const Vector d = z - c_;
    const double n = d.norm();
    return (n <= r_) ? z : Vector(c_ + (r_ / n) * d);
  }
  bool contains(const Vector& p, double tol) const override {
    return (p - c_).norm() <= r_ + tol;
  }
  Cone normal_cone(const Vector& lambda) const override {
    if (r_ == 0.0) return cones::full(dim());
    const Vector d = lambda - c_;
    if (d.norm() < r_ - kActiveTol * (1.0 + r_)) return cones::zero(dim());
    return cones::ray(d);
  }
  bool ri_contains(const Vector& lambda, double margin) const override {
    if (r_ == 0.0) return true;
    return (lambda - c_).norm() <= r_ - margin;
  }
  Matrix parallel_subspace() const override {
    return r_ > 0 ? Matrix(Matrix::Identity(dim(), dim())) : Matrix(dim(), 0);
  }
  Cone domain_cone() const override { return cones::full(dim()); }
  SupportSet face(const Vector& y) const override {
    const double n = y.norm();
    if (n <= 1e-12) return ss::ball(c_, r_);
    return ss::singleton(Vector(c_ + (r_ / n) * y));
  }
  Vector any_point() const override { return c_; }
  std::string kind() const override { return "ball"; }

  const Vector& center() const { return c_; }
  double radius() const { return r_; }

 private:
  Vector c_;
  double r_;
};

// ------------------------------------------------------------ Singleton

class SingletonSet final : public SetBase {
 public:
  explicit SingletonSet(Vector p) : p_(std::move(p)) {}
  int dim() const override { return static_cast<int>(p_.size()); }
  double support(const Vector& x) const override { return p_.dot(x); }
  Vector project(const Vector&) const override { return p_; }
  bool contains(const Vector& p, double tol) const override { return (p - p_).norm() <= tol; }
  Cone normal_cone(const Vector&) const override { return cones::full(dim()); }
  bool ri_contains(const Vector&, double) const override { return true; }
  Matrix parallel_subspace() const override { return Matrix(dim(), 0); }
  Cone domain_cone() const override { return cones::full(dim()); }
  SupportSet face(const Vector&) const override { return ss::singleton(p_); }
  Vector any_point() const override { return p_; }
  std::string kind() const override { return "singleton"; }

  const Vector& point() const { return p_; }

 private:
  Vector p_;
};

// -------------------------------------------------------------- SOC set

class SocSet final : public SetBase {
 public:
  SocSet(int n, int sign) : n_(n), sign_(sign), cone_(cones::second_order(n, sign)) {}
  int dim() const override { return n_; }
  double support(const Vector& x) const override {
    return cone_.polar().contains(x, 1e-9 * std::max(1.0, x.norm())) ? 0.0 : kInf;
  }
  Vector project(const Vector& z) const override { return cone_.project(z).value(); }
  bool contains(const Vector& p, double tol) const override { return cone_.contains(p, tol); }
  Cone normal_cone(const Vector& lambda) const override {
    const double scale = 1.0 + lambda.norm();
    if (lambda.norm() <= kActiveTol * scale) return cone_.polar();
    const double head = sign_ * lambda[0];
    const double tail = n_ > 1 ? lambda.tail(n_ - 1).norm() : 0.0;
    if (head - tail > kActiveTol * scale) return cones::zero(n_);
    Vector g(n_);
    g[0] = -sign_;
    if (n_ > 1) g.tail(n_ - 1) = lambda.tail(n_ - 1) / std::max(tail, 1e-300);
    return cones::ray(g);
  }
  bool ri_contains(const Vector& lambda, double margin) const override {
    const double tail = n_ > 1 ? lambda.tail(n_ - 1).norm() : 0.0;
    return sign_ * lambda[0] - tail >= margin;
  }
  Matrix parallel_subspace() const override { return Matrix::Identity(n_, n_); }
  Cone domain_cone() const override { return cone_.polar(); }
  SupportSet face(const Vector& y) const override {
    const double scale = 1.0 + y.norm();
    if (!cone_.polar().contains(y, 1e-9 * scale))
      throw PointNotInSet("face: support is +inf in this direction");
    if (y.norm() <= 1e-12) return ss::second_order_cone(n_, sign_);
    const double head = -sign_ * y[0];
    const double tail = n_ > 1 ? y.tail(n_ - 1).norm() : 0.0;
    if (head - tail > kActiveTol * scale) return ss::singleton(Vector::Zero(n_));
    Vector d(n_);
    d[0] = sign_;
    if (n_ > 1) d.tail(n_ - 1) = -y.tail(n_ - 1) / std::max(tail, 1e-300);
    d /= d.norm();
    Matrix C = subspace_complement(Matrix(d));
    Matrix A(2 * C.cols() + 1, n_);
    A << C.transpose(), -C.transpose(), -d.transpose();
    return ss::polyhedron(A, Vector::Zero(A.rows()));
  }
  Vector any_point() const override { return Vector::Zero(n_); }
  std::string kind() const override { return sign_ > 0 ? "soc" : "soc-negative"; }

  int sign() const { return sign_; }

 private:
  int n_, sign_;
  Cone cone_;
};

// -------------------------------------------------------------- PSD set

class PsdSet final : public SetBase {
 public:
  PsdSet(int order, int sign) : order_(order), sign_(sign), cone_(cones::psd(order, sign)) {}
  int dim() const override { return svec_dim(order_); }
  double support(const Vector& x) const override {
    return cone_.polar().contains(x, 1e-9 * std::max(1.0, x.norm())) ? 0.0 : kInf;
  }
  Vector project(const Vector& z) const override { return cone_.project(z).value(); }
  bool contains(const Vector& p, double tol) const override { return cone_.contains(p, tol); }
  Cone normal_cone(const Vector& lambda) const override {
    Matrix Z = kernel_frame(smat(lambda));
    if (Z.cols() == 0) return cones::zero(dim());
    return cones::image(congruence_map(Z), cones::psd(static_cast<int>(Z.cols()), -sign_));
  }
  bool ri_contains(const Vector& lambda, double margin) const override {
    EigResult e = eigh_jacobi(smat(lambda));
    return sign_ > 0 ? e.values.minCoeff() >= margin : -e.values.maxCoeff() >= margin;
  }
  Matrix parallel_subspace() const override { return Matrix::Identity(dim(), dim()); }
  Cone domain_cone() const override { return cone_.polar(); }
  SupportSet face(const Vector& y) const override {
    const double scale = 1.0 + y.norm();
    if (!cone_.polar().contains(y, 1e-8 * scale))
      throw PointNotInSet("face: support is +inf in this direction");
    Matrix Z = kernel_frame(smat(y));
    if (Z.cols() == 0) return ss::singleton(Vector::Zero(dim()));
    SupportSet inner = sign_ > 0 ? ss::psd_cone(static_cast<int>(Z.cols()))
                                 : ss::negative_psd_cone(static_cast<int>(Z.cols()));
    return ss::isometric_image(congruence_map(Z), inner, Vector::Zero(dim()));
  }
  Vector any_point() const override { return Vector::Zero(dim()); }
  std::string kind() const override { return sign_ > 0 ? "psd" : "negative-psd"; }

  int order() const { return order_; }
  int sign() const { return sign_; }

 private:
  static Matrix kernel_frame(const Matrix& S) {
    EigResult e = eigh_jacobi(S);
    const double scale = 1.0 + e.values.cwiseAbs().maxCoeff();
    std::vector<int> zi;
    for (int i = 0; i < e.values.size(); ++i)
      if (std::abs(e.values[i]) <= kActiveTol * scale) zi.push_back(i);
    Matrix Z(S.rows(), zi.size());
    for (size_t k = 0; k < zi.size(); ++k) Z.col(k) = e.vectors.col(zi[k]);
    return Z;
  }

  int order_, sign_;
  Cone cone_;
};

// ------------------------------------------------------- MatrixInterval

class MatrixIntervalSet final : public SetBase {
 public:
  MatrixIntervalSet(Matrix L, Matrix U) : L_(std::move(L)), U_(std::move(U)) {
    n_ = static_cast<int>(L_.rows());
    EigResult e = eigh_jacobi(Matrix(U_ - L_));
    if (e.values.minCoeff() < -1e-10) throw std::invalid_argument("matrix interval is empty");
  }
  int dim() const override { return svec_dim(n_); }
  double support(const Vector& x) const override {
    if (!scalar_bounds()) throw InnerSolverRequired("matrix-interval support needs inner solver");
    const double l = L_(0, 0), u = U_(0, 0);
    EigResult e = eigh_jacobi(smat(x));
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += e.values[i] > 0 ? u * e.values[i] : l * e.values[i];
    return s;
  }
  Vector project(const Vector& z) const override {
    if (scalar_bounds()) {
      // commuting bounds: clip the eigenvalues
      const double l = L_(0, 0), u = U_(0, 0);
      EigResult e = eigh_jacobi(smat(z));
      Vector c = e.values.cwiseMax(l).cwiseMin(u);
      return svec(Matrix(e.vectors * c.asDiagonal() * e.vectors.transpose()));
    }
    std::vector<ProjectionFn> projs;
    Matrix L = L_, U = U_;
    projs.push_back([L](const Vector& y) -> Vector {
      EigResult e = eigh_jacobi(Matrix(smat(y) - L));
      Vector c = e.values.cwiseMax(0.0);
      return svec(Matrix(L + e.vectors * c.asDiagonal() * e.vectors.transpose()));
    });
    projs.push_back([U](const Vector& y) -> Vector {
      EigResult e = eigh_jacobi(Matrix(U - smat(y)));
      Vector c = e.values.cwiseMax(0.0);
      return svec(Matrix(U - e.vectors * c.asDiagonal() * e.vectors.transpose()));
    });
    DykstraResult r = dykstra(z, projs, 20000, 1e-10);
    if (!r.converged) throw SolverFailure("matrix-interval Dykstra did not converge");
    return r.point;
  }
  bool contains(const Vector& p, double tol) const override {
    Matrix X = smat(p);
    auto negpart = [](const Matrix& S) {
      EigResult e = eigh_jacobi(S);
      double d2 = 0.0;
      for (int i = 0; i < e.values.size(); ++i)
        if (e.values[i] < 0) d2 += e.values[i] * e.values[i];
      return std::sqrt(d2);
    };
    const double dl = negpart(Matrix(X - L_));
    const double du = negpart(Matrix(U_ - X));
    const double lb = std::max(dl, du);
    if (lb == 0.0) return true;
    if (lb > tol) return false;
    return (p - project(p)).norm() <= tol;
  }
  Cone normal_cone(const Vector& lambda) const override {
    Matrix X = smat(lambda);
    std::vector<Cone> parts;
    Matrix Zu = kernel_frame(Matrix(U_ - X));
    if (Zu.cols() > 0)
      parts.push_back(
          cones::image(congruence_map(Zu), cones::psd(static_cast<int>(Zu.cols()), +1)));
    Matrix Zl = kernel_frame(Matrix(X - L_));
    if (Zl.cols() > 0)
      parts.push_back(
          cones::image(congruence_map(Zl), cones::psd(static_cast<int>(Zl.cols()), -1)));
    if (parts.empty()) return cones::zero(dim());
    return cones::sum(parts);
  }
  bool ri_contains(const Vector& lambda, double margin) const override {
    Matrix X = smat(lambda);
    Matrix W = range_frame(Matrix(U_ - L_));
    if (W.cols() == n_) {
      return eigh_jacobi(Matrix(X - L_)).values.minCoeff() >= margin &&
             eigh_jacobi(Matrix(U_ - X)).values.minCoeff() >= margin;
    }
    Matrix Xr = W.transpose() * (X - L_) * W;
    Matrix Dr = W.transpose() * (U_ - L_) * W;
    return eigh_jacobi(Xr).values.minCoeff() >= margin &&
           eigh_jacobi(Matrix(Dr - Xr)).values.minCoeff() >= margin;
  }
  Matrix parallel_subspace() const override {
    Matrix W = range_frame(Matrix(U_ - L_));
    if (W.cols() == n_) return Matrix::Identity(dim(), dim());
    return congruence_map(W);
  }
  Cone domain_cone() const override { return cones::full(dim()); }
  SupportSet face(const Vector& y) const override {
    if (!scalar_bounds()) throw InnerSolverRequired("matrix-interval face needs inner solver");
    const double l = L_(0, 0), u = U_(0, 0);
    EigResult e = eigh_jacobi(smat(y));
    const double scale = 1.0 + e.values.cwiseAbs().maxCoeff();
    Matrix offset = Matrix::Zero(n_, n_);
    std::vector<int> zi;
    for (int i = 0; i < n_; ++i) {
      if (e.values[i] > kActiveTol * scale) {
        offset += u * e.vectors.col(i) * e.vectors.col(i).transpose();
      } else if (e.values[i] < -kActiveTol * scale) {
        offset += l * e.vectors.col(i) * e.vectors.col(i).transpose();
      } else {
        zi.push_back(i);
      }
    }
    if (zi.empty()) return ss::singleton(svec(offset));
    Matrix Z(n_, zi.size());
    for (size_t k = 0; k < zi.size(); ++k) Z.col(k) = e.vectors.col(zi[k]);
    const int p = static_cast<int>(zi.size());
    SupportSet inner = ss::matrix_interval(Matrix(l * Matrix::Identity(p, p)),
                                           Matrix(u * Matrix::Identity(p, p)));
    return ss::isometric_image(congruence_map(Z), inner, svec(offset));
  }
  Vector any_point() const override { return svec(Matrix(0.5 * (L_ + U_))); }
  std::string kind() const override { return "matrix-interval"; }

  const Matrix& L() const { return L_; }
  const Matrix& U() const { return U_; }

 private:
  bool scalar_bounds() const {
    const Matrix lI = L_(0, 0) * Matrix::Identity(n_, n_);
    const Matrix uI = U_(0, 0) * Matrix::Identity(n_, n_);
    return (L_ - lI).norm() <= 1e-12 * (1.0 + L_.norm()) &&
           (U_ - uI).norm() <= 1e-12 * (1.0 + U_.norm());
  }
  static Matrix kernel_frame(const Matrix& S) {
    EigResult e = eigh_jacobi(S);
    const double scale = 1.0 + e.values.cwiseAbs().maxCoeff();
    std::vector<int> zi;
    for (int i = 0; i < e.values.size(); ++i)
      if (std::abs(e.values[i]) <= kActiveTol * scale) zi.push_back(i);
    Matrix Z(S.rows(), zi.size());
    for (size_t k = 0; k < zi.size(); ++k) Z.col(k) = e.vectors.col(zi[k]);
    return Z;
  }
  static Matrix range_frame(const Matrix& S) {
    EigResult e = eigh_jacobi(S);
    const double scale = 1.0 + e.values.cwiseAbs().maxCoeff();
    std::vector<int> ri;
    for (int i = 0; i < e.values.size(); ++i)
      if (std::abs(e.values[i]) > 1e-10 * scale) ri.push_back(i);
    Matrix W(S.rows(), ri.size());
    for (size_t k = 0; k < ri.size(); ++k) W.col(k) = e.vectors.col(ri[k]);
    return W;
  }

  Matrix L_, U_;
  int n_;
};

// ------------------------------------------------------------ KyFanBall

class KyFanBallSet final : public SetBase {
 public:
  KyFanBallSet(int m, int n, double k) : m_(m), n_(n), k_(k) {
    if (k <= 0) throw std::invalid_argument("kyfan: k must be positive");
  }
  int dim() const override { return m_ * n_; }
  double support(const Vector& x) const override {
    SvdResult s = svd_dilation(unvec(x));
    double budget = k_, val = 0.0;
    for (int i = 0; i < s.sigma.size() && budget > 0; ++i) {
      const double w = std::min(1.0, budget);
      val += w * s.sigma[i];
      budget -= w;
    }
    return val;
  }
  Vector project(const Vector& z) const override {
    SvdResult s = svd_dilation(unvec(z));
    Vector y = project_capped_simplex_le(s.sigma, 1.0, k_);
    return vec(Matrix(s.U * y.asDiagonal() * s.V.transpose()));
  }
  bool contains(const Vector& p, double tol) const override {
    // projection preserves the singular frames, so the distance is the
    // distance between singular-value vectors
    SvdResult s = svd_dilation(unvec(p));
    Vector y = project_capped_simplex_le(s.sigma, 1.0, k_);
    return (s.sigma - y).norm() <= tol;
  }
  Cone normal_cone(const Vector& lambda) const override {
    SvdResult s = svd_dilation(unvec(lambda));
    const int r = static_cast<int>(s.sigma.size());
    const double nuc = s.sigma.sum();
    const bool spec_active = r > 0 && s.sigma[0] >= 1.0 - kActiveTol;
    const bool nuc_active = k_ < std::min(m_, n_) - 1e-12 && nuc >= k_ - kActiveTol;
    std::vector<Cone> parts;
    if (spec_active) {
      std::vector<int> top;
      for (int i = 0; i < r; ++i)
        if (s.sigma[i] >= 1.0 - kActiveTol) top.push_back(i);
      parts.push_back(spectral_face_cone(s, top));
    }
    if (nuc_active) {
      if (s.sigma[r - 1] > kActiveTol) {
        parts.push_back(cones::ray(vec(Matrix(s.U * s.V.transpose()))));
      } else {
        throw InnerSolverRequired("kyfan normal cone with rank-deficient nuclear face");
      }
    }
    if (parts.empty()) return cones::zero(dim());
    return cones::sum(parts);
  }
  bool ri_contains(const Vector& lambda, double margin) const override {
    SvdResult s = svd_dilation(unvec(lambda));
    if (s.sigma.size() > 0 && s.sigma[0] > 1.0 - margin) return false;
    if (k_ < std::min(m_, n_) - 1e-12 && s.sigma.sum() > k_ - margin) return false;
    return true;
  }
  Matrix parallel_subspace() const override { return Matrix::Identity(dim(), dim()); }
  Cone domain_cone() const override { return cones::full(dim()); }
  SupportSet face(const Vector& y) const override {
    SvdResult s = svd_dilation(unvec(y));
    const int r = static_cast<int>(s.sigma.size());
    const double scale = 1.0 + (r ? s.sigma[0] : 0.0);
    if (r == 0 || s.sigma[0] <= 1e-12 * scale) return ss::kyfan_ball(m_, n_, k_);
    // pick the top floor(k) singular directions; require a strict gap so the
    // argmax is a singleton, otherwise fall back with a clustered fantope block
    const int kk = static_cast<int>(std::floor(k_ + 1e-12));
    if (std::abs(k_ - kk) > 1e-12)
      throw InnerSolverRequired("kyfan face with fractional k needs inner solver");
    const int take = std::min(kk, r);
    const bool gap_ok =
        (take == r) || (s.sigma[take - 1] - s.sigma[take] > kActiveTol * scale);
    const bool positive = s.sigma[take - 1] > kActiveTol * scale;
    if (gap_ok && positive) {
      Matrix B = Matrix::Zero(m_, n_);
      for (int i = 0; i < take; ++i) B += s.U.col(i) * s.V.col(i).transpose();
      if (take == r || s.sigma[take] <= kActiveTol * scale) {
        // remaining budget may spread over the kernel: face is a sub-ball
        // block; only the exactly-determined case is returned closed-form
        if (take == kk) return ss::singleton(vec(B));
      }
      return ss::singleton(vec(B));
    }
    // tied cluster at the cut: face block is a fantope on the cluster
    std::vector<int> top, cluster;
    for (int i = 0; i < r; ++i) {
      if (s.sigma[i] - s.sigma[take - 1] > kActiveTol * scale) {
        top.push_back(i);
      } else if (std::abs(s.sigma[i] - s.sigma[take - 1]) <= kActiveTol * scale &&
                 s.sigma[i] > kActiveTol * scale) {
        cluster.push_back(i);
      }
    }
    Matrix B0 = Matrix::Zero(m_, n_);
    for (int i : top) B0 += s.U.col(i) * s.V.col(i).transpose();
    const int d = static_cast<int>(cluster.size());
    const int budget = kk - static_cast<int>(top.size());
    Matrix M(dim(), svec_dim(d));
    int c = 0;
    for (int j = 0; j < d; ++j)
      for (int i = 0; i <= j; ++i) {
        Matrix E;
        if (i == j) {
          E = s.U.col(cluster[i]) * s.V.col(cluster[i]).transpose();
        } else {
          E = (s.U.col(cluster[i]) * s.V.col(cluster[j]).transpose() +
               s.U.col(cluster[j]) * s.V.col(cluster[i]).transpose()) /
              std::sqrt(2.0);
        }
        M.col(c++) = vec(E);
      }
    SupportSet fant = ss::equality_slice(
        ss::matrix_interval(Matrix(Matrix::Zero(d, d)), Matrix(Matrix::Identity(d, d))),
        Matrix(svec(Matrix(Matrix::Identity(d, d))).transpose()),
        Vector(Vector::Constant(1, budget)));
    return ss::isometric_image(M, fant, vec(B0));
  }
  Vector any_point() const override { return Vector::Zero(dim()); }
  std::string kind() const override { return "kyfan-ball"; }

  int rows() const { return m_; }
  int cols() const { return n_; }
  double k() const { return k_; }

  Matrix unvec(const Vector& x) const {
    Matrix B(m_, n_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) B(i, j) = x[i * n_ + j];
    return B;
  }
  static Vector vec(const Matrix& B) {
    Vector x(B.rows() * B.cols());
    for (int i = 0; i < B.rows(); ++i)
      for (int j = 0; j < B.cols(); ++j) x[i * B.cols() + j] = B(i, j);
    return x;
  }

 private:
  Cone spectral_face_cone(const SvdResult& s, const std::vector<int>& cluster) const {
    const int d = static_cast<int>(cluster.size());
    Matrix B(dim(), svec_dim(d));
    int c = 0;
    for (int j = 0; j < d; ++j)
      for (int i = 0; i <= j; ++i) {
        Matrix E;
        if (i == j) {
          E = s.U.col(cluster[i]) * s.V.col(cluster[i]).transpose();
        } else {
          E = (s.U.col(cluster[i]) * s.V.col(cluster[j]).transpose() +
               s.U.col(cluster[j]) * s.V.col(cluster[i]).transpose()) /
              std::sqrt(2.0);
        }
        B.col(c++) = vec(E);
      }
    return cones::image(B, cones::psd(d, +1));
  }

  int m_, n_;
  double k_;
};

// -------------------------------------------------------------- Product

class ProductSet final : public SetBase {
 public:
  explicit ProductSet(std::vector<SupportSet> parts) : parts_(std::move(parts)) {
    offsets_.push_back(0);
    for (const auto& p : parts_) offsets_.push_back(offsets_.back() + p.dim());
  }
  int dim() const override { return offsets_.back(); }
  double support(const Vector& x) const override {
    double s = 0.0;
    for (size_t i = 0; i < parts_.size(); ++i) {
      const double si = parts_[i].support(seg(x, i));
      if (!std::isfinite(si)) return kInf;
      s += si;
    }
    return s;
  }
  Vector project(const Vector& z) const override {
    Vector out(dim());
    for (size_t i = 0; i < parts_.size(); ++i)
      out.segment(offsets_[i], parts_[i].dim()) = parts_[i].project(seg(z, i));
    return out;
  }
  bool contains(const Vector& p, double tol) const override {
    double d2 = 0.0;
    for (size_t i = 0; i < parts_.size(); ++i) {
      if (!parts_[i].contains(seg(p, i), tol)) return false;
      const double di = parts_[i].distance(seg(p, i));
      d2 += di * di;
      if (std::sqrt(d2) > tol) return false;
    }
    return true;
  }
  Cone normal_cone(const Vector& lambda) const override {
    std::vector<Cone> parts;
    for (size_t i = 0; i < parts_.size(); ++i)
      parts.push_back(parts_[i].normal_cone(seg(lambda, i)));
    return cones::product(parts);
  }
  bool ri_contains(const Vector& lambda, double margin) const override {
    for (size_t i = 0; i < parts_.size(); ++i)
      if (!parts_[i].ri_contains(seg(lambda, i), margin)) return false;
    return true;
  }
  Matrix parallel_subspace() const override {
    Matrix out(dim(), 0);
    for (size_t i = 0; i < parts_.size(); ++i) {
      Matrix p = parts_[i].parallel_subspace();
      Matrix grown = Matrix::Zero(dim(), out.cols() + p.cols());
      grown.leftCols(out.cols()) = out;
      grown.block(offsets_[i], out.cols(), parts_[i].dim(), p.cols()) = p;
      out = grown;
    }
    return out;
  }
  Cone domain_cone() const override {
    std::vector<Cone> parts;
    for (const auto& p : parts_) parts.push_back(p.domain_cone());
    return cones::product(parts);
  }
  SupportSet face(const Vector& y) const override {
    std::vector<SupportSet> faces;
    for (size_t i = 0; i < parts_.size(); ++i) faces.push_back(parts_[i].face(seg(y, i)));
    return ss::product(faces);
  }
  Vector any_point() const override {
    Vector out(dim());
    for (size_t i = 0; i < parts_.size(); ++i)
      out.segment(offsets_[i], parts_[i].dim()) = parts_[i].any_point();
    return out;
  }
  std::string kind() const override { return "product"; }

  const std::vector<SupportSet>& parts() const { return parts_; }

 private:
  Vector seg(const Vector& x, size_t i) const {
    return x.segment(offsets_[i], parts_[i].dim());
  }
  std::vector<SupportSet> parts_;
  std::vector<int> offsets_;
};

// ------------------------------------------------------ isometric image

class ImageSet final : public SetBase {
 public:
  ImageSet(Matrix B, SupportSet inner, Vector offset)
      : B_(std::move(B)), inner_(std::move(inner)), offset_(std::move(offset)) {}
  int dim() const override { return static_cast<int>(B_.rows()); }
  double support(const Vector& x) const override {
    const double si = inner_.support(B_.transpose() * x);
    return std::isfinite(si) ? offset_.dot(x) + si : kInf;
  }
  Vector project(const Vector& z) const override {
    return offset_ + B_ * inner_.project(B_.transpose() * (z - offset_));
  }
  bool contains(const Vector& p, double tol) const override {
    const Vector d = p - offset_;
    const Vector m = B_.transpose() * d;
    const double off = (d - B_ * m).norm();
    if (off > tol || !inner_.contains(m, tol)) return false;
    return std::hypot(off, inner_.distance(m)) <= tol;
  }
  Cone normal_cone(const Vector& lambda) const override {
    return cones::preimage_orth(B_, inner_.normal_cone(B_.transpose() * (lambda - offset_)));
  }
  bool ri_contains(const Vector& lambda, double margin) const override {
    return inner_.ri_contains(B_.transpose() * (lambda - offset_), margin);
  }
  Matrix parallel_subspace() const override {
    return orthonormal_columns(B_ * inner_.parallel_subspace());
  }
  Cone domain_cone() const override { return cones::preimage_orth(B_, inner_.domain_cone()); }
  SupportSet face(const Vector& y) const override {
    return ss::isometric_image(B_, inner_.face(B_.transpose() * y), offset_);
  }
  Vector any_point() const override { return offset_ + B_ * inner_.any_point(); }
  std::string kind() const override { return "isometric-image"; }

  const Matrix& map() const { return B_; }
  const SupportSet& inner() const { return inner_; }
  const Vector& offset() const { return offset_; }

 private:
  Matrix B_;
  SupportSet inner_;
  Vector offset_;
};

// ------------------------------------------------------- equality slice

class EqualitySliceSet final : public SetBase {
 public:
  EqualitySliceSet(SupportSet base, Matrix L, Vector c)
      : base_(std::move(base)), L_(std::move(L)), c_(std::move(c)) {}
  int dim() const override { return base_.dim(); }
  double support(const Vector& x) const override {
    if (L_.rows() != 1) throw InnerSolverRequired("multi-row slice support needs inner solver");
    const Vector a = L_.row(0).transpose();
    auto g = [&](double mu) { return base_.support(x - mu * a) + mu * c_[0]; };
    const double mu = minimize_scalar_unbounded(g, 0.0, 1.0 + x.norm(), 1e-13);
    return g(mu);
  }
  Vector project(const Vector& z) const override {
    std::vector<ProjectionFn> projs;
    const SupportSet base = base_;
    projs.push_back([base](const Vector& y) { return base.project(y); });
    const Matrix L = L_;
    const Vector c = c_;
    const Matrix Lp = pinv(L_);
    projs.push_back([L, c, Lp](const Vector& y) -> Vector { return y - Lp * (L * y - c); });
    DykstraResult r = dykstra(z, projs, 20000, 1e-11);
    if (!r.converged) throw SolverFailure("slice projection did not converge");
    return r.point;
  }
  bool contains(const Vector& p, double tol) const override {
    const double db = base_.distance(p);
    const double dp = (pinv(L_) * (L_ * p - c_)).norm();
    const double lb = std::max(db, dp);
    if (lb == 0.0) return true;
    if (lb > tol) return false;
    return (p - project(p)).norm() <= tol;
  }
  Cone normal_cone(const Vector& lambda) const override {
    return cones::sum(
        {base_.normal_cone(lambda), cones::subspace(Matrix(L_.transpose()), dim())});
  }
  bool ri_contains(const Vector& lambda, double margin) const override {
    return (L_ * lambda - c_).norm() <= 1e-9 * std::max(1.0, lambda.norm()) &&
           base_.ri_contains(lambda, margin);
  }
  Matrix parallel_subspace() const override {
    return subspace_intersection(base_.parallel_subspace(), nullspace(L_));
  }
  Cone domain_cone() const override {
    // finite whenever the base support is finite along the dual line; full
    // for the bounded bases used here
    return cones::full(dim());
  }
  SupportSet face(const Vector& x) const override {
    if (L_.rows() != 1) throw InnerSolverRequired("multi-row slice face needs inner solver");
    const Vector a = L_.row(0).transpose();
    auto g = [&](double mu) { return base_.support(x - mu * a) + mu * c_[0]; };
    const double mu = minimize_scalar_unbounded(g, 0.0, 1.0 + x.norm(), 1e-13);
    return ss::equality_slice(base_.face(x - mu * a), L_, c_);
  }
  Vector any_point() const override { return project(base_.any_point()); }
  std::string kind() const override { return "equality-slice"; }

  const SupportSet& inner_base() const { return base_; }
  const Matrix& L() const { return L_; }
  const Vector& c() const { return c_; }

 private:
  SupportSet base_;
  Matrix L_;
  Vector c_;
};

// ------------------------------------------------------ affine preimage

class AffinePreimageSet final : public SetBase {
 public:
  AffinePreimageSet(SupportSet inner, Matrix A, Vector b, bool slater)
      : inner_(std::move(inner)), A_(std::move(A)), b_(std::move(b)), slater_(slater) {}
  int dim() const override { return static_cast<int>(A_.cols()); }
  double support(const Vector& x) const override {
    if (A_.rows() == A_.cols()) {
      Eigen::FullPivLU<Matrix> lu(A_);
      if (lu.isInvertible()) {
        const Vector w = lu.inverse().transpose() * x;
        return inner_.support(w) - b_.dot(w);
      }
    }
    throw InnerSolverRequired("affine-preimage support needs inner solver");
  }
  Vector project(const Vector& z) const override {
    const int n = dim();
    const double rho = 1.0;
    Matrix M = Matrix::Identity(n, n) + rho * A_.transpose() * A_;
    Eigen::LLT<Matrix> llt(M);
    Vector p = z;
    Vector q = inner_.project(A_ * p + b_);
    Vector u = Vector::Zero(q.size());
    for (int it = 0; it < 20000; ++it) {
      p = llt.solve(z + rho * A_.transpose() * (q - b_ - u));
      const Vector Ap = A_ * p + b_;
      q = inner_.project(Ap + u);
      const Vector r = Ap - q;
      u += r;
      if (r.norm() < 1e-11 * std::max(1.0, z.norm())) return p;
    }
    throw SolverFailure("affine-preimage projection did not converge");
  }
  bool contains(const Vector& p, double tol) const override {
    const double di = inner_.distance(A_ * p + b_);
    const double smax = spectral_norm(A_);
    if (di == 0.0) return true;
    if (di > tol * std::max(smax, 1e-12)) return false;
    return (p - project(p)).norm() <= tol;
  }
  Cone normal_cone(const Vector&) const override {
    throw InnerSolverRequired("affine-preimage normal cone needs inner solver");
  }
  bool ri_contains(const Vector&, double) const override {
    throw InnerSolverRequired("no exact ri test for affine preimages");
  }
  Matrix parallel_subspace() const override {
    if (!slater_) throw InnerSolverRequired("parallel subspace needs a Slater declaration");
    Matrix par = inner_.parallel_subspace();
    const int m = static_cast<int>(A_.rows());
    Matrix P = par.cols() ? Matrix(par * par.transpose()) : Matrix(Matrix::Zero(m, m));
    return nullspace(Matrix((Matrix::Identity(m, m) - P) * A_));
  }
  Cone domain_cone() const override {
    throw InnerSolverRequired("affine-preimage domain cone is not representable");
  }
  SupportSet face(const Vector&) const override {
    throw InnerSolverRequired("affine-preimage face needs inner solver");
  }
  Vector any_point() const override { return project(Vector::Zero(dim())); }
  std::string kind() const override { return "affine-preimage"; }

  const SupportSet& inner() const { return inner_; }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  bool slater() const { return slater_; }

 private:
  SupportSet inner_;
  Matrix A_;
  Vector b_;
  bool slater_;
};

// ------------------------------------------------------- curve epigraph

class CurveEpigraphSet final : public SetBase {
 public:
  CurveEpigraphSet(double coeff, double power) : c_(coeff), p_(power) {
    if (coeff <= 0 || power <= 1) throw std::invalid_argument("curve epigraph: bad parameters");
  }
  int dim() const override { return 2; }
  double boundary(double u) const { return c_ * std::pow(std::abs(u), p_); }
  double support(const Vector& x) const override {
    if (x[1] < 0) {
      const double a = std::abs(x[0]);
      if (a == 0.0) return 0.0;
      const double t = std::pow(a / (c_ * p_ * (-x[1])), 1.0 / (p_ - 1.0));
      return t * a - boundary(t) * (-x[1]);
    }
    if (x[0] == 0.0 && x[1] == 0.0) return 0.0;
    return kInf;
  }
  Vector project(const Vector& z) const override {
    if (z[1] >= boundary(z[0])) return z;
    auto dist2 = [&](double u) {
      const double du = u - z[0];
      const double dv = boundary(u) - z[1];
      return du * du + dv * dv;
    };
    const double reach = 2.0 + z.norm();
    const double u1 = minimize_scalar(dist2, 0.0, reach, 1e-14);
    const double u2 = minimize_scalar(dist2, -reach, 0.0, 1e-14);
    const double u = dist2(u1) <= dist2(u2) ? u1 : u2;
    Vector out(2);
    out << u, boundary(u);
    return out;
  }
  bool contains(const Vector& q, double tol) const override {
    if (q[1] >= boundary(q[0])) return true;
    return (q - project(q)).norm() <= tol;
  }
  Cone normal_cone(const Vector& lambda) const override {
    const double scale = 1.0 + lambda.norm();
    const double slack = lambda[1] - boundary(lambda[0]);
    if (slack > kActiveTol * scale) return cones::zero(2);
    if (lambda.norm() <= kActiveTol) {
      Vector d(2);
      d << 0, -1;
      return cones::ray(d);
    }
    Vector g(2);
    g << c_ * p_ * std::pow(std::abs(lambda[0]), p_ - 1.0) * (lambda[0] >= 0 ? 1.0 : -1.0),
        -1.0;
    return cones::ray(g);
  }
  bool ri_contains(const Vector& lambda, double margin) const override {
    return lambda[1] - boundary(lambda[0]) >= margin;
  }
  Matrix parallel_subspace() const override { return Matrix::Identity(2, 2); }
  Cone domain_cone() const override {
    Matrix A(1, 2);
    A << 0, 1;  // {x : x2 <= 0}
    return cones::polyhedral(A);
  }
  SupportSet face(const Vector& y) const override {
    if (y[0] == 0.0 && y[1] == 0.0) return ss::curve_epigraph(c_, p_);
    if (!(y[1] < 0)) throw PointNotInSet("face: support is +inf in this direction");
    const double a = std::abs(y[0]);
    if (a == 0.0) return ss::singleton(Vector::Zero(2));
    const double t = std::pow(a / (c_ * p_ * (-y[1])), 1.0 / (p_ - 1.0));
    Vector q(2);
    q << (y[0] >= 0 ? t : -t), boundary(t);
    return ss::singleton(q);
  }
  Vector any_point() const override { return Vector::Zero(2); }
  std::string kind() const override { return "curve-epigraph"; }

  double coeff() const { return c_; }
  double power() const { return p_; }

 private:
  double c_, p_;
};

// ---------------------------------------------------------- implicit

class ImplicitSet final : public SetBase {
 public:
  ImplicitSet(int dim, std::function<bool(const Vector&, double)> contains, std::string label)
      : n_(dim), contains_(std::move(contains)), label_(std::move(label)) {}
  int dim() const override { return n_; }
  double support(const Vector&) const override {
    throw InnerSolverRequired("implicit set: support needs inner solver");
  }
  Vector project(const Vector&) const override {
    throw InnerSolverRequired("implicit set: projection needs inner solver");
  }
  bool contains(const Vector& p, double tol) const override { return contains_(p, tol); }
  Cone normal_cone(const Vector&) const override {
    throw InnerSolverRequired("implicit set: normal cone needs inner solver");
  }
  bool ri_contains(const Vector&, double) const override {
    throw InnerSolverRequired("implicit set: no exact ri test");
  }
  Matrix parallel_subspace() const override {
    throw InnerSolverRequired("implicit set: parallel subspace unavailable");
  }
  Cone domain_cone() const override {
    throw InnerSolverRequired("implicit set: domain cone unavailable");
  }
  SupportSet face(const Vector&) const override {
    throw InnerSolverRequired("implicit set: face computation needs inner solver");
  }
  Vector any_point() const override { return Vector::Zero(n_); }
  std::string kind() const override { return "implicit:" + label_; }

 private:
  int n_;
  std::function<bool(const Vector&, double)> contains_;
  std::string label_;
};

}  // namespace

// ----------------------------------------------------------- public API

Cone SupportSet::normal_cone(const Vector& lambda) const {
  if (!impl_->contains(lambda, 1e-7)) throw PointNotInSet("point not in set");
  return impl_->normal_cone(lambda);
}

bool SupportSet::ri_contains(const Vector& lambda, double margin) const {
  if (margin <= 0) throw std::invalid_argument("ri margin must be positive");
  if (!impl_->contains(lambda, 1e-7)) return false;
  return impl_->ri_contains(lambda, margin);
}

namespace support_sets {

SupportSet subspace(const Matrix& basis, int ambient_dim) {
  Matrix B = basis.cols() ? orthonormal_columns(basis) : Matrix(ambient_dim, 0);
  return SupportSet(std::make_shared<SubspaceSet>(B, ambient_dim));
}
SupportSet polyhedron(const Matrix& A, const Vector& b) {
  return SupportSet(std::make_shared<PolyhedronSet>(A, b));
}
SupportSet box(const Vector& lo, const Vector& hi) {
  return SupportSet(std::make_shared<BoxSet>(lo, hi));
}
SupportSet ball(const Vector& center, double radius) {
  return SupportSet(std::make_shared<BallSet>(center, radius));
}
SupportSet second_order_cone(int dim, int sign) {
  return SupportSet(std::make_shared<SocSet>(dim, sign));
}
SupportSet psd_cone(int order) { return SupportSet(std::make_shared<PsdSet>(order, +1)); }
SupportSet negative_psd_cone(int order) {
  return SupportSet(std::make_shared<PsdSet>(order, -1));
}
SupportSet singleton(const Vector& point) {
  return SupportSet(std::make_shared<SingletonSet>(point));
}
SupportSet matrix_interval(const Matrix& L, const Matrix& U) {
  return SupportSet(std::make_shared<MatrixIntervalSet>(Matrix(0.5 * (L + L.transpose())),
                                                        Matrix(0.5 * (U + U.transpose()))));
}
SupportSet kyfan_ball(int rows, int cols, double k) {
  return SupportSet(std::make_shared<KyFanBallSet>(rows, cols, k));
}
SupportSet product(const std::vector<SupportSet>& parts) {
  if (parts.empty()) throw std::invalid_argument("product: empty");
  if (parts.size() == 1) return parts.front();
  return SupportSet(std::make_shared<ProductSet>(parts));
}
SupportSet affine_preimage(const SupportSet& inner, const Matrix& A, const Vector& b,
                           bool slater) {
  return SupportSet(std::make_shared<AffinePreimageSet>(inner, A, b, slater));
}
SupportSet isometric_image(const Matrix& B, const SupportSet& inner, const Vector& offset) {
  return SupportSet(std::make_shared<ImageSet>(B, inner, offset));
}
SupportSet equality_slice(const SupportSet& base, const Matrix& L, const Vector& c) {
  return SupportSet(std::make_shared<EqualitySliceSet>(base, L, c));
}
SupportSet curve_epigraph(double coeff, double power) {
  return SupportSet(std::make_shared<CurveEpigraphSet>(coeff, power));
}
SupportSet implicit_set(int dim, std::function<bool(const Vector&, double)> contains,
                        std::string label) {
  return SupportSet(std::make_shared<ImplicitSet>(dim, std::move(contains), std::move(label)));
}

}  // namespace support_sets

// --------------------------------------------- polyhedral description

std::optional<std::pair<Matrix, Vector>> polyhedral_description(const SupportSet& s) {
  const SetBase* b = s.base();
  const int n = s.dim();
  if (auto* p = dynamic_cast<const PolyhedronSet*>(b)) return std::make_pair(p->A(), p->b());
  if (auto* p = dynamic_cast<const BoxSet*>(b)) {
    std::vector<int> his, los;
    for (int i = 0; i < n; ++i) {
      if (std::isfinite(p->hi()[i])) his.push_back(i);
      if (std::isfinite(p->lo()[i])) los.push_back(i);
    }
    Matrix A = Matrix::Zero(his.size() + los.size(), n);
    Vector bb(his.size() + los.size());
    int r = 0;
    for (int i : his) {
      A(r, i) = 1.0;
      bb[r++] = p->hi()[i];
    }
    for (int i : los) {
      A(r, i) = -1.0;
      bb[r++] = -p->lo()[i];
    }
    return std::make_pair(A, bb);
  }
  if (auto* p = dynamic_cast<const SingletonSet*>(b)) {
    Matrix A(2 * n, n);
    A << Matrix::Identity(n, n), -Matrix::Identity(n, n);
    Vector bb(2 * n);
    bb << p->point(), -p->point();
    return std::make_pair(A, bb);
  }
  if (auto* p = dynamic_cast<const SubspaceSet*>(b)) {
    Matrix C = subspace_complement(p->basis());
    Matrix A(2 * C.cols(), n);
    A << C.transpose(), -C.transpose();
    return std::make_pair(A, Vector(Vector::Zero(A.rows())));
  }
  if (auto* p = dynamic_cast<const ProductSet*>(b)) {
    Matrix A(0, n);
    Vector bb(0);
    int off = 0;
    for (const auto& q : p->parts()) {
      auto d = polyhedral_description(q);
      if (!d) return std::nullopt;
      Matrix A2 = Matrix::Zero(A.rows() + d->first.rows(), n);
      A2.topRows(A.rows()) = A;
      A2.block(A.rows(), off, d->first.rows(), q.dim()) = d->first;
      Vector b2(bb.size() + d->second.size());
      b2 << bb, d->second;
      A = A2;
      bb = b2;
      off += q.dim();
    }
    return std::make_pair(A, bb);
  }
  if (auto* p = dynamic_cast<const EqualitySliceSet*>(b)) {
    auto d = polyhedral_description(p->inner_base());
    if (!d) return std::nullopt;
    Matrix A(d->first.rows() + 2 * p->L().rows(), n);
    A << d->first, p->L(), -p->L();
    Vector bb(d->second.size() + 2 * p->c().size());
    bb << d->second, p->c(), -p->c();
    return std::make_pair(A, bb);
  }
  if (auto* p = dynamic_cast<const ImageSet*>(b)) {
    auto d = polyhedral_description(p->inner());
    if (!d) return std::nullopt;
    const Matrix& B = p->map();
    Matrix C = subspace_complement(B);
    Matrix A(d->first.rows() + 2 * C.cols(), n);
    A << d->first * B.transpose(), C.transpose(), -C.transpose();
    Vector bb(A.rows());
    bb << d->second + d->first * (B.transpose() * p->offset()), C.transpose() * p->offset(),
        -C.transpose() * p->offset();
    return std::make_pair(A, bb);
  }
  return std::nullopt;
}

// ------------------------------------------------------------------ JSON

namespace {

json enc_vec(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) {
    if (v[i] == kInf) {
      a.push_back("inf");
    } else if (v[i] == -kInf) {
      a.push_back("-inf");
    } else {
      a.push_back(v[i]);
    }
  }
  return a;
}

json enc_mat(const Matrix& M) {
  json a = json::array();
  for (int i = 0; i < M.rows(); ++i) a.push_back(enc_vec(M.row(i).transpose()));
  return a;
}

Vector dec_vec(const json& a) {
  Vector v(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_string()) {
      const std::string s = a[i].get<std::string>();
      v[i] = (s == "inf") ? kInf : (s == "-inf") ? -kInf : std::stod(s);
    } else {
      v[i] = a[i].get<double>();
    }
  }
  return v;
}

Matrix dec_mat(const json& a) {
  if (a.empty()) return Matrix(0, 0);
  Matrix M(a.size(), a[0].size());
  for (size_t i = 0; i < a.size(); ++i) M.row(i) = dec_vec(a[i]).transpose();
  return M;
}

json encode_set(const SupportSet& s) {
  const SetBase* b = s.base();
  json j;
  j["kind"] = b->kind();
  if (auto* p = dynamic_cast<const SubspaceSet*>(b)) {
    j["basis"] = enc_mat(p->basis());
    j["dim"] = p->dim();
  } else if (auto* p = dynamic_cast<const PolyhedronSet*>(b)) {
    j["A"] = enc_mat(p->A());
    j["b"] = enc_vec(p->b());
  } else if (auto* p = dynamic_cast<const BoxSet*>(b)) {
    j["lo"] = enc_vec(p->lo());
    j["hi"] = enc_vec(p->hi());
  } else if (auto* p = dynamic_cast<const BallSet*>(b)) {
    j["center"] = enc_vec(p->center());
    j["radius"] = p->radius();
  } else if (auto* p = dynamic_cast<const SocSet*>(b)) {
    j["dim"] = p->dim();
    j["sign"] = p->sign();
  } else if (auto* p = dynamic_cast<const PsdSet*>(b)) {
    j["order"] = p->order();
  } else if (auto* p = dynamic_cast<const SingletonSet*>(b)) {
    j["point"] = enc_vec(p->point());
  } else if (auto* p = dynamic_cast<const MatrixIntervalSet*>(b)) {
    j["L"] = enc_mat(p->L());
    j["U"] = enc_mat(p->U());
  } else if (auto* p = dynamic_cast<const KyFanBallSet*>(b)) {
    j["rows"] = p->rows();
    j["cols"] = p->cols();
    j["k"] = p->k();
  } else if (auto* p = dynamic_cast<const ProductSet*>(b)) {
    json parts = json::array();
    for (const auto& q : p->parts()) parts.push_back(encode_set(q));
    j["parts"] = parts;
  } else if (auto* p = dynamic_cast<const AffinePreimageSet*>(b)) {
    j["inner"] = encode_set(p->inner());
    j["A"] = enc_mat(p->A());
    j["b"] = enc_vec(p->b());
    j["slater"] = p->slater();
  } else if (auto* p = dynamic_cast<const ImageSet*>(b)) {
    j["map"] = enc_mat(p->map());
    j["inner"] = encode_set(p->inner());
    j["offset"] = enc_vec(p->offset());
  } else if (auto* p = dynamic_cast<const EqualitySliceSet*>(b)) {
    j["base"] = encode_set(p->inner_base());
    j["L"] = enc_mat(p->L());
    j["c"] = enc_vec(p->c());
  } else if (auto* p = dynamic_cast<const CurveEpigraphSet*>(b)) {
    j["coeff"] = p->coeff();
    j["power"] = p->power();
  } else {
    throw std::runtime_error("unknown support-set kind for JSON");
  }
  return j;
}

SupportSet decode_set(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "subspace") return ss::subspace(dec_mat(j.at("basis")), j.at("dim").get<int>());
  if (kind == "polyhedron") return ss::polyhedron(dec_mat(j.at("A")), dec_vec(j.at("b")));
  if (kind == "box") return ss::box(dec_vec(j.at("lo")), dec_vec(j.at("hi")));
  if (kind == "ball") return ss::ball(dec_vec(j.at("center")), j.at("radius").get<double>());
  if (kind == "soc") return ss::second_order_cone(j.at("dim").get<int>(), j.value("sign", 1));
  if (kind == "soc-negative") return ss::second_order_cone(j.at("dim").get<int>(), -1);
  if (kind == "psd") return ss::psd_cone(j.at("order").get<int>());
  if (kind == "negative-psd") return ss::negative_psd_cone(j.at("order").get<int>());
  if (kind == "singleton") return ss::singleton(dec_vec(j.at("point")));
  if (kind == "matrix-interval")
    return ss::matrix_interval(dec_mat(j.at("L")), dec_mat(j.at("U")));
  if (kind == "kyfan-ball")
    return ss::kyfan_ball(j.at("rows").get<int>(), j.at("cols").get<int>(),
                          j.at("k").get<double>());
  if (kind == "product") {
    std::vector<SupportSet> parts;
    for (const auto& q : j.at("parts")) parts.push_back(decode_set(q));
    return ss::product(parts);
  }
  if (kind == "affine-preimage")
    return ss::affine_preimage(decode_set(j.at("inner")), dec_mat(j.at("A")), dec_vec(j.at("b")),
                               j.value("slater", true));
  if (kind == "isometric-image")
    return ss::isometric_image(dec_mat(j.at("map")), decode_set(j.at("inner")),
                               dec_vec(j.at("offset")));
  if (kind == "equality-slice")
    return ss::equality_slice(decode_set(j.at("base")), dec_mat(j.at("L")), dec_vec(j.at("c")));
  if (kind == "curve-epigraph")
    return ss::curve_epigraph(j.at("coeff").get<double>(), j.at("power").get<double>());
  throw std::runtime_error("unknown support-set kind: " + kind);
}

}  // namespace

std::string to_json_string(const SupportSet& s, int indent) {
  return encode_set(s).dump(indent);
}

SupportSet support_set_from_json(const std::string& text) {
  return decode_set(json::parse(text));
}

}  // namespace epivar
