#include "epivar/smooth_map.hpp"

#include <stdexcept>

namespace epivar {

Matrix SmoothMap::jacobian(const Vector& x) const {
  if (jac_) return jac_(x);
  // central differences, Richardson-extrapolated once
  const double h0 = 1e-5 * (1.0 + x.norm());
  Matrix J(m_, n_);
  for (int j = 0; j < n_; ++j) {
    Vector e = Vector::Zero(n_);
    e[j] = 1.0;
    auto central = [&](double h) -> Vector {
      return (value_(x + h * e) - value_(x - h * e)) / (2.0 * h);
    };
    const Vector c1 = central(h0);
    const Vector c2 = central(h0 / 2.0);
    J.col(j) = (4.0 * c2 - c1) / 3.0;
  }
  return J;
}

Vector SmoothMap::second_directional(const Vector& x, const Vector& h) const {
  if (second_dir_) return second_dir_(x, h);
  const double hn = h.norm();
  if (hn == 0.0) return Vector::Zero(m_);
  const Vector u = h / hn;
  const double t0 = 1e-3 * (1.0 + x.norm());
  auto central2 = [&](double t) -> Vector {
    return (value_(x + t * u) - 2.0 * value_(x) + value_(x - t * u)) / (t * t);
  };
  const Vector c1 = central2(t0);
  const Vector c2 = central2(t0 / 2.0);
  return hn * hn * (4.0 * c2 - c1) / 3.0;
}

Vector SmoothMap::second_bilinear(const Vector& x, const Vector& h1, const Vector& h2) const {
  if (second_bil_) return second_bil_(x, h1, h2);
  // polarization identity
  return 0.25 * (second_directional(x, h1 + h2) - second_directional(x, h1 - h2));
}

Vector taylor_residual(const SmoothMap& F, const Vector& x, const Vector& h, double t) {
  if (t <= 0) throw std::invalid_argument("taylor_residual: t must be positive");
  return (F.value(x + t * h) - F.value(x) - t * (F.jacobian(x) * h) -
          0.5 * t * t * F.second_directional(x, h)) /
         (t * t);
}

Matrix preimage_of_subspace(const SmoothMap& F, const Vector& x, const Matrix& S_basis) {
  const Matrix J = F.jacobian(x);
  const int m = F.codomain_dim();
  Matrix P = (S_basis.cols() == 0) ? Matrix::Zero(m, m) : Matrix(S_basis * S_basis.transpose());
  return nullspace(Matrix((Matrix::Identity(m, m) - P) * J), 1e-8);
}

namespace maps {

SmoothMap identity(int n) {
  return SmoothMap(
      n, n, [](const Vector& x) { return x; },
      [n](const Vector&) { return Matrix::Identity(n, n); },
      [n](const Vector&, const Vector&) { return Vector::Zero(n); },
      [n](const Vector&, const Vector&, const Vector&) { return Vector::Zero(n); },
      /*analytic=*/true);
}

SmoothMap linear(const Matrix& A) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  return SmoothMap(
      n, m, [A](const Vector& x) -> Vector { return A * x; },
      [A](const Vector&) { return A; },
      [m](const Vector&, const Vector&) { return Vector::Zero(m); },
      [m](const Vector&, const Vector&, const Vector&) { return Vector::Zero(m); },
      /*analytic=*/true);
}

SmoothMap affine(const Matrix& A, const Vector& b) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  return SmoothMap(
      n, m, [A, b](const Vector& x) -> Vector { return A * x + b; },
      [A](const Vector&) { return A; },
      [m](const Vector&, const Vector&) { return Vector::Zero(m); },
      [m](const Vector&, const Vector&, const Vector&) { return Vector::Zero(m); },
      /*analytic=*/true);
}

std::map<std::string, Factory>& registry() {
  static std::map<std::string, Factory> r;
  return r;
}

void register_map(const std::string& name, Factory f) { registry()[name] = std::move(f); }

SmoothMap lookup(const std::string& name, const std::string& params_json) {
  auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown map: " + name);
  return it->second(params_json);
}

}  // namespace maps

}  // namespace epivar
