#pragma once

#include <functional>
#include <map>
#include <string>

#include "epivar/linalg.hpp"

namespace epivar {

// C^2 map F : R^n -> R^m with exact derivatives where supplied and a
// central-difference fallback otherwise. F(xbar) = 0 normalization is the
// responsibility of the construction site.
class SmoothMap {
 public:
  using ValueFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;
  using SecondDirFn = std::function<Vector(const Vector&, const Vector&)>;
  using SecondBilFn = std::function<Vector(const Vector&, const Vector&, const Vector&)>;

  SmoothMap() = default;
  SmoothMap(int domain_dim, int codomain_dim, ValueFn value, JacobianFn jacobian = nullptr,
            SecondDirFn second_directional = nullptr, SecondBilFn second_bilinear = nullptr,
            bool analytic = false)
      : n_(domain_dim),
        m_(codomain_dim),
        value_(std::move(value)),
        jac_(std::move(jacobian)),
        second_dir_(std::move(second_directional)),
        second_bil_(std::move(second_bilinear)),
        analytic_(analytic) {}

  bool valid() const { return static_cast<bool>(value_); }
  int domain_dim() const { return n_; }
  int codomain_dim() const { return m_; }
  bool analytic() const { return analytic_; }

  Vector value(const Vector& x) const { return value_(x); }
  Matrix jacobian(const Vector& x) const;
  // D^2F(x)[h,h] as an m-vector
  Vector second_directional(const Vector& x, const Vector& h) const;
  Vector second_bilinear(const Vector& x, const Vector& h1, const Vector& h2) const;

  bool has_analytic_jacobian() const { return static_cast<bool>(jac_); }

 private:
  int n_ = 0, m_ = 0;
  ValueFn value_;
  JacobianFn jac_;
  SecondDirFn second_dir_;
  SecondBilFn second_bil_;
  bool analytic_ = false;
};

// (F(x + t h) - F(x) - t DF(x) h - 0.5 t^2 D^2F(x)[h,h]) / t^2
Vector taylor_residual(const SmoothMap& F, const Vector& x, const Vector& h, double t);

// Orthonormal basis of DF(x)^{-1} span(S) = { h : DF(x) h in span(S) }.
Matrix preimage_of_subspace(const SmoothMap& F, const Vector& x, const Matrix& S_basis);

namespace maps {

SmoothMap identity(int n);
SmoothMap linear(const Matrix& A);
SmoothMap affine(const Matrix& A, const Vector& b);

// registry for the CLI; keys: identity, soc-slice, matrix-interval, kyfan,
// saddle-demo, counterexample (populated by the scenario catalog)
using Factory = std::function<SmoothMap(const std::string& params_json)>;
std::map<std::string, Factory>& registry();
void register_map(const std::string& name, Factory f);
SmoothMap lookup(const std::string& name, const std::string& params_json = "{}");

}  // namespace maps

}  // namespace epivar
