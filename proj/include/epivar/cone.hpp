#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "epivar/linalg.hpp"
#include "epivar/rng.hpp"

namespace epivar {

class Cone;

// Closed convex cone with structural operations. Polar, negation and
// lineality are computed symbolically per variant, so dualities like
// polar(polar(K)) = K hold to machine precision.
class ConeBase {
 public:
  virtual ~ConeBase() = default;
  virtual int dim() const = 0;
  virtual bool contains(const Vector& x, double tol) const = 0;
  virtual std::optional<Vector> project(const Vector& z) const = 0;
  virtual Cone polar() const = 0;
  virtual Cone negate() const = 0;
  virtual Matrix lineality() const = 0;
  virtual std::optional<Matrix> affine_hull() const = 0;
  // A point of ri(K); zero only when K = {0}. nullopt when not representable.
  virtual std::optional<Vector> ri_point() const = 0;
  // Basis when the cone is a linear subspace.
  virtual std::optional<Matrix> as_subspace() const = 0;
  // H-representation {p : H p <= 0} when available.
  virtual std::optional<Matrix> as_halfspaces() const = 0;
  virtual std::string describe() const = 0;
};

class Cone {
 public:
  Cone() = default;
  explicit Cone(std::shared_ptr<const ConeBase> impl) : impl_(std::move(impl)) {}

  bool valid() const { return impl_ != nullptr; }
  int dim() const { return impl_->dim(); }
  bool contains(const Vector& x, double tol = 1e-9) const { return impl_->contains(x, tol); }
  std::optional<Vector> project(const Vector& z) const { return impl_->project(z); }
  std::optional<double> distance(const Vector& z) const {
    auto p = project(z);
    if (!p) return std::nullopt;
    return (z - *p).norm();
  }
  Cone polar() const { return impl_->polar(); }
  Cone negate() const { return impl_->negate(); }
  Matrix lineality() const { return impl_->lineality(); }
  std::optional<Matrix> affine_hull() const { return impl_->affine_hull(); }
  std::optional<Vector> ri_point() const { return impl_->ri_point(); }
  std::optional<Matrix> as_subspace() const { return impl_->as_subspace(); }
  std::optional<Matrix> as_halfspaces() const { return impl_->as_halfspaces(); }
  std::string describe() const { return impl_->describe(); }

  const ConeBase* base() const { return impl_.get(); }

 private:
  std::shared_ptr<const ConeBase> impl_;
};

namespace cones {

Cone zero(int dim);
Cone full(int dim);
Cone ray(const Vector& direction);
Cone subspace(const Matrix& basis_cols, int ambient_dim);
Cone polyhedral(const Matrix& A);              // {p : A p <= 0}
Cone generated(const Matrix& generators);      // {V y : y >= 0}, columns
Cone second_order(int dim, int sign = +1);     // {x : sign * x_0 >= ||x_1:||}
Cone psd(int order, int sign = +1);            // svec coordinates
// B must have orthonormal columns; the cone {B y : y in inner}.
Cone image(const Matrix& B, const Cone& inner);
// {v : B^T v in inner}, B with orthonormal columns.
Cone preimage_orth(const Matrix& B, const Cone& inner);
// {h : M h in inner}, general M; membership and lineality only.
Cone preimage(const Matrix& M, const Cone& inner);
Cone product(const std::vector<Cone>& parts);
Cone sum(const std::vector<Cone>& parts);
Cone intersection(const std::vector<Cone>& parts);

}  // namespace cones

// ---- cone-sum certificate --------------------------------------------
//
// Decides R(A) - B = R^m through ker(A^T) \cap (-B)^polar = {0}.

enum class CertVerdict { kHolds, kFails, kInconclusive };

struct FullSpaceCert {
  CertVerdict verdict = CertVerdict::kInconclusive;
  Vector witness;       // nonzero element of the polar intersection when kFails
  std::string method;   // "subspace" | "lp" | "alternating-projections"
  std::string detail;
};

FullSpaceCert cone_sum_is_full_space(const Matrix& A_range, const Cone& B, Rng& rng);

// Shared helper: does the cone K intersect the subspace span(N) only at 0?
FullSpaceCert subspace_cone_intersection_trivial(const Matrix& N_basis, const Cone& K, Rng& rng);

}  // namespace epivar
