#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "epivar/cone.hpp"
#include "epivar/linalg.hpp"

namespace epivar {

// Signals that an operation has no closed form for the variant and would
// need the iterative inner solver.
struct InnerSolverRequired : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PointNotInSet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class SupportSet;

class SetBase {
 public:
  virtual ~SetBase() = default;
  virtual int dim() const = 0;
  virtual double support(const Vector& x) const = 0;
  virtual Vector project(const Vector& z) const = 0;
  virtual bool contains(const Vector& p, double tol) const = 0;
  virtual Cone normal_cone(const Vector& lambda) const = 0;
  virtual bool ri_contains(const Vector& lambda, double margin) const = 0;
  virtual Matrix parallel_subspace() const = 0;
  virtual Cone domain_cone() const = 0;
  virtual SupportSet face(const Vector& y) const = 0;
  virtual Vector any_point() const = 0;
  virtual std::string kind() const = 0;
};

// Closed convex set Q, the support set of a sublinear outer function
// sigma_Q. Immutable; all operations are pure.
class SupportSet {
 public:
  SupportSet() = default;
  explicit SupportSet(std::shared_ptr<const SetBase> impl) : impl_(std::move(impl)) {}

  bool valid() const { return impl_ != nullptr; }
  int dim() const { return impl_->dim(); }

  // sigma_Q(x) = sup_{q in Q} <q, x>; +inf allowed.
  double support(const Vector& x) const { return impl_->support(x); }

  Vector project(const Vector& z) const { return impl_->project(z); }
  double distance(const Vector& p) const { return (p - impl_->project(p)).norm(); }
  bool contains(const Vector& p, double tol = 1e-9) const { return impl_->contains(p, tol); }

  // Cone of normals at lambda in Q; throws PointNotInSet otherwise.
  Cone normal_cone(const Vector& lambda) const;
  Cone tangent_cone(const Vector& lambda) const { return normal_cone(lambda).polar(); }

  // Quantitative relative-interior test: the ball of radius `margin`
  // inside aff(Q) around lambda lies in Q. Throws on margin <= 0.
  bool ri_contains(const Vector& lambda, double margin = 1e-7) const;

  // Subspace parallel to aff(Q).
  Matrix parallel_subspace() const { return impl_->parallel_subspace(); }

  // Closure of dom sigma_Q (a cone).
  Cone domain_cone() const { return impl_->domain_cone(); }

  // Exposed face argmax_{q in Q} <q, y>; throws if sigma_Q(y) = +inf.
  SupportSet face(const Vector& y) const { return impl_->face(y); }

  Vector any_point() const { return impl_->any_point(); }
  std::string kind() const { return impl_->kind(); }

  const SetBase* base() const { return impl_.get(); }

 private:
  std::shared_ptr<const SetBase> impl_;
};

namespace support_sets {

SupportSet subspace(const Matrix& basis, int ambient_dim);
SupportSet polyhedron(const Matrix& A, const Vector& b);  // {p : A p <= b}
SupportSet box(const Vector& lo, const Vector& hi);       // entries may be +-inf
SupportSet ball(const Vector& center, double radius);
SupportSet second_order_cone(int dim, int sign = +1);
SupportSet psd_cone(int order);
SupportSet negative_psd_cone(int order);
SupportSet singleton(const Vector& point);
SupportSet matrix_interval(const Matrix& L, const Matrix& U);
// {B in R^{m x n} : ||B||_2 <= 1, ||B||_* <= k}; svec-free row-major layout.
SupportSet kyfan_ball(int rows, int cols, double k);
SupportSet product(const std::vector<SupportSet>& parts);
// {p : A p + b in inner}; membership/projection via the inner solver;
// support and normal cones only for recognizable structure.
SupportSet affine_preimage(const SupportSet& inner, const Matrix& A, const Vector& b,
                           bool slater = true);
// {base-point + B m : m in inner} with B orthonormal; exact support/faces.
SupportSet isometric_image(const Matrix& B, const SupportSet& inner, const Vector& offset);
// base ∩ {p : L p = c}; closed-form support via the 1-D dual when L has one
// row. Encodes as an affine preimage.
SupportSet equality_slice(const SupportSet& base, const Matrix& L, const Vector& c);
// {x in R^2 : x_2 >= coeff * |x_1|^power}, power > 1; the curved epigraph
// used by the failure example for the tangent-path property.
SupportSet curve_epigraph(double coeff, double power);

// Membership-only set from a callback (reduction-chart cones whose coupling
// has no closed-form variant). Not serializable.
SupportSet implicit_set(int dim, std::function<bool(const Vector&, double)> contains,
                        std::string label);

}  // namespace support_sets

// (A, b) with the set equal to {p : A p <= b}, for the polyhedral variants
// (polyhedron, box, singleton, subspace, and their products/images/slices).
std::optional<std::pair<Matrix, Vector>> polyhedral_description(const SupportSet& s);

// JSON wire format: {"kind": ..., payload...}; matrices row-major, infinities
// as the strings "inf" / "-inf".
std::string to_json_string(const SupportSet& s, int indent = -1);
SupportSet support_set_from_json(const std::string& text);

}  // namespace epivar
