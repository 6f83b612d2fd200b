#include "epivar/instances.hpp"

namespace epivar::instances {

namespace ss = support_sets;

DecomposablePair l1_pair() {
  DecomposablePair p;
  p.name = "l1";
  p.Q = ss::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  p.F = maps::identity(2);
  p.basepoint = Vector::Zero(2);
  p.weak_convexity = 0.0;
  p.tau = 1.0;
  p.prox_oracle.moreau_set = p.Q;
  p.usotp = UsotpStatus::kDeclared;  // polyhedral support set
  return p;
}

DecomposablePair euclid_pair() {
  DecomposablePair p;
  p.name = "euclid-norm";
  p.Q = ss::ball(Vector::Zero(2), 1.0);
  p.F = maps::identity(2);
  p.basepoint = Vector::Zero(2);
  p.weak_convexity = 0.0;
  p.tau = 1.0;
  p.prox_oracle.moreau_set = p.Q;
  p.usotp = UsotpStatus::kDeclared;  // the sphere is a smooth compact surface
  return p;
}

DecomposablePair saddle_demo_pair() {
  DecomposablePair p;
  p.name = "saddle-demo";
  p.Q = ss::product(
      {ss::singleton(Vector::Ones(1)),
       ss::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0))});
  p.F = SmoothMap(
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
  p.basepoint = Vector::Zero(2);
  p.weak_convexity = 2.0;  // x1^2 - x2^2 + |x1| + ||x||^2 is convex
  p.tau = 0.25;
  ProxOracle::Split split;
  split.f = [](const Vector& y) { return y[0] * y[0] - y[1] * y[1]; };
  split.grad_f = [](const Vector& y) -> Vector {
    Vector g(2);
    g << 2 * y[0], -2 * y[1];
    return g;
  };
  split.grad_lipschitz = 2.0;
  split.g = [](const Vector& y) { return std::abs(y[0]); };
  split.prox_g = [](const Vector& y, double t) -> Vector {
    Vector p2 = y;
    p2[0] = (y[0] > t) ? y[0] - t : (y[0] < -t ? y[0] + t : 0.0);
    return p2;
  };
  p.prox_oracle.split = split;
  p.usotp = UsotpStatus::kDeclared;  // polyhedral support set
  return p;
}

DecomposablePair counterexample_pair() {
  DecomposablePair p;
  p.name = "counterexample";
  p.Q = ss::curve_epigraph(2.0 / 3.0, 1.5);
  p.F = maps::identity(2);
  p.basepoint = Vector::Zero(2);
  p.weak_convexity = 0.0;  // support functions are convex
  p.tau = 1.0;
  p.prox_oracle.moreau_set = p.Q;
  p.usotp = UsotpStatus::kUnknown;  // refuted by the tangent-path probe
  return p;
}

DecomposablePair l1_quad_pair() {
  DecomposablePair p;
  p.name = "l1-quad";
  p.Q = ss::product({ss::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)),
                     ss::singleton(Vector::Ones(1))});
  p.F = SmoothMap(
      2, 3,
      [](const Vector& x) -> Vector {
        Vector f(3);
        f << x[0], x[1], x.squaredNorm();
        return f;
      },
      [](const Vector& x) -> Matrix {
        Matrix J(3, 2);
        J << 1, 0, 0, 1, 2 * x[0], 2 * x[1];
        return J;
      },
      [](const Vector&, const Vector& h) -> Vector {
        Vector s(3);
        s << 0, 0, 2 * h.squaredNorm();
        return s;
      },
      [](const Vector&, const Vector& a, const Vector& b) -> Vector {
        Vector s(3);
        s << 0, 0, 2 * a.dot(b);
        return s;
      },
      /*analytic=*/true);
  p.basepoint = Vector::Zero(2);
  p.weak_convexity = 0.0;  // convex
  p.tau = 0.5;
  ProxOracle::Split split;
  split.f = [](const Vector& y) { return y.squaredNorm(); };
  split.grad_f = [](const Vector& y) -> Vector { return 2.0 * y; };
  split.grad_lipschitz = 2.0;
  split.g = [](const Vector& y) { return y.cwiseAbs().sum(); };
  split.prox_g = [](const Vector& y, double t) -> Vector {
    Vector p2(y.size());
    for (int i = 0; i < y.size(); ++i)
      p2[i] = (y[i] > t) ? y[i] - t : (y[i] < -t ? y[i] + t : 0.0);
    return p2;
  };
  p.prox_oracle.split = split;
  p.usotp = UsotpStatus::kDeclared;  // polyhedral support set
  return p;
}

}  // namespace epivar::instances
