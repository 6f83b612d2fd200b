#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epivar/instances.hpp"
#include "epivar/prox.hpp"

using namespace epivar;
namespace ss = epivar::support_sets;

namespace {
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("prox closed forms") {
  // phi = ||.||_2: z = (3,4), tau = 1 -> radial shrink to (2.4, 3.2)
  DecomposablePair en = instances::euclid_pair();
  ProxResult r = prox(en, 1.0, v2(3, 4));
  CHECK(r.point[0] == doctest::Approx(2.4));
  CHECK(r.point[1] == doctest::Approx(3.2));
  CHECK(r.route == "moreau");

  // phi = iota_SOC: prox is the projection
  DecomposablePair soc;
  soc.name = "soc-indicator";
  soc.Q = ss::second_order_cone(3, -1);  // sigma_{-SOC} = iota_{SOC}
  soc.F = maps::identity(3);
  soc.basepoint = Vector::Zero(3);
  soc.prox_oracle.projection_set = ss::second_order_cone(3, +1);
  Vector z(3);
  z << -1, 0, 0;
  CHECK(prox(soc, 0.7, z).point.norm() < 1e-12);

  // soft threshold via the split route of the l1 pair
  DecomposablePair l1 = instances::l1_pair();
  ProxResult s = prox(l1, 1.0, v2(3, 0.2));
  CHECK(s.point[0] == doctest::Approx(2.0));
  CHECK(s.point[1] == doctest::Approx(0.0));

  // refusal when tau * rho >= 1
  DecomposablePair sd = instances::saddle_demo_pair();
  CHECK_THROWS_AS(prox(sd, 0.6, v2(0, 0)), std::invalid_argument);
}

TEST_CASE("prox subproblem stationarity and the envelope identity") {
  DecomposablePair sd = instances::saddle_demo_pair();
  Rng rng(3);
  for (int s = 0; s < 10; ++s) {
    Vector z = 0.3 * rng.normal_vector(2);
    ProxResult r = prox(sd, sd.tau, z);
    // v = (z - p)/tau must be a subgradient at p
    MultiplierResult m = multipliers(sd, r.point, r.v);
    CHECK(m.residual < 1e-8);
    // envelope value matches phi(p) + ||p - z||^2 / (2 tau)
    const double direct = sd.eval(r.point) + (r.point - z).squaredNorm() / (2 * sd.tau);
    CHECK(r.envelope == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("moreau gradient identity") {
  DecomposablePair l1 = instances::l1_pair();
  Rng rng(5);
  for (int s = 0; s < 12; ++s) {
    Vector z = 2.0 * rng.normal_vector(2);
    ProxResult r = prox(l1, 1.0, z);
    const double h = 1e-6 * (1.0 + z.norm());
    Vector g(2);
    for (int i = 0; i < 2; ++i) {
      Vector e = Vector::Zero(2);
      e[i] = h;
      g[i] = (moreau_envelope(l1, 1.0, Vector(z + e)) -
              moreau_envelope(l1, 1.0, Vector(z - e))) /
             (2 * h);
    }
    CHECK((g - r.v).norm() < 1e-6);
  }
}

TEST_CASE("prox jacobian: soft threshold pattern and kink detection") {
  DecomposablePair l1 = instances::l1_pair();
  ProxJacobianReport r = prox_jacobian_fd(l1, 1.0, v2(3, 0.2));
  CHECK(r.differentiable);
  CHECK(r.jacobian(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(r.jacobian(1, 1)) < 1e-6);

  // differentiable interior point with both coordinates shrunk to zero
  ProxJacobianReport r2 = prox_jacobian_fd(l1, 1.0, v2(0.5, 0.3));
  CHECK(r2.differentiable);
  CHECK(r2.jacobian.norm() < 1e-6);

  // kink at |z_i| = tau, in either coordinate
  ProxJacobianReport r3 = prox_jacobian_fd(l1, 1.0, v2(1, 1));
  CHECK(!r3.differentiable);
  CHECK(r3.one_sided_mismatch > 1e-3);
  ProxJacobianReport r4 = prox_jacobian_fd(l1, 1.0, v2(1, 0.5));
  CHECK(!r4.differentiable);  // z_1 sits exactly on the threshold
}

TEST_CASE("prox jacobian eigenvalue bounds on convex instances") {
  Rng rng(7);
  for (DecomposablePair pair : {instances::l1_pair(), instances::euclid_pair()}) {
    for (int s = 0; s < 10; ++s) {
      Vector z = 2.0 * rng.normal_vector(2);
      ProxJacobianReport r = prox_jacobian_fd(pair, 1.0, z);
      if (!r.differentiable) continue;
      CHECK(r.lower_violation <= 1e-6);
      CHECK(r.upper_violation <= 1e-6);
    }
  }
}

TEST_CASE("equivalence suite: interior vs boundary multipliers") {
  Rng rng(11);

  // l1 at interior subgradient: all items true
  DecomposablePair l1i = instances::l1_pair();
  l1i.basepoint = Vector::Zero(2);
  EquivalenceReport all_true = equivalence_suite(l1i, v2(0.5, -0.25), 1.0, rng);
  CHECK(all_true.all_true);
  CHECK(all_true.consistent);

  // l1 at boundary subgradient: all items false
  EquivalenceReport all_false = equivalence_suite(l1i, v2(1, 0), 1.0, rng);
  CHECK(all_false.all_false);
  CHECK(all_false.consistent);

  // euclid norm at an interior subgradient
  DecomposablePair en = instances::euclid_pair();
  EquivalenceReport en_rep = equivalence_suite(en, v2(0.5, 0), 1.0, rng);
  CHECK(en_rep.all_true);

  // saddle-demo: lambda = (1,0) in ri({1} x [-1,1])
  DecomposablePair sd = instances::saddle_demo_pair();
  EquivalenceReport sd_rep = equivalence_suite(sd, v2(1, 0), sd.tau, rng);
  CHECK(sd_rep.all_true);
}

TEST_CASE("envelope convergence probe") {
  // f_k(x) = |x - 1/k| -> |x|: sup gap <= 1/k on the grid
  std::vector<EnvelopeProbeFunction> fs;
  for (int k = 1; k <= 6; ++k)
    fs.push_back({[k](const Vector& x) { return std::abs(x[0] - 1.0 / k); }, 1});
  EnvelopeProbeFunction lim{[](const Vector& x) { return std::abs(x[0]); }, 1};
  std::vector<Vector> grid;
  for (double x = -2.0; x <= 2.0; x += 0.25) grid.push_back(Vector::Constant(1, x));
  EnvelopeProbeReport r = envelope_convergence_probe(fs, lim, 1.0, grid);
  CHECK(r.monotone_trend);
  for (size_t k = 0; k < fs.size(); ++k) CHECK(r.sup_gaps[k] <= 1.0 / (k + 1) + 1e-8);

  // constant sequence: gap 0
  EnvelopeProbeReport r0 = envelope_convergence_probe({lim, lim}, lim, 1.0, grid);
  CHECK(r0.final_gap < 1e-9);
}

TEST_CASE("appendix identity: envelope equals the conjugate form on a grid") {
  // env_tau phi(x) = ||x||^2/(2 tau) - (phi + ||.||^2/(2 tau))^*(x / tau),
  // checked for phi = |.| in 1-D by brute-force conjugate evaluation
  DecomposablePair l1;
  l1.name = "abs";
  l1.Q = ss::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
  l1.F = maps::identity(1);
  l1.basepoint = Vector::Zero(1);
  l1.prox_oracle.moreau_set = l1.Q;
  const double tau = 0.7;
  auto conj = [&](double w) {
    double best = -kInf;
    for (double y = -4.0; y <= 4.0; y += 1e-3)
      best = std::max(best, w * y - std::abs(y) - y * y / (2 * tau));
    return best;
  };
  for (double x = -1.5; x <= 1.5; x += 0.3) {
    const double lhs = moreau_envelope(l1, tau, Vector::Constant(1, x));
    const double rhs = x * x / (2 * tau) - conj(x / tau);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-3));
  }
}
