#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epivar/instances.hpp"
#include "epivar/quotients.hpp"

using namespace epivar;
namespace ss = epivar::support_sets;

namespace {
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

std::vector<GraphPoint> counterexample_sequence(const DecomposablePair& pair, int kmax) {
  // x^k = (1/k^3, -1/k), lambda^k = (1/k^4, 2/(3 k^6)), geometric k ladder
  std::vector<GraphPoint> seq;
  for (double k = 2.0; k <= kmax; k *= 2.0) {
    GraphPoint gp;
    gp.x = v2(1.0 / (k * k * k), -1.0 / k);
    gp.lambda = v2(1.0 / std::pow(k, 4), 2.0 / (3.0 * std::pow(k, 6)));
    gp.v = gp.lambda;  // F = id
    gp.stationarity_residual = 0.0;
    gp.complementarity_residual =
        std::abs(gp.lambda.dot(pair.F.value(gp.x)) - pair.Q.support(pair.F.value(gp.x)));
    seq.push_back(gp);
  }
  return seq;
}
}  // namespace

TEST_CASE("first-order estimates") {
  DecomposablePair l1 = instances::l1_pair();
  CHECK(subderivative_estimate(l1, Vector::Zero(2), v2(1, -2)) ==
        doctest::Approx(3.0).epsilon(1e-3));

  DecomposablePair sd = instances::saddle_demo_pair();
  CHECK(subderivative_estimate(sd, Vector::Zero(2), v2(1, 1)) ==
        doctest::Approx(1.0).epsilon(1e-2));
  CHECK(subderivative_estimate(sd, Vector::Zero(2), v2(0, 1)) ==
        doctest::Approx(0.0).epsilon(1e-2));
  // cross-check against sigma_Q(DF(x) h)
  Rng rng(4);
  for (int s = 0; s < 6; ++s) {
    Vector h = rng.unit_vector(2);
    const double est = subderivative_estimate(sd, Vector::Zero(2), h);
    const double formula = subderivative(sd, Vector::Zero(2), h);
    CHECK(est == doctest::Approx(formula).epsilon(1e-2));
  }
}

TEST_CASE("second quotient arithmetic") {
  // quadratic phi(x) = ||x||^2 via Q = {I}-singleton trick: use the l1-quad
  // pair restricted to the smooth part is easier by hand: phi = x1^2 - x2^2 + |x1|
  DecomposablePair sd = instances::saddle_demo_pair();
  // along the smooth axis h = (0,1), v = 0: quotient is exactly -2 for all t
  for (double t : {1e-1, 1e-3, 1e-5}) {
    CHECK(second_quotient(sd, Vector::Zero(2), Vector::Zero(2), v2(0, 1), t) ==
          doctest::Approx(-2.0));
  }
  // l1 at 0 along the active ray: exactly 0
  DecomposablePair l1 = instances::l1_pair();
  CHECK(second_quotient(l1, Vector::Zero(2), v2(1, 0), v2(1, 0), 0.37) == doctest::Approx(0.0));
}

TEST_CASE("basic second-subderivative estimates match the closed forms") {
  DecomposablePair sd = instances::saddle_demo_pair();
  QuotientEstimate e1 = basic_second_subderivative_estimate(sd, Vector::Zero(2), v2(0, 1));
  CHECK(e1.finite());
  CHECK(e1.value == doctest::Approx(-2.0).epsilon(1e-2));

  QuotientEstimate e2 = basic_second_subderivative_estimate(sd, Vector::Zero(2), v2(1, 0));
  CHECK(e2.divergent());

  DecomposablePair l1 = instances::l1_pair();
  QuotientEstimate e3 = basic_second_subderivative_estimate(l1, v2(1, 0), v2(1, 0));
  CHECK(e3.finite());
  CHECK(std::abs(e3.value) <= 1e-3);
}

TEST_CASE("graph sampler produces valid graph points") {
  Rng rng(9);
  DecomposablePair l1 = instances::l1_pair();
  auto pts = graph_sampler(l1, v2(1, 0), 1e-2, 16, rng);
  CHECK(pts.size() >= 8);
  for (const auto& gp : pts) {
    CHECK(gp.stationarity_residual <= 1e-8);
    CHECK(gp.complementarity_residual <= 1e-8);
    // the active pattern keeps x on the first axis
    CHECK(std::abs(gp.x[1]) < 1e-9);
  }

  // interior subgradient: sampled multipliers stay equal to v
  DecomposablePair en = instances::euclid_pair();
  auto pts2 = graph_sampler(en, v2(0.5, 0), 1e-2, 8, rng);
  CHECK(!pts2.empty());
  for (const auto& gp : pts2) CHECK((gp.lambda - gp.v).norm() < 1e-10);
}

TEST_CASE("strict estimator: saddle-demo matches the closed form") {
  DecomposablePair sd = instances::saddle_demo_pair();
  QuotientEstimate e = strict_second_subderivative_estimate(sd, Vector::Zero(2), v2(0, 1));
  CHECK(e.finite());
  CHECK(e.value == doctest::Approx(-2.0).epsilon(1e-2));

  QuotientEstimate off = strict_second_subderivative_estimate(sd, Vector::Zero(2), v2(1, 0));
  CHECK(off.divergent());
}

TEST_CASE("strict estimator: l1 boundary direction set") {
  DecomposablePair l1 = instances::l1_pair();
  // on aff(C) = R x {0}: finite 0 both ways (the strict chain rule equality)
  for (Vector h : {v2(1, 0), v2(-1, 0)}) {
    QuotientEstimate e = strict_second_subderivative_estimate(l1, v2(1, 0), h);
    CHECK(e.finite());
    CHECK(std::abs(e.value) <= 1e-3);
  }
  // off aff(C): divergent
  QuotientEstimate e2 = strict_second_subderivative_estimate(l1, v2(1, 0), v2(0, 1));
  CHECK(e2.divergent());
  // the basic estimate explodes on the backward direction, strict does not
  QuotientEstimate basic = basic_second_subderivative_estimate(l1, v2(1, 0), v2(-1, 0));
  CHECK(basic.divergent());
}

TEST_CASE("monotonicity: strict <= basic on every tested direction") {
  DecomposablePair sd = instances::saddle_demo_pair();
  Rng rng(13);
  for (int s = 0; s < 6; ++s) {
    Vector h = rng.unit_vector(2);
    QuotientEstimate b = basic_second_subderivative_estimate(sd, Vector::Zero(2), h);
    QuotientEstimate st = strict_second_subderivative_estimate(sd, Vector::Zero(2), h);
    if (b.finite() && st.finite()) CHECK(st.value <= b.value + 1e-6);
  }
}

TEST_CASE("counterexample: strict estimate vanishes along the paper sequence") {
  DecomposablePair cx = instances::counterexample_pair();
  auto seq = counterexample_sequence(cx, 1 << 20);  // k up to ~10^6
  int finite_zero = 0;
  Rng rng(17);
  std::vector<Vector> dirs = {v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)};
  while (dirs.size() < 8) dirs.push_back(rng.unit_vector(2));
  for (const auto& h : dirs) {
    QuotientEstimate e = strict_second_subderivative_estimate(cx, Vector::Zero(2), h, {}, seq);
    if (e.finite() && std::abs(e.value) <= 1e-3) ++finite_zero;
  }
  CHECK(finite_zero >= 8);

  // hessian decay along the sequence (the closed-form rate is 2/k) and the
  // quotient at the smooth points reproduces the Hessian quadratic form
  double prev = kInf;
  for (double k = 2.0; k <= 256.0; k *= 2.0) {
    Vector x = v2(1.0 / (k * k * k), -1.0 / k);
    Matrix H(2, 2);
    const double a = std::abs(x[0]);
    H << 2 * a / (x[1] * x[1]), -2 * a * x[0] / std::pow(x[1], 3),
        -2 * a * x[0] / std::pow(x[1], 3), 2 * std::pow(a, 3) / std::pow(x[1], 4);
    const double nrm = spectral_norm(H);
    CHECK(nrm < prev);
    prev = nrm;
    Vector lam = v2(1.0 / std::pow(k, 4), 2.0 / (3.0 * std::pow(k, 6)));
    Vector h = v2(0, 1);
    const double q = second_quotient(cx, x, lam, h, 1e-4 / k);
    CHECK(q == doctest::Approx(h.dot(H * h)).epsilon(1e-2));
  }
}

TEST_CASE("path inequality on the box instance") {
  // Q = [-1,1]^2, x = (s, 0), lambda = (1,0), v = w = (0,1), delta = 2, M = 0
  SupportSet Q = ss::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  for (double s : {0.3, 1.0, 2.5}) {
    for (double t : {1e-1, 1e-2, 1e-3}) {
      PathBoundCheck c = support_quotient_lower_bound_check(Q, v2(s, 0), v2(1, 0), v2(0, 1),
                                                            v2(0, 1), 2.0, 0.0, t);
      CHECK(c.holds);
      CHECK(c.quotient == doctest::Approx(2.0 / t));
    }
  }
  // hypothesis violation: <v, w> <= 0
  CHECK_THROWS_AS(support_quotient_lower_bound_check(Q, v2(1, 0), v2(1, 0), v2(0, -1), v2(0, 1),
                                                     2.0, 0.0, 0.1),
                  std::invalid_argument);
}

TEST_CASE("support strict subderivative is a cone indicator") {
  // ball at an interior multiplier: graph sequences pin x = 0 (subgradients
  // at x != 0 are unit vectors), so every nonzero direction diverges and the
  // indicator cone is {0}
  SupportSet ball = ss::ball(Vector::Zero(2), 1.0);
  ConeIndicatorReport r1 =
      strict_subderivative_of_support_is_cone_indicator(ball, v2(0.3, 0.1), 8);
  CHECK(r1.passed);
  CHECK(r1.failures == 0);
  CHECK(r1.divergent_directions == 8);

  // box at (1,0): 0 on aff(N) = R x {0}, divergent off it
  SupportSet box = ss::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  ConeIndicatorReport r2 = strict_subderivative_of_support_is_cone_indicator(box, v2(1, 0), 8);
  CHECK(r2.passed);
  CHECK(r2.zero_directions >= 2);
  CHECK(r2.divergent_directions >= 2);
}

TEST_CASE("strict chain lower bound report") {
  DecomposablePair sd = instances::saddle_demo_pair();
  // on aff(C): equality with the quadratic term
  ChainBoundReport on = strict_chain_lower_bound_check(sd, v2(1, 0), v2(0, 1));
  CHECK(on.in_aff_critical);
  CHECK(on.equality_ok);
  CHECK(!on.bound_violated);
  CHECK(on.quadratic_term == doctest::Approx(-2.0));

  // off aff(N): the estimator diverges, the bound is vacuous
  ChainBoundReport off = strict_chain_lower_bound_check(sd, v2(1, 0), v2(1, 0));
  CHECK(!off.in_aff_critical);
  CHECK(off.estimator_class == QuotientClass::kDivergent);
  CHECK(!off.bound_violated);
}
