#include "epivar/quotients.hpp"

#include <cmath>

#include "epivar/opt.hpp"
#include "epivar/prox.hpp"

namespace epivar {

std::vector<double> quotient_t_grid(const EstimatorConfig& cfg) {
  std::vector<double> grid;
  const double lo = std::log10(cfg.t_min);
  const double hi = std::log10(cfg.t_max);
  const int steps = static_cast<int>(std::round((hi - lo) * cfg.points_per_decade));
  for (int j = 0; j <= steps; ++j)
    grid.push_back(std::pow(10.0, hi - static_cast<double>(j) / cfg.points_per_decade));
  return grid;
}

double second_quotient(const DecomposablePair& pair, const Vector& x, const Vector& v,
                       const Vector& h, double t) {
  if (t <= 0) throw std::invalid_argument("second_quotient: t must be positive");
  const double fx = pair.eval(x);
  if (!std::isfinite(fx)) throw std::invalid_argument("second_quotient: phi(x) = +inf");
  const double fxt = pair.eval(x + t * h);
  return (fxt - fx - t * v.dot(h)) / (0.5 * t * t);
}

namespace {

std::vector<Vector> perturbation_net(int n, int count, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "perturbation-net");
  std::vector<Vector> net;
  net.push_back(Vector::Zero(n));  // the unperturbed direction
  for (int i = 0; i < count; ++i) net.push_back(rng.unit_vector(n));
  return net;
}

struct DecadeAggregate {
  std::vector<double> minima;  // per decade, large t first; +inf when nothing finite
  int samples = 0;

  explicit DecadeAggregate(int decades) : minima(decades, kInf) {}
  void add(int decade, double value) {
    ++samples;
    if (value < minima[decade]) minima[decade] = value;
  }
};

int decade_count(const EstimatorConfig& cfg);

int decade_of(double t, const EstimatorConfig& cfg) {
  const double hi = std::log10(cfg.t_max);
  int d = static_cast<int>(std::floor(hi - std::log10(t) + 1e-9));
  return std::min(decade_count(cfg) - 1, std::max(0, d));
}

int decade_count(const EstimatorConfig& cfg) {
  return static_cast<int>(std::round(std::log10(cfg.t_max) - std::log10(cfg.t_min))) + 1;
}

QuotientEstimate classify(const Vector& h, DecadeAggregate agg) {
  QuotientEstimate out;
  out.direction = h;
  out.decade_minima = agg.minima;
  out.samples = agg.samples;
  const int D = static_cast<int>(agg.minima.size());

  // divergence: growth by >= 5x per decade over the last three steps,
  // or nothing finite at the small-t end
  bool all_inf_tail = !std::isfinite(agg.minima[D - 1]) && !std::isfinite(agg.minima[D - 2]);
  if (all_inf_tail) {
    out.classification = QuotientClass::kDivergent;
    out.detail = "quotients are +inf near t = 0";
    return out;
  }
  int growth_steps = 0;
  for (int d = D - 1; d >= 1; --d) {
    const double a = agg.minima[d - 1], b = agg.minima[d];
    if (std::isfinite(a) && a > 0 && (b >= 5.0 * a || !std::isfinite(b))) {
      ++growth_steps;
    } else {
      break;
    }
  }
  if (growth_steps >= 3) {
    out.classification = QuotientClass::kDivergent;
    out.detail = "growth >= 5x per decade over >= 3 decades";
    return out;
  }

  // finite: stabilization over the two smallest decades
  const double m_last = agg.minima[D - 1];
  const double m_prev = agg.minima[D - 2];
  if (std::isfinite(m_last) && std::isfinite(m_prev)) {
    const double value = std::min(m_last, m_prev);
    const double spread = std::abs(m_last - m_prev);
    if (spread <= std::max(1e-3, 1e-2 * std::abs(value))) {
      out.classification = QuotientClass::kFinite;
      out.value = value;
      return out;
    }
  }
  out.classification = QuotientClass::kInconclusive;
  out.detail = "between the finite-spread and divergence criteria";
  return out;
}

void accumulate_quotients(const DecomposablePair& pair, const Vector& x, const Vector& v,
                          const Vector& h, const EstimatorConfig& cfg,
                          const std::vector<Vector>& net, DecadeAggregate& agg,
                          double t_scale = 1.0) {
  const double fx = pair.eval(x);
  if (!std::isfinite(fx)) return;
  for (double tg : quotient_t_grid(cfg)) {
    const int d = decade_of(tg, cfg);  // bucket by grid position, not absolute t
    const double t = tg * t_scale;
    for (const auto& u : net) {
      const Vector ht = h + t * u;
      const double fxt = pair.eval(x + t * ht);
      const double q = (fxt - fx - t * v.dot(ht)) / (0.5 * t * t);
      if (std::isfinite(q)) agg.add(d, q);
      else ++agg.samples;
    }
  }
}

}  // namespace

double subderivative_estimate(const DecomposablePair& pair, const Vector& x, const Vector& h,
                              const EstimatorConfig& cfg) {
  const double fx = pair.eval(x);
  if (!std::isfinite(fx)) throw std::invalid_argument("subderivative: phi(x) = +inf");
  auto net = perturbation_net(static_cast<int>(h.size()), cfg.perturbations, cfg.seed);
  double best = kInf;
  // the liminf surrogate scans small t only; restrict to the smallest decades
  for (double t : quotient_t_grid(cfg)) {
    if (t > 1e-3) continue;
    for (const auto& u : net) {
      const Vector ht = h + t * u;
      const double q = (pair.eval(x + t * ht) - fx) / t;
      best = std::min(best, q);
    }
  }
  return best;
}

QuotientEstimate basic_second_subderivative_estimate(const DecomposablePair& pair,
                                                     const Vector& vbar, const Vector& h,
                                                     const EstimatorConfig& cfg) {
  DecadeAggregate agg(decade_count(cfg));
  auto net = perturbation_net(static_cast<int>(h.size()), cfg.perturbations, cfg.seed);
  accumulate_quotients(pair, pair.basepoint, vbar, h, cfg, net, agg);
  return classify(h, agg);
}

std::vector<GraphPoint> graph_sampler(const DecomposablePair& pair, const Vector& vbar,
                                      double radius, int count, Rng& rng) {
  std::vector<GraphPoint> out;
  const Vector xbar = pair.basepoint;
  const double tau = pair.tau;
  const int n = pair.F.domain_dim();

  // (a) prox-based: z = xbar + tau vbar + delta u
  const Vector zbar = xbar + tau * vbar;
  for (int s = 0; s < count && static_cast<int>(out.size()) < count; ++s) {
    const double delta = radius * (0.25 + 0.75 * rng.uniform());
    const Vector z = zbar + delta * rng.unit_vector(n);
    try {
      ProxResult pr = prox(pair, tau, z);
      GraphPoint gp = make_graph_point(pair, pr.point, pr.v);
      if (gp.stationarity_residual <= 1e-8 * (1.0 + pr.v.norm()) &&
          gp.complementarity_residual <= 1e-8)
        out.push_back(gp);
    } catch (const std::exception&) {
      // no prox route or inner-solver failure: the face sampler below remains
      break;
    }
  }

  // (b) interior-face construction: x with F(x) in ri(N_Q(lambda_bar))
  MultiplierResult mu = multipliers(pair, xbar, vbar);
  if (mu.feasible) {
    try {
      Cone N = pair.Q.normal_cone(mu.lambda);
      auto dir = N.ri_point();
      const bool subspace_cone = N.as_subspace().has_value();
      if (dir) {
        const int want = count - static_cast<int>(out.size());
        for (int s = 0; s < want; ++s) {
          const double scale = radius * (0.2 + 0.8 * rng.uniform());
          // for subspace normal cones both signs stay in the relative interior
          const double sign = (subspace_cone && (s % 2)) ? -1.0 : 1.0;
          const Vector target = sign * scale * (*dir) / std::max(1.0, dir->norm());
          // Gauss-Newton on F(x) = target from a jittered start
          Vector x = xbar + 0.1 * radius * rng.unit_vector(n);
          bool ok = false;
          for (int it = 0; it < 60; ++it) {
            const Vector r = pair.F.value(x) - target;
            if (r.norm() <= 1e-12 * (1.0 + target.norm())) {
              ok = true;
              break;
            }
            x -= pinv(pair.F.jacobian(x)) * r;
          }
          if (!ok) continue;
          GraphPoint gp;
          gp.x = x;
          gp.lambda = mu.lambda;
          gp.v = pair.F.jacobian(x).transpose() * mu.lambda;
          gp.stationarity_residual = 0.0;
          gp.complementarity_residual =
              std::abs(mu.lambda.dot(pair.F.value(x)) - pair.Q.support(pair.F.value(x)));
          if (gp.complementarity_residual <= 1e-8) out.push_back(gp);
        }
      }
    } catch (const std::exception&) {
      // face route unavailable; prox samples stand
    }
  }
  return out;
}

namespace {

// Minimal quotient of one graph sample over its own noise-guarded t-window.
// The window couples t with the sample radius; below the floating-point
// cancellation floor samples are discarded.
double sample_quotient_min(const DecomposablePair& pair, const GraphPoint& gp, const Vector& h,
                           const std::vector<Vector>& net, const EstimatorConfig& cfg,
                           double radius) {
  const double fx = pair.eval(gp.x);
  if (!std::isfinite(fx)) return kInf;
  const double t_hi = std::min(0.3 * radius, cfg.t_max);
  double best = kInf;
  const double eps = 2.2e-16;
  double t = t_hi;
  const double shrink = std::pow(10.0, -1.0 / cfg.points_per_decade);
  for (int steps = 0; steps < 200 && t > 1e-300; ++steps, t *= shrink) {
    const double noise = eps * (2.0 * std::abs(fx) + t * std::abs(gp.v.dot(h))) / (0.5 * t * t);
    if (noise > 1e-6) break;
    for (const auto& u : net) {
      const Vector ht = h + t * u;
      const double fxt = pair.eval(gp.x + t * ht);
      const double q = (fxt - fx - t * gp.v.dot(ht)) / (0.5 * t * t);
      if (std::isfinite(q)) best = std::min(best, q);
    }
  }
  return best;
}

}  // namespace

QuotientEstimate strict_second_subderivative_estimate(
    const DecomposablePair& pair, const Vector& vbar, const Vector& h,
    const EstimatorConfig& cfg, const std::vector<GraphPoint>& user_sequence) {
  auto net = perturbation_net(static_cast<int>(h.size()), cfg.perturbations, cfg.seed);

  // the anchored quotients participate in the liminf (constant graph sequence)
  DecadeAggregate agg(decade_count(cfg));
  accumulate_quotients(pair, pair.basepoint, vbar, h, cfg, net, agg);
  QuotientEstimate anchored = classify(h, agg);

  // group minima over graph samples, ordered by decreasing radius
  std::vector<double> group_minima;
  Rng rng = Rng::derive(cfg.seed, "strict-graph-sampler");
  for (double radius : cfg.graph_radii) {
    auto pts = graph_sampler(pair, vbar, radius, cfg.graph_points_per_radius, rng);
    double m = kInf;
    int used = 0;
    for (const auto& gp : pts) {
      const double r = std::max((gp.x - pair.basepoint).norm(), (gp.v - vbar).norm());
      if (r <= 1e-14) continue;  // coincides with the anchor
      m = std::min(m, sample_quotient_min(pair, gp, h, net, cfg, r));
      ++used;
    }
    if (used > 0) group_minima.push_back(m);
  }
  for (const auto& gp : user_sequence) {
    const double r = std::max((gp.x - pair.basepoint).norm(), (gp.v - vbar).norm());
    if (r <= 1e-14) continue;
    group_minima.push_back(sample_quotient_min(pair, gp, h, net, cfg, r));
  }

  QuotientEstimate out = anchored;
  out.samples += static_cast<int>(group_minima.size());

  // classify the graph-sequence tail
  int tail_class = -1;  // -1 undecided, 0 finite, 1 divergent
  double tail_value = kInf;
  {
    std::vector<double> m;
    for (double v : group_minima)
      if (std::isfinite(v)) m.push_back(v);
    if (group_minima.empty()) {
      tail_class = -1;
    } else if (m.empty()) {
      tail_class = 1;  // every sampled sequence explodes
    } else if (m.size() >= 2) {
      const double last = m.back();
      const double prev = m[m.size() - 2];
      const double spread = std::abs(last - prev);
      const double value = std::min(last, prev);
      if (spread <= std::max(1e-3, 1e-2 * std::abs(value))) {
        tail_class = 0;
        tail_value = value;
      } else {
        bool growing = true;
        for (size_t i = 0; i + 1 < m.size(); ++i)
          if (!(m[i] > 0 && m[i + 1] >= 5.0 * m[i])) growing = false;
        if (growing && m.size() >= 2) tail_class = 1;
      }
    } else {
      tail_class = 0;
      tail_value = m[0];
    }
  }

  if (anchored.classification == QuotientClass::kFinite) {
    out.classification = QuotientClass::kFinite;
    out.value = (tail_class == 0) ? std::min(anchored.value, tail_value) : anchored.value;
  } else if (tail_class == 0) {
    out.classification = QuotientClass::kFinite;
    out.value = tail_value;
    out.detail = "finite along sampled graph sequences";
  } else if (anchored.classification == QuotientClass::kDivergent &&
             (tail_class == 1 || group_minima.empty())) {
    out.classification = QuotientClass::kDivergent;
  } else {
    out.classification = QuotientClass::kInconclusive;
    out.detail = "anchored and graph-sequence trends disagree";
  }
  return out;
}

// ---- support-function machinery --------------------------------------

PathBoundCheck support_quotient_lower_bound_check(const SupportSet& Q, const Vector& x,
                                                  const Vector& lambda, const Vector& w,
                                                  const Vector& v, double delta, double M,
                                                  double t) {
  const double sx = Q.support(x);
  if (!std::isfinite(sx)) throw std::invalid_argument("path bound: sigma_Q(x) = +inf");
  if (std::abs(lambda.dot(x) - sx) > 1e-8 * (1.0 + std::abs(sx)))
    throw std::invalid_argument("path bound: lambda is not a subgradient at x");
  if (std::abs(v.dot(x)) > 1e-10 * (1.0 + x.norm()))
    throw std::invalid_argument("path bound: <v, x> != 0");
  const double vw = v.dot(w);
  if (vw <= 0) throw std::invalid_argument("path bound: <v, w> must be positive");
  if (delta <= 0 || M < 0 || t <= 0) throw std::invalid_argument("path bound: bad constants");

  PathBoundCheck out;
  const double sxt = Q.support(x + t * w);
  out.quotient = (sxt - sx - t * lambda.dot(w)) / (0.5 * t * t);
  const double second = (M == 0.0) ? kInf : vw / (M * (x + t * w).norm());
  out.bound = vw * std::min(delta / t, second);
  out.holds = out.quotient >= out.bound - 1e-9 * (1.0 + std::abs(out.bound));
  return out;
}

ConeIndicatorReport strict_subderivative_of_support_is_cone_indicator(
    const SupportSet& Q, const Vector& lambda_bar, int directions, const EstimatorConfig& cfg) {
  ConeIndicatorReport out;
  DecomposablePair pair;
  pair.name = "support-indicator-probe";
  pair.Q = Q;
  pair.F = maps::identity(Q.dim());
  pair.basepoint = Vector::Zero(Q.dim());
  pair.weak_convexity = 0.0;
  pair.tau = 1.0;
  pair.prox_oracle.moreau_set = Q;

  Rng rng = Rng::derive(cfg.seed, "cone-indicator-net");
  std::vector<Vector> net;
  const int m = Q.dim();
  for (int i = 0; i < m && static_cast<int>(net.size()) < directions; ++i) {
    Vector e = Vector::Zero(m);
    e[i] = 1.0;
    net.push_back(e);
    net.push_back(Vector(-e));
  }
  while (static_cast<int>(net.size()) < directions) net.push_back(rng.unit_vector(m));

  for (const auto& w : net) {
    QuotientEstimate est = strict_second_subderivative_estimate(pair, lambda_bar, w, cfg);
    switch (est.classification) {
      case QuotientClass::kFinite:
        if (std::abs(est.value) <= 1e-3) {
          ++out.zero_directions;
        } else {
          ++out.failures;
        }
        break;
      case QuotientClass::kDivergent:
        ++out.divergent_directions;
        break;
      case QuotientClass::kInconclusive:
        ++out.inconclusive;
        break;
    }
  }
  out.passed = out.failures == 0;
  return out;
}

ChainBoundReport strict_chain_lower_bound_check(const DecomposablePair& pair,
                                                const Vector& lambda_bar, const Vector& h,
                                                const EstimatorConfig& cfg) {
  ChainBoundReport out;
  const Vector vbar = pair.F.jacobian(pair.basepoint).transpose() * lambda_bar;
  Matrix aff = critical_cone_aff_basis(pair, lambda_bar);
  out.in_aff_critical = subspace_distance(aff, h) <= 1e-9 * (1.0 + h.norm());
  out.quadratic_term = lambda_bar.dot(pair.F.second_directional(pair.basepoint, h));

  QuotientEstimate est = strict_second_subderivative_estimate(pair, vbar, h, cfg);
  out.estimator_class = est.classification;
  out.estimator = est.finite() ? est.value : kInf;

  const double tol = std::max(1e-3, 1e-2 * std::abs(out.quadratic_term));
  if (out.in_aff_critical) {
    out.equality_ok = est.finite() && std::abs(est.value - out.quadratic_term) <= tol;
    out.bound_violated = est.finite() && est.value < out.quadratic_term - tol;
  } else {
    // off the affine hull the support term may be +inf: the bound is vacuous;
    // a finite estimate below the quadratic term would still violate it
    out.equality_ok = false;
    out.bound_violated = est.finite() && est.value < out.quadratic_term - tol;
  }
  return out;
}

}  // namespace epivar
