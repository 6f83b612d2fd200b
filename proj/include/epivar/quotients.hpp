#pragma once

#include <cstdint>

#include "epivar/decomposable.hpp"

namespace epivar {

enum class QuotientClass { kFinite, kDivergent, kInconclusive };

struct QuotientEstimate {
  Vector direction;
  QuotientClass classification = QuotientClass::kInconclusive;
  double value = kInf;               // liminf surrogate when finite
  std::vector<double> decade_minima;  // aggregated per t-decade, large t first
  int samples = 0;
  std::string detail;

  bool finite() const { return classification == QuotientClass::kFinite; }
  bool divergent() const { return classification == QuotientClass::kDivergent; }
};

struct EstimatorConfig {
  double t_max = 1e-1;
  double t_min = 1e-6;
  int points_per_decade = 4;
  int perturbations = 16;
  std::uint64_t seed = 42;
  std::vector<double> graph_radii = {1e-2, 1e-3, 1e-4};
  int graph_points_per_radius = 32;
};

std::vector<double> quotient_t_grid(const EstimatorConfig& cfg);

// Delta_t^2 phi(x|v)(h) = (phi(x+th) - phi(x) - t<v,h>) / (t^2/2)
double second_quotient(const DecomposablePair& pair, const Vector& x, const Vector& v,
                       const Vector& h, double t);

// liminf surrogate of d phi(x)(h) over the t-grid and perturbation net
double subderivative_estimate(const DecomposablePair& pair, const Vector& x, const Vector& h,
                              const EstimatorConfig& cfg = {});

QuotientEstimate basic_second_subderivative_estimate(const DecomposablePair& pair,
                                                     const Vector& vbar, const Vector& h,
                                                     const EstimatorConfig& cfg = {});

// Graph points near (xbar, vbar): prox-based and, where the relative
// interior of the normal cone is representable, the interior-face
// construction with the fixed multiplier.
std::vector<GraphPoint> graph_sampler(const DecomposablePair& pair, const Vector& vbar,
                                      double radius, int count, Rng& rng);

QuotientEstimate strict_second_subderivative_estimate(
    const DecomposablePair& pair, const Vector& vbar, const Vector& h,
    const EstimatorConfig& cfg = {}, const std::vector<GraphPoint>& user_sequence = {});

// ---- support-function machinery ------------------------------------------

struct PathBoundCheck {
  double quotient = 0.0;
  double bound = 0.0;
  bool holds = false;
};

// Lower bound on Delta_t^2 sigma_Q(x|lambda)(w) from a second-order tangent
// path with constants (delta, M) along v. Throws std::invalid_argument when
// the hypotheses fail.
PathBoundCheck support_quotient_lower_bound_check(const SupportSet& Q, const Vector& x,
                                                  const Vector& lambda, const Vector& w,
                                                  const Vector& v, double delta, double M,
                                                  double t);

struct ConeIndicatorReport {
  int zero_directions = 0;
  int divergent_directions = 0;
  int failures = 0;       // finite nonzero classifications
  int inconclusive = 0;
  bool passed = false;
};

// The strict second subderivative of a support function must be the
// indicator of a closed cone: every direction classifies as ~0 or divergent.
ConeIndicatorReport strict_subderivative_of_support_is_cone_indicator(
    const SupportSet& Q, const Vector& lambda_bar, int directions = 12,
    const EstimatorConfig& cfg = {});

// ---- strict chain rule check ----------------------------------------------

struct ChainBoundReport {
  bool in_aff_critical = false;
  double estimator = kInf;
  QuotientClass estimator_class = QuotientClass::kInconclusive;
  double quadratic_term = 0.0;  // <lambda, D2F(xbar)[h,h]>
  bool equality_ok = false;     // only meaningful on aff(C)
  bool bound_violated = false;
};

ChainBoundReport strict_chain_lower_bound_check(const DecomposablePair& pair,
                                                const Vector& lambda_bar, const Vector& h,
                                                const EstimatorConfig& cfg = {});

}  // namespace epivar
