#pragma once

#include "epivar/rng.hpp"
#include "epivar/smooth_map.hpp"
#include "epivar/support_set.hpp"

namespace epivar {

// Local representation set ∩ U = { s : G(s) in K } with DG(sbar) surjective
// and K pointed after normalization.
struct ReductionPair {
  std::string name;
  SupportSet set;   // the set being reduced
  SmoothMap G;
  SupportSet K;
  Vector sbar;
  double radius = 0.1;  // chart validity radius
};

// Post-compose G with the projection onto lin(T_K(G(sbar)))^perp so the cone
// becomes pointed; identity when it already is.
ReductionPair normalize_pointed(const ReductionPair& R);

struct ChartSoundness {
  int samples = 0;
  int disagreements = 0;
  double surjectivity_margin = 0.0;  // smallest singular value / largest
  double normalization_residual = 0.0;  // ||G(sbar)||
  bool ok = false;
};

ChartSoundness check_chart(const ReductionPair& R, int samples, double radius, Rng& rng);

// Orthonormal basis of ker(DG(s)); throws when DG loses rank relative to the
// base point (the chart no longer applies).
Matrix usotp_subspace(const ReductionPair& R, const Vector& s);

struct TangentPath {
  Vector base, direction, correction;  // q = -DG(s)^+ D2G(s)[v,v]
  double delta = 0.0;
  double curvature_bound = 0.0;  // fitted M (least squares x 1.5)
  double max_set_violation = 0.0;
  std::vector<double> t_grid;
  std::vector<double> residuals;  // ||xi(t) - s - t v||
};

TangentPath tangent_path(const ReductionPair& R, const Vector& s, const Vector& v);

// ---- tangent-path property verification -----------------------------------

struct UsotpProbe {
  std::vector<double> radii = {1e-2, 1e-3, 1e-4};
  int points_per_radius = 6;
  int directions_per_point = 3;
  std::vector<double> t_grid = {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
  std::uint64_t seed = 42;
};

struct UsotpVerdict {
  bool holds = false;
  bool counter_witness = false;
  double delta = 0.0;
  double M = 0.0;
  bool selection_continuous = true;  // condition (i): S(lambda) -> lin(T(lambda_bar))
  Vector witness_point, witness_direction;
  std::vector<double> fitted_M_per_radius;
  std::string detail;
};

// Probes the uniform second-order tangent-path property of `set` at
// lambda_bar by fitting dist(lambda + t v, set) against t^2/2 along selected
// subspaces of lin(T_set(lambda)).
UsotpVerdict verify_usotp(const SupportSet& set, const Vector& lambda_bar,
                          const UsotpProbe& probe, Rng& rng);

// ---- chart constructions ---------------------------------------------------

// Slice of the second-order cone {x : A x = b} ∩ Λ at xbar; the chart follows
// the interior / boundary / apex case split.
ReductionPair build_reduction_soc_slice(const Matrix& A, const Vector& b, const Vector& xbar);

// Matrix interval [L, U] at Xbar (svec coordinates): congruence to
// 0 <= B <= E_r, block split, eigen-frame compression; throws when the
// eigenvalue clusters of the reduced block are not separated.
ReductionPair build_reduction_matrix_interval(const Matrix& L, const Matrix& U,
                                              const Vector& xbar_svec);

// Support sets of the Ky Fan k-norm decompositions.
//  - case 1 (sigma_k > 0): the spectral-simplex {0 <= B <= I, tr B = k0} in
//    S^r at Bbar (svec coordinates)
//  - case 2 (sigma_k = 0): {||B||_2 <= 1, ||B||_* <= k0} in R^{r x s} at Bbar
ReductionPair build_reduction_kyfan_case1(int r, int k0, const Vector& Bbar_svec);
ReductionPair build_reduction_kyfan_case2(int r, int s, int k0, const Vector& Bbar_vec);
// dispatcher keyed on the ambient data of the original norm
ReductionPair build_reduction_kyfan_support(int m, int n, int k, const Vector& Bbar,
                                            int case_id);

// Gram-Schmidt frame of the eigenvalue cluster of S inside [lo, hi],
// continuing the base frame E (columns); pivot tolerance 1e-10.
Matrix cluster_frame(const Matrix& S, const Matrix& E, double lo, double hi);

}  // namespace epivar
