#include "epivar/reduction.hpp"

#include <cmath>
#include <sstream>

#include "epivar/cone.hpp"
#include "epivar/opt.hpp"

namespace epivar {

namespace ss = support_sets;

namespace {

constexpr double kClusterBandwidth = 1e-6;  // relative eigen-cluster grouping
constexpr double kActiveTol = 1e-7;

Vector vec_of(const Matrix& B) {
  Vector x(B.rows() * B.cols());
  for (int i = 0; i < B.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j) x[i * B.cols() + j] = B(i, j);
  return x;
}

Matrix unvec_of(const Vector& x, int rows, int cols) {
  Matrix B(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) B(i, j) = x[i * cols + j];
  return B;
}

struct Cluster {
  double value;
  std::vector<int> indices;
};

std::vector<Cluster> cluster_eigenvalues(const Vector& vals) {
  std::vector<Cluster> out;  // vals sorted descending
  for (int i = 0; i < vals.size(); ++i) {
    const double band = kClusterBandwidth * (1.0 + std::abs(vals[i]));
    if (!out.empty() && std::abs(out.back().value - vals[i]) <= band) {
      out.back().indices.push_back(i);
    } else {
      out.push_back({vals[i], {i}});
    }
  }
  return out;
}

}  // namespace

Matrix cluster_frame(const Matrix& S, const Matrix& E, double lo, double hi) {
  EigResult e = eigh_jacobi(S);
  const int n = static_cast<int>(S.rows());
  Matrix P = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    if (e.values[i] >= lo && e.values[i] <= hi)
      P += e.vectors.col(i) * e.vectors.col(i).transpose();
  Matrix PE = P * E;
  // Gram-Schmidt in the given column order keeps the frame analytic in S
  Matrix Q(n, E.cols());
  for (int j = 0; j < E.cols(); ++j) {
    Vector v = PE.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) v -= Q.col(i).dot(v) * Q.col(i);
    const double nn = v.norm();
    if (nn < 1e-10) throw SolverFailure("cluster frame degenerated (pivot below tolerance)");
    Q.col(j) = v / nn;
  }
  return Q;
}

// ---- normalization ----------------------------------------------------

namespace {

ReductionPair normalize_pointed_with(const ReductionPair& R, const Matrix& L);

}  // namespace

ReductionPair normalize_pointed(const ReductionPair& R) {
  const Vector g0 = R.G.value(R.sbar);
  Matrix L = R.K.tangent_cone(g0).lineality();
  return normalize_pointed_with(R, L);
}

namespace {

ReductionPair normalize_pointed_with(const ReductionPair& R, const Matrix& L) {
  if (L.cols() == 0) return R;
  if (L.cols() == R.G.codomain_dim()) return R;  // interior chart: keep as built
  Matrix B = subspace_complement(L);
  ReductionPair out = R;
  const SmoothMap G = R.G;
  const Matrix Bt = B.transpose();
  out.G = SmoothMap(
      G.domain_dim(), static_cast<int>(B.cols()),
      [G, Bt](const Vector& x) -> Vector { return Bt * G.value(x); },
      [G, Bt](const Vector& x) -> Matrix { return Bt * G.jacobian(x); },
      [G, Bt](const Vector& x, const Vector& h) -> Vector {
        return Bt * G.second_directional(x, h);
      },
      [G, Bt](const Vector& x, const Vector& a, const Vector& b) -> Vector {
        return Bt * G.second_bilinear(x, a, b);
      },
      G.analytic());
  const SupportSet K = R.K;
  const Matrix Bmat = B;
  out.K = ss::implicit_set(
      static_cast<int>(B.cols()),
      [K, Bmat](const Vector& y, double tol) { return K.contains(Bmat * y, tol); },
      "pointed(" + R.K.kind() + ")");
  out.name = R.name + "/pointed";
  return out;
}

}  // namespace

// ---- chart soundness ---------------------------------------------------

ChartSoundness check_chart(const ReductionPair& R, int samples, double radius, Rng& rng) {
  ChartSoundness out;
  const int n = R.G.domain_dim();
  out.normalization_residual = R.G.value(R.sbar).norm();
  if (R.G.codomain_dim() > 0) {
    SvdResult s = svd_dilation(R.G.jacobian(R.sbar));
    const int m = R.G.codomain_dim();
    out.surjectivity_margin = (s.sigma.size() >= m && s.sigma[0] > 0)
                                  ? s.sigma[m - 1] / s.sigma[0]
                                  : 0.0;
  } else {
    out.surjectivity_margin = 1.0;  // R^0 codomain: vacuously onto
  }

  const double gscale = 1.0 + R.G.jacobian(R.sbar).norm();
  int counted = 0;
  int attempts = 0;
  while (counted < samples && attempts < 20 * samples) {
    ++attempts;
    const Vector s = R.sbar + radius * rng.uniform() * rng.unit_vector(n);
    const bool in_set_tight = R.set.contains(s, 1e-8);
    const bool in_set_loose = R.set.contains(s, 1e-7);
    const Vector gs = R.G.value(s);
    const bool in_k_tight = R.K.contains(gs, 1e-8 * gscale);
    const bool in_k_loose = R.K.contains(gs, 1e-7 * gscale);
    if (in_set_tight != in_set_loose || in_k_tight != in_k_loose) continue;  // boundary graze
    ++counted;
    if (in_set_tight != in_k_tight) ++out.disagreements;
  }
  out.samples = counted;
  out.ok = out.disagreements == 0 && out.normalization_residual <= 1e-10 &&
           out.surjectivity_margin > 1e-8;
  return out;
}

// ---- kernel subspace and tangent paths ---------------------------------

Matrix usotp_subspace(const ReductionPair& R, const Vector& s) {
  if (R.G.codomain_dim() == 0) return Matrix::Identity(R.G.domain_dim(), R.G.domain_dim());
  const Matrix Jbar = R.G.jacobian(R.sbar);
  const Matrix J = R.G.jacobian(s);
  SvdResult sb = svd_dilation(Jbar);
  SvdResult sj = svd_dilation(J);
  int rank_base = 0, rank_s = 0;
  for (int i = 0; i < sb.sigma.size(); ++i)
    if (sb.sigma[i] > 1e-8 * sb.sigma[0]) ++rank_base;
  for (int i = 0; i < sj.sigma.size(); ++i)
    if (sj.sigma[i] > 1e-8 * std::max(sj.sigma[0], sb.sigma[0])) ++rank_s;
  if (rank_s < rank_base)
    throw SolverFailure("usotp_subspace: jacobian rank dropped below the chart rank");
  return nullspace(J);
}

TangentPath tangent_path(const ReductionPair& R, const Vector& s, const Vector& v) {
  if (std::abs(v.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("tangent_path: direction must be unit");
  Matrix ker = usotp_subspace(R, s);
  if (subspace_distance(ker, v) > 1e-7)
    throw std::invalid_argument("tangent_path: direction must lie in ker(DG(s))");

  TangentPath out;
  out.base = s;
  out.direction = v;
  if (R.G.codomain_dim() == 0) {
    out.correction = Vector::Zero(s.size());
  } else {
    out.correction = -pinv(R.G.jacobian(s)) * R.G.second_directional(s, v);
  }
  out.delta = 0.5 * R.radius;

  double num = 0.0, den = 0.0;
  for (double t : {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3}) {
    if (t > out.delta) continue;
    const Vector probe = s + t * v + 0.5 * t * t * out.correction;
    const Vector xi = R.set.project(probe);
    const double r = (xi - s - t * v).norm();
    out.t_grid.push_back(t);
    out.residuals.push_back(r);
    out.max_set_violation = std::max(out.max_set_violation, (probe - xi).norm());
    num += r * 0.5 * t * t;
    den += 0.25 * t * t * t * t;
  }
  if (out.t_grid.empty()) {
    const double t = 0.5 * out.delta;
    const Vector probe = s + t * v + 0.5 * t * t * out.correction;
    const Vector xi = R.set.project(probe);
    out.t_grid.push_back(t);
    out.residuals.push_back((xi - s - t * v).norm());
    num = out.residuals[0] * 0.5 * t * t;
    den = 0.25 * t * t * t * t;
  }
  out.curvature_bound = 1.5 * num / den;
  return out;
}

// ---- tangent-path property probe -----------------------------------------

namespace {

struct FitResult {
  double M = 0.0;        // least-squares slope of d(t) against t^2/2
  double exponent = 2.0; // log-log slope of d(t); < 2 signals an empty
                         // second-order tangent set
  bool valid = false;
};

FitResult fit_path_constants(const SupportSet& set, const Vector& lambda, const Vector& v,
                             const std::vector<double>& t_grid) {
  FitResult out;
  double num = 0.0, den = 0.0;
  std::vector<double> logs_t, logs_d;
  for (double t : t_grid) {
    const double d = set.distance(lambda + t * v);
    if (d < 1e-9) {
      // straight-face path: contributes slope 0
      num += 0.0;
      den += 0.25 * t * t * t * t;
      continue;
    }
    num += d * 0.5 * t * t;
    den += 0.25 * t * t * t * t;
    logs_t.push_back(std::log(t));
    logs_d.push_back(std::log(d));
  }
  if (den == 0.0) return out;
  out.M = 1.5 * num / den;
  out.valid = true;
  if (logs_t.size() >= 3) {
    // least-squares slope of log d against log t
    double mt = 0, md = 0;
    for (size_t i = 0; i < logs_t.size(); ++i) {
      mt += logs_t[i];
      md += logs_d[i];
    }
    mt /= logs_t.size();
    md /= logs_d.size();
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < logs_t.size(); ++i) {
      sxx += (logs_t[i] - mt) * (logs_t[i] - mt);
      sxy += (logs_t[i] - mt) * (logs_d[i] - md);
    }
    if (sxx > 0) out.exponent = sxy / sxx;
  }
  return out;
}

}  // namespace

UsotpVerdict verify_usotp(const SupportSet& set, const Vector& lambda_bar,
                          const UsotpProbe& probe, Rng& rng) {
  UsotpVerdict out;
  Matrix Wbar = set.tangent_cone(lambda_bar).lineality();
  if (Wbar.cols() == 0) {
    out.holds = true;
    out.delta = probe.radii.front();
    out.M = 0.0;
    out.detail = "lineality of the tangent cone is trivial";
    return out;
  }

  const int n = set.dim();
  double worst_angle = 0.0;
  std::vector<double> group_max;
  std::vector<std::pair<Vector, Vector>> group_witness;

  // radius 0 group: the base point itself, then shrinking rings
  std::vector<double> radii = probe.radii;
  radii.insert(radii.begin(), 0.0);

  for (double radius : radii) {
    double m_max = 0.0;
    Vector w_pt, w_dir;
    const int points = radius == 0.0 ? 1 : probe.points_per_radius;
    for (int p = 0; p < points; ++p) {
      Vector lam =
          radius == 0.0 ? lambda_bar : set.project(lambda_bar + radius * rng.unit_vector(n));
      Matrix Lt;
      try {
        Lt = set.tangent_cone(lam).lineality();
      } catch (const std::exception&) {
        continue;
      }
      // selected subspace: the projection of lin(T(lambda_bar)) into the
      // lineality at lambda
      Matrix S;
      if (Lt.cols() == 0) {
        continue;  // isolated-face sample carries no tangent directions
      } else {
        Matrix proj = Lt * (Lt.transpose() * Wbar);
        S = orthonormal_columns(proj, 1e-6);
        if (S.cols() < Wbar.cols()) {
          out.selection_continuous = false;
          continue;
        }
        worst_angle = std::max(worst_angle, subspace_gap(S, Wbar));
      }
      for (int d = 0; d < probe.directions_per_point; ++d) {
        Vector v;
        if (d < 2 * S.cols()) {
          v = S.col(d / 2) * (d % 2 ? -1.0 : 1.0);
        } else {
          v = S * rng.unit_vector(static_cast<int>(S.cols()));
        }
        FitResult fit = fit_path_constants(set, lam, v, probe.t_grid);
        if (!fit.valid) continue;
        if (fit.exponent < 1.9 && fit.M > 1e-3) {
          // the distance decays slower than t^2: no second-order tangent path
          out.counter_witness = true;
          out.witness_point = lam;
          out.witness_direction = v;
          out.detail = "distance to the set decays with exponent " +
                       std::to_string(fit.exponent) + " < 2 along the witness direction";
        }
        if (fit.M > m_max) {
          m_max = fit.M;
          w_pt = lam;
          w_dir = v;
        }
      }
    }
    group_max.push_back(m_max);
    group_witness.push_back({w_pt, w_dir});
  }

  out.fitted_M_per_radius = group_max;
  double lo = kInf, hi = 0.0;
  for (double m : group_max) {
    if (m > 0) lo = std::min(lo, m);
    hi = std::max(hi, m);
  }

  if (!out.counter_witness && hi > 0 && lo < kInf && hi / lo >= 5.0 && group_max.back() == hi) {
    // curvature grows as the ring shrinks: report the blow-up point
    out.counter_witness = true;
    out.witness_point = group_witness.back().first;
    out.witness_direction = group_witness.back().second;
    out.detail = "fitted curvature grows by a factor " + std::to_string(hi / lo) +
                 " toward the base point";
  }

  if (out.counter_witness) {
    out.holds = false;
    return out;
  }
  const bool uniform = hi == 0.0 || lo == kInf || hi / lo < 3.0;
  out.holds = uniform && out.selection_continuous;
  out.delta = probe.t_grid.front();
  out.M = hi * 1.0;  // fits already carry the 1.5 safety factor
  if (!uniform) {
    out.holds = false;
    out.detail = "fitted curvature varies by more than a factor 3 across rings";
  }
  (void)worst_angle;
  return out;
}

// ---- SOC slice chart -----------------------------------------------------

ReductionPair build_reduction_soc_slice(const Matrix& A_in, const Vector& b_in,
                                        const Vector& xbar) {
  const int N = static_cast<int>(xbar.size());  // ambient n + 1
  ReductionPair out;
  out.sbar = xbar;

  // the sliced set itself (used by the probes): {x : A x = b} ∩ Λ
  SupportSet cone = ss::second_order_cone(N, +1);
  SupportSet sliced =
      (A_in.rows() > 0) ? ss::equality_slice(cone, A_in, b_in) : cone;
  out.set = sliced;

  const double head = xbar[0];
  const double tail = N > 1 ? xbar.tail(N - 1).norm() : 0.0;
  if (!sliced.contains(xbar, 1e-8)) throw std::invalid_argument("soc slice: xbar not in the set");

  // full-row-rank reduction of the constraints
  Matrix At = orthonormal_columns(Matrix(A_in.transpose()));
  Matrix A = At.transpose();  // m x N, orthonormal rows
  Vector b = A * xbar;        // consistent right-hand side
  const int m = static_cast<int>(A.rows());

  if (head - tail > 1e-9 * (1.0 + head)) {
    // interior: the slice agrees with the affine subspace
    out.name = "soc-slice/interior";
    out.G = maps::affine(A, Vector(-b));
    out.K = ss::singleton(Vector::Zero(m));
    out.radius = 0.5 * (head - tail);
    return normalize_pointed(out);
  }

  if (xbar.norm() > 1e-9) {
    // boundary away from the apex
    out.name = "soc-slice/boundary";
    Matrix P1 = At;  // basis of ker(A)^perp
    Matrix Q = Matrix::Identity(N, N) - P1 * P1.transpose();
    const Vector xb = xbar;
    const int mm = m;
    auto F1 = [xb, N](const Vector& y) {
      return xb[0] + y[0] - (xb.tail(N - 1) + y.tail(N - 1)).norm();
    };
    auto gradF1 = [xb, N](const Vector& y) -> Vector {
      Vector g = Vector::Zero(N);
      g[0] = 1.0;
      const Vector w = xb.tail(N - 1) + y.tail(N - 1);
      g.tail(N - 1) = -w / w.norm();
      return g;
    };
    auto hessF1 = [xb, N](const Vector& y, const Vector& h) -> double {
      const Vector w = xb.tail(N - 1) + y.tail(N - 1);
      const double nw = w.norm();
      const Vector ht = h.tail(N - 1);
      const double along = w.dot(ht) / nw;
      return -(ht.squaredNorm() - along * along) / nw;
    };
    Matrix P1t = P1.transpose();
    out.G = SmoothMap(
        N, m + 1,
        [P1t, Q, F1, xb, mm](const Vector& x) -> Vector {
          Vector g(mm + 1);
          g.head(mm) = P1t * (x - xb);
          g[mm] = F1(Q * (x - xb));
          return g;
        },
        [P1t, Q, gradF1, xb, mm](const Vector& x) -> Matrix {
          Matrix J(mm + 1, x.size());
          J.topRows(mm) = P1t;
          J.row(mm) = (Q * gradF1(Q * (x - xb))).transpose();
          return J;
        },
        [Q, hessF1, xb, mm](const Vector& x, const Vector& h) -> Vector {
          Vector s = Vector::Zero(mm + 1);
          s[mm] = hessF1(Q * (x - xb), Q * h);
          return s;
        },
        nullptr, /*analytic=*/true);
    std::vector<SupportSet> parts;
    if (m > 0) parts.push_back(ss::singleton(Vector::Zero(m)));
    parts.push_back(ss::box(Vector::Zero(1), Vector::Constant(1, kInf)));
    out.K = ss::product(parts);
    out.radius = 0.25 * std::min(1.0, tail);
    return normalize_pointed(out);
  }

  // apex
  out.name = "soc-slice/apex";
  if (b.norm() > 1e-10) throw std::invalid_argument("soc slice: apex requires b = 0");
  Matrix Nk = nullspace(A);
  const int d = static_cast<int>(Nk.cols());
  Matrix C = At;  // complement of ker(A)
  if (d == 0) {
    out.G = maps::identity(N);
    out.K = ss::singleton(Vector::Zero(N));
    out.radius = 0.25;
    return normalize_pointed(out);
  }
  Matrix J = -Matrix::Identity(N, N);
  J(0, 0) = 1.0;
  Matrix M = Nk.transpose() * (-J) * Nk;  // y^T M y <= 0 encodes the cone
  // note: x in Λ iff x^T diag(-1, I) x <= 0 and x_0 >= 0; M uses the
  // opposite sign so positive eigenvalues correspond to the tail block
  EigResult e = eigh_jacobi(M);
  const double scale = 1.0 + e.values.cwiseAbs().maxCoeff();
  std::vector<int> pos, neg, zero;
  for (int i = 0; i < d; ++i) {
    if (e.values[i] > 1e-9 * scale) {
      pos.push_back(i);
    } else if (e.values[i] < -1e-9 * scale) {
      neg.push_back(i);
    } else {
      zero.push_back(i);
    }
  }
  if (neg.size() != 1 || !zero.empty()) {
    // degenerate slice: dim(S) <= 1; emit the ray or point chart
    // find a ray direction if one exists
    Vector dir = Vector::Zero(N);
    bool have_ray = false;
    for (int i = 0; i < d && !have_ray; ++i) {
      Vector cand = Nk.col(i);
      for (double sgn : {1.0, -1.0}) {
        Vector u = sgn * cand;
        if (u[0] > 0 && cone.contains(u, 1e-9)) {
          dir = u / u.norm();
          have_ray = true;
          break;
        }
      }
    }
    if (!have_ray) {
      out.G = maps::identity(N);
      out.K = ss::singleton(Vector::Zero(N));
      out.radius = 0.25;
      return normalize_pointed(out);
    }
    Matrix Cd = subspace_complement(Matrix(dir));
    Matrix T(N, N);
    T.row(0) = dir.transpose();
    T.bottomRows(N - 1) = Cd.transpose();
    out.G = maps::linear(T);
    std::vector<SupportSet> parts;
    parts.push_back(ss::box(Vector::Zero(1), Vector::Constant(1, kInf)));
    parts.push_back(ss::singleton(Vector::Zero(N - 1)));
    out.K = ss::product(parts);
    out.radius = 0.25;
    return normalize_pointed(out);
  }

  // axis-weighted second-order cone: rescale the rotated kernel coordinates
  const int q0 = neg[0];
  Vector axis = Nk * e.vectors.col(q0);
  double sgn = axis[0] > 0 ? 1.0 : -1.0;
  Matrix T(d, d);
  T.row(0) = sgn * std::sqrt(-e.values[q0]) * e.vectors.col(q0).transpose();
  for (size_t i = 0; i < pos.size(); ++i)
    T.row(1 + i) = std::sqrt(e.values[pos[i]]) * e.vectors.col(pos[i]).transpose();
  Matrix Gmat(N, N);
  Gmat.topRows(d) = T * Nk.transpose();
  Gmat.bottomRows(N - d) = C.transpose();
  out.G = maps::linear(Gmat);
  std::vector<SupportSet> parts;
  parts.push_back(ss::second_order_cone(d, +1));
  if (N - d > 0) parts.push_back(ss::singleton(Vector::Zero(N - d)));
  out.K = ss::product(parts);
  out.radius = 0.5;
  return normalize_pointed(out);
}

// ---- matrix-interval chart -------------------------------------------------

ReductionPair build_reduction_matrix_interval(const Matrix& Lm, const Matrix& Um,
                                              const Vector& xbar_svec) {
  const int n = static_cast<int>(Lm.rows());
  ReductionPair out;
  out.name = "matrix-interval";
  out.set = ss::matrix_interval(Lm, Um);
  out.sbar = xbar_svec;
  if (!out.set.contains(xbar_svec, 1e-8))
    throw std::invalid_argument("matrix interval: Xbar not in [L, U]");

  // congruence: L + aI = S^T S, U + aI = S^T D S with diagonal D
  const double alpha = std::max(0.0, -eigh_jacobi(Lm).values.minCoeff()) + 1.0;
  EigResult ea = eigh_jacobi(Matrix(Lm + alpha * Matrix::Identity(n, n)));
  Matrix S0 = ea.values.cwiseSqrt().asDiagonal() * ea.vectors.transpose();
  Matrix S0invT = ea.vectors * ea.values.cwiseSqrt().cwiseInverse().asDiagonal();
  Matrix Mmid = S0invT.transpose() * (Um + alpha * Matrix::Identity(n, n)) * S0invT;
  EigResult ed = eigh_jacobi(Matrix(0.5 * (Mmid + Mmid.transpose())));
  Matrix Smat = ed.vectors.transpose() * S0;
  Vector dvals = ed.values;  // descending, >= 1 - tol

  const double ctol = 1e-9 * (1.0 + dvals.cwiseAbs().maxCoeff());
  int r = 0;
  for (int i = 0; i < n; ++i)
    if (dvals[i] - 1.0 > ctol) ++r;
  Vector w(n);
  for (int i = 0; i < n; ++i) w[i] = i < r ? std::sqrt(dvals[i] - 1.0) : 1.0;
  Matrix WS = w.asDiagonal() * Smat;
  Matrix WSinv = pinv(WS);
  Matrix Winv2 = (w.cwiseProduct(w)).cwiseInverse().asDiagonal();
  Matrix shift = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) shift(i, i) = 1.0 / (w[i] * w[i]);

  auto Fq = [WSinv, alpha, shift, n](const Matrix& X) -> Matrix {
    Matrix B = WSinv.transpose() * (X + alpha * Matrix::Identity(n, n)) * WSinv - shift;
    return Matrix(0.5 * (B + B.transpose()));
  };

  const Matrix Bfull = Fq(smat(xbar_svec));
  if (r < n) {
    if (Bfull.block(0, r, r, n - r).norm() > 1e-7 || Bfull.block(r, r, n - r, n - r).norm() > 1e-7)
      throw SolverFailure("matrix interval: off-block residue at the base point");
  }
  const Matrix Bbar = r > 0 ? Matrix(Bfull.topLeftCorner(r, r)) : Matrix(0, 0);

  // clusters of the reduced block
  std::vector<Cluster> clusters;
  Matrix Evecs;
  if (r > 0) {
    EigResult eb = eigh_jacobi(Bbar);
    clusters = cluster_eigenvalues(eb.values);
    Evecs = eb.vectors;
    for (size_t c = 0; c + 1 < clusters.size(); ++c)
      if (clusters[c].value - clusters[c + 1].value < 1e-6)
        throw std::invalid_argument("matrix interval: eigenvalue clusters not separated");
  }

  struct Block {
    double mu;
    Matrix Ebase;  // r x d base frame
    int sign;      // +1: psd constraint, -1: nsd constraint
  };
  std::vector<Block> active;
  double min_gap = 1.0;
  if (!clusters.empty()) {
    for (size_t c = 0; c + 1 < clusters.size(); ++c)
      min_gap = std::min(min_gap, clusters[c].value - clusters[c + 1].value);
    const auto& first = clusters.front();
    if (first.value >= 1.0 - kActiveTol) {
      Matrix E(r, first.indices.size());
      for (size_t k = 0; k < first.indices.size(); ++k) E.col(k) = Evecs.col(first.indices[k]);
      active.push_back({first.value, E, -1});
    }
    const auto& last = clusters.back();
    if (clusters.size() > 1 || active.empty()) {
      if (last.value <= kActiveTol) {
        Matrix E(r, last.indices.size());
        for (size_t k = 0; k < last.indices.size(); ++k) E.col(k) = Evecs.col(last.indices[k]);
        active.push_back({last.value, E, +1});
      }
    }
  }

  // codomain layout: active svec blocks + vec(A2) + svec(A3)
  const int off_dim = r * (n - r);
  const int a3_dim = svec_dim(n - r);
  int dim = off_dim + a3_dim;
  for (const auto& blk : active) dim += svec_dim(static_cast<int>(blk.Ebase.cols()));

  const double band = 0.5 * std::max(1e-6, min_gap);
  auto value_fn = [Fq, active, band, r, n, off_dim, a3_dim, dim](const Vector& xs) -> Vector {
    Matrix B = Fq(smat(xs));
    Vector outv(dim);
    int pos = 0;
    Matrix A1 = r > 0 ? Matrix(B.topLeftCorner(r, r)) : Matrix(0, 0);
    for (const auto& blk : active) {
      Matrix Q = cluster_frame(A1, blk.Ebase, blk.mu - band, blk.mu + band);
      const int dblk = static_cast<int>(blk.Ebase.cols());
      Matrix comp = Q.transpose() * A1 * Q - blk.mu * Matrix::Identity(dblk, dblk);
      outv.segment(pos, svec_dim(dblk)) = svec(Matrix(0.5 * (comp + comp.transpose())));
      pos += svec_dim(dblk);
    }
    if (off_dim > 0) {
      outv.segment(pos, off_dim) = vec_of(Matrix(B.block(0, r, r, n - r)));
      pos += off_dim;
    }
    if (a3_dim > 0) {
      outv.segment(pos, a3_dim) = svec(Matrix(B.block(r, r, n - r, n - r)));
      pos += a3_dim;
    }
    return outv;
  };

  out.G = SmoothMap(svec_dim(n), dim, value_fn);  // derivatives by differences
  std::vector<SupportSet> parts;
  for (const auto& blk : active) {
    const int dblk = static_cast<int>(blk.Ebase.cols());
    parts.push_back(blk.sign > 0 ? ss::psd_cone(dblk) : ss::negative_psd_cone(dblk));
  }
  if (off_dim > 0) parts.push_back(ss::singleton(Vector::Zero(off_dim)));
  if (a3_dim > 0) parts.push_back(ss::singleton(Vector::Zero(a3_dim)));
  if (parts.empty()) {
    out.G = SmoothMap(svec_dim(n), 0, [](const Vector&) { return Vector(0); });
    out.K = ss::singleton(Vector(0));
  } else {
    out.K = ss::product(parts);
  }
  out.radius = std::min(0.1, 0.2 * band);
  return normalize_pointed(out);
}

// ---- Ky Fan support-set charts ----------------------------------------------

ReductionPair build_reduction_kyfan_case1(int r, int k0, const Vector& Bbar_svec) {
  ReductionPair out;
  out.name = "kyfan-case1";
  SupportSet interval =
      ss::matrix_interval(Matrix(Matrix::Zero(r, r)), Matrix(Matrix::Identity(r, r)));
  Matrix trace_row = svec(Matrix(Matrix::Identity(r, r))).transpose();
  out.set = ss::equality_slice(interval, trace_row, Vector::Constant(1, double(k0)));
  out.sbar = Bbar_svec;
  if (!out.set.contains(Bbar_svec, 1e-8))
    throw std::invalid_argument("kyfan case 1: Bbar not in the spectral simplex");

  Matrix Bbar = smat(Bbar_svec);
  EigResult eb = eigh_jacobi(Bbar);
  std::vector<Cluster> clusters = cluster_eigenvalues(eb.values);
  double min_gap = 1.0;
  for (size_t c = 0; c + 1 < clusters.size(); ++c) {
    const double gap = clusters[c].value - clusters[c + 1].value;
    if (gap < 1e-6) throw std::invalid_argument("kyfan case 1: clusters not separated");
    min_gap = std::min(min_gap, gap);
  }
  const double band = 0.5 * std::max(1e-6, min_gap);

  struct Blk {
    double mu;
    Matrix E;
  };
  std::vector<Blk> blocks;
  for (const auto& c : clusters) {
    Matrix E(r, c.indices.size());
    for (size_t k = 0; k < c.indices.size(); ++k) E.col(k) = eb.vectors.col(c.indices[k]);
    blocks.push_back({c.value, E});
  }
  int dim = 0;
  for (const auto& b : blocks) dim += svec_dim(static_cast<int>(b.E.cols()));

  auto value_fn = [blocks, band, dim](const Vector& xs) -> Vector {
    Matrix X = smat(xs);
    Vector outv(dim);
    int pos = 0;
    for (const auto& b : blocks) {
      Matrix Q = cluster_frame(X, b.E, b.mu - band, b.mu + band);
      const int dblk = static_cast<int>(b.E.cols());
      Matrix comp = Q.transpose() * X * Q - b.mu * Matrix::Identity(dblk, dblk);
      outv.segment(pos, svec_dim(dblk)) = svec(Matrix(0.5 * (comp + comp.transpose())));
      pos += svec_dim(dblk);
    }
    return outv;
  };
  out.G = SmoothMap(svec_dim(r), dim, value_fn);

  // K: trace-sum zero, leading block <= 0 when mu_1 = 1, trailing block >= 0
  // when mu_q = 0
  std::vector<SupportSet> parts;
  Matrix trace_in_coords(1, dim);
  int pos = 0;
  for (size_t i = 0; i < blocks.size(); ++i) {
    const int dblk = static_cast<int>(blocks[i].E.cols());
    const bool top_active = (i == 0) && blocks[i].mu >= 1.0 - kActiveTol;
    const bool bottom_active = (i + 1 == blocks.size()) && blocks[i].mu <= kActiveTol;
    if (top_active) {
      parts.push_back(ss::negative_psd_cone(dblk));
    } else if (bottom_active) {
      parts.push_back(ss::psd_cone(dblk));
    } else {
      parts.push_back(ss::subspace(Matrix::Identity(svec_dim(dblk), svec_dim(dblk)),
                                   svec_dim(dblk)));
    }
    trace_in_coords.block(0, pos, 1, svec_dim(dblk)) =
        svec(Matrix(Matrix::Identity(dblk, dblk))).transpose();
    pos += svec_dim(dblk);
  }
  out.K = ss::equality_slice(ss::product(parts), trace_in_coords, Vector::Zero(1));
  out.radius = std::min(0.1, 0.2 * band);
  return normalize_pointed(out);
}

ReductionPair build_reduction_kyfan_case2(int r, int s, int k0, const Vector& Bbar_vec) {
  ReductionPair out;
  out.name = "kyfan-case2";
  out.set = ss::kyfan_ball(r, s, double(k0));
  out.sbar = Bbar_vec;
  if (!out.set.contains(Bbar_vec, 1e-8))
    throw std::invalid_argument("kyfan case 2: Bbar not in the ball");

  Matrix Bbar = unvec_of(Bbar_vec, r, s);
  SvdResult sv = svd_dilation(Bbar);
  const double nuc = sv.sigma.sum();
  const bool spec_active = sv.sigma.size() > 0 && sv.sigma[0] >= 1.0 - kActiveTol;
  const bool nuc_active = k0 < std::min(r, s) && nuc >= double(k0) - kActiveTol;

  std::vector<Cluster> clusters = cluster_eigenvalues(sv.sigma);
  double min_gap = 1.0;
  for (size_t c = 0; c + 1 < clusters.size(); ++c) {
    const double gap = clusters[c].value - clusters[c + 1].value;
    if (gap < 1e-6) throw std::invalid_argument("kyfan case 2: clusters not separated");
    min_gap = std::min(min_gap, gap);
  }
  const double band = 0.5 * std::max(1e-6, std::min(min_gap, clusters.back().value > kActiveTol
                                                                 ? clusters.back().value
                                                                 : 1.0));
  const bool zero_branch = clusters.back().value <= kActiveTol;

  // dilation frames for the positive clusters
  const int nd = r + s;
  Matrix T0 = Matrix::Zero(nd, nd);
  T0.block(0, r, r, s) = Bbar;
  T0.block(r, 0, s, r) = Bbar.transpose();

  struct Blk {
    double mu;
    Matrix E;  // (r+s) x d frame of the dilation
  };
  std::vector<Blk> blocks;
  const size_t positive_clusters = clusters.size() - (zero_branch ? 1 : 0);
  {
    EigResult et = eigh_jacobi(T0);
    for (size_t c = 0; c < positive_clusters; ++c) {
      std::vector<int> idx;
      for (int i = 0; i < et.values.size(); ++i)
        if (std::abs(et.values[i] - clusters[c].value) <=
            kClusterBandwidth * (1.0 + clusters[c].value) + 1e-9)
          idx.push_back(i);
      Matrix E(nd, idx.size());
      for (size_t k = 0; k < idx.size(); ++k) E.col(k) = et.vectors.col(idx[k]);
      blocks.push_back({clusters[c].value, E});
    }
  }

  // zero-branch frames on X X^T and X^T X
  Matrix ELz, ERz;
  int dzl = 0, dzr = 0;
  if (zero_branch) {
    dzl = r;
    for (size_t c = 0; c < positive_clusters; ++c)
      dzl -= static_cast<int>(clusters[c].indices.size());
    dzr = s - (r - dzl);
    EigResult el = eigh_jacobi(Matrix(Bbar * Bbar.transpose()));
    Matrix EL(r, dzl);
    for (int k = 0; k < dzl; ++k) EL.col(k) = el.vectors.col(r - 1 - k);
    ELz = EL;
    EigResult er = eigh_jacobi(Matrix(Bbar.transpose() * Bbar));
    Matrix ER(s, dzr);
    for (int k = 0; k < dzr; ++k) ER.col(k) = er.vectors.col(s - 1 - k);
    ERz = ER;
  }

  int dim = 0;
  std::vector<int> blk_dims;
  for (const auto& b : blocks) {
    blk_dims.push_back(svec_dim(static_cast<int>(b.E.cols())));
    dim += blk_dims.back();
  }
  if (zero_branch) dim += dzl * dzr;

  const int rr = r, ss_ = s;
  auto value_fn = [blocks, band, dim, zero_branch, ELz, ERz, dzl, dzr, rr, ss_,
                   nd](const Vector& xv) -> Vector {
    Matrix X = unvec_of(xv, rr, ss_);
    Matrix T = Matrix::Zero(nd, nd);
    T.block(0, rr, rr, ss_) = X;
    T.block(rr, 0, ss_, rr) = X.transpose();
    Vector outv(dim);
    int pos = 0;
    for (const auto& b : blocks) {
      Matrix Q = cluster_frame(T, b.E, b.mu - band, b.mu + band);
      const int dblk = static_cast<int>(b.E.cols());
      Matrix comp = Q.transpose() * T * Q - b.mu * Matrix::Identity(dblk, dblk);
      outv.segment(pos, svec_dim(dblk)) = svec(Matrix(0.5 * (comp + comp.transpose())));
      pos += svec_dim(dblk);
    }
    if (zero_branch) {
      const double zb = band * band;  // eigenvalues of the Gram matrices
      Matrix Lq = cluster_frame(Matrix(X * X.transpose()), ELz, -zb, zb);
      Matrix Rq = cluster_frame(Matrix(X.transpose() * X), ERz, -zb, zb);
      Matrix comp = Lq.transpose() * X * Rq;
      for (int i = 0; i < dzl; ++i)
        for (int j = 0; j < dzr; ++j) outv[pos + i * dzr + j] = comp(i, j);
      pos += dzl * dzr;
    }
    return outv;
  };
  out.G = SmoothMap(r * s, dim, value_fn);

  // cone: leading block <= 0 when the spectral norm is active; trace/nuclear
  // coupling when the nuclear norm is active
  const bool lead_active = spec_active && !blocks.empty();
  std::vector<int> dims = blk_dims;
  const bool zb = zero_branch;
  const int dl = dzl, dr = dzr;
  auto contains_fn = [lead_active, nuc_active, dims, zb, dl, dr](const Vector& y,
                                                                 double tol) -> bool {
    int pos = 0;
    double trace_sum = 0.0;
    for (size_t i = 0; i < dims.size(); ++i) {
      Matrix Q = smat(y.segment(pos, dims[i]));
      if (i == 0 && lead_active) {
        if (eigh_jacobi(Q).values.maxCoeff() > tol) return false;
      }
      trace_sum += Q.trace();
      pos += dims[i];
    }
    if (zb) {
      Matrix Z(dl, dr);
      for (int i = 0; i < dl; ++i)
        for (int j = 0; j < dr; ++j) Z(i, j) = y[pos + i * dr + j];
      trace_sum += nuclear_norm(Z);
      pos += dl * dr;
    }
    if (nuc_active && trace_sum > tol) return false;
    return true;
  };
  out.K = ss::implicit_set(dim, contains_fn, "kyfan-case2-cone");
  out.radius = std::min(0.1, 0.2 * band);

  // lineality of T_K(0), assembled from the constraint structure
  std::vector<Vector> rows;
  {
    int pos = 0;
    Vector trace_row = Vector::Zero(dim);
    for (size_t i = 0; i < blk_dims.size(); ++i) {
      const int dblk = static_cast<int>(blocks[i].E.cols());
      if (i == 0 && lead_active) {
        for (int c = 0; c < blk_dims[i]; ++c) {
          Vector e = Vector::Zero(dim);
          e[pos + c] = 1.0;
          rows.push_back(e);
        }
      }
      trace_row.segment(pos, blk_dims[i]) = svec(Matrix(Matrix::Identity(dblk, dblk)));
      pos += blk_dims[i];
    }
    if (zero_branch && nuc_active) {
      for (int c = 0; c < dzl * dzr; ++c) {
        Vector e = Vector::Zero(dim);
        e[pos + c] = 1.0;
        rows.push_back(e);
      }
    }
    if (nuc_active) rows.push_back(trace_row);
  }
  Matrix constraint(rows.size(), dim);
  for (size_t i = 0; i < rows.size(); ++i) constraint.row(i) = rows[i].transpose();
  Matrix lin = rows.empty() ? Matrix::Identity(dim, dim) : nullspace(constraint);
  return normalize_pointed_with(out, lin);
}

ReductionPair build_reduction_kyfan_support(int m, int n, int k, const Vector& Bbar,
                                            int case_id) {
  if (case_id == 1) {
    const int r = smat_order(static_cast<int>(Bbar.size()));
    (void)m;
    (void)n;
    return build_reduction_kyfan_case1(r, k, Bbar);
  }
  if (case_id == 2) return build_reduction_kyfan_case2(m, n, k, Bbar);
  throw std::invalid_argument("kyfan support: case must be 1 or 2");
}

}  // namespace epivar
