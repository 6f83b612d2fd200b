#include "epivar/opt.hpp"

#include <cmath>
#include <stdexcept>

namespace epivar {

// ---------------------------------------------------------------- simplex

namespace {

// Standard-form simplex:  max c^T u, A u = b, u >= 0, b >= 0, with an
// identity block appended for the phase-1 artificials.
struct Tableau {
  Matrix T;               // (m+1) x (n+1); last row = objective, last col = rhs
  std::vector<int> basis;  // size m

  int rows() const { return static_cast<int>(T.rows()) - 1; }
  int cols() const { return static_cast<int>(T.cols()) - 1; }

  // Bland's rule pivoting; returns false when unbounded.
  bool run(double tol) {
    for (int iter = 0; iter < 20000; ++iter) {
      int enter = -1;
      for (int j = 0; j < cols(); ++j)
        if (T(rows(), j) > tol) {
          enter = j;
          break;
        }
      if (enter < 0) return true;  // optimal
      int leave = -1;
      double best = kInf;
      for (int i = 0; i < rows(); ++i) {
        if (T(i, enter) > tol) {
          const double ratio = T(i, cols()) / T(i, enter);
          if (ratio < best - 1e-15 ||
              (ratio < best + 1e-15 && (leave < 0 || basis[i] < basis[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex: iteration cap reached");
  }

  void pivot(int r, int c) {
    T.row(r) /= T(r, c);
    for (int i = 0; i <= rows(); ++i) {
      if (i == r) continue;
      const double f = T(i, c);
      if (f != 0.0) T.row(i) -= f * T.row(r);
    }
    basis[r] = c;
  }
};

}  // namespace

LpResult solve_lp(const Vector& c, const Matrix& A, const Vector& b) {
  // x free -> x = u - v, u, v >= 0; slacks s >= 0: A(u - v) + s = b.
  const int n = static_cast<int>(c.size());
  const int m = static_cast<int>(b.size());
  const int nv = 2 * n + m;  // u, v, s

  Matrix Aeq(m, nv);
  Aeq << A, -A, Matrix::Identity(m, m);
  Vector beq = b;
  for (int i = 0; i < m; ++i)
    if (beq[i] < 0) {
      Aeq.row(i) *= -1.0;
      beq[i] *= -1.0;
    }
  Vector cost(nv);
  cost << c, -c, Vector::Zero(m);

  const double tol = 1e-9;

  // phase 1
  Tableau t1;
  t1.T = Matrix::Zero(m + 1, nv + m + 1);
  t1.T.block(0, 0, m, nv) = Aeq;
  t1.T.block(0, nv, m, m) = Matrix::Identity(m, m);
  t1.T.block(0, nv + m, m, 1) = beq;
  t1.basis.resize(m);
  for (int i = 0; i < m; ++i) t1.basis[i] = nv + i;
  // objective: maximize -sum(artificials) => row = sum of constraint rows over
  // artificial columns reduced
  for (int j = 0; j < nv; ++j) t1.T(m, j) = Aeq.col(j).sum();
  t1.T(m, nv + m) = beq.sum();
  if (!t1.run(tol)) throw std::runtime_error("simplex phase 1 unbounded");
  if (t1.T(m, nv + m) > 1e-7) return {LpStatus::kInfeasible, Vector::Zero(n), 0.0};

  // drive artificials out of the basis where possible
  for (int i = 0; i < m; ++i) {
    if (t1.basis[i] >= nv) {
      int enter = -1;
      for (int j = 0; j < nv; ++j)
        if (std::abs(t1.T(i, j)) > 1e-9) {
          enter = j;
          break;
        }
      if (enter >= 0) t1.pivot(i, enter);
    }
  }

  // phase 2
  Tableau t2;
  t2.T = Matrix::Zero(m + 1, nv + 1);
  t2.T.block(0, 0, m, nv) = t1.T.block(0, 0, m, nv);
  t2.T.block(0, nv, m, 1) = t1.T.block(0, nv + m, m, 1);
  t2.basis = t1.basis;
  for (int i = 0; i < m; ++i)
    if (t2.basis[i] >= nv) t2.basis[i] = nv;  // stuck artificial on a zero row
  t2.T.row(m).setZero();
  for (int j = 0; j < nv; ++j) t2.T(m, j) = cost[j];
  for (int i = 0; i < m; ++i) {
    if (t2.basis[i] < nv) t2.T.row(m) -= cost[t2.basis[i]] * t2.T.row(i);
  }
  if (!t2.run(tol)) return {LpStatus::kUnbounded, Vector::Zero(n), kInf};

  Vector u = Vector::Zero(nv);
  for (int i = 0; i < m; ++i)
    if (t2.basis[i] < nv) u[t2.basis[i]] = t2.T(i, nv);
  LpResult out;
  out.status = LpStatus::kOptimal;
  out.x = u.head(n) - u.segment(n, n);
  out.value = c.dot(out.x);
  return out;
}

// ------------------------------------------------------------------ NNLS

Vector nnls(const Matrix& V, const Vector& z, double tol) {
  const int n = static_cast<int>(V.cols());
  Vector y = Vector::Zero(n);
  if (n == 0) return y;
  std::vector<bool> active(n, false);  // passive set P = active[i] == true
  Vector w = V.transpose() * (z - V * y);
  const double scale = std::max(1.0, z.norm());

  for (int outer = 0; outer < 4 * n + 40; ++outer) {
    int t = -1;
    double best = tol * scale;
    for (int i = 0; i < n; ++i)
      if (!active[i] && w[i] > best) {
        best = w[i];
        t = i;
      }
    if (t < 0) break;
    active[t] = true;

    for (int inner = 0; inner < 4 * n + 40; ++inner) {
      std::vector<int> idx;
      for (int i = 0; i < n; ++i)
        if (active[i]) idx.push_back(i);
      Matrix Vp(V.rows(), idx.size());
      for (size_t k = 0; k < idx.size(); ++k) Vp.col(k) = V.col(idx[k]);
      Vector s = lsq_solve(Vp, z);
      bool ok = true;
      for (int i = 0; i < s.size(); ++i)
        if (s[i] <= tol) ok = false;
      if (ok) {
        y.setZero();
        for (size_t k = 0; k < idx.size(); ++k) y[idx[k]] = s[k];
        break;
      }
      // step back to the boundary
      double alpha = kInf;
      for (size_t k = 0; k < idx.size(); ++k) {
        if (s[k] <= tol) {
          const double yi = y[idx[k]];
          const double d = yi - s[k];
          if (d > 1e-300) alpha = std::min(alpha, yi / d);
        }
      }
      if (!std::isfinite(alpha)) alpha = 0.0;
      for (size_t k = 0; k < idx.size(); ++k) {
        y[idx[k]] += alpha * (s[k] - y[idx[k]]);
        if (y[idx[k]] <= tol) {
          y[idx[k]] = 0.0;
          active[idx[k]] = false;
        }
      }
    }
    w = V.transpose() * (z - V * y);
  }
  return y;
}

// ---------------------------------------------------------------- Dykstra

DykstraResult dykstra(const Vector& z, const std::vector<ProjectionFn>& projections, int max_iter,
                      double tol) {
  const int p = static_cast<int>(projections.size());
  DykstraResult out;
  if (p == 0) {
    out.point = z;
    out.converged = true;
    return out;
  }
  Vector x = z;
  std::vector<Vector> inc(p, Vector::Zero(z.size()));
  Vector prev = x;
  for (int it = 0; it < max_iter; ++it) {
    prev = x;
    for (int i = 0; i < p; ++i) {
      const Vector y = x + inc[i];
      x = projections[i](y);
      inc[i] = y - x;
    }
    out.iterations = it + 1;
    out.last_change = (x - prev).norm();
    if (out.last_change < tol) {
      out.converged = true;
      break;
    }
  }
  out.point = x;
  return out;
}

DykstraResult project_onto_sum(const Vector& z, const std::vector<ProjectionFn>& projections,
                               int max_iter, double tol) {
  const int p = static_cast<int>(projections.size());
  DykstraResult out;
  if (p == 0) {
    out.point = Vector::Zero(z.size());
    out.converged = true;
    return out;
  }
  std::vector<Vector> a(p, Vector::Zero(z.size()));
  Vector sum = Vector::Zero(z.size());
  for (int it = 0; it < max_iter; ++it) {
    double change = 0.0;
    for (int i = 0; i < p; ++i) {
      const Vector target = z - (sum - a[i]);
      Vector ai = projections[i](target);
      change = std::max(change, (ai - a[i]).norm());
      sum += ai - a[i];
      a[i] = ai;
    }
    out.iterations = it + 1;
    out.last_change = change;
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  out.point = sum;
  return out;
}

// ------------------------------------------------------- 1-D minimization

double minimize_scalar(const std::function<double(double)>& f, double lo, double hi, double tol,
                       int max_iter) {
  const double gr = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  return (f(xm) <= std::min(f1, f2)) ? xm : (f1 <= f2 ? x1 : x2);
}

double minimize_scalar_unbounded(const std::function<double(double)>& f, double x0,
                                 double initial_step, double tol) {
  double step = initial_step;
  double mid = x0;
  double lo = mid - step, hi = mid + step;
  double flo = f(lo), fmid = f(mid), fhi = f(hi);
  for (int it = 0; it < 200 && !(fmid <= flo && fmid <= fhi); ++it) {
    step *= 2.0;
    if (flo < fhi) {  // walk left
      hi = mid;
      fhi = fmid;
      mid = lo;
      fmid = flo;
      lo = mid - step;
      flo = f(lo);
    } else {  // walk right
      lo = mid;
      flo = fmid;
      mid = hi;
      fmid = fhi;
      hi = mid + step;
      fhi = f(hi);
    }
  }
  return minimize_scalar(f, lo, hi, tol);
}

// ----------------------------------------- capped-simplex value projection

namespace {
double clamp01(double v, double cap) { return std::min(cap, std::max(0.0, v)); }
}  // namespace

Vector project_capped_simplex_eq(const Vector& s, double cap, double budget, double tol) {
  const int n = static_cast<int>(s.size());
  auto total = [&](double mu) {
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += clamp01(s[i] - mu, cap);
    return t;
  };
  double lo = s.minCoeff() - cap - 1.0, hi = s.maxCoeff() + 1.0;
  for (int it = 0; it < 300 && (hi - lo) > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total(mid) > budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double mu = 0.5 * (lo + hi);
  Vector y(n);
  for (int i = 0; i < n; ++i) y[i] = clamp01(s[i] - mu, cap);
  return y;
}

Vector project_capped_simplex_le(const Vector& s, double cap, double budget, double tol) {
  Vector clipped(s.size());
  for (int i = 0; i < s.size(); ++i) clipped[i] = clamp01(s[i], cap);
  if (clipped.sum() <= budget + tol) return clipped;
  return project_capped_simplex_eq(s, cap, budget, tol);
}

}  // namespace epivar
