#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "isac/conic/cones.hpp"
#include "isac/conic/program.hpp"
#include "isac/conic/scaling.hpp"

namespace isac::conic {

enum class Status { optimal, infeasible, unbounded, inaccurate, numerical_failure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::inaccurate: return "inaccurate";
    case Status::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

struct Settings {
  double accuracy = 1e-8;
  int max_iterations = 200;
  bool equilibrate = true;
  int ruiz_passes = 10;
  int refinement_steps = 2;
};

struct Solution {
  Status status = Status::numerical_failure;
  VectorXd x, s, z, y;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
  double dual_residual = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::string diagnostics;

  bool usable() const { return status == Status::optimal || status == Status::inaccurate; }
  double value(const AffineExpr& e) const { return e.evaluate(x); }
  double value(int index) const { return x(index); }
  MatrixXcd value(const HermitianVar& H) const { return H.value(x); }
};

namespace detail {

// Reduced KKT solves for
//   [0  A'  G'      ] [x]   [r1]
//   [A  0   0       ] [y] = [r2]
//   [G  0  -W'W     ] [z]   [r3]
// via H = G'(W'W)^{-1}G and the augmented system [[H, A'], [A, 0]].
class KktSolver {
 public:
  KktSolver(const StandardForm& sf, const ConeLayout& L) : sf_(sf), L_(L) {
    const int n = sf.num_vars();
    Gt_ = sf.G.transpose();
    Grow_ = sf.G;
    // per-block column lists and PSD column entries in matrix form
    soc_cols_.resize(L.soc.size());
    psd_cols_.resize(L.psd.size());
    psd_entries_.resize(L.psd.size());
    std::vector<std::vector<std::pair<int, double>>> row_terms(L.total);
    for (int j = 0; j < n; ++j)
      for (Eigen::SparseMatrix<double>::InnerIterator it(sf.G, j); it; ++it)
        row_terms[it.row()].emplace_back(j, it.value());
    for (std::size_t b = 0; b < L.soc.size(); ++b) {
      std::vector<int> cols;
      for (int r = L.soc_off[b]; r < L.soc_off[b] + L.soc[b]; ++r)
        for (const auto& t : row_terms[r]) cols.push_back(t.first);
      std::sort(cols.begin(), cols.end());
      cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
      soc_cols_[b] = cols;
    }
    const double ir2 = 1.0 / std::sqrt(2.0);
    for (std::size_t b = 0; b < L.psd.size(); ++b) {
      const int order = L.psd[b];
      std::map<int, std::vector<Entry>> by_col;
      for (int k = 0; k < svec_size(order); ++k) {
        const auto [i, jj] = svec_position(k, order);
        for (const auto& [col, v] : row_terms[L.psd_off[b] + k]) {
          if (i == jj) {
            by_col[col].push_back({i, i, v});
          } else {
            by_col[col].push_back({i, jj, v * ir2});
            by_col[col].push_back({jj, i, v * ir2});
          }
        }
      }
      for (auto& [col, list] : by_col) {
        psd_cols_[b].push_back(col);
        psd_entries_[b].push_back(std::move(list));
      }
    }
  }

  bool factor(const NtScaling& W) {
    W_ = &W;
    const int n = sf_.num_vars();
    const int p = sf_.num_eq();
    MatrixXd H = MatrixXd::Zero(n, n);

    // nonnegative rows
    const VectorXd& d = W.nonneg_scale();
    for (int r = 0; r < L_.nonneg; ++r) {
      const double w = 1.0 / (d(r) * d(r));
      std::vector<std::pair<int, double>> row;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Grow_, r); it; ++it)
        row.emplace_back(static_cast<int>(it.col()), it.value());
      for (const auto& [a, ga] : row)
        for (const auto& [c, gc] : row) H(a, c) += w * ga * gc;
    }
    // SOC blocks
    for (std::size_t b = 0; b < L_.soc.size(); ++b) {
      const auto& cols = soc_cols_[b];
      const int o = L_.soc_off[b];
      const int dim = L_.soc[b];
      MatrixXd Gc = MatrixXd::Zero(dim, static_cast<int>(cols.size()));
      for (int r = 0; r < dim; ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Grow_, o + r); it; ++it) {
          const auto pos = std::lower_bound(cols.begin(), cols.end(), static_cast<int>(it.col())) - cols.begin();
          Gc(r, pos) = it.value();
        }
      const MatrixXd Gs = W.soc_inverse_matrix(b) * Gc;
      const MatrixXd Hb = Gs.transpose() * Gs;
      for (std::size_t a = 0; a < cols.size(); ++a)
        for (std::size_t c = 0; c < cols.size(); ++c) H(cols[a], cols[c]) += Hb(a, c);
    }
    // PSD blocks: H_jk = tr(G_j Q G_k Q)
    for (std::size_t b = 0; b < L_.psd.size(); ++b) {
      const MatrixXd& Q = W.psd_q(b);
      const int order = L_.psd[b];
      const auto& cols = psd_cols_[b];
      const auto& ent = psd_entries_[b];
      MatrixXd M(order, order);
      for (std::size_t a = 0; a < cols.size(); ++a) {
        M.setZero();
        for (const Entry& e : ent[a]) M.noalias() += e.v * Q.col(e.i) * Q.row(e.j);
        for (std::size_t c = a; c < cols.size(); ++c) {
          double acc = 0.0;
          for (const Entry& e : ent[c]) acc += e.v * M(e.j, e.i);
          H(cols[a], cols[c]) += acc;
          if (c != a) H(cols[c], cols[a]) += acc;
        }
      }
    }

    const double reg = 1e-16 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    if (p == 0) {
      H.diagonal().array() += reg;
      llt_.compute(H);
      use_llt_ = (llt_.info() == Eigen::Success);
      if (use_llt_) return true;
      lu_.compute(H);
    } else {
      MatrixXd K = MatrixXd::Zero(n + p, n + p);
      K.topLeftCorner(n, n) = H;
      K.topLeftCorner(n, n).diagonal().array() += reg;
      const MatrixXd Ad = MatrixXd(sf_.A);
      K.topRightCorner(n, p) = Ad.transpose();
      K.bottomLeftCorner(p, n) = Ad;
      K.bottomRightCorner(p, p).diagonal().setConstant(-reg);
      use_llt_ = false;
      lu_.compute(K);
    }
    return true;
  }

  // Solves the full system with iterative refinement; refinement continues
  // past the requested count while it still shrinks the residual.
  void solve(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& x, VectorXd& y, VectorXd& z,
             int refinement) const {
    reduced_solve(r1, r2, r3, x, y, z);
    const auto residual = [&](VectorXd& e1, VectorXd& e2, VectorXd& e3) {
      e1 = r1 - Gt_ * z - (sf_.num_eq() ? VectorXd(sf_.A.transpose() * y) : VectorXd::Zero(r1.size()));
      e2 = r2 - (sf_.num_eq() ? VectorXd(sf_.A * x) : VectorXd::Zero(0));
      e3 = r3 - (sf_.G * x - W_->apply(NtScaling::Op::Wt, W_->apply(NtScaling::Op::W, z)));
      return std::sqrt(e1.squaredNorm() + e2.squaredNorm() + e3.squaredNorm());
    };
    VectorXd e1, e2, e3;
    double err = residual(e1, e2, e3);
    for (int it = 0; it < kMaxRefinement && err > 0.0; ++it) {
      VectorXd dx, dy, dz;
      reduced_solve(e1, e2, e3, dx, dy, dz);
      x += dx;
      y += dy;
      z += dz;
      VectorXd f1, f2, f3;
      const double next = residual(f1, f2, f3);
      if (it >= refinement && !(next < 0.5 * err)) {
        if (!(next <= err)) {  // the last correction hurt
          x -= dx;
          y -= dy;
          z -= dz;
        }
        break;
      }
      err = next;
      e1 = std::move(f1);
      e2 = std::move(f2);
      e3 = std::move(f3);
    }
  }

 private:
  static constexpr int kMaxRefinement = 10;

  struct Entry {
    int i, j;
    double v;
  };

  void reduced_solve(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& x, VectorXd& y,
                     VectorXd& z) const {
    const int n = sf_.num_vars();
    const int p = sf_.num_eq();
    const VectorXd t3 = W_->apply_wtw_inv(r3);
    const VectorXd rx = r1 + Gt_ * t3;
    if (p == 0) {
      x = use_llt_ ? VectorXd(llt_.solve(rx)) : VectorXd(lu_.solve(rx));
      y.resize(0);
    } else {
      VectorXd rhs(n + p);
      rhs << rx, r2;
      const VectorXd sol = lu_.solve(rhs);
      x = sol.head(n);
      y = sol.tail(p);
    }
    z = W_->apply_wtw_inv(sf_.G * x) - t3;
  }

  const StandardForm& sf_;
  const ConeLayout& L_;
  Eigen::SparseMatrix<double> Gt_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> Grow_;
  std::vector<std::vector<int>> soc_cols_;
  std::vector<std::vector<int>> psd_cols_;
  std::vector<std::vector<std::vector<Entry>>> psd_entries_;
  const NtScaling* W_ = nullptr;
  Eigen::LLT<MatrixXd> llt_;
  Eigen::PartialPivLU<MatrixXd> lu_;
  bool use_llt_ = false;
};

inline double safe_norm(const VectorXd& v) { return v.size() ? v.norm() : 0.0; }

}  // namespace detail

// Homogeneous self-dual primal-dual interior-point method with
// Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
inline Solution solve_standard_form(const StandardForm& original, const Settings& settings = {}) {
  StandardForm sf = original;
  ScalingRecord rec = settings.equilibrate ? equilibrate(sf, settings.ruiz_passes) : identity_scaling(sf);
  const ConeLayout L(sf);
  const int n = sf.num_vars();
  const int p = sf.num_eq();
  const int m = L.total;
  const VectorXd e = cone_identity(L);
  const double tol = settings.accuracy;

  Solution sol;
  std::ostringstream diag;
  detail::KktSolver kkt(sf, L);
  NtScaling W(L);
  VectorXd x, y, z, s;

  // Starting point: least-norm primal / dual estimates shifted into the cone.
  kkt.factor(W);
  {
    VectorXd xx, yy, zz;
    kkt.solve(VectorXd::Zero(n), sf.b, sf.h, xx, yy, zz, settings.refinement_steps);
    x = xx;
    s = -zz;
    kkt.solve(-sf.c, VectorXd::Zero(p), VectorXd::Zero(m), xx, yy, zz, settings.refinement_steps);
    y = yy;
    z = zz;
    const double ts = cone_violation(L, s);
    if (ts >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + ts) * e;
    const double tz = cone_violation(L, z);
    if (tz >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + tz) * e;
  }
  double tau = 1.0;
  double kappa = 1.0;

  const double resx0 = std::max(1.0, sf.c.norm());
  const double resy0 = std::max(1.0, detail::safe_norm(sf.b));
  const double resz0 = std::max(1.0, sf.h.norm());
  const auto At = [&](const VectorXd& v) { return p ? VectorXd(sf.A.transpose() * v) : VectorXd::Zero(n); };
  const auto Ax = [&](const VectorXd& v) { return p ? VectorXd(sf.A * v) : VectorXd::Zero(0); };

  Status status = Status::numerical_failure;
  double pres = NAN, dres = NAN, gap = NAN;
  // Ill-conditioned KKT systems can derail the last few iterations; the best
  // iterate seen is kept as a fallback.
  struct Snapshot {
    VectorXd x, y, z, s;
    double tau = 1.0, kappa = 1.0, pres = INFINITY, dres = INFINITY, gap = INFINITY, merit = INFINITY;
  } best;
  int iter = 0;
  for (; iter <= settings.max_iterations; ++iter) {
    const VectorXd rx = At(y) + sf.G.transpose() * z + tau * sf.c;
    const VectorXd ry = Ax(x) - tau * sf.b;
    const VectorXd rz = s + sf.G * x - tau * sf.h;
    const double cx = sf.c.dot(x);
    const double by_hz = (p ? sf.b.dot(y) : 0.0) + sf.h.dot(z);
    const double rt = kappa + cx + by_hz;
    gap = s.dot(z);
    const double pcost = cx / tau;
    const double dcost = -by_hz / tau;
    pres = std::max(detail::safe_norm(ry) / resy0, rz.norm() / resz0) / tau;
    dres = rx.norm() / resx0 / tau;
    double relgap = NAN;
    if (pcost < 0.0)
      relgap = gap / (tau * tau) / -pcost;
    else if (dcost > 0.0)
      relgap = gap / (tau * tau) / dcost;

    const double gap_measure = std::isnan(relgap) ? gap / (tau * tau) : std::min(relgap, gap / (tau * tau));
    const double merit = std::max({pres, dres, gap_measure});
    if (merit < best.merit) best = {x, y, z, s, tau, kappa, pres, dres, gap, merit};
    if (pres <= tol && dres <= tol && (gap / (tau * tau) <= tol || (!std::isnan(relgap) && relgap <= tol))) {
      status = Status::optimal;
      break;
    }
    if (by_hz < 0.0) {
      const double pinf = (At(y) + sf.G.transpose() * z).norm() / resx0 / -by_hz;
      if (pinf <= tol) {
        status = Status::infeasible;
        break;
      }
    }
    if (cx < 0.0) {
      const double dinf = std::max(detail::safe_norm(Ax(x)) / resy0, (sf.G * x + s).norm() / resz0) / -cx;
      if (dinf <= tol) {
        status = Status::unbounded;
        break;
      }
    }
    if (iter == settings.max_iterations) break;

    if (!W.update(s, z)) {
      diag << "scaling failed at iteration " << iter << "; ";
      break;
    }
    kkt.factor(W);
    const VectorXd& lam = W.lambda();
    const double mu = (gap + tau * kappa) / (L.degree + 1);

    VectorXd x1, y1, z1;
    kkt.solve(sf.c, -sf.b, -sf.h, x1, y1, z1, settings.refinement_steps);
    const VectorXd Wz1 = W.apply(NtScaling::Op::W, z1);
    const double denom_base = sf.c.dot(x1) + (p ? sf.b.dot(y1) : 0.0) + sf.h.dot(z1);

    const VectorXd lam_sq = cone_product(L, lam, lam);
    VectorXd dsa, dza;
    double dtau_a = 0.0, dkappa_a = 0.0;
    double sigma = 0.0;
    VectorXd dx, dy, dz, ds, ds_t, dz_t;
    double dtau = 0.0, dkappa = 0.0, step = 0.0;
    bool failed = false;
    for (int pass = 0; pass < 2; ++pass) {
      const double shrink = (pass == 0) ? 1.0 : (1.0 - sigma);
      VectorXd rc = -lam_sq;
      double rtk = -tau * kappa;
      if (pass == 1) {
        rc += sigma * mu * e - cone_product(L, dsa, dza);
        rtk += sigma * mu - dtau_a * dkappa_a;
      }
      const VectorXd v = cone_divide(L, lam, rc);
      const VectorXd r1 = -shrink * rx;
      const VectorXd r2 = -shrink * ry;
      const VectorXd r3 = -shrink * rz - W.apply(NtScaling::Op::Wt, v);
      const double r4 = -shrink * rt - rtk / tau;
      VectorXd x0, y0, z0;
      kkt.solve(r1, r2, r3, x0, y0, z0, settings.refinement_steps);
      const double num = sf.c.dot(x0) + (p ? sf.b.dot(y0) : 0.0) + sf.h.dot(z0) - r4;
      const double den = denom_base + kappa / tau;
      dtau = num / den;
      dx = x0 - dtau * x1;
      dy = y0 - dtau * y1;
      dz = z0 - dtau * z1;
      dz_t = W.apply(NtScaling::Op::W, z0) - dtau * Wz1;
      ds_t = v - dz_t;
      dkappa = (rtk - kappa * dtau) / tau;

      double amax = std::min(cone_max_step(L, lam, ds_t), cone_max_step(L, lam, dz_t));
      if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
      if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
      if (!std::isfinite(dtau) || !dx.allFinite() || !dz.allFinite()) {
        failed = true;
        break;
      }
      if (pass == 0) {
        const double a = std::min(1.0, amax);
        sigma = std::pow(1.0 - a, 3);
        dsa = ds_t;
        dza = dz_t;
        dtau_a = dtau;
        dkappa_a = dkappa;
      } else {
        step = std::min(1.0, 0.99 * amax);
      }
    }
    if (failed) {
      diag << "non-finite search direction at iteration " << iter << "; ";
      break;
    }
    ds = W.apply(NtScaling::Op::Wt, ds_t);
    x += step * dx;
    y += step * dy;
    z += step * dz;
    s += step * ds;
    tau += step * dtau;
    kappa += step * dkappa;
    if (step < 1e-12) {
      diag << "step length collapsed at iteration " << iter << "; ";
      break;
    }
  }

  if (status != Status::optimal && status != Status::infeasible && status != Status::unbounded) {
    if (best.merit < INFINITY) {
      x = best.x;
      y = best.y;
      z = best.z;
      s = best.s;
      tau = best.tau;
      kappa = best.kappa;
      pres = best.pres;
      dres = best.dres;
      gap = best.gap;
    }
    const double loose = std::sqrt(tol);
    status = (pres <= loose && dres <= loose && gap / (tau * tau) <= loose * std::max(1.0, std::abs(sf.c.dot(x) / tau)))
                 ? Status::inaccurate
                 : Status::numerical_failure;
  }

  sol.status = status;
  sol.iterations = iter;
  if (status == Status::infeasible || status == Status::unbounded) {
    // certificates are returned unnormalized
    sol.x = rec.unscale_x(x);
    sol.s = rec.unscale_s(s);
    sol.z = rec.unscale_z(z);
    sol.y = rec.unscale_y(y);
  } else {
    sol.x = rec.unscale_x(x / tau);
    sol.s = rec.unscale_s(s / tau);
    sol.z = rec.unscale_z(z / tau);
    sol.y = rec.unscale_y(y / tau);
  }
  sol.objective = original.c.dot(sol.x) + original.objective_constant;
  const VectorXd pr = original.G * sol.x + sol.s - original.h;
  double prim = pr.norm();
  if (p) prim = std::max(prim, (original.A * sol.x - original.b).norm());
  sol.primal_residual = prim;
  VectorXd dr = original.G.transpose() * sol.z + original.c;
  if (p) dr += original.A.transpose() * sol.y;
  sol.dual_residual = dr.norm();
  sol.gap = sol.s.dot(sol.z);
  diag << "iterations " << iter << ", scaled pres " << pres << ", dres " << dres;
  sol.diagnostics = diag.str();
  return sol;
}

inline Solution solve(const Program& program, const Settings& settings = {}) {
  return solve_standard_form(program.standard_form(), settings);
}

}  // namespace isac::conic
