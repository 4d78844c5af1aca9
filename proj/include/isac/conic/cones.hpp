#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "isac/conic/program.hpp"

namespace isac::conic {

struct ConeLayout {
  int nonneg = 0;
  std::vector<int> soc;      // block sizes
  std::vector<int> psd;      // matrix orders
  std::vector<int> soc_off;  // row offsets
  std::vector<int> psd_off;
  int total = 0;
  int degree = 0;

  ConeLayout() = default;
  ConeLayout(int nn, std::vector<int> soc_dims, std::vector<int> psd_orders)
      : nonneg(nn), soc(std::move(soc_dims)), psd(std::move(psd_orders)) {
    int off = nonneg;
    degree = nonneg;
    for (int d : soc) {
      soc_off.push_back(off);
      off += d;
      degree += 1;
    }
    for (int n : psd) {
      psd_off.push_back(off);
      off += svec_size(n);
      degree += n;
    }
    total = off;
  }
  explicit ConeLayout(const StandardForm& sf) : ConeLayout(sf.num_nonneg, sf.soc_dims, sf.psd_orders) {}
};

// svec <-> symmetric matrix (lower triangle column-major, sqrt 2 off-diagonals).
inline MatrixXd smat(const double* v, int n) {
  MatrixXd M(n, n);
  const double ir2 = 1.0 / std::sqrt(2.0);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i, ++k) {
      const double a = (i == j) ? v[k] : v[k] * ir2;
      M(i, j) = a;
      M(j, i) = a;
    }
  return M;
}

inline void svec(const MatrixXd& M, double* v) {
  const int n = static_cast<int>(M.rows());
  const double r2 = std::sqrt(2.0);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i, ++k) v[k] = (i == j) ? M(i, i) : r2 * 0.5 * (M(i, j) + M(j, i));
}

// (row, col) of the k-th svec entry of an order-n block.
inline std::pair<int, int> svec_position(int k, int n) {
  int j = 0;
  while (k >= n - j) {
    k -= n - j;
    ++j;
  }
  return {j + k, j};
}

inline VectorXd cone_identity(const ConeLayout& L) {
  VectorXd e = VectorXd::Zero(L.total);
  e.head(L.nonneg).setOnes();
  for (std::size_t b = 0; b < L.soc.size(); ++b) e(L.soc_off[b]) = 1.0;
  for (std::size_t b = 0; b < L.psd.size(); ++b) {
    const int n = L.psd[b];
    int k = L.psd_off[b];
    for (int j = 0; j < n; ++j) {
      e(k) = 1.0;
      k += n - j;
    }
  }
  return e;
}

// Smallest t with v + t e in the cone (negative when v is interior).
inline double cone_violation(const ConeLayout& L, const VectorXd& v) {
  double t = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < L.nonneg; ++i) t = std::max(t, -v(i));
  for (std::size_t b = 0; b < L.soc.size(); ++b) {
    const int o = L.soc_off[b];
    const int d = L.soc[b];
    t = std::max(t, v.segment(o + 1, d - 1).norm() - v(o));
  }
  for (std::size_t b = 0; b < L.psd.size(); ++b) {
    const MatrixXd M = smat(v.data() + L.psd_off[b], L.psd[b]);
    t = std::max(t, -Eigen::SelfAdjointEigenSolver<MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues()(0));
  }
  return t;
}

// Jordan product u o v.
inline VectorXd cone_product(const ConeLayout& L, const VectorXd& u, const VectorXd& v) {
  VectorXd w(L.total);
  w.head(L.nonneg) = u.head(L.nonneg).cwiseProduct(v.head(L.nonneg));
  for (std::size_t b = 0; b < L.soc.size(); ++b) {
    const int o = L.soc_off[b];
    const int d = L.soc[b];
    w(o) = u.segment(o, d).dot(v.segment(o, d));
    w.segment(o + 1, d - 1) = u(o) * v.segment(o + 1, d - 1) + v(o) * u.segment(o + 1, d - 1);
  }
  for (std::size_t b = 0; b < L.psd.size(); ++b) {
    const int n = L.psd[b];
    const MatrixXd U = smat(u.data() + L.psd_off[b], n);
    const MatrixXd V = smat(v.data() + L.psd_off[b], n);
    svec(0.5 * (U * V + V * U), w.data() + L.psd_off[b]);
  }
  return w;
}

// Solves lambda o x = r for x; PSD parts of lambda are diagonal.
inline VectorXd cone_divide(const ConeLayout& L, const VectorXd& lam, const VectorXd& r) {
  VectorXd x(L.total);
  x.head(L.nonneg) = r.head(L.nonneg).cwiseQuotient(lam.head(L.nonneg));
  for (std::size_t b = 0; b < L.soc.size(); ++b) {
    const int o = L.soc_off[b];
    const int d = L.soc[b];
    const double l0 = lam(o);
    const auto l1 = lam.segment(o + 1, d - 1);
    const auto r1 = r.segment(o + 1, d - 1);
    const double det = l0 * l0 - l1.squaredNorm();
    const double x0 = (l0 * r(o) - l1.dot(r1)) / det;
    x(o) = x0;
    x.segment(o + 1, d - 1) = (r1 - x0 * l1) / l0;
  }
  for (std::size_t b = 0; b < L.psd.size(); ++b) {
    const int n = L.psd[b];
    int k = L.psd_off[b];
    std::vector<double> diag(n);
    int kk = k;
    for (int j = 0; j < n; ++j) {
      diag[j] = lam(kk);
      kk += n - j;
    }
    for (int j = 0; j < n; ++j)
      for (int i = j; i < n; ++i, ++k) x(k) = 2.0 * r(k) / (diag[i] + diag[j]);
  }
  return x;
}

// Largest alpha >= 0 with lam + alpha d in the cone (PSD parts of lam diagonal).
inline double cone_max_step(const ConeLayout& L, const VectorXd& lam, const VectorXd& d) {
  double amax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < L.nonneg; ++i)
    if (d(i) < 0.0) amax = std::min(amax, -lam(i) / d(i));
  for (std::size_t b = 0; b < L.soc.size(); ++b) {
    const int o = L.soc_off[b];
    const int n = L.soc[b];
    auto jdot = [&](const VectorXd& x, const VectorXd& y) {
      return x(o) * y(o) - x.segment(o + 1, n - 1).dot(y.segment(o + 1, n - 1));
    };
    // q(alpha) = c + b alpha + a alpha^2, first positive root
    const double a = jdot(d, d);
    const double bq = 2.0 * jdot(lam, d);
    const double c = jdot(lam, lam);
    double root = std::numeric_limits<double>::infinity();
    if (a == 0.0) {
      if (bq < 0.0) root = -c / bq;
    } else {
      const double disc = bq * bq - 4.0 * a * c;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double qq = -0.5 * (bq + (bq >= 0 ? sq : -sq));
        const double r1 = qq / a;
        const double r2 = (qq != 0.0) ? c / qq : std::numeric_limits<double>::infinity();
        for (double r : {r1, r2})
          if (r > 0.0) root = std::min(root, r);
      }
    }
    if (d(o) < 0.0) root = std::min(root, -lam(o) / d(o));
    amax = std::min(amax, root);
  }
  for (std::size_t b = 0; b < L.psd.size(); ++b) {
    const int n = L.psd[b];
    const MatrixXd D = smat(d.data() + L.psd_off[b], n);
    VectorXd isq(n);
    int kk = L.psd_off[b];
    for (int j = 0; j < n; ++j) {
      isq(j) = 1.0 / std::sqrt(lam(kk));
      kk += n - j;
    }
    const MatrixXd S = isq.asDiagonal() * D * isq.asDiagonal();
    const double emin = Eigen::SelfAdjointEigenSolver<MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (emin < 0.0) amax = std::min(amax, -1.0 / emin);
  }
  return amax;
}

// Nesterov-Todd scaling W with W^{-T} s = W z = lambda.
class NtScaling {
 public:
  // Identity scaling (used for the starting point).
  explicit NtScaling(const ConeLayout& L) : L_(&L) {
    d_ = VectorXd::Ones(L.nonneg);
    for (int dim : L.soc) {
      VectorXd v = VectorXd::Zero(dim);
      v(0) = 1.0;
      soc_.push_back({1.0, v});
    }
    for (int n : L.psd) psd_.push_back({MatrixXd::Identity(n, n), MatrixXd::Identity(n, n), MatrixXd::Identity(n, n)});
    lambda_ = cone_identity(L);
  }

  // Returns false when s or z is not strictly interior.
  bool update(const VectorXd& s, const VectorXd& z) {
    const ConeLayout& L = *L_;
    lambda_.resize(L.total);
    for (int i = 0; i < L.nonneg; ++i) {
      if (!(s(i) > 0.0 && z(i) > 0.0)) return false;
      d_(i) = std::sqrt(s(i) / z(i));
      lambda_(i) = std::sqrt(s(i) * z(i));
    }
    for (std::size_t b = 0; b < L.soc.size(); ++b) {
      const int o = L.soc_off[b];
      const int n = L.soc[b];
      const VectorXd sb = s.segment(o, n);
      const VectorXd zb = z.segment(o, n);
      const double s1 = sb.tail(n - 1).norm();
      const double z1 = zb.tail(n - 1).norm();
      const double sjs = (sb(0) - s1) * (sb(0) + s1);
      const double zjz = (zb(0) - z1) * (zb(0) + z1);
      if (!(sb(0) > 0.0 && zb(0) > 0.0 && sjs > 0.0 && zjz > 0.0)) return false;
      const double sn = std::sqrt(sjs);
      const double zn = std::sqrt(zjz);
      const VectorXd sbar = sb / sn;
      VectorXd zbar = zb / zn;
      const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
      zbar.tail(n - 1) *= -1.0;  // J zbar
      const VectorXd wbar = (sbar + zbar) / (2.0 * gamma);
      VectorXd v = wbar;
      v(0) += 1.0;
      v /= std::sqrt(2.0 * (wbar(0) + 1.0));
      soc_[b] = {std::sqrt(sn / zn), v};
      lambda_.segment(o, n) = apply_soc(b, zb, false);
    }
    for (std::size_t b = 0; b < L.psd.size(); ++b) {
      const int n = L.psd[b];
      const MatrixXd S = smat(s.data() + L.psd_off[b], n);
      const MatrixXd Z = smat(z.data() + L.psd_off[b], n);
      Eigen::LLT<MatrixXd> c1(S);
      Eigen::LLT<MatrixXd> c2(Z);
      if (c1.info() != Eigen::Success || c2.info() != Eigen::Success) return false;
      const MatrixXd L1 = c1.matrixL();
      const MatrixXd L2 = c2.matrixL();
      Eigen::JacobiSVD<MatrixXd> svd(L2.transpose() * L1, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const VectorXd sv = svd.singularValues();
      if (!(sv.minCoeff() > 0.0)) return false;
      const VectorXd isq = sv.cwiseSqrt().cwiseInverse();
      PsdScale& P = psd_[b];
      P.R = L1 * svd.matrixV() * isq.asDiagonal();
      const MatrixXd L1inv = L1.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(n, n));
      P.Rinv = isq.cwiseInverse().asDiagonal() * svd.matrixV().transpose() * L1inv;
      P.Q = P.Rinv.transpose() * P.Rinv;
      MatrixXd Lam = MatrixXd::Zero(n, n);
      Lam.diagonal() = sv;
      svec(Lam, lambda_.data() + L.psd_off[b]);
    }
    return true;
  }

  const VectorXd& lambda() const { return lambda_; }

  enum class Op { W, Wt, Winv, Wtinv };

  VectorXd apply(Op op, const VectorXd& x) const {
    const ConeLayout& L = *L_;
    VectorXd y(L.total);
    const bool inv = (op == Op::Winv || op == Op::Wtinv);
    if (inv)
      y.head(L.nonneg) = x.head(L.nonneg).cwiseQuotient(d_);
    else
      y.head(L.nonneg) = x.head(L.nonneg).cwiseProduct(d_);
    for (std::size_t b = 0; b < L.soc.size(); ++b)
      y.segment(L.soc_off[b], L.soc[b]) = apply_soc(b, x.segment(L.soc_off[b], L.soc[b]), inv);
    for (std::size_t b = 0; b < L.psd.size(); ++b) {
      const int n = L.psd[b];
      const PsdScale& P = psd_[b];
      const MatrixXd X = smat(x.data() + L.psd_off[b], n);
      MatrixXd Y;
      switch (op) {
        case Op::W: Y = P.R.transpose() * X * P.R; break;
        case Op::Wt: Y = P.R * X * P.R.transpose(); break;
        case Op::Winv: Y = P.Rinv.transpose() * X * P.Rinv; break;
        case Op::Wtinv: Y = P.Rinv * X * P.Rinv.transpose(); break;
      }
      svec(Y, y.data() + L.psd_off[b]);
    }
    return y;
  }

  // (W^T W)^{-1} x
  VectorXd apply_wtw_inv(const VectorXd& x) const { return apply(Op::Winv, apply(Op::Wtinv, x)); }

  const VectorXd& nonneg_scale() const { return d_; }
  // Dense W^{-1} restricted to SOC block b.
  MatrixXd soc_inverse_matrix(std::size_t b) const {
    const auto& S = soc_[b];
    const int n = static_cast<int>(S.v.size());
    VectorXd Jv = S.v;
    Jv.tail(n - 1) *= -1.0;
    MatrixXd J = MatrixXd::Identity(n, n);
    J.bottomRightCorner(n - 1, n - 1) *= -1.0;
    return (2.0 * Jv * Jv.transpose() - J) / S.beta;
  }
  const MatrixXd& psd_q(std::size_t b) const { return psd_[b].Q; }

 private:
  struct SocScale {
    double beta;
    VectorXd v;
  };
  struct PsdScale {
    MatrixXd R, Rinv, Q;
  };

  // W x = beta (2 v v'x - J x);  W^{-1} x = (2 J v v'J x - J x) / beta
  VectorXd apply_soc(std::size_t b, const VectorXd& x, bool inverse) const {
    const SocScale& S = soc_[b];
    VectorXd Jx = x;
    Jx.tail(x.size() - 1) *= -1.0;
    if (!inverse) return S.beta * (2.0 * S.v.dot(x) * S.v - Jx);
    VectorXd Jv = S.v;
    Jv.tail(x.size() - 1) *= -1.0;
    return (2.0 * Jv.dot(x) * Jv - Jx) / S.beta;
  }

  const ConeLayout* L_;
  VectorXd d_;
  std::vector<SocScale> soc_;
  std::vector<PsdScale> psd_;
  VectorXd lambda_;
};

}  // namespace isac::conic
