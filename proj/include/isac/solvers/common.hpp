#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "isac/conic.hpp"
#include "isac/solve_types.hpp"

namespace isac::solvers {

using conic::AffineExpr;
using conic::HermitianVar;
using conic::Program;

// Problem data rescaled so that powers are fractions of P, noise is 1 and the
// Fisher information is measured in units of the reference scale.
struct Normalized {
  int M = 0, K = 0, N = 0, U = 0, nt = 0;
  double P = 1.0;
  double fisher_scale = 1.0;
  std::vector<std::vector<std::vector<VectorXcd>>> h;  // [i][m][k], times sqrt(P)/sigma_n
  std::vector<std::vector<VectorXcd>> a;               // [m][u] steering a(theta_{m,u})
  std::vector<std::vector<Eigen::Matrix2d>> B;         // [u][m] P * Lambda_m Zhat_m Lambda_m^T / scale

  const VectorXcd& chan(int i, int m, int k) const { return h[i][m][k]; }
  // a^* a^T, so that a^T F a^* = Re tr(F C).
  MatrixXcd illumination_matrix(int m, int u) const { return a[m][u].conjugate() * a[m][u].transpose(); }
};

inline Normalized normalize(const Scenario& s, const ChannelRealization& ch) {
  Normalized d;
  d.M = s.num_bs();
  d.K = s.users_per_bs();
  d.N = s.num_tmt();
  d.U = s.num_targets();
  d.nt = s.num_antennas();
  d.P = s.params.max_power_w;
  d.fisher_scale = fisher_reference_scale(s, ch);
  const double g = std::sqrt(d.P / s.params.comm_noise_power_w);
  d.h = ch.comm;
  for (auto& a : d.h)
    for (auto& b : a)
      for (auto& v : b) v *= g;
  d.a.assign(d.M, {});
  for (int m = 0; m < d.M; ++m)
    for (int u = 0; u < d.U; ++u) d.a[m].push_back(steering(s, aod(s, m, u)));
  d.B.assign(d.U, {});
  for (int u = 0; u < d.U; ++u)
    for (const Eigen::Matrix2d& Bm : per_bs_fisher(jacobian(s, u), zhat_coeffs(s, ch, u)))
      d.B[u].push_back(d.P * Bm / d.fisher_scale);
  return d;
}

// Normalized FIM of target u as three affine entries (00, 10, 11).
inline std::array<AffineExpr, 3> fim_entries(const Normalized& d, int u, const std::vector<AffineExpr>& q) {
  std::array<AffineExpr, 3> f{AffineExpr(0.0), AffineExpr(0.0), AffineExpr(0.0)};
  for (int m = 0; m < d.M; ++m) {
    f[0] += d.B[u][m](0, 0) * q[m];
    f[1] += d.B[u][m](1, 0) * q[m];
    f[2] += d.B[u][m](1, 1) * q[m];
  }
  return f;
}

// Epigraph variables t_u >= tr(FIM_u^{-1}) for every target; q[u][m].
inline std::vector<AffineExpr> add_crlb_epigraphs(Program& p, const Normalized& d,
                                                  const std::vector<std::vector<AffineExpr>>& q) {
  std::vector<AffineExpr> t;
  for (int u = 0; u < d.U; ++u) t.push_back(conic::trace_inverse_epigraph(p, fim_entries(d, u, q[u])));
  return t;
}

// Sensing objective: t itself for one target, otherwise the min-max epigraph.
inline AffineExpr minmax_objective(Program& p, const std::vector<AffineExpr>& t) {
  if (t.size() == 1) return t[0];
  const AffineExpr w = AffineExpr::var(p.add_variable());
  for (const AffineExpr& tu : t) p.add_le(tu, w);
  return w;
}

// Comm-mode CRLB constraints t_u <= eps_u (skipped for infinite thresholds).
inline void add_crlb_limits(Program& p, const Normalized& d, const SolveRequest& req,
                            const std::vector<AffineExpr>& t) {
  for (int u = 0; u < d.U; ++u) {
    const double eps = req.epsilon_for(u);
    if (std::isfinite(eps)) p.add_le(t[u], AffineExpr(eps * (1.0 - req.tol.sinr_margin) * d.fisher_scale));
  }
}

inline bool any_finite_epsilon(const Normalized& d, const SolveRequest& req) {
  for (int u = 0; u < d.U; ++u)
    if (std::isfinite(req.epsilon_for(u))) return true;
  return false;
}

// Normalized CRLB value t (in units of 1/scale) back to m^2.
inline double crlb_from_normalized(const Normalized& d, double t) { return t / d.fisher_scale; }

inline BeamformerSet denormalize(const Normalized& d, const std::vector<std::vector<VectorXcd>>& f) {
  BeamformerSet b = BeamformerSet::zeros(d.M, d.K, d.nt);
  const double g = std::sqrt(d.P);
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) b.f[m][k] = g * f[m][k];
  return b;
}

// Interference-free SINR bound P |h|^2 / sigma^2 for every user (normalized units).
inline double single_user_bound(const Normalized& d, int m, int k) { return d.chan(m, m, k).squaredNorm(); }

inline double min_single_user_bound(const Normalized& d) {
  double v = std::numeric_limits<double>::infinity();
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) v = std::min(v, single_user_bound(d, m, k));
  return v;
}

inline double max_single_user_bound(const Normalized& d) {
  double v = 0.0;
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) v = std::max(v, single_user_bound(d, m, k));
  return v;
}

// Complex vector variable stored as n real parts followed by n imaginary parts.
struct ComplexVar {
  int re = 0, im = 0, n = 0;

  VectorXcd value(const VectorXd& x) const {
    VectorXcd v(n);
    for (int p = 0; p < n; ++p) v(p) = cdouble(x(re + p), x(im + p));
    return v;
  }
  std::vector<AffineExpr> reals() const {
    std::vector<AffineExpr> out;
    for (int p = 0; p < n; ++p) out.push_back(AffineExpr::var(re + p));
    for (int p = 0; p < n; ++p) out.push_back(AffineExpr::var(im + p));
    return out;
  }
};

inline ComplexVar add_complex_var(Program& prog, int n) {
  ComplexVar v;
  v.n = n;
  v.re = prog.add_variables(n).front();
  v.im = prog.add_variables(n).front();
  return v;
}

// Real and imaginary parts of c^T f.
inline std::pair<AffineExpr, AffineExpr> linear_form(const VectorXcd& c, const ComplexVar& f) {
  AffineExpr re(0.0), im(0.0);
  for (int p = 0; p < f.n; ++p) {
    const double a = c(p).real(), b = c(p).imag();
    re.add_term(f.re + p, a);
    re.add_term(f.im + p, -b);
    im.add_term(f.re + p, b);
    im.add_term(f.im + p, a);
  }
  return {re, im};
}

// Re(conj(w) c^T f), the affine part of the first-order expansion of |c^T f|^2 at w = c^T f0.
inline AffineExpr real_inner(const VectorXcd& c, const ComplexVar& f, cdouble w) {
  const auto [re, im] = linear_form(c, f);
  return w.real() * re + w.imag() * im;
}

inline VectorXcd unit_or_zero(const VectorXcd& v) {
  const double n = v.norm();
  return n > 0.0 ? VectorXcd(v / n) : VectorXcd(VectorXcd::Zero(v.size()));
}

}  // namespace isac::solvers
