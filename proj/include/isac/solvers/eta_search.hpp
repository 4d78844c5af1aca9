#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace isac::solvers {

template <class Payload>
struct EtaSearch {
  bool feasible = false;   // ratio(0) <= 1
  bool certified = false;  // ratio(eta) within [1 - cert_tol, 1] or eta hit the upper bound
  double eta = 0.0;
  double ratio = std::numeric_limits<double>::infinity();
  Payload best{};
  std::vector<double> trace;  // accepted eta after each evaluation
  int evaluations = 0;
};

// Largest eta with ratio(eta) <= 1 for a nondecreasing ratio. Bisection until
// the bracket is within rel_tol, then Illinois steps until the lower end is
// within cert_tol of the boundary. eval(eta) returns {ratio, payload}, ratio
// = +inf when the inner program is infeasible.
template <class Payload, class Eval>
EtaSearch<Payload> search_max_eta(Eval&& eval, double eta_up, double rel_tol, double cert_tol, int max_refine = 30) {
  EtaSearch<Payload> out;
  auto call = [&](double eta) {
    ++out.evaluations;
    return eval(eta);
  };
  {
    auto [r0, p0] = call(0.0);
    if (!(r0 <= 1.0)) {
      out.ratio = r0;
      return out;
    }
    out.feasible = true;
    out.ratio = r0;
    out.best = std::move(p0);
    out.trace.push_back(0.0);
  }
  double lo = 0.0, f_lo = out.ratio - 1.0;
  double hi = eta_up;
  auto [r_hi, p_hi] = call(hi);
  if (r_hi <= 1.0) {
    out.eta = hi;
    out.ratio = r_hi;
    out.best = std::move(p_hi);
    out.certified = true;
    out.trace.push_back(hi);
    return out;
  }
  double f_hi = r_hi - 1.0;

  auto accept = [&](double eta, double r, Payload&& p) {
    lo = eta;
    f_lo = r - 1.0;
    out.eta = eta;
    out.ratio = r;
    out.best = std::move(p);
  };
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    auto [r, p] = call(mid);
    if (r <= 1.0)
      accept(mid, r, std::move(p));
    else {
      hi = mid;
      f_hi = r - 1.0;
    }
    out.trace.push_back(out.eta);
  }
  double g_lo = f_lo, g_hi = f_hi;
  int side = 0;
  for (int it = 0; it < max_refine && out.ratio < 1.0 - cert_tol; ++it) {
    double x = 0.5 * (lo + hi);
    if (std::isfinite(g_hi) && g_hi > g_lo) {
      const double w = hi - lo;
      x = std::clamp(lo - g_lo * w / (g_hi - g_lo), lo + 1e-6 * w, hi - 1e-6 * w);
    }
    auto [r, p] = call(x);
    if (r <= 1.0) {
      accept(x, r, std::move(p));
      g_lo = f_lo;
      if (side == -1) g_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      g_hi = r - 1.0;
      if (side == 1) g_lo *= 0.5;
      side = 1;
    }
    out.trace.push_back(out.eta);
  }
  out.certified = out.ratio >= 1.0 - cert_tol;
  return out;
}

}  // namespace isac::solvers
