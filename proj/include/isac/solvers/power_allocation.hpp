#pragma once

#include <string>
#include <vector>

#include "isac/solvers/common.hpp"
#include "isac/solvers/eta_search.hpp"

namespace isac::solvers {

// Unit-norm directions per (BS, user).
struct DirectionSet {
  std::vector<std::vector<VectorXcd>> f;
  std::string tag;
};

// Power fractions p[m][k] (of P) found for fixed directions.
struct Allocation {
  conic::Status status = conic::Status::numerical_failure;
  std::vector<std::vector<double>> p;
  double value = std::numeric_limits<double>::infinity();  // normalized objective
  int iterations = 0;
};

namespace detail {

struct AllocationModel {
  Program prog;
  std::vector<std::vector<int>> p;  // variable indices
  std::vector<AffineExpr> t;        // CRLB epigraphs
};

// Common part: p >= 0, SINR rows at eta, illumination-driven epigraphs.
inline AllocationModel allocation_model(const Normalized& d, const DirectionSet& dirs, double eta) {
  AllocationModel mdl;
  Program& prog = mdl.prog;
  mdl.p.assign(d.M, std::vector<int>(d.K));
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) {
      mdl.p[m][k] = prog.add_variable();
      prog.add_nonneg(AffineExpr::var(mdl.p[m][k]));
    }
  if (eta > 0.0) {
    for (int m = 0; m < d.M; ++m)
      for (int k = 0; k < d.K; ++k) {
        AffineExpr row(-eta);
        for (int i = 0; i < d.M; ++i)
          for (int j = 0; j < d.K; ++j) {
            const double g = std::norm(d.chan(i, m, k).dot(dirs.f[i][j]));
            row.add_term(mdl.p[i][j], (i == m && j == k) ? g : -eta * g);
          }
        prog.add_nonneg(row);
      }
  }
  std::vector<std::vector<AffineExpr>> q(d.U, std::vector<AffineExpr>(d.M, AffineExpr(0.0)));
  for (int u = 0; u < d.U; ++u)
    for (int m = 0; m < d.M; ++m)
      for (int k = 0; k < d.K; ++k)
        q[u][m].add_term(mdl.p[m][k], std::norm((d.a[m][u].transpose() * dirs.f[m][k]).value()));
  mdl.t = add_crlb_epigraphs(prog, d, q);
  return mdl;
}

inline Allocation read_allocation(const Normalized& d, const AllocationModel& mdl, const conic::Solution& sol) {
  Allocation a;
  a.status = sol.status;
  a.iterations = sol.iterations;
  if (!sol.usable()) return a;
  a.value = sol.objective;
  a.p.assign(d.M, std::vector<double>(d.K));
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) a.p[m][k] = std::max(sol.value(mdl.p[m][k]), 0.0);
  return a;
}

}  // namespace detail

// Sensing mode: minimize the (max) CRLB subject to SINR >= eta and per-BS power.
inline Allocation allocate_sensing(const Normalized& d, const DirectionSet& dirs, double eta,
                                   const conic::Settings& settings) {
  detail::AllocationModel mdl = detail::allocation_model(d, dirs, eta);
  for (int m = 0; m < d.M; ++m) {
    AffineExpr total(0.0);
    for (int k = 0; k < d.K; ++k) total.add_term(mdl.p[m][k], 1.0);
    mdl.prog.add_le(total, AffineExpr(1.0));
  }
  mdl.prog.minimize(minmax_objective(mdl.prog, mdl.t));
  return detail::read_allocation(d, mdl, conic::solve(mdl.prog, settings));
}

// Comm-mode feasibility: minimal max per-BS power ratio meeting SINR >= eta and
// the CRLB thresholds.
inline Allocation min_power_ratio(const Normalized& d, const DirectionSet& dirs, double eta, const SolveRequest& req,
                                  const conic::Settings& settings) {
  detail::AllocationModel mdl = detail::allocation_model(d, dirs, eta);
  const AffineExpr ratio = AffineExpr::var(mdl.prog.add_variable());
  for (int m = 0; m < d.M; ++m) {
    AffineExpr total(0.0);
    for (int k = 0; k < d.K; ++k) total.add_term(mdl.p[m][k], 1.0);
    mdl.prog.add_le(total, ratio);
  }
  add_crlb_limits(mdl.prog, d, req, mdl.t);
  mdl.prog.minimize(ratio);
  return detail::read_allocation(d, mdl, conic::solve(mdl.prog, settings));
}

inline BeamformerSet apply_allocation(const Normalized& d, const DirectionSet& dirs, const Allocation& a) {
  std::vector<std::vector<VectorXcd>> f(d.M, std::vector<VectorXcd>(d.K));
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) f[m][k] = std::sqrt(a.p[m][k]) * dirs.f[m][k];
  return denormalize(d, f);
}

// Fixed-direction solve in either mode; comm mode bisects eta over the
// min-power-ratio program.
inline SolveReport allocate_power(const DirectionSet& dirs, const Scenario& s, const ChannelRealization& ch,
                                  const SolveRequest& req) {
  const Stopwatch clock;
  const Normalized d = normalize(s, ch);
  SolveReport r;
  if (req.mode == Mode::sensing) {
    const Allocation a = allocate_sensing(d, dirs, req.sinr_target(), req.tol.conic);
    r.solver_statuses.push_back(conic::to_string(a.status));
    r.iterations = a.iterations;
    if (a.status == conic::Status::infeasible) {
      r.status = SolveStatus::infeasible;
      r.message = "SINR target unattainable with " + dirs.tag + " directions";
    } else if (a.p.empty()) {
      r.message = std::string("power allocation failed: ") + conic::to_string(a.status);
    } else {
      r.beams = apply_allocation(d, dirs, a);
      r.status = SolveStatus::solved;
      r.relaxation_bound = crlb_from_normalized(d, a.value);
    }
  } else {
    auto eval = [&](double eta) {
      Allocation a = min_power_ratio(d, dirs, eta, req, req.tol.conic);
      r.solver_statuses.push_back(conic::to_string(a.status));
      r.iterations += a.iterations;
      const double ratio = a.p.empty() ? std::numeric_limits<double>::infinity() : a.value;
      return std::make_pair(ratio, std::move(a));
    };
    const auto res = search_max_eta<Allocation>(eval, max_single_user_bound(d), req.tol.bisection_tol,
                                                req.tol.certificate_tol);
    r.objective_trace = res.trace;
    if (!res.feasible) {
      r.status = SolveStatus::infeasible;
      r.message = "CRLB threshold unattainable with " + dirs.tag + " directions";
    } else {
      r.beams = apply_allocation(d, dirs, res.best);
      r.status = SolveStatus::solved;
    }
  }
  finalize(s, ch, req, r);
  r.seconds = clock.seconds();
  return r;
}

}  // namespace isac::solvers
