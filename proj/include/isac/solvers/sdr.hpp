#pragma once

#include <vector>

#include "isac/rng.hpp"
#include "isac/solvers/common.hpp"
#include "isac/solvers/power_allocation.hpp"
#include "isac/solvers/rank_one.hpp"

namespace isac::solvers {

// Covariances below this trace (fraction of P) carry no beam; their rank ratio is not meaningful.
inline constexpr double kNegligibleTrace = 1e-7;

namespace detail {

struct SdrModel {
  Program prog;
  std::vector<std::vector<HermitianVar>> F;  // [m][k], normalized by P
  std::vector<AffineExpr> t;                 // per-target epigraphs
};

// Relaxed covariances with SINR rows at eta, illumination links and CRLB epigraphs.
inline SdrModel sdr_model(const Normalized& d, double eta) {
  SdrModel mdl;
  Program& prog = mdl.prog;
  mdl.F.assign(d.M, {});
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) mdl.F[m].push_back(prog.add_hermitian(d.nt));

  if (eta > 0.0) {
    for (int m = 0; m < d.M; ++m)
      for (int k = 0; k < d.K; ++k) {
        AffineExpr row(-eta);
        for (int i = 0; i < d.M; ++i) {
          const VectorXcd& h = d.chan(i, m, k);
          const MatrixXcd Hc = h * h.adjoint();
          for (int j = 0; j < d.K; ++j) row += (i == m && j == k ? 1.0 : -eta) * mdl.F[i][j].trace_product(Hc);
        }
        prog.add_nonneg(row);
      }
  }

  std::vector<std::vector<AffineExpr>> q(d.U);
  for (int u = 0; u < d.U; ++u)
    for (int m = 0; m < d.M; ++m) {
      const AffineExpr qv = AffineExpr::var(prog.add_variable());
      const MatrixXcd C = d.illumination_matrix(m, u);
      AffineExpr gain(0.0);
      for (int k = 0; k < d.K; ++k) gain += mdl.F[m][k].trace_product(C);
      prog.add_le(qv, gain);
      q[u].push_back(qv);
    }
  mdl.t = add_crlb_epigraphs(prog, d, q);
  return mdl;
}

inline AffineExpr bs_power(const SdrModel& mdl, int m) {
  AffineExpr total(0.0);
  for (const HermitianVar& F : mdl.F[m]) total += F.trace();
  return total;
}

struct Extracted {
  std::vector<std::vector<MatrixXcd>> F;  // normalized covariances
  std::vector<std::vector<VectorXcd>> f;  // normalized rank-one vectors
  std::vector<double> ratios;
  bool degraded = false;
};

inline Extracted extract_all(const Normalized& d, const SdrModel& mdl, const conic::Solution& sol, double rank_tol) {
  Extracted e;
  e.F.assign(d.M, {});
  e.f.assign(d.M, {});
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) {
      const MatrixXcd F = sol.value(mdl.F[m][k]);
      const RankOne r = extract_rank_one(F);
      const double ratio = std::real(F.trace()) < kNegligibleTrace ? 0.0 : r.ratio;
      e.F[m].push_back(F);
      e.f[m].push_back(r.f);
      e.ratios.push_back(ratio);
      e.degraded = e.degraded || ratio > rank_tol;
    }
  return e;
}

inline DirectionSet directions_of(const std::vector<std::vector<VectorXcd>>& f, const std::string& tag) {
  DirectionSet dirs;
  dirs.tag = tag;
  for (const auto& row : f) {
    dirs.f.emplace_back();
    for (const VectorXcd& v : row) dirs.f.back().push_back(unit_or_zero(v));
  }
  return dirs;
}

// Gaussian randomization: candidates drawn with covariance F, powers re-optimized
// for each set of directions; the extracted eigenvectors are candidate zero.
inline std::pair<DirectionSet, Allocation> randomize(const Normalized& d, const Extracted& ex, double eta,
                                                     const SolveRequest& req) {
  std::vector<std::vector<MatrixXcd>> roots(d.M);
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) {
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (ex.F[m][k] + ex.F[m][k].adjoint()));
      const VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      roots[m].push_back(es.eigenvectors() * lam.asDiagonal());
    }
  DirectionSet best_dirs = directions_of(ex.f, "sdr-eigen");
  Allocation best = allocate_sensing(d, best_dirs, eta, req.tol.conic);
  for (int c = 0; c < req.tol.randomization_candidates; ++c) {
    rng::Stream g(req.seed, rng::kRandomization, {static_cast<std::uint64_t>(c)});
    std::vector<std::vector<VectorXcd>> f(d.M, std::vector<VectorXcd>(d.K));
    for (int m = 0; m < d.M; ++m)
      for (int k = 0; k < d.K; ++k) {
        VectorXcd xi(d.nt);
        for (int p = 0; p < d.nt; ++p) xi(p) = g.complex_normal();
        f[m][k] = roots[m][k] * xi;
      }
    DirectionSet dirs = directions_of(f, "sdr-random");
    Allocation a = allocate_sensing(d, dirs, eta, req.tol.conic);
    if (!a.p.empty() && (best.p.empty() || a.value < best.value)) {
      best = std::move(a);
      best_dirs = std::move(dirs);
    }
  }
  return {best_dirs, best};
}

}  // namespace detail

// Sensing-centric SDR: minimize the (max) CRLB under per-BS power and SINR >= eta.
inline SolveReport solve_sensing_sdr(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req) {
  const Stopwatch clock;
  const Normalized d = normalize(s, ch);
  SolveReport r;
  r.beams = BeamformerSet::zeros(d.M, d.K, d.nt);
  if (req.eta > min_single_user_bound(d)) {
    r.status = SolveStatus::infeasible;
    r.message = "eta exceeds the interference-free single-user bound";
    finalize(s, ch, req, r);
    r.seconds = clock.seconds();
    return r;
  }

  detail::SdrModel mdl = detail::sdr_model(d, req.sinr_target());
  for (int m = 0; m < d.M; ++m) mdl.prog.add_le(detail::bs_power(mdl, m), AffineExpr(1.0));
  mdl.prog.minimize(minmax_objective(mdl.prog, mdl.t));
  const conic::Solution sol = conic::solve(mdl.prog, req.tol.conic);
  r.solver_statuses.push_back(conic::to_string(sol.status));
  r.iterations = sol.iterations;

  if (sol.status == conic::Status::infeasible) {
    r.status = SolveStatus::infeasible;
    r.message = "SINR targets unattainable";
  } else if (!sol.usable()) {
    r.message = std::string("conic solver: ") + conic::to_string(sol.status) + " " + sol.diagnostics;
  } else {
    r.relaxation_bound = crlb_from_normalized(d, sol.objective);
    r.objective_trace.push_back(r.relaxation_bound);
    const detail::Extracted ex = detail::extract_all(d, mdl, sol, req.tol.rank_tol);
    r.rank_ratios = ex.ratios;
    r.rank_degraded = ex.degraded;
    r.status = SolveStatus::solved;
    if (ex.degraded) {
      auto [dirs, alloc] = detail::randomize(d, ex, req.sinr_target(), req);
      r.randomized = true;
      if (alloc.p.empty()) {
        r.status = SolveStatus::tolerance_not_met;
        r.message = "randomization found no feasible candidate";
      } else {
        r.beams = apply_allocation(d, dirs, alloc);
      }
    } else {
      r.beams = denormalize(d, ex.f);
      SolveReport probe = r;
      finalize(s, ch, req, probe);
      if (probe.status != SolveStatus::solved) {
        // dropped eigen-components left a slight violation: re-optimize powers
        const DirectionSet dirs = detail::directions_of(ex.f, "sdr-eigen");
        const Allocation alloc = allocate_sensing(d, dirs, req.sinr_target(), req.tol.conic);
        if (!alloc.p.empty()) r.beams = apply_allocation(d, dirs, alloc);
      }
    }
  }
  finalize(s, ch, req, r);
  r.seconds = clock.seconds();
  return r;
}

struct PowerMinResult {
  conic::Status status = conic::Status::numerical_failure;
  double ratio = std::numeric_limits<double>::infinity();  // max per-BS power / P
  BeamformerSet beams;
  std::vector<double> rank_ratios;
  bool degraded = false;
  int iterations = 0;
};

// Minimal max per-BS power ratio meeting SINR >= eta and the CRLB thresholds
// of req (infinite thresholds drop the sensing constraint).
inline PowerMinResult solve_power_min(const Normalized& d, double eta, const SolveRequest& req) {
  detail::SdrModel mdl = detail::sdr_model(d, eta);
  const AffineExpr ratio = AffineExpr::var(mdl.prog.add_variable());
  for (int m = 0; m < d.M; ++m) mdl.prog.add_le(detail::bs_power(mdl, m), ratio);
  add_crlb_limits(mdl.prog, d, req, mdl.t);
  mdl.prog.minimize(ratio);
  const conic::Solution sol = conic::solve(mdl.prog, req.tol.conic);
  PowerMinResult out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  if (!sol.usable()) return out;
  out.ratio = sol.objective;
  const detail::Extracted ex = detail::extract_all(d, mdl, sol, req.tol.rank_tol);
  out.beams = denormalize(d, ex.f);
  out.rank_ratios = ex.ratios;
  out.degraded = ex.degraded;
  return out;
}

inline PowerMinResult solve_power_min(const Scenario& s, const ChannelRealization& ch, double eta,
                                      const SolveRequest& req) {
  return solve_power_min(normalize(s, ch), eta, req);
}

// Communication-centric max-min SINR by bisection over eta on the power-min
// SDP. Exact for M = 1; for M > 1 it is the experimental generalization.
inline SolveReport solve_comm_bisection(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req) {
  const Stopwatch clock;
  const Normalized d = normalize(s, ch);
  SolveReport r;
  auto eval = [&](double eta) {
    PowerMinResult pm = solve_power_min(d, eta, req);
    r.solver_statuses.push_back(conic::to_string(pm.status));
    r.iterations += pm.iterations;
    const double ratio = pm.ratio;
    return std::make_pair(ratio, std::move(pm));
  };
  const auto res =
      search_max_eta<PowerMinResult>(eval, max_single_user_bound(d), req.tol.bisection_tol, req.tol.certificate_tol);
  r.objective_trace = res.trace;
  if (!res.feasible) {
    r.status = SolveStatus::infeasible;
    r.message = "CRLB threshold below the radar-only optimum";
  } else {
    r.beams = res.best.beams;
    r.rank_ratios = res.best.rank_ratios;
    r.rank_degraded = res.best.degraded;
    r.relaxation_bound = res.eta;
    r.status = res.certified ? SolveStatus::solved : SolveStatus::tolerance_not_met;
    if (!res.certified) r.message = "power-ratio certificate not reached";
    if (s.num_bs() > 1) r.message += (r.message.empty() ? "" : "; ") + std::string("experimental for M > 1");
  }
  finalize(s, ch, req, r);
  r.seconds = clock.seconds();
  return r;
}

}  // namespace isac::solvers
