#pragma once

#include <optional>
#include <vector>

#include "isac/baselines.hpp"
#include "isac/solvers/common.hpp"
#include "isac/solvers/feasible_init.hpp"
#include "isac/solvers/sdr.hpp"

namespace isac::solvers {

// Iterate of the SCA loop in normalized units.
struct ScaState {
  int round = 0;
  std::vector<std::vector<VectorXcd>> f;  // f / sqrt(P)
  std::vector<std::vector<double>> rho;   // |h^H f| of the served link
  std::vector<std::vector<double>> u;     // 1 + interference (noise-normalized)
  std::vector<double> history;            // exact objective of accepted iterates
};

namespace detail {

inline std::vector<std::vector<VectorXcd>> normalized_beams(const Normalized& d, const BeamformerSet& b) {
  std::vector<std::vector<VectorXcd>> f(d.M, std::vector<VectorXcd>(d.K));
  const double g = 1.0 / std::sqrt(d.P);
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) f[m][k] = g * b.f[m][k];
  return f;
}

inline void refresh_auxiliaries(const Normalized& d, ScaState& st) {
  st.rho.assign(d.M, std::vector<double>(d.K));
  st.u.assign(d.M, std::vector<double>(d.K));
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) {
      double intf = 1.0;
      for (int i = 0; i < d.M; ++i)
        for (int j = 0; j < d.K; ++j) {
          const double g = std::norm(d.chan(i, m, k).dot(st.f[i][j]));
          if (i == m && j == k)
            st.rho[m][k] = std::sqrt(g);
          else
            intf += g;
        }
      st.u[m][k] = intf;
    }
}

struct ScaModel {
  Program prog;
  std::vector<std::vector<ComplexVar>> f;
  std::vector<AffineExpr> t;
  std::optional<AffineExpr> level;  // SINR level (constant eta or the comm-mode variable)
};

enum class SinrLevel { none, fixed, variable };

// Convex inner approximation around st. SINR surrogates use a constant eta
// (sensing) or a variable level to be maximized (comm).
inline ScaModel sca_model(const Normalized& d, const ScaState& st, SinrLevel kind, double eta, double rho_floor) {
  ScaModel mdl;
  Program& prog = mdl.prog;
  if (kind == SinrLevel::fixed) mdl.level = AffineExpr(eta);
  if (kind == SinrLevel::variable) mdl.level = AffineExpr::var(prog.add_variable());
  const std::optional<AffineExpr>& sinr_level = mdl.level;
  mdl.f.assign(d.M, {});
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) mdl.f[m].push_back(add_complex_var(prog, d.nt));

  for (int m = 0; m < d.M; ++m) {
    std::vector<AffineExpr> xs;
    for (const ComplexVar& v : mdl.f[m])
      for (const AffineExpr& e : v.reals()) xs.push_back(e);
    prog.add_soc(AffineExpr(1.0), xs);
  }

  std::vector<std::vector<AffineExpr>> q(d.U);
  for (int u = 0; u < d.U; ++u)
    for (int m = 0; m < d.M; ++m) {
      const AffineExpr qv = AffineExpr::var(prog.add_variable());
      AffineExpr lin(0.0);
      for (int k = 0; k < d.K; ++k) {
        const VectorXcd& a = d.a[m][u];
        const cdouble w = (a.transpose() * st.f[m][k]).value();
        lin += 2.0 * real_inner(a, mdl.f[m][k], w) - std::norm(w);
      }
      prog.add_le(qv, lin);
      q[u].push_back(qv);
    }
  mdl.t = add_crlb_epigraphs(prog, d, q);

  if (sinr_level) {
    for (int m = 0; m < d.M; ++m)
      for (int k = 0; k < d.K; ++k) {
        const AffineExpr rho = AffineExpr::var(prog.add_variable());
        const AffineExpr u = AffineExpr::var(prog.add_variable());
        const VectorXcd hc = d.chan(m, m, k).conjugate();
        const cdouble w = (hc.transpose() * st.f[m][k]).value();
        prog.add_rotated_soc(2.0 * real_inner(hc, mdl.f[m][k], w) - std::norm(w), AffineExpr(1.0), {rho});
        std::vector<AffineExpr> xs;
        for (int i = 0; i < d.M; ++i)
          for (int j = 0; j < d.K; ++j) {
            if (i == m && j == k) continue;
            const auto [re, im] = linear_form(d.chan(i, m, k).conjugate(), mdl.f[i][j]);
            xs.push_back(re);
            xs.push_back(im);
          }
        xs.push_back(AffineExpr(1.0));
        prog.add_rotated_soc(u, AffineExpr(1.0), xs);
        const double rr = std::max(st.rho[m][k], rho_floor);
        const double c = rr / st.u[m][k];
        prog.add_le(*sinr_level, 2.0 * c * rho - c * c * u);
      }
  }
  return mdl;
}

inline std::vector<std::vector<VectorXcd>> read_beams(const ScaModel& mdl, const conic::Solution& sol) {
  std::vector<std::vector<VectorXcd>> f(mdl.f.size());
  for (std::size_t m = 0; m < mdl.f.size(); ++m)
    for (const ComplexVar& v : mdl.f[m]) f[m].push_back(v.value(sol.x));
  return f;
}

// Shared loop: keeps only improving, audited iterates so the trace is monotone.
template <class Build, class Score>
SolveReport run_sca(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req, const Normalized& d,
                    const BeamformerSet& init, Build&& build, Score&& score, bool maximize) {
  const Stopwatch clock;
  SolveReport r;
  r.mode = req.mode;
  r.algorithm = req.algorithm;
  ScaState st;
  st.f = normalized_beams(d, init);
  refresh_auxiliaries(d, st);
  double best = score(init);
  st.history.push_back(best);
  bool converged = false;
  for (st.round = 1; st.round <= req.tol.sca_max_iterations; ++st.round) {
    ScaModel mdl = build(st);
    conic::Solution sol = conic::solve(mdl.prog, req.tol.conic);
    if (!sol.usable()) {
      conic::Settings retry = req.tol.conic;
      retry.equilibrate = !retry.equilibrate;
      sol = conic::solve(mdl.prog, retry);
    }
    r.solver_statuses.push_back(conic::to_string(sol.status));
    if (!sol.usable()) {
      r.message = std::string("subproblem ") + conic::to_string(sol.status) + "; best feasible iterate returned";
      break;
    }
    SolveReport cand;
    cand.status = SolveStatus::solved;
    cand.beams = denormalize(d, read_beams(mdl, sol));
    finalize(s, ch, req, cand);
    const double value = score(cand.beams);
    const double gain = maximize ? value - best : best - value;
    const bool ok = cand.status != SolveStatus::tolerance_not_met && std::isfinite(value);
    if (ok && gain > 0.0) {
      st.f = normalized_beams(d, cand.beams);
      refresh_auxiliaries(d, st);
      const double prev = best;
      best = value;
      st.history.push_back(best);
      if (gain <= req.tol.sca_rel_tol * std::abs(prev)) {
        converged = true;
        break;
      }
    } else {
      converged = true;  // no further progress from this point
      break;
    }
  }
  r.iterations = std::min(st.round, req.tol.sca_max_iterations);
  r.objective_trace = st.history;
  r.beams = denormalize(d, st.f);
  r.status = converged ? SolveStatus::solved : SolveStatus::tolerance_not_met;
  if (!converged && r.message.empty()) r.message = "iteration cap reached";
  if (!r.message.empty() && r.message.rfind("subproblem", 0) == 0) r.status = SolveStatus::tolerance_not_met;
  finalize(s, ch, req, r);
  r.seconds = clock.seconds();
  return r;
}

inline double worst_crlb(const Scenario& s, const ChannelRealization& ch, const BeamformerSet& b) {
  double v = 0.0;
  for (int u = 0; u < s.num_targets(); ++u) v = std::max(v, safe_crlb(s, ch, b, u));
  return v;
}

}  // namespace detail

// Sensing-centric SCA from a feasible starting point.
inline SolveReport solve_sensing_sca(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req,
                                     const BeamformerSet& init) {
  const Normalized d = normalize(s, ch);
  const double floor = 1e-6 * std::sqrt(std::max(req.eta, 0.0));
  const detail::SinrLevel kind = req.eta > 0.0 ? detail::SinrLevel::fixed : detail::SinrLevel::none;
  auto build = [&](const ScaState& st) {
    detail::ScaModel mdl = detail::sca_model(d, st, kind, req.sinr_target(), floor);
    mdl.prog.minimize(minmax_objective(mdl.prog, mdl.t));
    return mdl;
  };
  auto score = [&](const BeamformerSet& b) { return detail::worst_crlb(s, ch, b); };
  return detail::run_sca(s, ch, req, d, init, build, score, false);
}

// Starts from the lowest worst-case CRLB among the min-power SOCP point scaled
// to full power, and the power-allocated MMSE and ZF designs.
inline SolveReport solve_sensing_sca(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req) {
  const InitResult wiesel = feasible_init(s, ch, req.eta, req.tol.conic);
  if (!wiesel.beams) {
    SolveReport r;
    r.status = wiesel.status == conic::Status::infeasible || wiesel.power_ratio > 1.0
                   ? SolveStatus::infeasible
                   : SolveStatus::tolerance_not_met;
    r.message = std::string("no feasible starting point (") + conic::to_string(wiesel.status) + ")";
    finalize(s, ch, req, r);
    return r;
  }
  BeamformerSet init = wiesel.beams->scaled(1.0 / std::sqrt(std::max(wiesel.power_ratio, 1e-300)));
  double best = detail::worst_crlb(s, ch, init);
  auto offer = [&](const SolveReport& r) {
    if (r.status != SolveStatus::solved) return;
    const double v = detail::worst_crlb(s, ch, r.beams);
    if (v < best) {
      best = v;
      init = r.beams;
    }
  };
  SolveRequest fixed = req;
  fixed.algorithm = Algorithm::mmse;
  offer(baselines::solve_mmse(s, ch, fixed));
  if (s.num_antennas() >= s.num_bs() * s.users_per_bs()) {
    fixed.algorithm = Algorithm::zf;
    offer(baselines::solve_zf(s, ch, fixed));
  }
  return solve_sensing_sca(s, ch, req, init);
}

// Communication-centric SCA: maximize the min SINR subject to the CRLB thresholds.
inline SolveReport solve_comm_sca(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req,
                                  const BeamformerSet& init) {
  const Normalized d = normalize(s, ch);
  auto build_comm = [&](const ScaState& st) {
    detail::ScaModel mdl = detail::sca_model(d, st, detail::SinrLevel::variable, 0.0, 1e-6);
    add_crlb_limits(mdl.prog, d, req, mdl.t);
    mdl.prog.maximize(*mdl.level);
    return mdl;
  };
  auto score = [&](const BeamformerSet& b) { return min_sinr(s, ch, b); };
  return detail::run_sca(s, ch, req, d, init, build_comm, score, true);
}

namespace detail {

// Radar-only beams: every user beam of BS m on the target direction for one
// target (which maximizes each illumination gain), the eta = 0 SDR otherwise.
inline std::optional<BeamformerSet> radar_only_beams(const Scenario& s, const ChannelRealization& ch,
                                                     const SolveRequest& req) {
  const Normalized d = normalize(s, ch);
  if (d.U == 1) {
    std::vector<std::vector<VectorXcd>> f(d.M, std::vector<VectorXcd>(d.K));
    for (int m = 0; m < d.M; ++m)
      for (int k = 0; k < d.K; ++k)
        f[m][k] = unit_or_zero(VectorXcd(d.a[m][0].conjugate())) / std::sqrt(static_cast<double>(d.K));
    return denormalize(d, f);
  }
  SolveRequest radar = req;
  radar.mode = Mode::sensing;
  radar.algorithm = Algorithm::sdr;
  radar.eta = 0.0;
  const SolveReport r = solve_sensing_sdr(s, ch, radar);
  if (r.status != SolveStatus::solved) return std::nullopt;
  return r.beams;
}

}  // namespace detail

// Comm SCA started from the best CRLB-feasible of the radar-only, ZF and MMSE
// designs.
inline SolveReport solve_comm_sca(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req) {
  const Stopwatch clock;
  std::optional<BeamformerSet> init;
  double init_sinr = -1.0;
  auto offer = [&](const BeamformerSet& b) {
    SolveReport probe;
    probe.status = SolveStatus::solved;
    probe.beams = b;
    finalize(s, ch, req, probe);
    if (probe.status == SolveStatus::tolerance_not_met) return;
    const double v = min_sinr(s, ch, b);
    if (v > init_sinr) {
      init_sinr = v;
      init = b;
    }
  };
  if (const auto radar = detail::radar_only_beams(s, ch, req)) offer(*radar);
  if (init) {
    SolveRequest fixed = req;
    fixed.algorithm = Algorithm::mmse;
    const SolveReport mmse = baselines::solve_mmse(s, ch, fixed);
    if (mmse.status == SolveStatus::solved) offer(mmse.beams);
    if (s.num_antennas() >= s.num_bs() * s.users_per_bs()) {
      fixed.algorithm = Algorithm::zf;
      const SolveReport zf = baselines::solve_zf(s, ch, fixed);
      if (zf.status == SolveStatus::solved) offer(zf.beams);
    }
  }
  if (!init) {
    SolveReport r;
    r.status = SolveStatus::infeasible;
    r.message = "CRLB threshold below the radar-only optimum";
    finalize(s, ch, req, r);
    r.status = SolveStatus::infeasible;
    r.seconds = clock.seconds();
    return r;
  }
  SolveReport r = solve_comm_sca(s, ch, req, *init);
  r.seconds = clock.seconds();
  return r;
}

}  // namespace isac::solvers
