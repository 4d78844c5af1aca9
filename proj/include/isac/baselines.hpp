#pragma once

#include <vector>

#include "isac/solvers/power_allocation.hpp"
#include "isac/solvers/rank_one.hpp"

namespace isac::baselines {

using solvers::DirectionSet;

// Projection of h_{m,m,k} onto the orthogonal complement of every other user's
// channel from BS m.
inline DirectionSet zf_directions(const ChannelRealization& ch) {
  const int M = ch.num_bs();
  const int K = ch.users_per_bs();
  const int nt = ch.num_antennas();
  if (nt < M * K) throw DimensionError("ZF requires N_t >= M*K");
  DirectionSet dirs;
  dirs.tag = "zf";
  dirs.f.assign(M, std::vector<VectorXcd>(K));
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k) {
      MatrixXcd others(nt, M * K - 1);
      int c = 0;
      for (int i = 0; i < M; ++i)
        for (int j = 0; j < K; ++j)
          if (!(i == m && j == k)) others.col(c++) = ch.h(m, i, j);
      VectorXcd v = ch.h(m, m, k);
      if (c > 0) {
        Eigen::JacobiSVD<MatrixXcd> svd(others, Eigen::ComputeFullU);
        const int rank = static_cast<int>(svd.rank());
        const MatrixXcd Un = svd.matrixU().rightCols(nt - rank);
        v = Un * (Un.adjoint() * v);
      }
      dirs.f[m][k] = solvers::unit_or_zero(v);
    }
  return dirs;
}

// Regularized transmit-MMSE: (sum_{i,j} h h^H + (M K sigma^2 / P) I)^{-1} h_{m,m,k}.
inline DirectionSet mmse_directions(const ChannelRealization& ch, double max_power_w, double noise_power_w) {
  const int M = ch.num_bs();
  const int K = ch.users_per_bs();
  const int nt = ch.num_antennas();
  DirectionSet dirs;
  dirs.tag = "mmse";
  dirs.f.assign(M, std::vector<VectorXcd>(K));
  const double reg = M * K * noise_power_w / max_power_w;
  for (int m = 0; m < M; ++m) {
    MatrixXcd G = MatrixXcd::Zero(nt, nt);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < K; ++j) G += ch.h(m, i, j) * ch.h(m, i, j).adjoint();
    G += reg * MatrixXcd::Identity(nt, nt);
    const Eigen::LDLT<MatrixXcd> ldlt(G);
    for (int k = 0; k < K; ++k) dirs.f[m][k] = solvers::unit_or_zero(ldlt.solve(ch.h(m, m, k)));
  }
  return dirs;
}

inline DirectionSet mmse_directions(const Scenario& s, const ChannelRealization& ch) {
  return mmse_directions(ch, s.params.max_power_w, s.params.comm_noise_power_w);
}

inline SolveReport solve_zf(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req) {
  return solvers::allocate_power(zf_directions(ch), s, ch, req);
}

inline SolveReport solve_mmse(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req) {
  return solvers::allocate_power(mmse_directions(s, ch), s, ch, req);
}

// Matched-filter beams toward each user with P split equally over K users.
inline BeamformerSet uniform_mrt(const Scenario& s, const ChannelRealization& ch) {
  BeamformerSet b = BeamformerSet::zeros(s.num_bs(), s.users_per_bs(), s.num_antennas());
  const double amp = std::sqrt(s.params.max_power_w / s.users_per_bs());
  for (int m = 0; m < s.num_bs(); ++m)
    for (int k = 0; k < s.users_per_bs(); ++k) b.f[m][k] = amp * solvers::unit_or_zero(ch.h(m, m, k));
  return b;
}

struct BeampatternSettings {
  double grid_step_deg = 0.5;
  double mainlobe_half_width_deg = 5.0;
};

inline std::vector<double> angle_grid_deg(double step) {
  std::vector<double> g;
  const int n = static_cast<int>(std::lround(180.0 / step));
  for (int i = 0; i <= n; ++i) g.push_back(-90.0 + step * i);
  return g;
}

// Least-squares beampattern matching with a free scale per BS, per-BS power
// equality and the SINR constraints of the request (sensing covariances count
// as interference). Rank-one beams are recovered with w = W h / sqrt(h^H W h);
// the remainder of each W moves into R, which leaves every SINR, the
// illumination and the per-BS power unchanged.
inline SolveReport beampattern_match(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req,
                                     const BeampatternSettings& bp = {}) {
  using conic::AffineExpr;
  const Stopwatch clock;
  const solvers::Normalized d = solvers::normalize(s, ch);
  conic::Program prog;
  std::vector<std::vector<conic::HermitianVar>> W(d.M);
  std::vector<conic::HermitianVar> R;
  for (int m = 0; m < d.M; ++m) {
    for (int k = 0; k < d.K; ++k) W[m].push_back(prog.add_hermitian(d.nt));
    R.push_back(prog.add_hermitian(d.nt));
  }
  auto covariance_gain = [&](int m, const MatrixXcd& C) {
    AffineExpr g = R[m].trace_product(C);
    for (const auto& Wk : W[m]) g += Wk.trace_product(C);
    return g;
  };

  for (int m = 0; m < d.M; ++m) {
    AffineExpr total = R[m].trace();
    for (const auto& Wk : W[m]) total += Wk.trace();
    prog.add_equal(total - 1.0);
  }
  const double eta = req.sinr_target();
  if (eta > 0.0) {
    for (int m = 0; m < d.M; ++m)
      for (int k = 0; k < d.K; ++k) {
        AffineExpr row(-eta);
        for (int i = 0; i < d.M; ++i) {
          const VectorXcd& h = d.chan(i, m, k);
          const MatrixXcd Hc = h * h.adjoint();
          for (int j = 0; j < d.K; ++j) row += (i == m && j == k ? 1.0 : -eta) * W[i][j].trace_product(Hc);
          row += -eta * R[i].trace_product(Hc);
        }
        prog.add_nonneg(row);
      }
  }

  const std::vector<double> grid = angle_grid_deg(bp.grid_step_deg);
  AffineExpr objective(0.0);
  for (int m = 0; m < d.M; ++m) {
    const double theta = rad_to_deg(aod(s, m, 0));
    const AffineExpr alpha = AffineExpr::var(prog.add_variable());
    const AffineExpr tau = AffineExpr::var(prog.add_variable());
    std::vector<AffineExpr> residuals;
    for (double deg : grid) {
      const double desired = std::abs(deg - theta) <= bp.mainlobe_half_width_deg ? 1.0 : 0.0;
      const VectorXcd a = steering(s, deg_to_rad(deg));
      const MatrixXcd C = a.conjugate() * a.transpose();
      residuals.push_back(desired * alpha - covariance_gain(m, C));
    }
    prog.add_rotated_soc(tau, AffineExpr(1.0), residuals);
    objective += tau;
  }
  prog.minimize(objective);
  const conic::Solution sol = conic::solve(prog, req.tol.conic);

  SolveReport r;
  r.solver_statuses.push_back(conic::to_string(sol.status));
  r.iterations = sol.iterations;
  r.beams = BeamformerSet::zeros(d.M, d.K, d.nt);
  if (sol.status == conic::Status::infeasible) {
    r.status = SolveStatus::infeasible;
    r.message = "SINR targets unattainable with beampattern matching";
  } else if (!sol.usable()) {
    r.message = std::string("conic solver: ") + conic::to_string(sol.status) + " " + sol.diagnostics;
  } else {
    r.status = SolveStatus::solved;
    const double g = d.P;
    for (int m = 0; m < d.M; ++m) {
      MatrixXcd Rm = sol.value(R[m]);
      for (int k = 0; k < d.K; ++k) {
        const MatrixXcd Wk = sol.value(W[m][k]);
        r.rank_ratios.push_back(solvers::extract_rank_one(Wk).ratio);
        const VectorXcd& h = d.chan(m, m, k);
        const double hwh = std::real(h.dot(Wk * h));
        VectorXcd w = VectorXcd::Zero(d.nt);
        if (hwh > 0.0) w = Wk * h / std::sqrt(hwh);
        Rm += Wk - w * w.adjoint();
        r.beams.f[m][k] = std::sqrt(g) * w;
      }
      // clip round-off negative eigenvalues of the sensing covariance
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (Rm + Rm.adjoint()));
      const MatrixXcd Rpsd =
          es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().adjoint();
      r.beams.set_sensing_cov(m, g * Rpsd);
    }
  }
  finalize(s, ch, req, r);
  r.seconds = clock.seconds();
  return r;
}

}  // namespace isac::baselines
