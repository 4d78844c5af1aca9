#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <random>
#include <sstream>

#include "isac/isac.hpp"

// Property suite behind `isac validate` and the acceptance binary. Each
// criterion returns a verdict plus a one-line summary of what was measured.
namespace isac::validation {

namespace pinned {
inline constexpr double jacobian_rel = 1e-6;
inline constexpr double gradient_rel = 1e-6;
inline constexpr double homogeneity_rel = 1e-10;
inline constexpr double fast_seconds = 1.0;
inline constexpr double rank_ratio = 1e-4;
inline constexpr double rank_one_fraction = 0.95;
inline constexpr double sca_gap_median = 0.02;
inline constexpr double sca_gap_p95 = 0.10;
inline constexpr double certificate_low = 0.999;
inline constexpr double certificate_high = 1.0001;
inline constexpr double sca_vs_bisection = 0.98;
inline constexpr double zf_residual = 1e-18;
inline constexpr double mainlobe_deg = 2.0;
inline constexpr double conic_rel = 1e-6;
inline constexpr double embedding_abs = 1e-10;
// Numerical slack for orderings between solver outputs (relative).
inline constexpr double order_slack = 1e-6;
// Slack for monotone objective traces (relative).
inline constexpr double trace_slack = 1e-9;
}  // namespace pinned

struct Outcome {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  std::string data_dir;
  bool quick = false;  // fewer seeds, same thresholds
};

namespace detail {

inline std::vector<std::uint64_t> seeds(int n) {
  std::vector<std::uint64_t> out;
  for (int i = 1; i <= n; ++i) out.push_back(static_cast<std::uint64_t>(i));
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Nearest-rank percentile.
inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(v.size())));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

inline std::string fmt(double v, int digits = 3) {
  std::ostringstream o;
  o.precision(digits);
  o << v;
  return o.str();
}

inline std::string series(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i], 4);
  return out + "]";
}

inline bool nondecreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] * (1.0 - pinned::order_slack)) return false;
  return true;
}

inline bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] * (1.0 + pinned::order_slack)) return false;
  return true;
}

inline SolveRequest sensing(Algorithm a, double eta_db) {
  SolveRequest r;
  r.algorithm = a;
  r.eta = db_to_linear(eta_db);
  r.seed = 0;
  return r;
}

inline SolveRequest radar_only(Algorithm a) {
  SolveRequest r;
  r.algorithm = a;
  return r;
}

inline SolveRequest comm(Algorithm a, double epsilon) {
  SolveRequest r;
  r.mode = Mode::comm;
  r.algorithm = a;
  r.epsilon = {epsilon};
  return r;
}

// Infeasible designs count as an infinite CRLB and a zero SINR.
inline double crlb_or_inf(const SolveReport& r) {
  return r.status == SolveStatus::infeasible ? std::numeric_limits<double>::infinity() : r.max_crlb();
}

inline double sinr_or_zero(const SolveReport& r) { return r.status == SolveStatus::infeasible ? 0.0 : r.min_sinr(); }

inline Scenario random_geometry(std::mt19937_64& g, int M, int N) {
  std::uniform_real_distribution<double> U(-200.0, 200.0);
  Scenario s;
  for (int m = 0; m < M; ++m) s.bs.push_back({{U(g), U(g)}, std::nullopt});
  s.targets = {{0.3 * U(g), 0.3 * U(g)}};
  while (s.num_tmt() < N) {
    const Point2 p{U(g), U(g)};
    if (distance(p, s.targets[0]) > 5.0) s.tmt.push_back(p);
  }
  s.users.assign(M, {{U(g), U(g)}});
  return s;
}

struct Data {
  Scenario desk, desk_m1, desk_6tmt, desk_3targets;
};

inline Data load_data(const std::string& dir) {
  const auto file = [&](const char* name) { return load_scenario_file(dir + "/" + name); };
  return {file("desk.json"), file("desk-m1.json"), file("desk-6tmt.json"), file("desk-3targets.json")};
}

}  // namespace detail

inline Outcome jacobian_accuracy() {
  const Stopwatch clock;
  std::mt19937_64 g(1001);
  double worst = 0.0;
  const double h = 1e-3;
  for (int trial = 0; trial < 100; ++trial) {
    const Scenario s = detail::random_geometry(g, 1 + trial % 3, 2 + trial % 4);
    const auto J = jacobian(s, 0);
    Eigen::MatrixXd fd(J.rows(), J.cols());
    for (int m = 0; m < s.num_bs(); ++m)
      for (int n = 0; n < s.num_tmt(); ++n)
        for (int axis = 0; axis < 2; ++axis) {
          Scenario plus = s, minus = s;
          (axis == 0 ? plus.targets[0].x : plus.targets[0].y) += h;
          (axis == 0 ? minus.targets[0].x : minus.targets[0].y) -= h;
          fd(axis, m * s.num_tmt() + n) = (delay(plus, m, n, 0) - delay(minus, m, n, 0)) / (2.0 * h);
        }
    worst = std::max(worst, (fd - J).cwiseAbs().maxCoeff() / J.cwiseAbs().maxCoeff());
  }
  const double secs = clock.seconds();
  return {1, "jacobian", worst <= pinned::jacobian_rel && secs < pinned::fast_seconds,
          "100 geometries, max rel err " + detail::fmt(worst) + ", " + detail::fmt(secs) + " s", secs};
}

inline Outcome crlb_gradient() {
  const Stopwatch clock;
  std::mt19937_64 g(2002);
  std::uniform_real_distribution<double> Q(0.1, 10.0), Z(0.5, 2.0);
  double worst = 0.0;
  bool signs = true;
  for (int trial = 0; trial < 100; ++trial) {
    const Scenario s = detail::random_geometry(g, 1 + trial % 3, 2 + trial % 4);
    const auto J = jacobian(s, 0);
    MatrixXd zhat(s.num_bs(), s.num_tmt());
    for (int m = 0; m < zhat.rows(); ++m)
      for (int n = 0; n < zhat.cols(); ++n) zhat(m, n) = 1e18 * Z(g);
    VectorXd q(s.num_bs());
    for (int m = 0; m < q.size(); ++m) q(m) = Q(g);
    const CrlbEntry e = crlb_from_q(J, zhat, q);
    VectorXd fd(q.size());
    for (int m = 0; m < q.size(); ++m) {
      const double step = 1e-4 * q(m);
      VectorXd qp = q, qm = q;
      qp(m) += step;
      qm(m) -= step;
      fd(m) = (crlb_from_q(J, zhat, qp).crlb_m2 - crlb_from_q(J, zhat, qm).crlb_m2) / (2.0 * step);
    }
    worst = std::max(worst, (fd - e.gradient).norm() / e.gradient.norm());
    signs = signs && (e.gradient.array() <= 0.0).all();
  }
  const double secs = clock.seconds();
  return {2, "crlb-gradient", worst <= pinned::gradient_rel && signs && secs < pinned::fast_seconds,
          "100 draws, max rel err " + detail::fmt(worst) + (signs ? ", all entries <= 0" : ", positive entry found") +
              ", " + detail::fmt(secs) + " s",
          secs};
}

inline Outcome crlb_homogeneity(const detail::Data& data) {
  const Stopwatch clock;
  const Scenario& s = data.desk;
  rng::Stream g(3003);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ChannelRealization ch = draw_channels(s, seed);
    BeamformerSet b = BeamformerSet::zeros(s.num_bs(), s.users_per_bs(), s.num_antennas());
    for (auto& row : b.f)
      for (auto& v : row)
        for (int p = 0; p < v.size(); ++p) v(p) = 0.3 * g.complex_normal();
    MatrixXcd A(s.num_antennas(), 2);
    for (int i = 0; i < A.size(); ++i) A.data()[i] = 0.1 * g.complex_normal();
    b.set_sensing_cov(0, A * A.adjoint());
    const double base = crlb(s, ch, b, 0).crlb_m2;
    for (double alpha : {0.5, 2.0, 10.0}) {
      const double scaled = crlb(s, ch, b.scaled(alpha), 0).crlb_m2;
      worst = std::max(worst, std::abs(scaled * alpha * alpha - base) / base);
    }
  }
  return {3, "crlb-homogeneity", worst <= pinned::homogeneity_rel,
          "alpha in {0.5, 2, 10}, 5 draws, max rel err " + detail::fmt(worst), clock.seconds()};
}

// Criteria 4 and 5 share their instances.
inline std::pair<Outcome, Outcome> sdr_and_sca(const detail::Data& data, int num_seeds) {
  const Stopwatch clock;
  const Scenario& s = data.desk;
  int covariances = 0, rank_one = 0, instances = 0, audited = 0, monotone = 0;
  std::vector<double> gaps;
  double sdr_seconds = 0.0;
  for (std::uint64_t seed : detail::seeds(num_seeds)) {
    const ChannelRealization ch = draw_channels(s, seed);
    for (double eta_db : {0.0, 5.0, 10.0}) {
      ++instances;
      const SolveReport sdr = solve(s, ch, detail::sensing(Algorithm::sdr, eta_db));
      sdr_seconds += sdr.seconds;
      if (sdr.status == SolveStatus::solved) ++audited;
      for (double r : sdr.rank_ratios) {
        ++covariances;
        if (r <= pinned::rank_ratio) ++rank_one;
      }
      const SolveReport sca = solve(s, ch, detail::sensing(Algorithm::sca, eta_db));
      gaps.push_back(detail::crlb_or_inf(sca) / detail::crlb_or_inf(sdr) - 1.0);
      bool mono = !sca.objective_trace.empty();
      for (std::size_t i = 1; i < sca.objective_trace.size(); ++i)
        mono = mono && sca.objective_trace[i] <= sca.objective_trace[i - 1] * (1.0 + pinned::trace_slack);
      if (mono) ++monotone;
    }
  }
  const double fraction = covariances ? static_cast<double>(rank_one) / covariances : 0.0;
  Outcome c4{4, "sdr-tightness",
             fraction >= pinned::rank_one_fraction && audited == instances,
             std::to_string(rank_one) + "/" + std::to_string(covariances) + " covariances rank one, " +
                 std::to_string(audited) + "/" + std::to_string(instances) + " audited, SDR time " +
                 detail::fmt(sdr_seconds) + " s",
             sdr_seconds};
  const double med = detail::median(gaps), p95 = detail::percentile(gaps, 95.0);
  Outcome c5{5, "sca-near-optimal",
             med <= pinned::sca_gap_median && p95 <= pinned::sca_gap_p95 && monotone == instances,
             "gap median " + detail::fmt(100 * med) + "%, p95 " + detail::fmt(100 * p95) + "%, " +
                 std::to_string(monotone) + "/" + std::to_string(instances) + " traces monotone",
             clock.seconds() - sdr_seconds};
  return {c4, c5};
}

inline Outcome bisection_certificate(const detail::Data& data, int num_seeds) {
  const Stopwatch clock;
  const Scenario& s = data.desk_m1;
  int certified = 0, close = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, worst_ratio = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed : detail::seeds(num_seeds)) {
    const ChannelRealization ch = draw_channels(s, seed);
    const double eps = 2.0 * radar_only_crlb(s, ch);
    const SolveRequest req = detail::comm(Algorithm::bisection, eps);
    const SolveReport bis = solve(s, ch, req);
    if (bis.status != SolveStatus::solved) {
      lo = 0.0;
      continue;
    }
    const double a = solvers::solve_power_min(s, ch, bis.relaxation_bound, req).ratio;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
    if (a >= pinned::certificate_low && a <= pinned::certificate_high) ++certified;
    const SolveReport sca = solve(s, ch, detail::comm(Algorithm::sca, eps));
    const double rel = detail::sinr_or_zero(sca) / bis.min_sinr();
    worst_ratio = std::min(worst_ratio, rel);
    if (rel >= pinned::sca_vs_bisection) ++close;
  }
  return {6, "bisection-certificate", certified == num_seeds && close == num_seeds,
          "a in [" + detail::fmt(lo, 6) + ", " + detail::fmt(hi, 6) + "] (" + std::to_string(certified) + "/" +
              std::to_string(num_seeds) + "), SCA/bisection min " + detail::fmt(worst_ratio, 4),
          clock.seconds()};
}

inline Outcome tradeoff_trends(const detail::Data& data, int num_seeds) {
  const Stopwatch clock;
  const std::vector<std::uint64_t> seeds = detail::seeds(num_seeds);
  std::vector<std::string> failed;
  std::string detail;

  // CRLB versus eta.
  std::vector<double> by_eta;
  for (double eta_db : {0.0, 5.0, 10.0, 15.0, 20.0}) {
    std::vector<double> v;
    for (std::uint64_t seed : seeds)
      v.push_back(detail::crlb_or_inf(
          solve(data.desk, draw_channels(data.desk, seed), detail::sensing(Algorithm::sdr, eta_db))));
    by_eta.push_back(detail::median(v));
  }
  if (!detail::nondecreasing(by_eta)) failed.push_back("eta");
  detail += "CRLB(eta) " + detail::series(by_eta);

  // min-SINR versus epsilon on one BS.
  std::vector<double> radar;
  for (std::uint64_t seed : seeds) radar.push_back(radar_only_crlb(data.desk_m1, draw_channels(data.desk_m1, seed)));
  const double base = detail::median(radar);
  std::vector<double> by_eps;
  for (double factor : {1.2, 1.5, 2.0, 3.0, 5.0}) {
    std::vector<double> v;
    for (std::uint64_t seed : seeds)
      v.push_back(detail::sinr_or_zero(solve(data.desk_m1, draw_channels(data.desk_m1, seed),
                                             detail::comm(Algorithm::bisection, factor * base))));
    by_eps.push_back(linear_to_db(detail::median(v)));
  }
  if (!detail::nondecreasing(by_eps)) failed.push_back("epsilon");
  detail += "; SINR_dB(eps) " + detail::series(by_eps);

  // Two extra TMTs.
  std::vector<double> four, six;
  for (std::uint64_t seed : seeds) {
    const SolveRequest req = detail::sensing(Algorithm::sdr, 10.0);
    four.push_back(detail::crlb_or_inf(solve(data.desk, draw_channels(data.desk, seed), req)));
    six.push_back(detail::crlb_or_inf(solve(data.desk_6tmt, draw_channels(data.desk_6tmt, seed), req)));
  }
  const double m4 = detail::median(four), m6 = detail::median(six);
  if (!(m6 < m4)) failed.push_back("tmts");
  detail += "; CRLB 4->6 TMTs " + detail::fmt(m4, 4) + " -> " + detail::fmt(m6, 4);

  // Nested targets: min-max CRLB in sensing mode, min-SINR in comm mode at a
  // threshold every target count can meet.
  std::vector<double> crlb_u(3), sinr_u(3);
  std::vector<std::vector<double>> crlbs(3), sinrs(3);
  for (std::uint64_t seed : seeds) {
    const ChannelRealization ch3 = draw_channels(data.desk_3targets, seed);
    const double eps = 1.5 * detail::crlb_or_inf(solve(data.desk_3targets, ch3, detail::radar_only(Algorithm::sdr)));
    for (int u = 1; u <= 3; ++u) {
      const Scenario s = with_num_targets(data.desk_3targets, u);
      const ChannelRealization ch = draw_channels(s, seed);
      crlbs[u - 1].push_back(detail::crlb_or_inf(solve(s, ch, detail::sensing(Algorithm::sdr, 10.0))));
      sinrs[u - 1].push_back(detail::sinr_or_zero(solve(s, ch, detail::comm(Algorithm::sca, eps))));
    }
  }
  for (int u = 0; u < 3; ++u) {
    crlb_u[u] = detail::median(crlbs[u]);
    sinr_u[u] = linear_to_db(detail::median(sinrs[u]));
  }
  if (!detail::nondecreasing(crlb_u)) failed.push_back("targets-crlb");
  if (!detail::nonincreasing(sinr_u)) failed.push_back("targets-sinr");
  detail += "; U=1..3 CRLB " + detail::series(crlb_u) + ", SINR_dB " + detail::series(sinr_u);

  std::string verdict;
  for (const auto& f : failed) verdict += (verdict.empty() ? " (violated: " : ", ") + f;
  if (!verdict.empty()) verdict += ")";
  return {7, "tradeoff-trends", failed.empty(), detail + verdict, clock.seconds()};
}

inline Outcome baseline_ordering(const detail::Data& data, int num_seeds) {
  const Stopwatch clock;
  const Scenario& s = data.desk;
  int sensing_ok = 0, comm_ok = 0, lobes_ok = 0, lobes = 0;
  double residual = 0.0;
  std::vector<double> grid;
  for (int i = 0; i <= 1800; ++i) grid.push_back(deg_to_rad(-90.0 + 0.1 * i));
  for (std::uint64_t seed : detail::seeds(num_seeds)) {
    const ChannelRealization ch = draw_channels(s, seed);

    const auto run = [&](Algorithm a) { return solve(s, ch, detail::sensing(a, 10.0)); };
    const double sdr = detail::crlb_or_inf(run(Algorithm::sdr));
    const double sca = detail::crlb_or_inf(run(Algorithm::sca));
    const SolveReport bpm = run(Algorithm::bpm);
    bool ok = std::isfinite(sdr) && std::isfinite(sca);
    for (double baseline : {detail::crlb_or_inf(run(Algorithm::zf)), detail::crlb_or_inf(run(Algorithm::mmse)),
                            detail::crlb_or_inf(bpm)})
      ok = ok && sdr <= baseline * (1.0 + pinned::order_slack) && sca <= baseline * (1.0 + pinned::order_slack);
    if (ok) ++sensing_ok;

    for (int m = 0; m < s.num_bs(); ++m) {
      ++lobes;
      const std::vector<double> g = beampattern(bpm.beams, m, grid, s.params);
      const auto peak = std::max_element(g.begin(), g.end()) - g.begin();
      if (std::abs(rad_to_deg(grid[peak] - aod(s, m, 0))) <= pinned::mainlobe_deg) ++lobes_ok;
    }

    const double zf_radar = detail::crlb_or_inf(solve(s, ch, detail::radar_only(Algorithm::zf)));
    const double mmse_radar = detail::crlb_or_inf(solve(s, ch, detail::radar_only(Algorithm::mmse)));
    const double eps = 1.5 * std::max(zf_radar, mmse_radar);
    const double proposed = detail::sinr_or_zero(solve(s, ch, detail::comm(Algorithm::sca, eps)));
    const double zf = detail::sinr_or_zero(solve(s, ch, detail::comm(Algorithm::zf, eps)));
    const double mmse = detail::sinr_or_zero(solve(s, ch, detail::comm(Algorithm::mmse, eps)));
    if (std::isfinite(eps) && proposed > 0.0 && proposed >= std::max(zf, mmse) * (1.0 - pinned::order_slack))
      ++comm_ok;

    const solvers::DirectionSet dirs = baselines::zf_directions(ch);
    for (int m = 0; m < s.num_bs(); ++m)
      for (int k = 0; k < s.users_per_bs(); ++k)
        for (int i = 0; i < s.num_bs(); ++i)
          for (int j = 0; j < s.users_per_bs(); ++j) {
            if (i == m && j == k) continue;
            const VectorXcd& h = ch.h(m, i, j);
            residual = std::max(residual, std::norm(h.dot(dirs.f[m][k])) / h.squaredNorm());
          }
  }
  const std::string n = std::to_string(num_seeds);
  return {8, "baseline-ordering",
          sensing_ok == num_seeds && comm_ok == num_seeds && residual <= pinned::zf_residual && lobes_ok == lobes,
          "sensing " + std::to_string(sensing_ok) + "/" + n + ", comm " + std::to_string(comm_ok) + "/" + n +
              ", ZF residual " + detail::fmt(residual) + ", main lobes " + std::to_string(lobes_ok) + "/" +
              std::to_string(lobes),
          clock.seconds()};
}

inline Outcome power_min_feasibility(const detail::Data& data, int num_draws) {
  const Stopwatch clock;
  const Scenario& s = data.desk_m1;
  int feasible = 0, full_rank = 0;
  for (std::uint64_t seed : detail::seeds(num_draws)) {
    const ChannelRealization ch = draw_channels(s, seed);
    MatrixXcd H(s.num_antennas(), s.users_per_bs());
    for (int k = 0; k < s.users_per_bs(); ++k) H.col(k) = ch.h(0, 0, k);
    if (Eigen::FullPivLU<MatrixXcd>(H).rank() == s.users_per_bs()) ++full_rank;
    const SolveRequest req = detail::comm(Algorithm::bisection, 2.0 * radar_only_crlb(s, ch));
    const solvers::PowerMinResult pm = solvers::solve_power_min(s, ch, db_to_linear(10.0), req);
    if (pm.status == conic::Status::optimal && std::isfinite(pm.ratio)) ++feasible;
  }
  const std::string n = std::to_string(num_draws);
  return {9, "power-min-feasible", feasible == num_draws && full_rank == num_draws,
          std::to_string(feasible) + "/" + n + " feasible, " + std::to_string(full_rank) + "/" + n +
              " full column rank",
          clock.seconds()};
}

inline Outcome conic_conformance() {
  const Stopwatch clock;
  using conic::AffineExpr;
  const auto epigraph = [](const Eigen::Matrix2d& F) {
    conic::Program p;
    const AffineExpr t =
        conic::trace_inverse_epigraph(p, {AffineExpr(F(0, 0)), AffineExpr(F(1, 0)), AffineExpr(F(1, 1))});
    p.minimize(t);
    const conic::Solution sol = conic::solve(p);
    return sol.status == conic::Status::optimal ? sol.value(t) : std::numeric_limits<double>::quiet_NaN();
  };
  double worst = std::abs(epigraph(Eigen::Matrix2d::Identity()) - 2.0) / 2.0;
  worst = std::max(worst, std::abs(epigraph(Eigen::Vector2d(2.0, 4.0).asDiagonal()) - 0.75) / 0.75);
  std::mt19937_64 g(4004);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Matrix2d B;
    B << N(g), N(g), N(g), N(g);
    const Eigen::Matrix2d F = B * B.transpose() + 0.1 * Eigen::Matrix2d::Identity();
    const double oracle = F.inverse().trace();
    worst = std::max(worst, std::abs(epigraph(F) - oracle) / oracle);
  }
  if (std::isnan(worst)) worst = std::numeric_limits<double>::infinity();

  double spread = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = cdouble(N(g), N(g));
    A = 0.5 * (A + A.adjoint()).eval();
    const VectorXd ev = Eigen::SelfAdjointEigenSolver<MatrixXcd>(A).eigenvalues();
    const VectorXd er = Eigen::SelfAdjointEigenSolver<MatrixXd>(conic::embed_hermitian(A)).eigenvalues();
    for (int i = 0; i < n; ++i)
      spread = std::max({spread, std::abs(er(2 * i) - ev(i)), std::abs(er(2 * i + 1) - ev(i))});
  }
  return {10, "conic-conformance", worst <= pinned::conic_rel && spread <= pinned::embedding_abs,
          "epigraph max rel err " + detail::fmt(worst) + ", embedding eigenvalue err " + detail::fmt(spread),
          clock.seconds()};
}

// Runs criteria 1 to 10 in order; on_result sees each verdict as it lands.
inline std::vector<Outcome> run_all(const Options& opt, const std::function<void(const Outcome&)>& on_result = {}) {
  std::vector<Outcome> out;
  const auto record = [&](Outcome o) {
    if (on_result) on_result(o);
    out.push_back(std::move(o));
  };
  // A throwing body fails every criterion it was meant to report.
  const auto guarded = [&](std::initializer_list<std::pair<int, const char*>> ids, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      for (const auto& [id, name] : ids) record({id, name, false, std::string("error: ") + e.what(), 0.0});
    }
  };
  const int seeds50 = opt.quick ? 5 : 50;
  const int seeds20 = opt.quick ? 3 : 20;
  const int seeds10 = opt.quick ? 3 : 10;

  std::optional<detail::Data> data;
  std::string load_error;
  try {
    data = detail::load_data(opt.data_dir);
  } catch (const std::exception& e) {
    load_error = std::string("scenario data unavailable: ") + e.what();
  }
  const auto needs_data = [&](std::initializer_list<std::pair<int, const char*>> ids,
                              const std::function<void(const detail::Data&)>& body) {
    if (data) {
      guarded(ids, [&] { body(*data); });
      return;
    }
    for (const auto& [id, name] : ids) record({id, name, false, load_error, 0.0});
  };

  guarded({{1, "jacobian"}}, [&] { record(jacobian_accuracy()); });
  guarded({{2, "crlb-gradient"}}, [&] { record(crlb_gradient()); });
  needs_data({{3, "crlb-homogeneity"}}, [&](const detail::Data& d) { record(crlb_homogeneity(d)); });
  needs_data({{4, "sdr-tightness"}, {5, "sca-near-optimal"}}, [&](const detail::Data& d) {
    auto [c4, c5] = sdr_and_sca(d, seeds50);
    record(c4);
    record(c5);
  });
  needs_data({{6, "bisection-certificate"}}, [&](const detail::Data& d) { record(bisection_certificate(d, seeds20)); });
  needs_data({{7, "tradeoff-trends"}}, [&](const detail::Data& d) { record(tradeoff_trends(d, seeds10)); });
  needs_data({{8, "baseline-ordering"}}, [&](const detail::Data& d) { record(baseline_ordering(d, seeds10)); });
  needs_data({{9, "power-min-feasible"}}, [&](const detail::Data& d) { record(power_min_feasibility(d, seeds50)); });
  guarded({{10, "conic-conformance"}}, [&] { record(conic_conformance()); });
  return out;
}

inline std::string format(const Outcome& o) {
  return std::string(o.pass ? "PASS" : "FAIL") + " " + std::to_string(o.id) + " " + o.name + ": " + o.detail;
}

}  // namespace isac::validation
