#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "isac/core.hpp"

namespace isac {

struct SystemParams {
  double carrier_freq_hz = 24e9;
  int num_tx_antennas = 8;
  double antenna_spacing_ratio = 0.5;
  double effective_bandwidth_hz = 100e6;
  double comm_noise_power_w = dbm_to_watt(-94.0);
  double sensing_noise_psd_w_per_hz = dbm_to_watt(-174.0);
  int num_snapshots = 256;
  double symbol_duration_s = 1e-8;
  double max_power_w = 1.0;
  double rician_factor = 10.0;
  int num_nlos_paths = 10;
  double nlos_spread_rad = deg_to_rad(30.0);
  double speed_of_light_m_s = 299792458.0;

  double observation_time_s() const { return num_snapshots * symbol_duration_s; }
  double wavelength_m() const { return speed_of_light_m_s / carrier_freq_hz; }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct BaseStation {
  Point2 pos;
  // Array broadside azimuth; when absent the array faces the scene origin.
  std::optional<double> broadside_rad;
};

struct Scenario {
  SystemParams params;
  double bs_height_m = 20.0;
  std::vector<BaseStation> bs;
  std::vector<Point2> tmt;
  std::vector<std::vector<Point2>> users;  // [serving bs][user]
  std::vector<Point2> targets;

  int num_bs() const { return static_cast<int>(bs.size()); }
  int num_tmt() const { return static_cast<int>(tmt.size()); }
  int num_targets() const { return static_cast<int>(targets.size()); }
  int users_per_bs() const { return users.empty() ? 0 : static_cast<int>(users.front().size()); }
  int num_antennas() const { return params.num_tx_antennas; }
};

namespace geometry {

// Round-trip delay BS -> target -> TMT, BS elevated by `height`.
inline double delay(Point2 bs, double height, Point2 tmt, Point2 target, double c) {
  const double dx = bs.x - target.x;
  const double dy = bs.y - target.y;
  const double leg1 = std::sqrt(dx * dx + dy * dy + height * height);
  return (leg1 + distance(tmt, target)) / c;
}

inline double wrap_pi(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

// Angle of `to` seen from `from`, relative to `broadside`, counterclockwise
// positive, folded into (-pi/2, pi/2] (a ULA cannot tell front from back).
inline double azimuth_from_broadside(Point2 from, double broadside, Point2 to) {
  double a = wrap_pi(std::atan2(to.y - from.y, to.x - from.x) - broadside);
  if (a > kPi / 2) a = kPi - a;
  if (a <= -kPi / 2) a = -kPi - a;
  return a;
}

}  // namespace geometry

inline double broadside(const Scenario& s, int m) {
  const BaseStation& b = s.bs.at(m);
  if (b.broadside_rad) return *b.broadside_rad;
  if (b.pos.x == 0.0 && b.pos.y == 0.0) return 0.0;
  return std::atan2(-b.pos.y, -b.pos.x);
}

inline double aod_to(const Scenario& s, int m, Point2 p) {
  return geometry::azimuth_from_broadside(s.bs.at(m).pos, broadside(s, m), p);
}

inline double aod(const Scenario& s, int m, int u) { return aod_to(s, m, s.targets.at(u)); }

inline double bs_target_distance(const Scenario& s, int m, int u) {
  const Point2 b = s.bs.at(m).pos;
  const Point2 t = s.targets.at(u);
  return std::sqrt((b.x - t.x) * (b.x - t.x) + (b.y - t.y) * (b.y - t.y) +
                   s.bs_height_m * s.bs_height_m);
}

inline double tmt_target_distance(const Scenario& s, int n, int u) {
  return distance(s.tmt.at(n), s.targets.at(u));
}

// 3-D distance from BS i to a ground point.
inline double bs_ground_distance(const Scenario& s, int i, Point2 p) {
  const Point2 b = s.bs.at(i).pos;
  return std::sqrt((b.x - p.x) * (b.x - p.x) + (b.y - p.y) * (b.y - p.y) +
                   s.bs_height_m * s.bs_height_m);
}

inline double delay(const Scenario& s, int m, int n, int u) {
  return geometry::delay(s.bs.at(m).pos, s.bs_height_m, s.tmt.at(n), s.targets.at(u),
                         s.params.speed_of_light_m_s);
}

// 2 x (M*N) Jacobian of the delays w.r.t. target (x, y); column m*N + n.
inline Eigen::Matrix<double, 2, Eigen::Dynamic> jacobian(const Scenario& s, int u) {
  const int M = s.num_bs();
  const int N = s.num_tmt();
  const double c = s.params.speed_of_light_m_s;
  const Point2 t = s.targets.at(u);
  Eigen::Matrix<double, 2, Eigen::Dynamic> J(2, M * N);
  for (int m = 0; m < M; ++m) {
    const Point2 b = s.bs[m].pos;
    const double d3 = bs_target_distance(s, m, u);
    for (int n = 0; n < N; ++n) {
      const Point2 r = s.tmt[n];
      const double d2 = tmt_target_distance(s, n, u);
      J(0, m * N + n) = ((t.x - b.x) / d3 + (t.x - r.x) / d2) / c;
      J(1, m * N + n) = ((t.y - b.y) / d3 + (t.y - r.y) / d2) / c;
    }
  }
  return J;
}

// Which invariants validate() enforces. Rank-deficient geometry is admitted
// only where a singular FIM is reported downstream instead.
enum class Checks { all, allow_singular_fim };

// Throws ValidationError naming the first violated invariant.
inline void validate(const Scenario& s, Checks checks = Checks::all) {
  const SystemParams& p = s.params;
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
  };
  auto finite_pos = [](double v) { return std::isfinite(v) && v > 0.0; };
  require(finite_pos(p.carrier_freq_hz), "carrier_freq_hz > 0");
  require(p.num_tx_antennas >= 1, "N_t >= 1");
  require(finite_pos(p.antenna_spacing_ratio), "antenna_spacing_ratio > 0");
  require(finite_pos(p.effective_bandwidth_hz), "effective_bandwidth_hz > 0");
  require(finite_pos(p.comm_noise_power_w), "comm_noise_power > 0");
  require(finite_pos(p.sensing_noise_psd_w_per_hz), "sensing_noise_psd > 0");
  require(p.num_snapshots >= 1, "num_snapshots >= 1");
  require(finite_pos(p.symbol_duration_s), "symbol_duration_s > 0");
  require(finite_pos(p.max_power_w), "max_power > 0");
  require(p.rician_factor > 0.0 && !std::isnan(p.rician_factor), "rician_factor > 0");
  require(p.num_nlos_paths >= 0, "V >= 0");
  require(std::isfinite(p.nlos_spread_rad) && p.nlos_spread_rad >= 0.0, "nlos_spread >= 0");
  require(finite_pos(p.speed_of_light_m_s), "speed_of_light > 0");
  require(std::isfinite(s.bs_height_m) && s.bs_height_m >= 0.0, "height_m >= 0");

  require(s.num_bs() >= 1, "M >= 1");
  require(s.num_tmt() >= 1, "N >= 1");
  require(s.num_targets() >= 1, "U >= 1");
  require(static_cast<int>(s.users.size()) == s.num_bs(), "one user list per BS");
  const int K = s.users_per_bs();
  require(K >= 1, "K >= 1");
  for (const auto& list : s.users) require(static_cast<int>(list.size()) == K, "K uniform across BSs");
  if (checks == Checks::all) require(s.num_bs() * s.num_tmt() >= 2, "M*N >= 2");

  for (int u = 0; u < s.num_targets(); ++u) {
    for (int m = 0; m < s.num_bs(); ++m)
      require(bs_target_distance(s, m, u) > 0.0, "BS-target distance must be nonzero");
    for (int n = 0; n < s.num_tmt(); ++n)
      require(tmt_target_distance(s, n, u) > 0.0, "TMT-target distance must be nonzero");
  }
}

// Copy keeping only the first n TMTs / BSs / targets (sweep helpers).
inline Scenario with_num_tmts(Scenario s, int n) {
  if (n < 0 || n > s.num_tmt()) throw ValidationError("num_tmts exceeds the scenario's TMT list");
  s.tmt.resize(n);
  return s;
}

inline Scenario with_num_bs(Scenario s, int m) {
  if (m < 0 || m > s.num_bs()) throw ValidationError("num_bs exceeds the scenario's BS list");
  s.bs.resize(m);
  s.users.resize(m);
  return s;
}

inline Scenario with_num_targets(Scenario s, int u) {
  if (u < 0 || u > s.num_targets()) throw ValidationError("num_targets exceeds the scenario's target list");
  s.targets.resize(u);
  return s;
}

}  // namespace isac
