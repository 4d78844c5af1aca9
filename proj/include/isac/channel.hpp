#pragma once

#include <cstdint>
#include <vector>

#include "isac/rng.hpp"
#include "isac/scenario.hpp"

namespace isac {

// Transmit ULA response; element p = exp(j 2 pi (d/lambda) p sin(phi)).
inline VectorXcd array_response(int n_t, double spacing_ratio, double phi) {
  VectorXcd a(n_t);
  const double step = 2.0 * kPi * spacing_ratio * std::sin(phi);
  for (int p = 0; p < n_t; ++p) a(p) = std::polar(1.0, step * p);
  return a;
}

inline VectorXcd steering(const Scenario& s, double phi) {
  return array_response(s.params.num_tx_antennas, s.params.antenna_spacing_ratio, phi);
}

struct ChannelRealization {
  // comm[i][m][k]: channel from BS i to user k served by BS m.
  std::vector<std::vector<std::vector<VectorXcd>>> comm;
  // sensing[u](m, n): BS m -> target u -> TMT n coefficient.
  std::vector<MatrixXcd> sensing;
  std::uint64_t seed = 0;

  const VectorXcd& h(int i, int m, int k) const { return comm[i][m][k]; }
  cdouble eps(int m, int n, int u) const { return sensing[u](m, n); }
  int num_bs() const { return static_cast<int>(comm.size()); }
  int users_per_bs() const { return comm.empty() || comm[0].empty() ? 0 : static_cast<int>(comm[0][0].size()); }
  int num_antennas() const {
    return num_bs() == 0 || users_per_bs() == 0 ? 0 : static_cast<int>(comm[0][0][0].size());
  }
};

// Free-space gain c^2 / (f_c^2 (4 pi)^2 d^2).
inline double comm_pathloss(const SystemParams& p, double d) {
  const double lam = p.wavelength_m();
  return lam * lam / (16.0 * kPi * kPi * d * d);
}

// Two-hop radar gain c^2 / (f_c^2 (4 pi)^3 d1^2 d2^2).
inline double sensing_pathloss(const SystemParams& p, double d_bs, double d_tmt) {
  const double lam = p.wavelength_m();
  return lam * lam / (64.0 * kPi * kPi * kPi * d_bs * d_bs * d_tmt * d_tmt);
}

// Rician channel from BS i to a ground user; the LoS direction is geometric,
// NLoS directions are uniform within the LoS angle +- nlos_spread.
inline VectorXcd draw_user_channel(const Scenario& s, int i, Point2 user, rng::Stream& gen) {
  const SystemParams& p = s.params;
  const int nt = p.num_tx_antennas;
  const double d = bs_ground_distance(s, i, user);
  if (!(d > 0.0)) throw GenerationError("user collocated with BS " + std::to_string(i));
  const double amp = std::sqrt(comm_pathloss(p, d));
  const double phi0 = aod_to(s, i, user);
  const double kappa = p.rician_factor;
  const double w_los = std::isinf(kappa) ? 1.0 : std::sqrt(kappa / (1.0 + kappa));
  const double w_nlos = std::isinf(kappa) ? 0.0 : std::sqrt(1.0 / (1.0 + kappa));

  VectorXcd h = (w_los * amp * gen.complex_normal()) * steering(s, phi0).conjugate();
  const int V = p.num_nlos_paths;
  if (V > 0) {
    const double w = w_nlos / std::sqrt(static_cast<double>(V));
    for (int v = 0; v < V; ++v) {
      const double phi = phi0 + gen.uniform(-p.nlos_spread_rad, p.nlos_spread_rad);
      const cdouble alpha = amp * gen.complex_normal();
      h += (w * alpha) * steering(s, phi).conjugate();
    }
  }
  return h;
}

inline std::vector<std::vector<std::vector<VectorXcd>>> draw_comm_channels(const Scenario& s, std::uint64_t seed) {
  const int M = s.num_bs();
  const int K = s.users_per_bs();
  std::vector<std::vector<std::vector<VectorXcd>>> comm(M, std::vector<std::vector<VectorXcd>>(M));
  for (int i = 0; i < M; ++i)
    for (int m = 0; m < M; ++m)
      for (int k = 0; k < K; ++k) {
        rng::Stream gen(seed, rng::kCommChannel,
                        {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(k)});
        comm[i][m].push_back(draw_user_channel(s, i, s.users[m][k], gen));
      }
  return comm;
}

inline std::vector<MatrixXcd> draw_sensing_coeffs(const Scenario& s, std::uint64_t seed) {
  const int M = s.num_bs();
  const int N = s.num_tmt();
  std::vector<MatrixXcd> out;
  for (int u = 0; u < s.num_targets(); ++u) {
    MatrixXcd e(M, N);
    for (int m = 0; m < M; ++m)
      for (int n = 0; n < N; ++n) {
        rng::Stream gen(seed, rng::kSensingCoeff,
                        {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(u)});
        const double F = sensing_pathloss(s.params, bs_target_distance(s, m, u), tmt_target_distance(s, n, u));
        e(m, n) = std::sqrt(F) * gen.complex_normal();
      }
    out.push_back(e);
  }
  return out;
}

inline ChannelRealization draw_channels(const Scenario& s, std::uint64_t seed) {
  ChannelRealization ch;
  ch.comm = draw_comm_channels(s, seed);
  ch.sensing = draw_sensing_coeffs(s, seed);
  ch.seed = seed;
  return ch;
}

}  // namespace isac
