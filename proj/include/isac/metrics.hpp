#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "isac/channel.hpp"
#include "isac/scenario.hpp"

namespace isac {

struct BeamformerSet {
  std::vector<std::vector<VectorXcd>> f;  // [bs][user]
  std::vector<MatrixXcd> sensing_cov;     // empty, or one Hermitian PSD matrix per BS

  static BeamformerSet zeros(int M, int K, int nt) {
    BeamformerSet b;
    b.f.assign(M, std::vector<VectorXcd>(K, VectorXcd::Zero(nt)));
    return b;
  }

  int num_bs() const { return static_cast<int>(f.size()); }
  int users_per_bs() const { return f.empty() ? 0 : static_cast<int>(f[0].size()); }
  int num_antennas() const { return f.empty() || f[0].empty() ? 0 : static_cast<int>(f[0][0].size()); }
  bool has_sensing_cov() const { return !sensing_cov.empty(); }

  void set_sensing_cov(int m, const MatrixXcd& R) {
    if (sensing_cov.empty())
      sensing_cov.assign(num_bs(), MatrixXcd::Zero(num_antennas(), num_antennas()));
    sensing_cov.at(m) = 0.5 * (R + R.adjoint());
  }

  // Sum_k f f^H + R for BS m.
  MatrixXcd covariance(int m) const {
    const int nt = num_antennas();
    MatrixXcd C = has_sensing_cov() ? sensing_cov[m] : MatrixXcd::Zero(nt, nt);
    for (const VectorXcd& v : f[m]) C += v * v.adjoint();
    return C;
  }

  BeamformerSet scaled(double alpha) const {
    BeamformerSet out = *this;
    for (auto& row : out.f)
      for (auto& v : row) v *= alpha;
    for (auto& R : out.sensing_cov) R *= alpha * alpha;
    return out;
  }
};

inline void check_dimensions(const Scenario& s, const BeamformerSet& b) {
  if (b.num_bs() != s.num_bs() || b.users_per_bs() != s.users_per_bs() || b.num_antennas() != s.num_antennas())
    throw DimensionError("beamformer dimensions do not match the scenario (M x K x N_t)");
  if (b.has_sensing_cov() && static_cast<int>(b.sensing_cov.size()) != s.num_bs())
    throw DimensionError("one sensing covariance per BS expected");
}

// |h^H f|^2 over interference (other beams and sensing covariances) plus noise.
inline double sinr(const ChannelRealization& ch, const BeamformerSet& b, int m, int k, double noise_power) {
  const int M = b.num_bs();
  const int K = b.users_per_bs();
  double interference = 0.0;
  double signal = 0.0;
  for (int i = 0; i < M; ++i) {
    const VectorXcd& h = ch.h(i, m, k);
    for (int j = 0; j < K; ++j) {
      const double g = std::norm(h.dot(b.f[i][j]));
      if (i == m && j == k)
        signal = g;
      else
        interference += g;
    }
    if (b.has_sensing_cov()) interference += std::real(h.dot(b.sensing_cov[i] * h));
  }
  return signal / (interference + noise_power);
}

inline double sinr(const Scenario& s, const ChannelRealization& ch, const BeamformerSet& b, int m, int k) {
  return sinr(ch, b, m, k, s.params.comm_noise_power_w);
}

inline std::vector<std::vector<double>> all_sinr(const Scenario& s, const ChannelRealization& ch,
                                                 const BeamformerSet& b) {
  std::vector<std::vector<double>> out(b.num_bs());
  for (int m = 0; m < b.num_bs(); ++m)
    for (int k = 0; k < b.users_per_bs(); ++k) out[m].push_back(sinr(s, ch, b, m, k));
  return out;
}

inline double min_sinr(const Scenario& s, const ChannelRealization& ch, const BeamformerSet& b) {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& row : all_sinr(s, ch, b))
    for (double x : row) v = std::min(v, x);
  return v;
}

// a^T (Sum_k f f^H + R) a^* at angle theta.
inline double illumination_gain(const BeamformerSet& b, int m, double theta, const SystemParams& p) {
  const VectorXcd a = array_response(p.num_tx_antennas, p.antenna_spacing_ratio, theta);
  double q = 0.0;
  for (const VectorXcd& v : b.f[m]) q += std::norm((a.transpose() * v).value());
  if (b.has_sensing_cov()) q += std::real((a.transpose() * b.sensing_cov[m] * a.conjugate()).value());
  return std::max(q, 0.0);
}

inline std::vector<double> beampattern(const BeamformerSet& b, int m, const std::vector<double>& angles,
                                       const SystemParams& p) {
  std::vector<double> g;
  g.reserve(angles.size());
  for (double phi : angles) g.push_back(illumination_gain(b, m, phi, p));
  return g;
}

inline std::vector<double> per_bs_power(const BeamformerSet& b) {
  std::vector<double> out;
  for (int m = 0; m < b.num_bs(); ++m) {
    double pw = 0.0;
    for (const VectorXcd& v : b.f[m]) pw += v.squaredNorm();
    if (b.has_sensing_cov()) pw += std::real(b.sensing_cov[m].trace());
    out.push_back(pw);
  }
  return out;
}

// ---- Fisher information -------------------------------------------------

// Per-unit-illumination delay information (8 pi^2 T beta^2 / sigma_s^2)|eps|^2, M x N.
inline MatrixXd zhat_coeffs(const Scenario& s, const ChannelRealization& ch, int u) {
  const SystemParams& p = s.params;
  const double beta = p.effective_bandwidth_hz;
  const double coef = 8.0 * kPi * kPi * p.observation_time_s() * beta * beta / p.sensing_noise_psd_w_per_hz;
  return coef * ch.sensing.at(u).cwiseAbs2();
}

struct FisherBlocks {
  VectorXd q;                                       // illumination gain per BS
  MatrixXd zhat;                                    // M x N
  Eigen::Matrix<double, 2, Eigen::Dynamic> jacobian;  // 2 x MN
};

inline FisherBlocks fisher_blocks(const Scenario& s, const ChannelRealization& ch, const BeamformerSet& b, int u) {
  FisherBlocks fb;
  fb.q.resize(s.num_bs());
  for (int m = 0; m < s.num_bs(); ++m) fb.q(m) = illumination_gain(b, m, aod(s, m, u), s.params);
  fb.zhat = zhat_coeffs(s, ch, u);
  fb.jacobian = jacobian(s, u);
  return fb;
}

// B_m = Lambda_m Zhat_m Lambda_m^T, the FIM contribution of BS m per unit q_m.
inline std::vector<Eigen::Matrix2d> per_bs_fisher(const Eigen::Matrix<double, 2, Eigen::Dynamic>& J,
                                                  const MatrixXd& zhat) {
  const int M = static_cast<int>(zhat.rows());
  const int N = static_cast<int>(zhat.cols());
  std::vector<Eigen::Matrix2d> B(M, Eigen::Matrix2d::Zero());
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < N; ++n) {
      const Eigen::Vector2d l = J.col(m * N + n);
      B[m] += zhat(m, n) * l * l.transpose();
    }
  return B;
}

struct CrlbEntry {
  double crlb_m2 = 0.0;
  Eigen::Matrix2d fim = Eigen::Matrix2d::Zero();
  VectorXd gradient;  // dC/dq_m
  VectorXd q;
};

// CRLB from illumination gains. The determinant uses the Cauchy-Binet sum over
// pairs of rank-one terms, which is exactly zero for rank-deficient geometry.
inline CrlbEntry crlb_from_q(const Eigen::Matrix<double, 2, Eigen::Dynamic>& J, const MatrixXd& zhat,
                             const VectorXd& q) {
  const int M = static_cast<int>(zhat.rows());
  const int N = static_cast<int>(zhat.cols());
  CrlbEntry out;
  out.q = q;
  std::vector<double> w(M * N);
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < N; ++n) w[m * N + n] = q(m) * zhat(m, n);
  Eigen::Matrix2d fim = Eigen::Matrix2d::Zero();
  double det = 0.0;
  for (int a = 0; a < M * N; ++a) {
    const Eigen::Vector2d la = J.col(a);
    fim += w[a] * la * la.transpose();
    for (int c = a + 1; c < M * N; ++c) {
      const Eigen::Vector2d lc = J.col(c);
      const double cross = la(0) * lc(1) - la(1) * lc(0);
      det += w[a] * w[c] * cross * cross;
    }
  }
  out.fim = fim;
  const double scale = 0.5 * fim.trace();
  if (!(det > 1e-30 * scale * scale)) {
    const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(fim).eigenvalues();
    const double cond = ev(0) > 0.0 ? ev(1) / ev(0) : std::numeric_limits<double>::infinity();
    throw SingularFimError("singular FIM (condition number " + std::to_string(cond) + ")", cond);
  }
  Eigen::Matrix2d inv;
  inv << fim(1, 1), -fim(0, 1), -fim(1, 0), fim(0, 0);
  inv /= det;
  out.crlb_m2 = inv.trace();
  const std::vector<Eigen::Matrix2d> B = per_bs_fisher(J, zhat);
  out.gradient.resize(M);
  for (int m = 0; m < M; ++m) out.gradient(m) = -(inv * B[m] * inv).trace();
  return out;
}

inline CrlbEntry crlb(const Scenario& s, const ChannelRealization& ch, const BeamformerSet& b, int u) {
  const FisherBlocks fb = fisher_blocks(s, ch, b, u);
  return crlb_from_q(fb.jacobian, fb.zhat, fb.q);
}

inline std::vector<double> all_crlb(const Scenario& s, const ChannelRealization& ch, const BeamformerSet& b) {
  std::vector<double> out;
  for (int u = 0; u < s.num_targets(); ++u) out.push_back(crlb(s, ch, b, u).crlb_m2);
  return out;
}

// Mean FIM eigenvalue when every BS puts full power on target u; used to
// normalize Fisher data inside conic programs.
inline double fisher_reference_scale(const Scenario& s, const ChannelRealization& ch, int u) {
  const std::vector<Eigen::Matrix2d> B = per_bs_fisher(jacobian(s, u), zhat_coeffs(s, ch, u));
  Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
  for (const auto& Bm : B) sum += Bm;
  return 0.5 * s.params.max_power_w * s.params.num_tx_antennas * sum.trace();
}

inline double fisher_reference_scale(const Scenario& s, const ChannelRealization& ch) {
  double v = 0.0;
  for (int u = 0; u < s.num_targets(); ++u) v = std::max(v, fisher_reference_scale(s, ch, u));
  return v;
}

// Radar-only optimum for one target: every BS spends P on the target
// direction, so q_m = P N_t and the CRLB is minimal.
inline double radar_only_crlb(const Scenario& s, const ChannelRealization& ch, int u = 0) {
  const VectorXd q = VectorXd::Constant(s.num_bs(), s.params.max_power_w * s.num_antennas());
  return crlb_from_q(jacobian(s, u), zhat_coeffs(s, ch, u), q).crlb_m2;
}

}  // namespace isac
