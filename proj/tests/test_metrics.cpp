#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "isac/metrics.hpp"
#include "support.hpp"

using namespace isac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

BeamformerSet random_beams(const Scenario& s, std::uint64_t seed) {
  rng::Stream g(seed);
  BeamformerSet b = BeamformerSet::zeros(s.num_bs(), s.users_per_bs(), s.num_antennas());
  for (auto& row : b.f)
    for (auto& v : row)
      for (int p = 0; p < v.size(); ++p) v(p) = 0.2 * g.complex_normal();
  return b;
}

BeamformerSet target_steered(const Scenario& s) {
  BeamformerSet b = BeamformerSet::zeros(s.num_bs(), s.users_per_bs(), s.num_antennas());
  const double scale = std::sqrt(s.params.max_power_w / (s.users_per_bs() * s.num_antennas()));
  for (int m = 0; m < s.num_bs(); ++m)
    for (auto& v : b.f[m]) v = scale * steering(s, aod(s, m, 0)).conjugate();
  return b;
}

}  // namespace

TEST_CASE("SINR agrees with MRT closed form and a loop oracle", "[metrics]") {
  Scenario s = testing_support::tiny_scenario(6, 1);
  const ChannelRealization ch = draw_channels(s, 3);
  BeamformerSet b = BeamformerSet::zeros(1, 1, 6);
  const VectorXcd& h = ch.h(0, 0, 0);
  b.f[0][0] = std::sqrt(s.params.max_power_w) * h / h.norm();
  CHECK_THAT(sinr(s, ch, b, 0, 0),
             WithinRel(s.params.max_power_w * h.squaredNorm() / s.params.comm_noise_power_w, 1e-12));
  CHECK(sinr(s, ch, BeamformerSet::zeros(1, 1, 6), 0, 0) == 0.0);

  const Scenario d = testing_support::data_scenario("desk.json");
  const ChannelRealization cd = draw_channels(d, 9);
  BeamformerSet r = random_beams(d, 4);
  r.set_sensing_cov(1, MatrixXcd::Identity(8, 8) * 0.01);
  for (int m = 0; m < 2; ++m)
    for (int k = 0; k < 2; ++k) {
      double sig = 0.0, intf = 0.0;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          cdouble acc = 0.0;
          for (int p = 0; p < 8; ++p) acc += std::conj(cd.h(i, m, k)(p)) * r.f[i][j](p);
          if (i == m && j == k)
            sig = std::norm(acc);
          else
            intf += std::norm(acc);
        }
        if (i == 1) intf += 0.01 * cd.h(i, m, k).squaredNorm();
      }
      CHECK_THAT(sinr(d, cd, r, m, k), WithinRel(sig / (intf + d.params.comm_noise_power_w), 1e-12));
    }

  // scaling only the served beam raises its SINR
  BeamformerSet up = r;
  up.f[0][1] *= 1.5;
  CHECK(sinr(d, cd, up, 0, 1) > sinr(d, cd, r, 0, 1));
}

TEST_CASE("illumination gain and beampattern", "[metrics]") {
  const Scenario s = testing_support::tiny_scenario(8, 1);
  const double theta = aod(s, 0, 0);
  const VectorXcd a = steering(s, theta);
  BeamformerSet b = BeamformerSet::zeros(1, 1, 8);
  b.f[0][0] = std::sqrt(s.params.max_power_w) * a.conjugate() / a.norm();
  CHECK_THAT(illumination_gain(b, 0, theta, s.params), WithinRel(s.params.max_power_w * 8.0, 1e-12));
  CHECK_THAT(illumination_gain(b.scaled(std::sqrt(2.0)), 0, theta, s.params),
             WithinRel(2.0 * s.params.max_power_w * 8.0, 1e-12));

  // orthogonal to a*: a shifted DFT column
  BeamformerSet o = BeamformerSet::zeros(1, 1, 8);
  const VectorXcd a2 = array_response(8, 0.5, std::asin(std::sin(theta) + 0.25));
  o.f[0][0] = a2.conjugate();
  CHECK(illumination_gain(o, 0, theta, s.params) < 1e-20);

  std::vector<double> grid;
  for (int i = -180; i <= 180; ++i) grid.push_back(deg_to_rad(0.5 * i));
  BeamformerSet unit = BeamformerSet::zeros(1, 1, 8);
  unit.f[0][0] = a.conjugate() / std::sqrt(8.0);
  const std::vector<double> g = beampattern(unit, 0, grid, s.params);
  const auto peak = std::max_element(g.begin(), g.end()) - g.begin();
  CHECK(std::abs(grid[peak] - theta) <= deg_to_rad(0.5));
  CHECK(*std::max_element(g.begin(), g.end()) <= 8.0 + 1e-9);
  CHECK_THAT(illumination_gain(unit, 0, theta, s.params), WithinRel(8.0, 1e-12));
  for (std::size_t i = 0; i < grid.size(); i += 37)
    CHECK(g[i] == illumination_gain(unit, 0, grid[i], s.params));
  for (double v : beampattern(BeamformerSet::zeros(1, 1, 8), 0, grid, s.params)) CHECK(v == 0.0);
}

TEST_CASE("per-BS power", "[metrics]") {
  BeamformerSet b = BeamformerSet::zeros(1, 2, 4);
  b.f[0][0](0) = std::sqrt(0.3);
  b.f[0][1](2) = cdouble(0.0, std::sqrt(0.7));
  CHECK_THAT(per_bs_power(b)[0], WithinAbs(1.0, 1e-15));
  CHECK(per_bs_power(BeamformerSet::zeros(2, 2, 4))[1] == 0.0);
  const Scenario d = testing_support::data_scenario("desk.json");
  BeamformerSet r = random_beams(d, 8);
  r.set_sensing_cov(0, MatrixXcd::Identity(8, 8) * 0.05);
  for (int m = 0; m < 2; ++m) {
    double acc = m == 0 ? 0.4 : 0.0;
    for (int k = 0; k < 2; ++k)
      for (int p = 0; p < 8; ++p) acc += std::norm(r.f[m][k](p));
    CHECK_THAT(per_bs_power(r)[m], WithinRel(acc, 1e-14));
  }
}

TEST_CASE("CRLB homogeneity, gradient and monotonicity", "[metrics]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  const ChannelRealization ch = draw_channels(s, 21);
  const BeamformerSet b = target_steered(s);
  const CrlbEntry base = crlb(s, ch, b, 0);
  CHECK(base.crlb_m2 > 0.0);
  CHECK_THAT(base.crlb_m2, WithinRel(base.fim.inverse().trace(), 1e-10));
  for (double alpha : {0.5, 2.0, 10.0})
    CHECK_THAT(crlb(s, ch, b.scaled(alpha), 0).crlb_m2, WithinRel(base.crlb_m2 / (alpha * alpha), 1e-10));

  const auto J = jacobian(s, 0);
  const MatrixXd Z = zhat_coeffs(s, ch, 0);
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> U(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd q(2);
    q << U(g), U(g);
    const CrlbEntry e = crlb_from_q(J, Z, q);
    for (int m = 0; m < 2; ++m) {
      CHECK(e.gradient(m) <= 0.0);
      const double h = 1e-5 * q(m);
      VectorXd qp = q, qm = q;
      qp(m) += h;
      qm(m) -= h;
      const double fd = (crlb_from_q(J, Z, qp).crlb_m2 - crlb_from_q(J, Z, qm).crlb_m2) / (2.0 * h);
      CHECK_THAT(e.gradient(m), WithinRel(fd, 1e-6));
      CHECK(crlb_from_q(J, Z, qp).crlb_m2 <= e.crlb_m2);
    }
  }
}

TEST_CASE("adding a TMT never increases the CRLB", "[metrics]") {
  const Scenario six = testing_support::data_scenario("desk-6tmt.json");
  const Scenario four = with_num_tmts(six, 4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ChannelRealization c6 = draw_channels(six, seed);
    ChannelRealization c4 = c6;
    c4.sensing[0] = c6.sensing[0].leftCols(4);
    const BeamformerSet b = target_steered(six);
    CHECK(crlb(six, c6, b, 0).crlb_m2 <= crlb(four, c4, b, 0).crlb_m2);
  }
}

TEST_CASE("singular FIM is reported", "[metrics]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  const ChannelRealization ch = draw_channels(s, 1);
  CHECK_THROWS_AS(crlb(s, ch, BeamformerSet::zeros(2, 2, 8), 0), SingularFimError);

  Scenario one = testing_support::tiny_scenario(4, 1);
  one.tmt.resize(1);  // M = N = 1 bypasses validation here on purpose
  const ChannelRealization c1 = draw_channels(one, 2);
  BeamformerSet b = BeamformerSet::zeros(1, 1, 4);
  b.f[0][0] = steering(one, aod(one, 0, 0)).conjugate();
  try {
    crlb(one, c1, b, 0);
    FAIL("expected singular FIM");
  } catch (const SingularFimError& e) {
    CHECK(e.condition_number > 1e12);
  }
}

TEST_CASE("reference Fisher scale brackets the uniform-beam FIM", "[metrics]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  const ChannelRealization ch = draw_channels(s, 4);
  const double kf = fisher_reference_scale(s, ch);
  const CrlbEntry e = crlb(s, ch, target_steered(s), 0);
  // uniform MRT with full power puts P*N_t on the target: FIM trace / 2 equals the scale
  CHECK_THAT(0.5 * e.fim.trace(), WithinRel(kf, 1e-10));
}
