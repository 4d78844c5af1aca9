#include <catch2/catch_amalgamated.hpp>

#include "isac/solve.hpp"
#include "support.hpp"

using namespace isac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SolveRequest sensing(Algorithm a, double eta_db) {
  SolveRequest r;
  r.mode = Mode::sensing;
  r.algorithm = a;
  r.eta = eta_db <= -300.0 ? 0.0 : db_to_linear(eta_db);
  return r;
}

SolveRequest comm(Algorithm a, double eps) {
  SolveRequest r;
  r.mode = Mode::comm;
  r.algorithm = a;
  r.epsilon = {eps};
  return r;
}

}  // namespace

TEST_CASE("rank-one extraction recovers scaled vectors and reports the eigenvalue ratio", "[solvers]") {
  VectorXcd v(3);
  v << cdouble(1, 2), cdouble(-0.5, 0.1), cdouble(0.3, -1);
  const solvers::RankOne r = solvers::extract_rank_one(3.0 * v * v.adjoint());
  CHECK(r.ratio < 1e-14);
  const MatrixXcd back = r.f * r.f.adjoint();
  CHECK((back - 3.0 * v * v.adjoint()).norm() < 1e-12);
  Eigen::Index imax;
  r.f.cwiseAbs().maxCoeff(&imax);
  CHECK(std::abs(r.f(imax).imag()) < 1e-14);
  CHECK(r.f(imax).real() > 0.0);

  MatrixXcd D = MatrixXcd::Zero(2, 2);
  D(0, 0) = 2.0;
  D(1, 1) = 1.0;
  CHECK_THAT(solvers::extract_rank_one(D).ratio, WithinAbs(0.5, 1e-14));
  CHECK(solvers::extract_rank_one(MatrixXcd::Zero(2, 2)).ratio == 0.0);
}

TEST_CASE("SDR without SINR targets attains the radar-only bound", "[solvers][sdr]") {
  for (const char* name : {"desk-m1.json", "desk.json"}) {
    const Scenario s = testing_support::data_scenario(name);
    const ChannelRealization ch = draw_channels(s, 11);
    const SolveReport r = solve(s, ch, sensing(Algorithm::sdr, -400.0));
    REQUIRE(r.status == SolveStatus::solved);
    CHECK_THAT(r.max_crlb(), WithinRel(radar_only_crlb(s, ch), 1e-6));
    CHECK_THAT(r.relaxation_bound, WithinRel(radar_only_crlb(s, ch), 1e-6));
    for (double p : r.power_w) CHECK(p <= s.params.max_power_w * (1 + 1e-6));
  }
}

TEST_CASE("SDR reports infeasibility above the single-user SINR bound", "[solvers][sdr]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  const ChannelRealization ch = draw_channels(s, 2);
  SolveReport r = solve(s, ch, sensing(Algorithm::sdr, 200.0));
  CHECK(r.status == SolveStatus::infeasible);
  r = solve(s, ch, sensing(Algorithm::sca, 200.0));
  CHECK(r.status == SolveStatus::infeasible);
}

TEST_CASE("SDR meets SINR targets and lower-bounds every other design", "[solvers][sdr]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  for (std::uint64_t seed : {3u, 4u}) {
    const ChannelRealization ch = draw_channels(s, seed);
    const SolveReport r = solve(s, ch, sensing(Algorithm::sdr, 10.0));
    REQUIRE(r.status == SolveStatus::solved);
    CHECK(r.min_sinr() >= db_to_linear(10.0) * (1 - 1e-6));
    CHECK(r.max_crlb() >= r.relaxation_bound * (1 - 1e-6));
    CHECK(r.max_crlb() >= radar_only_crlb(s, ch));
    for (Algorithm a : {Algorithm::sca, Algorithm::zf, Algorithm::mmse}) {
      const SolveReport o = solve(s, ch, sensing(a, 10.0));
      REQUIRE(o.status == SolveStatus::solved);
      CHECK(o.max_crlb() >= r.relaxation_bound * (1 - 1e-6));
    }
  }
}

TEST_CASE("power minimization matches the single-user closed form", "[solvers][powermin]") {
  const Scenario s = testing_support::tiny_scenario(6, 1);
  const ChannelRealization ch = draw_channels(s, 5);
  const double eta = 20.0;
  SolveRequest req;
  const solvers::PowerMinResult pm = solvers::solve_power_min(s, ch, eta, req);
  REQUIRE(pm.status == conic::Status::optimal);
  const double expected = eta * s.params.comm_noise_power_w / (s.params.max_power_w * ch.h(0, 0, 0).squaredNorm());
  CHECK_THAT(pm.ratio, WithinRel(expected, 1e-6));
  CHECK_THAT(sinr(s, ch, pm.beams, 0, 0), WithinRel(eta, 1e-5));
}

TEST_CASE("bisection without a sensing constraint reaches the single-user bound", "[solvers][bisection]") {
  const Scenario s = testing_support::tiny_scenario(6, 1);
  const ChannelRealization ch = draw_channels(s, 6);
  const SolveReport r = solve(s, ch, comm(Algorithm::bisection, std::numeric_limits<double>::infinity()));
  REQUIRE(r.status == SolveStatus::solved);
  const double bound = s.params.max_power_w * ch.h(0, 0, 0).squaredNorm() / s.params.comm_noise_power_w;
  CHECK_THAT(r.min_sinr(), WithinRel(bound, 2e-4));
  CHECK(r.min_sinr() <= bound * (1 + 1e-9));
}

TEST_CASE("bisection certificate and comm-mode infeasibility", "[solvers][bisection]") {
  const Scenario s = testing_support::data_scenario("desk-m1.json");
  const ChannelRealization ch = draw_channels(s, 7);
  const double radar = radar_only_crlb(s, ch);
  SolveRequest req = comm(Algorithm::bisection, 2.0 * radar);
  const SolveReport r = solve(s, ch, req);
  REQUIRE(r.status == SolveStatus::solved);
  CHECK(r.max_crlb() <= 2.0 * radar * (1 + 1e-6));
  const solvers::PowerMinResult cert = solvers::solve_power_min(s, ch, r.relaxation_bound, req);
  CHECK(cert.ratio >= 0.999);
  CHECK(cert.ratio <= 1.0001);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i) CHECK(std::isfinite(r.objective_trace[i]));

  CHECK(solve(s, ch, comm(Algorithm::bisection, 0.5 * radar)).status == SolveStatus::infeasible);
  CHECK(solve(s, ch, comm(Algorithm::sca, 0.5 * radar)).status == SolveStatus::infeasible);
}

TEST_CASE("bisection is restricted to one BS", "[solvers][bisection]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  const ChannelRealization ch = draw_channels(s, 1);
  CHECK_THROWS_WITH(solve(s, ch, comm(Algorithm::bisection, 1.0)), Catch::Matchers::ContainsSubstring("M=1"));
  CHECK_THROWS_AS(solve(s, ch, sensing(Algorithm::bisection, 0.0)), ValidationError);
}

TEST_CASE("feasible initialization meets SINR targets within the power budget", "[solvers][init]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  const ChannelRealization ch = draw_channels(s, 8);
  const double eta = db_to_linear(10.0);
  const solvers::InitResult init = solvers::feasible_init(s, ch, eta);
  REQUIRE(init.beams);
  CHECK(init.power_ratio <= 1.0);
  CHECK(min_sinr(s, ch, *init.beams) >= eta);
  for (double p : per_bs_power(*init.beams)) CHECK(p <= s.params.max_power_w * init.power_ratio * (1 + 1e-6));

  const solvers::InitResult zero = solvers::feasible_init(s, ch, 0.0);
  REQUIRE(zero.beams);
  for (double p : per_bs_power(*zero.beams)) CHECK_THAT(p, WithinRel(s.params.max_power_w, 1e-12));

  const solvers::InitResult none = solvers::feasible_init(s, ch, db_to_linear(200.0));
  CHECK_FALSE(none.beams);
}

TEST_CASE("sensing SCA is monotone and close to the SDR optimum", "[solvers][sca]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ChannelRealization ch = draw_channels(s, seed);
    const SolveReport sdr = solve(s, ch, sensing(Algorithm::sdr, 5.0));
    const SolveReport sca = solve(s, ch, sensing(Algorithm::sca, 5.0));
    REQUIRE(sca.status == SolveStatus::solved);
    REQUIRE(sca.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < sca.objective_trace.size(); ++i)
      CHECK(sca.objective_trace[i] <= sca.objective_trace[i - 1]);
    CHECK(sca.max_crlb() <= sdr.max_crlb() * 1.02);
    CHECK(sca.min_sinr() >= db_to_linear(5.0) * (1 - 1e-6));
  }
}

TEST_CASE("SCA started at the SDR solution keeps it", "[solvers][sca]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  const ChannelRealization ch = draw_channels(s, 9);
  SolveRequest req = sensing(Algorithm::sca, 5.0);
  const SolveReport sdr = solve(s, ch, sensing(Algorithm::sdr, 5.0));
  const SolveReport sca = solvers::solve_sensing_sca(s, ch, req, sdr.beams);
  REQUIRE(sca.status == SolveStatus::solved);
  CHECK(sca.max_crlb() <= sdr.max_crlb());
  CHECK(sca.max_crlb() >= sdr.relaxation_bound * (1 - 1e-6));
}

TEST_CASE("comm SCA trace is nondecreasing and respects the CRLB threshold", "[solvers][sca]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  const ChannelRealization ch = draw_channels(s, 4);
  const double eps = 2.0 * radar_only_crlb(s, ch);
  const SolveReport r = solve(s, ch, comm(Algorithm::sca, eps));
  REQUIRE(r.status == SolveStatus::solved);
  CHECK(r.max_crlb() <= eps * (1 + 1e-6));
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i) CHECK(r.objective_trace[i] >= r.objective_trace[i - 1]);
  CHECK_THAT(r.objective, WithinRel(r.min_sinr(), 1e-12));
}

TEST_CASE("multi-target min-max reduces to the single-target problem", "[solvers][multitarget]") {
  Scenario one = testing_support::data_scenario("desk.json");
  one.targets = {{0.0, 30.0}};
  Scenario two = one;
  two.targets = {{0.0, 30.0}, {0.0, 30.0}};
  const ChannelRealization c1 = draw_channels(one, 3);
  ChannelRealization c2 = draw_channels(two, 3);
  c2.sensing[1] = c2.sensing[0];
  const SolveReport a = solve(one, c1, sensing(Algorithm::sdr, 5.0));
  const SolveReport b = solve(two, c2, sensing(Algorithm::sdr, 5.0));
  REQUIRE(a.status == SolveStatus::solved);
  REQUIRE(b.status == SolveStatus::solved);
  CHECK_THAT(b.relaxation_bound, WithinRel(a.relaxation_bound, 1e-5));

  const Scenario three = testing_support::data_scenario("desk-3targets.json");
  const ChannelRealization c3 = draw_channels(three, 3);
  const SolveReport m = solve(three, c3, sensing(Algorithm::sdr, 5.0));
  REQUIRE(m.status == SolveStatus::solved);
  CHECK(m.crlb_m2.size() == 3);
  for (int u = 0; u < 3; ++u) CHECK(m.max_crlb() >= radar_only_crlb(three, c3, u) * (1 - 1e-9));
}

TEST_CASE("power minimization with a CRLB limit converges to full accuracy", "[solvers][powermin]") {
  const Scenario s = testing_support::data_scenario("desk-m1.json");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ChannelRealization ch = draw_channels(s, seed);
    const SolveRequest req = comm(Algorithm::bisection, 2.0 * radar_only_crlb(s, ch));
    const solvers::PowerMinResult pm = solvers::solve_power_min(s, ch, db_to_linear(10.0), req);
    INFO("seed " << seed);
    CHECK(pm.status == conic::Status::optimal);
    // Halving the sensing budget needs at least half the power.
    CHECK(pm.ratio >= 0.5 * (1 - 1e-6));
    CHECK(min_sinr(s, ch, pm.beams) >= db_to_linear(10.0) * (1 - 1e-6));
  }
}
