#include <catch2/catch_amalgamated.hpp>

#include <limits>

#include "isac/channel.hpp"
#include "support.hpp"

using namespace isac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("array response", "[channel]") {
  const VectorXcd a0 = array_response(6, 0.5, 0.0);
  CHECK((a0 - VectorXcd::Ones(6)).norm() < 1e-15);
  const VectorXcd a = array_response(4, 0.5, kPi / 6);
  const cdouble j(0.0, 1.0);
  CHECK(std::abs(a(0) - 1.0) < 1e-14);
  CHECK(std::abs(a(1) - j) < 1e-14);
  CHECK(std::abs(a(2) + 1.0) < 1e-14);
  CHECK(std::abs(a(3) + j) < 1e-14);
  CHECK(array_response(1, 0.5, 0.7).size() == 1);
  const VectorXcd b = array_response(32, 0.5, 0.37);
  CHECK_THAT(b.squaredNorm(), WithinRel(32.0, 1e-14));
  for (int p = 0; p < 32; ++p) CHECK_THAT(std::abs(b(p)), WithinAbs(1.0, 1e-15));
}

TEST_CASE("pure line-of-sight channel points along the steering vector", "[channel]") {
  Scenario s = testing_support::tiny_scenario(8, 2);
  s.params.rician_factor = std::numeric_limits<double>::infinity();
  const ChannelRealization ch = draw_channels(s, 5);
  const VectorXcd h = ch.h(0, 0, 1);
  const VectorXcd a = steering(s, aod_to(s, 0, s.users[0][1])).conjugate();
  CHECK_THAT(std::abs(a.dot(h)) / (a.norm() * h.norm()), WithinAbs(1.0, 1e-12));
}

TEST_CASE("draws are deterministic and seed-dependent", "[channel]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  const ChannelRealization a = draw_channels(s, 17);
  const ChannelRealization b = draw_channels(s, 17);
  const ChannelRealization c = draw_channels(s, 18);
  for (int i = 0; i < 2; ++i)
    for (int m = 0; m < 2; ++m)
      for (int k = 0; k < 2; ++k) {
        CHECK(a.h(i, m, k) == b.h(i, m, k));
        CHECK(a.h(i, m, k) != c.h(i, m, k));
      }
  CHECK(a.sensing[0] == b.sensing[0]);
  CHECK(a.sensing[0] != c.sensing[0]);
  CHECK(a.seed == 17);
}

TEST_CASE("user channel pathloss exponent is two", "[channel]") {
  Scenario s = testing_support::tiny_scenario(4, 1);
  s.bs_height_m = 0.0;
  s.bs[0].pos = {0.0, 0.0};
  s.targets = {{10.0, 10.0}};
  const Point2 near{30.0, 40.0}, far{60.0, 80.0};
  const int draws = 20000;
  double e_near = 0.0, e_far = 0.0;
  for (int t = 0; t < draws; ++t) {
    rng::Stream g1(1234, rng::kCommChannel, {static_cast<std::uint64_t>(t), 0});
    rng::Stream g2(1234, rng::kCommChannel, {static_cast<std::uint64_t>(t), 1});
    e_near += draw_user_channel(s, 0, near, g1).squaredNorm();
    e_far += draw_user_channel(s, 0, far, g2).squaredNorm();
  }
  CHECK_THAT(e_near / e_far, WithinRel(4.0, 0.03));
  // mean power equals N_t times the pathloss
  CHECK_THAT(e_near / draws, WithinRel(4.0 * comm_pathloss(s.params, 50.0), 0.03));
}

TEST_CASE("sensing coefficient statistics", "[channel]") {
  Scenario s = testing_support::tiny_scenario(4, 1);
  s.tmt = {{30.0, 40.0}, {60.0, 80.0}};
  const int draws = 20000;
  double e0 = 0.0, e1 = 0.0, zeta = 0.0;
  for (int t = 0; t < draws; ++t) {
    const auto eps = draw_sensing_coeffs(s, static_cast<std::uint64_t>(t));
    e0 += std::norm(eps[0](0, 0));
    e1 += std::norm(eps[0](0, 1));
    zeta += std::norm(eps[0](0, 0)) / sensing_pathloss(s.params, bs_target_distance(s, 0, 0), 50.0);
  }
  CHECK_THAT(e0 / e1, WithinRel(4.0, 0.03));
  CHECK_THAT(zeta / draws, WithinRel(1.0, 0.02));
}

TEST_CASE("distinct seeds are uncorrelated", "[channel]") {
  const Scenario s = testing_support::tiny_scenario(4, 1);
  const int draws = 5000;
  cdouble cross = 0.0;
  double p1 = 0.0, p2 = 0.0;
  for (int t = 0; t < draws; ++t) {
    const cdouble a = draw_sensing_coeffs(s, 2 * t)[0](0, 0);
    const cdouble b = draw_sensing_coeffs(s, 2 * t + 1)[0](0, 0);
    cross += a * std::conj(b);
    p1 += std::norm(a);
    p2 += std::norm(b);
  }
  CHECK(std::abs(cross) / std::sqrt(p1 * p2) < 0.05);
}

TEST_CASE("collocated user is rejected", "[channel]") {
  Scenario s = testing_support::tiny_scenario(4, 1);
  s.bs_height_m = 0.0;
  s.users[0][0] = s.bs[0].pos;
  CHECK_THROWS_AS(draw_channels(s, 1), GenerationError);
}
