#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "isac/scenario_io.hpp"
#include "support.hpp"

using namespace isac;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const char* kMinimal = R"({
  "system": {"carrier_freq_hz": 24e9, "num_tx_antennas": 8, "antenna_spacing_ratio": 0.5,
             "effective_bandwidth_hz": 1e8, "comm_noise_power_dbm": -94, "sensing_noise_psd_dbm_per_hz": -174,
             "num_snapshots": 256, "max_power_dbm": 30, "rician_factor_db": 10, "num_nlos_paths": 10},
  "bs": {"height_m": 20, "positions": [{"x": 80, "y": 138.5640646055102}]},
  "tmt": [TMTS],
  "users": [[{"x": 40, "y": 120}]],
  "targets": [{"x": 0, "y": 0}]
})";

std::string with_tmts(const std::string& tmts) {
  std::string s = kMinimal;
  s.replace(s.find("TMTS"), 4, tmts);
  return s;
}

Scenario random_geometry(std::mt19937_64& g, int M, int N) {
  std::uniform_real_distribution<double> U(-200.0, 200.0);
  Scenario s;
  for (int m = 0; m < M; ++m) s.bs.push_back({{U(g), U(g)}, std::nullopt});
  s.targets = {{0.3 * U(g), 0.3 * U(g)}};
  while (static_cast<int>(s.tmt.size()) < N) {
    const Point2 p{U(g), U(g)};
    if (distance(p, s.targets[0]) > 5.0) s.tmt.push_back(p);
  }
  s.users.assign(M, {{U(g), U(g)}});
  return s;
}

}  // namespace

TEST_CASE("reference scenario loads with the published geometry", "[scenario]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  CHECK(s.num_bs() == 2);
  CHECK(s.num_tmt() == 4);
  CHECK(s.num_targets() == 1);
  CHECK(s.users_per_bs() == 2);
  CHECK_THAT(s.bs[0].pos.y, WithinRel(80.0 * std::sqrt(3.0), 1e-15));
  CHECK_THAT(s.bs_height_m, WithinAbs(20.0, 0.0));
  CHECK_THAT(s.params.max_power_w, WithinRel(1.0, 1e-12));
  CHECK_THAT(s.params.observation_time_s(), WithinRel(2.56e-6, 1e-12));
  CHECK_THAT(s.params.rician_factor, WithinRel(10.0, 1e-12));
}

TEST_CASE("validation names the violated invariant", "[scenario]") {
  CHECK_THROWS_WITH(load_scenario(with_tmts("")), ContainsSubstring("N >= 1"));
  CHECK_THROWS_WITH(load_scenario(with_tmts(R"({"x": 50, "y": 50})")), ContainsSubstring("M*N >= 2"));
  CHECK_NOTHROW(load_scenario(with_tmts(R"({"x": 50, "y": 50}, {"x": -50, "y": 50})")));
  CHECK_THROWS_AS(load_scenario(with_tmts(R"({"x": 0, "y": 0}, {"x": -50, "y": 50})")), ValidationError);
  CHECK_THROWS_AS(load_scenario("{not json"), ParseError);
  CHECK_THROWS_AS(load_scenario(R"({"system": {}})"), ParseError);
  std::string extra = with_tmts(R"({"x": 50, "y": 50}, {"x": -50, "y": 50})");
  extra.insert(1, R"("bogus": 1,)");
  CHECK_THROWS_WITH(load_scenario(extra), ContainsSubstring("bogus"));
}

TEST_CASE("angle of departure follows the broadside convention", "[scenario]") {
  Scenario s = testing_support::tiny_scenario(4, 1);
  s.bs[0].pos = {0.0, 100.0};
  CHECK_THAT(aod(s, 0, 0), WithinAbs(0.0, 1e-15));
  s.bs[0].pos = {100.0, 100.0};
  s.bs[0].broadside_rad = -kPi / 2;
  CHECK_THAT(std::abs(aod(s, 0, 0)), WithinAbs(kPi / 4, 1e-14));
  s.bs[0].pos = {0.0, 100.0};
  s.bs[0].broadside_rad.reset();
  const double a = aod_to(s, 0, {30.0, 0.0});
  const double b = aod_to(s, 0, {-30.0, 0.0});
  CHECK_THAT(a, WithinAbs(-b, 1e-14));
  CHECK(a != 0.0);
  // counterclockwise positive: facing -y, a point at +x is to the left.
  CHECK(a > 0.0);
}

TEST_CASE("delay matches direct evaluation", "[scenario]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  const double c = 299792458.0;
  CHECK_THAT(delay(s, 0, 0, 0), WithinRel((std::sqrt(26000.0) + std::sqrt(5000.0)) / c, 1e-13));
  CHECK_THAT(delay(s, 0, 0, 0), WithinRel(7.7372e-7, 1e-4));

  Scenario t = s;
  t.targets[0] = {50.0, 50.0};
  const double r3 = 80.0 * std::sqrt(3.0);
  CHECK_THAT(delay(t, 0, 0, 0), WithinRel(std::sqrt(900.0 + (r3 - 50.0) * (r3 - 50.0) + 400.0) / c, 1e-13));

  // mirrored TMT swap leaves the multiset unchanged
  Scenario sw = s;
  std::swap(sw.tmt[0], sw.tmt[2]);
  std::vector<double> d1, d2;
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 4; ++n) {
      d1.push_back(delay(s, m, n, 0));
      d2.push_back(delay(sw, m, n, 0));
    }
  std::sort(d1.begin(), d1.end());
  std::sort(d2.begin(), d2.end());
  for (std::size_t i = 0; i < d1.size(); ++i) CHECK_THAT(d1[i], WithinRel(d2[i], 1e-15));

  // translation invariance
  Scenario tr = s;
  for (auto& b : tr.bs) b.pos = {b.pos.x + 17.0, b.pos.y - 3.0};
  for (auto& p : tr.tmt) p = {p.x + 17.0, p.y - 3.0};
  tr.targets[0] = {17.0, -3.0};
  CHECK_THAT(delay(tr, 1, 3, 0), WithinRel(delay(s, 1, 3, 0), 1e-13));
}

TEST_CASE("Jacobian entries match the analytic value and finite differences", "[scenario]") {
  const Scenario s = testing_support::data_scenario("desk.json");
  const auto J = jacobian(s, 0);
  CHECK(J.cols() == 8);
  const double c = 299792458.0;
  CHECK_THAT(J(0, 0), WithinRel((-80.0 / std::sqrt(26000.0) - 50.0 / std::sqrt(5000.0)) / c, 1e-13));
  CHECK_THAT(J(0, 0), WithinRel(-4.0136e-9, 1e-4));

  std::mt19937_64 g(42);
  for (int trial = 0; trial < 100; ++trial) {
    Scenario r = random_geometry(g, 1 + trial % 3, 2 + trial % 4);
    const auto Jr = jacobian(r, 0);
    const double h = 1e-3;
    for (int m = 0; m < r.num_bs(); ++m)
      for (int n = 0; n < r.num_tmt(); ++n)
        for (int axis = 0; axis < 2; ++axis) {
          Scenario plus = r, minus = r;
          (axis == 0 ? plus.targets[0].x : plus.targets[0].y) += h;
          (axis == 0 ? minus.targets[0].x : minus.targets[0].y) -= h;
          const double fd = (delay(plus, m, n, 0) - delay(minus, m, n, 0)) / (2.0 * h);
          const double an = Jr(axis, m * r.num_tmt() + n);
          CHECK(std::abs(fd - an) <= 1e-6 * std::abs(an) + 1e-18);
        }
  }

  // one BS on the axis of symmetry of two mirrored TMTs
  Scenario sym = testing_support::tiny_scenario(4, 1);
  sym.bs[0].pos = {0.0, 100.0};
  sym.tmt = {{40.0, -30.0}, {-40.0, -30.0}};
  const auto Js = jacobian(sym, 0);
  CHECK_THAT(Js(0, 0), WithinAbs(-Js(0, 1), 1e-24));
}

TEST_CASE("scenario JSON round trip", "[scenario][io]") {
  Scenario s = testing_support::data_scenario("desk-3targets.json");
  s.bs[1].broadside_rad = 1.25;
  const Scenario back = load_scenario(dump_scenario(s));
  CHECK(approx_equal(s, back));
  CHECK(scenario_hash(s) == scenario_hash(back));
  CHECK(scenario_hash(s).size() == 16);
  Scenario moved = s;
  moved.tmt[0].x += 1.0;
  CHECK_FALSE(approx_equal(s, moved));
  CHECK(scenario_hash(s) != scenario_hash(moved));
}

TEST_CASE("sweep helpers keep list prefixes", "[scenario]") {
  const Scenario s = testing_support::data_scenario("desk-6tmt.json");
  CHECK(with_num_tmts(s, 4).num_tmt() == 4);
  CHECK(with_num_bs(s, 1).users.size() == 1);
  CHECK_THROWS_AS(with_num_tmts(s, 7), ValidationError);
}
