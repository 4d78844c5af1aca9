#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include "isac/io.hpp"
#include "isac/baselines.hpp"
#include "support.hpp"

using namespace isac;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr discarded.
Run cli(const std::string& args) {
  const std::string cmd = std::string(ISAC_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Run r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(ISAC_DATA_DIR) + "/" + name; }

std::filesystem::path scratch() {
  const auto dir = std::filesystem::temp_directory_path() / "isac_test_cli";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("crlb prints the library values", "[cli]") {
  const Run r = cli("crlb --scenario " + data("desk.json") + " --uniform-mrt --seed 3");
  REQUIRE(r.code == 0);
  const Scenario s = testing_support::data_scenario("desk.json");
  const ChannelRealization ch = draw_channels(s, 3);
  const BeamformerSet b = baselines::uniform_mrt(s, ch);
  CHECK(r.out.find("crlb_m2[0] " + io::csv_number(crlb(s, ch, b, 0).crlb_m2) + "\n") != std::string::npos);
  CHECK(r.out.find("sinr_db[1][0] " + io::csv_number(linear_to_db(sinr(s, ch, b, 1, 0))) + "\n") !=
        std::string::npos);
  CHECK(r.out.find("power_dbm[1] 3.00000000e+01\n") != std::string::npos);
}

TEST_CASE("crlb exit codes", "[cli]") {
  CHECK(cli("crlb --scenario /nonexistent/scenario.json --uniform-mrt").code == 2);
  CHECK(cli("crlb --scenario " + data("desk.json")).code == 2);

  Scenario s = testing_support::data_scenario("desk-m1.json");
  s.tmt.resize(1);
  const std::string path = (scratch() / "m1n1.json").string();
  io::write_text_file(path, dump_scenario(s));
  CHECK(cli("crlb --scenario " + path + " --uniform-mrt").code == 3);
}

TEST_CASE("solve writes an audited solution and maps statuses to exit codes", "[cli]") {
  const std::string out = (scratch() / "sdr.json").string();
  const Run r = cli("solve --scenario " + data("desk.json") + " --mode sensing --algo sdr --eta-db 10 --out " + out);
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("status=solved, objective=", 0) == 0);
  const io::SolutionFile sol = io::read_solution(out);
  CHECK(sol.status == "solved");
  const Scenario s = testing_support::data_scenario("desk.json");
  CHECK(sol.scenario_hash == scenario_hash(s));
  CHECK(min_sinr(s, draw_channels(s, 1), sol.beams) >= db_to_linear(10.0) * (1 - 1e-6));

  CHECK(cli("solve --scenario " + data("desk.json") + " --mode comm --algo bisection --epsilon 1").code == 2);
  CHECK(cli("solve --scenario " + data("desk.json") + " --eta-db 200").code == 4);
  CHECK(cli("solve --scenario " + data("desk.json") + " --mode comm --eta-db 3").code == 2);
  CHECK(cli("solve --scenario " + data("desk.json") + " --algo simplex").code == 2);
}

TEST_CASE("beampattern export from a solution file", "[cli]") {
  const std::string sol = (scratch() / "bp.json").string();
  REQUIRE(cli("solve --scenario " + data("desk.json") + " --eta-db 0 --out " + sol).code == 0);
  const Run r = cli("beampattern --solution " + sol + " --grid-deg 1 --no-timestamp");
  REQUIRE(r.code == 0);
  int rows = 0;
  std::istringstream in(r.out);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("0,", 0) == 0 || line.rfind("1,", 0) == 0) ++rows;
  CHECK(rows == 2 * 181);
  CHECK(cli("beampattern --solution /nonexistent.json").code == 2);
}

TEST_CASE("sweep is byte-stable and rejects bad specs", "[cli]") {
  const auto dir = scratch();
  const std::string spec = (dir / "spec.json").string();
  io::write_text_file(spec, R"({"parameter": "num_tmts", "values": [3, 4], "algorithms": ["zf"], "seeds": [1, 2],
    "eta_db": 5, "scenario": ")" + data("desk.json") + "\"}");
  const Run a = cli("sweep --spec " + spec + " --no-timestamp");
  const Run b = cli("sweep --spec " + spec + " --no-timestamp --out -");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("param,value,algo,seed,status,crlb_m2,min_sinr_db,power_dbm,iters,seconds\n") !=
        std::string::npos);

  io::write_text_file(spec, R"({"parameter": "eta_db", "values": [], "algorithms": ["sdr"], "seeds": [1],
    "scenario": "desk.json"})");
  CHECK(cli("sweep --spec " + spec).code == 2);
}
