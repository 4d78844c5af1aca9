#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "isac/sweep.hpp"
#include "isac/validation.hpp"

namespace {

using namespace isac;

enum Exit : int { ok = 0, failed = 1, usage = 2, singular = 3, infeasible = 4, inexact = 5 };

std::string db_or_inf(double linear) { return io::csv_number(linear_to_db(linear)); }

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  io::write_text_file(path, text);
}

struct CrlbArgs {
  std::string scenario, beams, out;
  bool uniform_mrt = false;
  std::uint64_t seed = 1;
};

int run_crlb(const CrlbArgs& a) {
  const Scenario s = load_scenario_file(a.scenario, Checks::allow_singular_fim);
  const ChannelRealization ch = draw_channels(s, a.seed);
  const BeamformerSet b = a.uniform_mrt ? baselines::uniform_mrt(s, ch) : io::read_beams(a.beams);
  check_dimensions(s, b);

  io::ordered_json report;
  report["version"] = kVersion;
  report["scenario_hash"] = scenario_hash(s);
  report["seed"] = a.seed;
  report["beams"] = a.uniform_mrt ? "uniform-mrt" : a.beams;
  report["crlb_m2"] = io::ordered_json::array();
  for (int u = 0; u < s.num_targets(); ++u) {
    const double c = crlb(s, ch, b, u).crlb_m2;  // throws on a singular FIM
    std::printf("crlb_m2[%d] %s\n", u, io::csv_number(c).c_str());
    report["crlb_m2"].push_back(c);
  }
  report["sinr_db"] = io::ordered_json::array();
  for (int m = 0; m < s.num_bs(); ++m) {
    io::ordered_json row = io::ordered_json::array();
    for (int k = 0; k < s.users_per_bs(); ++k) {
      const double v = sinr(s, ch, b, m, k);
      std::printf("sinr_db[%d][%d] %s\n", m, k, db_or_inf(v).c_str());
      row.push_back(io::number(linear_to_db(v)));
    }
    report["sinr_db"].push_back(row);
  }
  report["power_dbm"] = io::ordered_json::array();
  const std::vector<double> power = per_bs_power(b);
  for (int m = 0; m < s.num_bs(); ++m) {
    std::printf("power_dbm[%d] %s\n", m, io::csv_number(watt_to_dbm(power[m])).c_str());
    report["power_dbm"].push_back(io::number(watt_to_dbm(power[m])));
  }
  if (!a.out.empty()) io::write_text_file(a.out, report.dump(2) + "\n");
  return Exit::ok;
}

struct SolveArgs {
  std::string scenario, mode = "sensing", algo = "sdr", out;
  double eta_db = 0.0;
  std::vector<double> epsilon;
  std::uint64_t seed = 1;
  bool eta_given = false;
};

int run_solve(const SolveArgs& a) {
  SolveRequest req;
  req.mode = parse_mode(a.mode);
  req.algorithm = parse_algorithm(a.algo);
  req.seed = a.seed;
  if (req.mode == Mode::sensing && !a.epsilon.empty()) throw ValidationError("--epsilon applies to comm mode only");
  if (req.mode == Mode::comm && a.eta_given) throw ValidationError("--eta-db applies to sensing mode only");
  req.eta = db_to_linear(a.eta_db);
  if (req.mode == Mode::comm) req.eta = 0.0;
  if (!a.epsilon.empty()) req.epsilon = a.epsilon;

  const Scenario s = load_scenario_file(a.scenario);
  const ChannelRealization ch = draw_channels(s, a.seed);
  const SolveReport r = solve(s, ch, req);
  if (!a.out.empty()) io::write_text_file(a.out, io::solution_json(s, req, r).dump(2) + "\n");

  std::string crlbs;
  for (std::size_t u = 0; u < r.crlb_m2.size(); ++u) crlbs += (u ? ";" : "") + io::csv_number(r.crlb_m2[u]);
  std::printf("status=%s, objective=%s, min_sinr_db=%s, crlb_m2=%s, max_power_dbm=%s, iters=%d, seconds=%.3f\n",
              to_string(r.status).c_str(), io::csv_number(r.objective).c_str(), db_or_inf(r.min_sinr()).c_str(),
              crlbs.c_str(), io::csv_number(watt_to_dbm(r.max_power())).c_str(), r.iterations, r.seconds);
  if (!r.message.empty()) std::fprintf(stderr, "%s\n", r.message.c_str());
  switch (r.status) {
    case SolveStatus::solved: return Exit::ok;
    case SolveStatus::infeasible: return Exit::infeasible;
    case SolveStatus::tolerance_not_met: return Exit::inexact;
  }
  return Exit::failed;
}

struct SweepArgs {
  std::string spec, out;
  bool no_timestamp = false;
};

int run_sweep(const SweepArgs& a) {
  const sweep::SweepSpec spec = sweep::load_spec(a.spec);
  const Scenario base = load_scenario_file(spec.scenario_path);
  const auto rows = sweep::run(base, spec, sweep::worker_count(), [&](const sweep::Row& r, std::size_t done,
                                                                      std::size_t total) {
    std::fprintf(stderr, "[%zu/%zu] %s=%s %s seed=%llu %s %.2f s\n", done, total, sweep::to_string(spec.parameter),
                 sweep::format_value(spec.parameter, r.value).c_str(), to_string(r.algorithm).c_str(),
                 static_cast<unsigned long long>(r.seed), r.status.c_str(), r.seconds);
  });
  emit(a.out.empty() ? spec.output_path : a.out, sweep::to_csv(base, spec, rows, !a.no_timestamp));
  return Exit::ok;
}

struct BeampatternArgs {
  std::string solution, out;
  double grid_deg = 0.5;
  bool no_timestamp = false;
};

int run_beampattern(const BeampatternArgs& a) {
  emit(a.out, io::beampattern_csv(io::read_solution(a.solution), a.grid_deg, !a.no_timestamp));
  return Exit::ok;
}

struct ValidateArgs {
  std::string data_dir;
  bool quick = false;
};

int run_validate(const ValidateArgs& a) {
  validation::Options opt;
  opt.data_dir = a.data_dir;
  opt.quick = a.quick;
  int bad = 0;
  validation::run_all(opt, [&](const validation::Outcome& o) {
    if (!o.pass) ++bad;
    std::printf("%s\n", validation::format(o).c_str());
    std::fflush(stdout);
  });
  return bad == 0 ? Exit::ok : Exit::failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinated ISAC beamforming with multi-TMT localization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CrlbArgs crlb_args;
  auto* crlb_cmd = app.add_subcommand("crlb", "Evaluate CRLB, SINR and power of a beamformer set");
  crlb_cmd->add_option("--scenario", crlb_args.scenario, "Scenario JSON")->required();
  auto* beams_opt = crlb_cmd->add_option("--beams", crlb_args.beams, "Beamformer or solution JSON");
  auto* mrt_opt = crlb_cmd->add_flag("--uniform-mrt", crlb_args.uniform_mrt, "Matched filters with equal power");
  beams_opt->excludes(mrt_opt);
  crlb_cmd->add_option("--seed", crlb_args.seed, "Channel seed");
  crlb_cmd->add_option("--out", crlb_args.out, "Write a JSON report");
  crlb_cmd->callback([&] {
    if (crlb_args.beams.empty() && !crlb_args.uniform_mrt) throw CLI::ValidationError("need --beams or --uniform-mrt");
  });

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one beamforming problem");
  solve_cmd->add_option("--scenario", solve_args.scenario, "Scenario JSON")->required();
  solve_cmd->add_option("--mode", solve_args.mode, "sensing or comm")->check(CLI::IsMember({"sensing", "comm"}));
  solve_cmd->add_option("--algo", solve_args.algo, "sdr, bisection, sca, zf, mmse or bpm")
      ->check(CLI::IsMember({"sdr", "bisection", "sca", "zf", "mmse", "bpm"}));
  auto* eta_opt = solve_cmd->add_option("--eta-db", solve_args.eta_db, "SINR threshold in dB (sensing mode)");
  solve_cmd->add_option("--epsilon", solve_args.epsilon, "CRLB threshold in m^2, one or one per target (comm mode)");
  solve_cmd->add_option("--seed", solve_args.seed, "Channel seed");
  solve_cmd->add_option("--out", solve_args.out, "Write the solution file");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep to CSV");
  sweep_cmd->add_option("--spec", sweep_args.spec, "Sweep spec JSON")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "CSV path (overrides the spec; - for stdout)");
  sweep_cmd->add_flag("--no-timestamp", sweep_args.no_timestamp, "Byte-stable output: no timestamp, zero seconds");

  BeampatternArgs bp_args;
  auto* bp_cmd = app.add_subcommand("beampattern", "Export the transmit beampattern of a solution");
  bp_cmd->add_option("--solution", bp_args.solution, "Solution JSON")->required();
  bp_cmd->add_option("--grid-deg", bp_args.grid_deg, "Angle step in degrees");
  bp_cmd->add_option("--out", bp_args.out, "CSV path (default stdout)");
  bp_cmd->add_flag("--no-timestamp", bp_args.no_timestamp, "Omit the timestamp line");

  ValidateArgs val_args;
  auto* val_cmd = app.add_subcommand("validate", "Run the property suite");
  val_cmd->add_option("--data-dir", val_args.data_dir, "Directory with the desk scenarios")->required();
  val_cmd->add_flag("--quick", val_args.quick, "Fewer seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? Exit::ok : Exit::usage;
  }
  solve_args.eta_given = eta_opt->count() > 0;

  try {
    if (*crlb_cmd) return run_crlb(crlb_args);
    if (*solve_cmd) return run_solve(solve_args);
    if (*sweep_cmd) return run_sweep(sweep_args);
    if (*bp_cmd) return run_beampattern(bp_args);
    if (*val_cmd) return run_validate(val_args);
  } catch (const SingularFimError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return Exit::singular;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return Exit::usage;
  } catch (const std::invalid_argument& e) {  // validation and dimension errors
    std::fprintf(stderr, "error: %s\n", e.what());
    return Exit::usage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return Exit::failed;
  }
  return Exit::usage;
}
