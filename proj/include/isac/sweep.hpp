#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "isac/io.hpp"
#include "isac/solve.hpp"

namespace isac::sweep {

enum class Parameter { eta_db, epsilon_m2, num_tmts, num_bs, num_targets };

inline const char* to_string(Parameter p) {
  switch (p) {
    case Parameter::eta_db: return "eta_db";
    case Parameter::epsilon_m2: return "epsilon_m2";
    case Parameter::num_tmts: return "num_tmts";
    case Parameter::num_bs: return "num_bs";
    case Parameter::num_targets: return "num_targets";
  }
  return "?";
}

inline Parameter parse_parameter(const std::string& s) {
  for (Parameter p : {Parameter::eta_db, Parameter::epsilon_m2, Parameter::num_tmts, Parameter::num_bs,
                      Parameter::num_targets})
    if (s == to_string(p)) return p;
  throw ParseError("unknown sweep parameter '" + s + "'");
}

struct SweepSpec {
  Parameter parameter = Parameter::eta_db;
  std::vector<double> values;
  std::vector<Algorithm> algorithms;
  std::vector<std::uint64_t> seeds;
  Mode mode = Mode::sensing;
  double eta_db = 0.0;  // held fixed unless swept
  double epsilon_m2 = std::numeric_limits<double>::infinity();
  std::string scenario_path;
  std::string output_path;
};

inline bool is_count(Parameter p) { return p != Parameter::eta_db && p != Parameter::epsilon_m2; }

inline void validate(const SweepSpec& spec) {
  if (spec.values.empty()) throw ValidationError("sweep values must be nonempty");
  if (spec.algorithms.empty()) throw ValidationError("sweep algorithms must be nonempty");
  if (spec.seeds.empty()) throw ValidationError("sweep seeds must be nonempty");
  if (spec.scenario_path.empty()) throw ValidationError("sweep needs a scenario path");
  if (spec.parameter == Parameter::epsilon_m2 && spec.mode != Mode::comm)
    throw ValidationError("epsilon sweeps require comm mode");
  if (spec.parameter == Parameter::eta_db && spec.mode != Mode::sensing)
    throw ValidationError("eta sweeps require sensing mode");
  if (is_count(spec.parameter))
    for (double v : spec.values)
      if (v < 1.0 || v != std::floor(v)) throw ValidationError(std::string(to_string(spec.parameter)) + " values must be positive integers");
  if (spec.parameter == Parameter::epsilon_m2)
    for (double v : spec.values)
      if (!(v > 0.0)) throw ValidationError("epsilon values must be positive");
}

// Relative paths inside a spec resolve against the spec's directory.
inline SweepSpec parse_spec(const std::string& text, const std::string& base_dir) {
  const io::ordered_json j = io::parse_json_text(text, "sweep spec");
  if (!j.is_object()) throw ParseError("sweep spec must be a JSON object");
  SweepSpec spec;
  try {
    for (const auto& [key, _] : j.items())
      if (key != "parameter" && key != "values" && key != "algorithms" && key != "seeds" && key != "mode" &&
          key != "eta_db" && key != "epsilon_m2" && key != "scenario" && key != "output")
        throw ParseError("unknown sweep key '" + key + "'");
    spec.parameter = parse_parameter(j.at("parameter").get<std::string>());
    spec.values = j.at("values").get<std::vector<double>>();
    for (const auto& a : j.at("algorithms")) spec.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    spec.mode = j.contains("mode") ? parse_mode(j["mode"].get<std::string>())
                                   : (spec.parameter == Parameter::epsilon_m2 ? Mode::comm : Mode::sensing);
    if (j.contains("eta_db")) spec.eta_db = j["eta_db"].get<double>();
    if (j.contains("epsilon_m2")) spec.epsilon_m2 = j["epsilon_m2"].get<double>();
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path path(p);
      return path.is_absolute() || base_dir.empty() ? p : (std::filesystem::path(base_dir) / path).string();
    };
    spec.scenario_path = resolve(j.at("scenario").get<std::string>());
    if (j.contains("output")) spec.output_path = resolve(j["output"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("sweep spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

inline SweepSpec load_spec(const std::string& path) {
  return parse_spec(read_text_file(path), std::filesystem::path(path).parent_path().string());
}

struct Row {
  double value = 0.0;
  Algorithm algorithm = Algorithm::sdr;
  std::uint64_t seed = 0;
  std::string status;
  double crlb_m2 = std::numeric_limits<double>::quiet_NaN();
  double min_sinr_db = std::numeric_limits<double>::quiet_NaN();
  double power_dbm = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double seconds = 0.0;
  std::string message;
};

inline Scenario variant(const Scenario& base, const SweepSpec& spec, double value) {
  const int n = static_cast<int>(value);
  switch (spec.parameter) {
    case Parameter::num_tmts: return with_num_tmts(base, n);
    case Parameter::num_bs: return with_num_bs(base, n);
    case Parameter::num_targets: return with_num_targets(base, n);
    default: return base;
  }
}

inline SolveRequest request_for(const SweepSpec& spec, Algorithm a, double value, std::uint64_t seed) {
  SolveRequest req;
  req.mode = spec.mode;
  req.algorithm = a;
  req.seed = seed;
  req.eta = db_to_linear(spec.parameter == Parameter::eta_db ? value : spec.eta_db);
  req.epsilon = {spec.parameter == Parameter::epsilon_m2 ? value : spec.epsilon_m2};
  return req;
}

inline Row run_cell(const Scenario& base, const SweepSpec& spec, double value, Algorithm a, std::uint64_t seed) {
  Row row;
  row.value = value;
  row.algorithm = a;
  row.seed = seed;
  try {
    const Scenario s = variant(base, spec, value);
    const ChannelRealization ch = draw_channels(s, seed);
    const SolveReport r = solve(s, ch, request_for(spec, a, value, seed));
    row.status = to_string(r.status);
    row.message = r.message;
    if (r.status != SolveStatus::infeasible) {
      row.crlb_m2 = r.max_crlb();
      row.min_sinr_db = linear_to_db(r.min_sinr());
      row.power_dbm = watt_to_dbm(r.max_power());
    }
    row.iterations = r.iterations;
    row.seconds = r.seconds;
  } catch (const std::exception& e) {
    row.status = "error";
    row.message = e.what();
  }
  return row;
}

inline int worker_count() {
  if (const char* env = std::getenv("ISAC_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Cells run on a pool of workers; rows come back in (value, algorithm, seed)
// order whatever the completion order. on_done sees each finished row.
inline std::vector<Row> run(const Scenario& base, const SweepSpec& spec, int workers,
                            const std::function<void(const Row&, std::size_t, std::size_t)>& on_done = {}) {
  struct Cell {
    double value;
    Algorithm algorithm;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (double v : spec.values)
    for (Algorithm a : spec.algorithms)
      for (std::uint64_t seed : spec.seeds) cells.push_back({v, a, seed});
  std::vector<Row> rows(cells.size());
  std::atomic<std::size_t> next{0};
  std::size_t finished = 0;
  std::mutex report_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      rows[i] = run_cell(base, spec, cells[i].value, cells[i].algorithm, cells[i].seed);
      if (on_done) {
        const std::lock_guard<std::mutex> lock(report_mutex);
        on_done(rows[i], ++finished, cells.size());
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

inline std::string format_value(Parameter p, double v) {
  if (is_count(p)) return std::to_string(static_cast<long long>(v));
  return io::csv_number(v);
}

// With wall_clock false the seconds column is written as zero so that
// identical runs produce identical bytes.
inline std::string to_csv(const Scenario& base, const SweepSpec& spec, const std::vector<Row>& rows,
                          bool wall_clock) {
  std::string seeds;
  for (std::size_t i = 0; i < spec.seeds.size(); ++i) seeds += (i ? ";" : "") + std::to_string(spec.seeds[i]);
  std::ostringstream out;
  out << io::csv_preamble(scenario_hash(base), seeds, io::tolerances_json(Tolerances{}), wall_clock);
  out << "param,value,algo,seed,status,crlb_m2,min_sinr_db,power_dbm,iters,seconds\n";
  for (const Row& r : rows) {
    out << to_string(spec.parameter) << ',' << format_value(spec.parameter, r.value) << ','
        << to_string(r.algorithm) << ',' << r.seed << ',' << io::csv_field(r.status) << ','
        << io::csv_number(r.crlb_m2) << ',' << io::csv_number(r.min_sinr_db) << ',' << io::csv_number(r.power_dbm)
        << ',' << r.iterations << ',' << io::csv_number(wall_clock ? r.seconds : 0.0) << '\n';
  }
  return out.str();
}

}  // namespace isac::sweep
