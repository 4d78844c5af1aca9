#pragma once

#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "isac/scenario_io.hpp"
#include "isac/solve_types.hpp"

namespace isac::io {

using nlohmann::ordered_json;

// JSON has no infinities; they travel as null.
inline ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline double number_or(const ordered_json& v, double fallback) { return v.is_number() ? v.get<double>() : fallback; }

inline ordered_json complex_vector(const VectorXcd& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

inline VectorXcd complex_vector_from(const ordered_json& a, const std::string& where) {
  if (!a.is_array()) throw ParseError(where + " must be a list of [re, im] pairs");
  VectorXcd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const ordered_json& e = a[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ParseError(where + "[" + std::to_string(i) + "] must be [re, im]");
    v(static_cast<Eigen::Index>(i)) = cdouble(e[0].get<double>(), e[1].get<double>());
  }
  return v;
}

// {"f": [bs][user][[re, im], ...], "sensing_cov": [bs][row][[re, im], ...]}
inline ordered_json beams_to_json(const BeamformerSet& b) {
  ordered_json out;
  out["f"] = ordered_json::array();
  for (const auto& row : b.f) {
    ordered_json users = ordered_json::array();
    for (const VectorXcd& v : row) users.push_back(complex_vector(v));
    out["f"].push_back(users);
  }
  if (b.has_sensing_cov()) {
    out["sensing_cov"] = ordered_json::array();
    for (const MatrixXcd& R : b.sensing_cov) {
      ordered_json rows = ordered_json::array();
      for (int i = 0; i < R.rows(); ++i) rows.push_back(complex_vector(R.row(i).transpose()));
      out["sensing_cov"].push_back(rows);
    }
  }
  return out;
}

inline BeamformerSet beams_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("f") || !j["f"].is_array()) throw ParseError("beamformers need an \"f\" list");
  BeamformerSet b;
  const ordered_json& f = j["f"];
  for (std::size_t m = 0; m < f.size(); ++m) {
    if (!f[m].is_array()) throw ParseError("f[" + std::to_string(m) + "] must be a list of users");
    b.f.emplace_back();
    for (std::size_t k = 0; k < f[m].size(); ++k)
      b.f.back().push_back(complex_vector_from(f[m][k], "f[" + std::to_string(m) + "][" + std::to_string(k) + "]"));
  }
  if (b.f.empty() || b.f[0].empty()) throw ParseError("beamformers are empty");
  const Eigen::Index nt = b.f[0][0].size();
  for (const auto& row : b.f) {
    if (row.size() != b.f[0].size()) throw ParseError("every BS needs the same number of user beams");
    for (const VectorXcd& v : row)
      if (v.size() != nt) throw ParseError("beam lengths differ");
  }
  if (j.contains("sensing_cov")) {
    const ordered_json& rc = j["sensing_cov"];
    if (!rc.is_array() || rc.size() != b.f.size()) throw ParseError("sensing_cov needs one matrix per BS");
    for (std::size_t m = 0; m < rc.size(); ++m) {
      if (!rc[m].is_array() || static_cast<Eigen::Index>(rc[m].size()) != nt)
        throw ParseError("sensing_cov[" + std::to_string(m) + "] must be N_t x N_t");
      MatrixXcd R(nt, nt);
      for (Eigen::Index i = 0; i < nt; ++i) {
        const VectorXcd row = complex_vector_from(rc[m][i], "sensing_cov row");
        if (row.size() != nt) throw ParseError("sensing_cov[" + std::to_string(m) + "] must be N_t x N_t");
        R.row(i) = row.transpose();
      }
      b.set_sensing_cov(static_cast<int>(m), R);
    }
  }
  return b;
}

inline ordered_json tolerances_json(const Tolerances& t) {
  ordered_json o;
  o["sca_rel_tol"] = t.sca_rel_tol;
  o["sca_max_iterations"] = t.sca_max_iterations;
  o["bisection_tol"] = t.bisection_tol;
  o["certificate_tol"] = t.certificate_tol;
  o["rank_tol"] = t.rank_tol;
  o["randomization_candidates"] = t.randomization_candidates;
  o["audit_slack"] = t.audit_slack;
  o["sinr_margin"] = t.sinr_margin;
  o["conic_accuracy"] = t.conic.accuracy;
  o["conic_max_iterations"] = t.conic.max_iterations;
  return o;
}

inline ordered_json request_json(const SolveRequest& req) {
  ordered_json o;
  o["mode"] = to_string(req.mode);
  o["algorithm"] = to_string(req.algorithm);
  o["eta_linear"] = req.eta;
  o["eta_db"] = number(req.eta > 0.0 ? linear_to_db(req.eta) : -std::numeric_limits<double>::infinity());
  o["epsilon_m2"] = ordered_json::array();
  for (double e : req.epsilon) o["epsilon_m2"].push_back(number(e));
  return o;
}

inline ordered_json solution_json(const Scenario& s, const SolveRequest& req, const SolveReport& r) {
  ordered_json o;
  o["version"] = kVersion;
  o["scenario_hash"] = scenario_hash(s);
  o["seed"] = req.seed;
  o["request"] = request_json(req);
  o["tolerances"] = tolerances_json(req.tol);
  o["status"] = to_string(r.status);
  o["message"] = r.message;
  o["array"] = {{"num_tx_antennas", s.num_antennas()}, {"antenna_spacing_ratio", s.params.antenna_spacing_ratio}};
  o["beamformers"] = beams_to_json(r.beams);

  ordered_json a;
  a["objective"] = number(r.objective);
  a["relaxation_bound"] = number(r.relaxation_bound);
  a["crlb_m2"] = ordered_json::array();
  for (double c : r.crlb_m2) a["crlb_m2"].push_back(number(c));
  a["sinr_db"] = ordered_json::array();
  for (const auto& row : r.sinr) {
    ordered_json l = ordered_json::array();
    for (double v : row) l.push_back(number(linear_to_db(v)));
    a["sinr_db"].push_back(l);
  }
  a["power_dbm"] = ordered_json::array();
  for (double p : r.power_w) a["power_dbm"].push_back(number(watt_to_dbm(p)));
  o["achieved"] = a;

  ordered_json d;
  d["objective_trace"] = ordered_json::array();
  for (double v : r.objective_trace) d["objective_trace"].push_back(number(v));
  d["rank_ratios"] = r.rank_ratios;
  d["rank_degraded"] = r.rank_degraded;
  d["randomized"] = r.randomized;
  d["solver_statuses"] = r.solver_statuses;
  d["iterations"] = r.iterations;
  d["seconds"] = r.seconds;
  o["diagnostics"] = d;
  return o;
}

// Fields of a solution file needed downstream.
struct SolutionFile {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string status;
  int num_tx_antennas = 0;
  double antenna_spacing_ratio = 0.5;
  ordered_json tolerances = ordered_json::object();
  BeamformerSet beams;
};

inline ordered_json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(what + " parse error: " + e.what());
  }
}

inline SolutionFile read_solution(const std::string& path) {
  const ordered_json j = parse_json_text(read_text_file(path), path);
  if (!j.is_object() || !j.contains("beamformers")) throw ParseError(path + ": not a solution file");
  SolutionFile out;
  try {
    out.scenario_hash = j.value("scenario_hash", "");
    out.seed = j.value("seed", std::uint64_t{0});
    out.status = j.value("status", "");
    out.beams = beams_from_json(j["beamformers"]);
    out.num_tx_antennas = static_cast<int>(out.beams.f[0][0].size());
    if (j.contains("tolerances")) out.tolerances = j["tolerances"];
    if (j.contains("array")) out.antenna_spacing_ratio = j["array"].value("antenna_spacing_ratio", 0.5);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return out;
}

// A beamformer file is either a bare {"f": ...} object or a solution file.
inline BeamformerSet read_beams(const std::string& path) {
  const ordered_json j = parse_json_text(read_text_file(path), path);
  try {
    return beams_from_json(j.is_object() && j.contains("beamformers") ? j["beamformers"] : j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
  if (!out) throw ParseError("write failed: " + path);
}

// ---- CSV ----------------------------------------------------------------

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Commented provenance lines; the timestamp line is optional for byte-stable output.
inline std::string csv_preamble(const std::string& scenario_hash, const std::string& seeds,
                                const ordered_json& tolerances, bool timestamp) {
  std::string out = "# isac " + std::string(kVersion) + " scenario_hash=" + scenario_hash + " seeds=" + seeds + "\n";
  out += "# tolerances " + tolerances.dump() + "\n";
  if (timestamp) out += "# generated " + utc_timestamp() + "\n";
  return out;
}

inline std::vector<double> inclusive_grid_deg(double step) {
  if (!(step > 0.0) || step > 180.0) throw ValidationError("grid step must be in (0, 180] degrees");
  const long n = std::lround(std::floor(180.0 / step + 1e-9));
  std::vector<double> g;
  for (long i = 0; i <= n; ++i) g.push_back(-90.0 + step * static_cast<double>(i));
  return g;
}

// bs_index,angle_deg,gain_linear,gain_db_normalized (normalized to each BS's peak).
inline std::string beampattern_csv(const SolutionFile& sol, double step_deg, bool timestamp) {
  SystemParams p;
  p.num_tx_antennas = sol.num_tx_antennas;
  p.antenna_spacing_ratio = sol.antenna_spacing_ratio;
  const std::vector<double> grid = inclusive_grid_deg(step_deg);
  std::vector<double> rad;
  for (double d : grid) rad.push_back(deg_to_rad(d));
  std::ostringstream out;
  out << csv_preamble(sol.scenario_hash, std::to_string(sol.seed), sol.tolerances, timestamp);
  out << "bs_index,angle_deg,gain_linear,gain_db_normalized\n";
  for (int m = 0; m < sol.beams.num_bs(); ++m) {
    const std::vector<double> g = beampattern(sol.beams, m, rad, p);
    const double peak = *std::max_element(g.begin(), g.end());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double db = peak > 0.0 ? linear_to_db(g[i] / peak) : -std::numeric_limits<double>::infinity();
      out << m << ',' << csv_number(grid[i]) << ',' << csv_number(g[i]) << ',' << csv_number(db) << '\n';
    }
  }
  return out.str();
}

}  // namespace isac::io
