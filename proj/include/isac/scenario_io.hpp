#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "isac/scenario.hpp"

namespace isac {

using ojson = nlohmann::ordered_json;

namespace detail {

inline const ojson& require_key(const ojson& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw ParseError("missing key " + where + "." + key);
  return obj.at(key);
}

inline double get_number(const ojson& obj, const char* key, const std::string& where) {
  const ojson& v = require_key(obj, key, where);
  if (!v.is_number()) throw ParseError(where + "." + key + " must be a number");
  return v.get<double>();
}

inline int get_int(const ojson& obj, const char* key, const std::string& where) {
  const ojson& v = require_key(obj, key, where);
  if (!v.is_number_integer()) throw ParseError(where + "." + key + " must be an integer");
  return v.get<int>();
}

inline Point2 get_point(const ojson& v, const std::string& where) {
  if (!v.is_object()) throw ParseError(where + " must be an object {x, y}");
  return {get_number(v, "x", where), get_number(v, "y", where)};
}

inline std::vector<Point2> get_points(const ojson& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + " must be a list");
  std::vector<Point2> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(get_point(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline void reject_unknown(const ojson& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key())) throw ParseError("unknown key " + where + "." + item.key());
}

inline ojson point_json(Point2 p) {
  ojson o;
  o["x"] = p.x;
  o["y"] = p.y;
  return o;
}

}  // namespace detail

inline Scenario scenario_from_json(const ojson& doc, Checks checks = Checks::all) {
  using namespace detail;
  if (!doc.is_object()) throw ParseError("scenario must be a JSON object");
  reject_unknown(doc, {"system", "bs", "height_m", "tmt", "users", "targets"}, "scenario");

  Scenario s;
  const ojson& sys = require_key(doc, "system", "scenario");
  reject_unknown(sys,
                 {"carrier_freq_hz", "num_tx_antennas", "antenna_spacing_ratio", "effective_bandwidth_hz",
                  "comm_noise_power_dbm", "sensing_noise_psd_dbm_per_hz", "num_snapshots", "symbol_duration_s",
                  "max_power_dbm", "rician_factor_db", "num_nlos_paths", "nlos_spread_deg",
                  "speed_of_light_m_s"},
                 "system");
  SystemParams& p = s.params;
  p.carrier_freq_hz = get_number(sys, "carrier_freq_hz", "system");
  p.num_tx_antennas = get_int(sys, "num_tx_antennas", "system");
  p.antenna_spacing_ratio = get_number(sys, "antenna_spacing_ratio", "system");
  p.effective_bandwidth_hz = get_number(sys, "effective_bandwidth_hz", "system");
  p.comm_noise_power_w = dbm_to_watt(get_number(sys, "comm_noise_power_dbm", "system"));
  p.sensing_noise_psd_w_per_hz = dbm_to_watt(get_number(sys, "sensing_noise_psd_dbm_per_hz", "system"));
  p.num_snapshots = get_int(sys, "num_snapshots", "system");
  p.symbol_duration_s = sys.contains("symbol_duration_s") ? get_number(sys, "symbol_duration_s", "system")
                                                          : 1.0 / p.effective_bandwidth_hz;
  p.max_power_w = dbm_to_watt(get_number(sys, "max_power_dbm", "system"));
  p.rician_factor = db_to_linear(get_number(sys, "rician_factor_db", "system"));
  p.num_nlos_paths = get_int(sys, "num_nlos_paths", "system");
  if (sys.contains("nlos_spread_deg")) p.nlos_spread_rad = deg_to_rad(get_number(sys, "nlos_spread_deg", "system"));
  if (sys.contains("speed_of_light_m_s")) p.speed_of_light_m_s = get_number(sys, "speed_of_light_m_s", "system");

  // `bs` is either {height_m, positions} or a plain list with a top-level height_m.
  const ojson& bs = require_key(doc, "bs", "scenario");
  const ojson* positions = &bs;
  if (bs.is_object()) {
    reject_unknown(bs, {"height_m", "positions"}, "bs");
    s.bs_height_m = get_number(bs, "height_m", "bs");
    positions = &require_key(bs, "positions", "bs");
  } else {
    s.bs_height_m = get_number(doc, "height_m", "scenario");
  }
  if (!positions->is_array()) throw ParseError("bs positions must be a list");
  for (std::size_t i = 0; i < positions->size(); ++i) {
    const ojson& e = (*positions)[i];
    const std::string where = "bs[" + std::to_string(i) + "]";
    BaseStation b;
    b.pos = get_point(e, where);
    reject_unknown(e, {"x", "y", "broadside_deg"}, where);
    if (e.contains("broadside_deg")) b.broadside_rad = deg_to_rad(get_number(e, "broadside_deg", where));
    s.bs.push_back(b);
  }

  s.tmt = get_points(require_key(doc, "tmt", "scenario"), "tmt");
  const ojson& users = require_key(doc, "users", "scenario");
  if (!users.is_array()) throw ParseError("users must be a list of lists");
  for (std::size_t m = 0; m < users.size(); ++m)
    s.users.push_back(get_points(users[m], "users[" + std::to_string(m) + "]"));
  s.targets = get_points(require_key(doc, "targets", "scenario"), "targets");

  validate(s, checks);
  return s;
}

inline Scenario load_scenario(std::string_view text, Checks checks = Checks::all) {
  ojson doc;
  try {
    doc = ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario parse error: ") + e.what());
  }
  try {
    return scenario_from_json(doc, checks);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario schema error: ") + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario load_scenario_file(const std::string& path, Checks checks = Checks::all) {
  return load_scenario(read_text_file(path), checks);
}

inline ojson to_json(const Scenario& s) {
  using detail::point_json;
  const SystemParams& p = s.params;
  ojson sys;
  sys["carrier_freq_hz"] = p.carrier_freq_hz;
  sys["num_tx_antennas"] = p.num_tx_antennas;
  sys["antenna_spacing_ratio"] = p.antenna_spacing_ratio;
  sys["effective_bandwidth_hz"] = p.effective_bandwidth_hz;
  sys["comm_noise_power_dbm"] = watt_to_dbm(p.comm_noise_power_w);
  sys["sensing_noise_psd_dbm_per_hz"] = watt_to_dbm(p.sensing_noise_psd_w_per_hz);
  sys["num_snapshots"] = p.num_snapshots;
  sys["symbol_duration_s"] = p.symbol_duration_s;
  sys["max_power_dbm"] = watt_to_dbm(p.max_power_w);
  sys["rician_factor_db"] = linear_to_db(p.rician_factor);
  sys["num_nlos_paths"] = p.num_nlos_paths;
  sys["nlos_spread_deg"] = rad_to_deg(p.nlos_spread_rad);
  sys["speed_of_light_m_s"] = p.speed_of_light_m_s;

  ojson doc;
  doc["system"] = sys;
  ojson bs;
  bs["height_m"] = s.bs_height_m;
  bs["positions"] = ojson::array();
  for (const BaseStation& b : s.bs) {
    ojson e = point_json(b.pos);
    if (b.broadside_rad) e["broadside_deg"] = rad_to_deg(*b.broadside_rad);
    bs["positions"].push_back(e);
  }
  doc["bs"] = bs;
  doc["tmt"] = ojson::array();
  for (Point2 t : s.tmt) doc["tmt"].push_back(point_json(t));
  doc["users"] = ojson::array();
  for (const auto& list : s.users) {
    ojson l = ojson::array();
    for (Point2 u : list) l.push_back(point_json(u));
    doc["users"].push_back(l);
  }
  doc["targets"] = ojson::array();
  for (Point2 t : s.targets) doc["targets"].push_back(point_json(t));
  return doc;
}

inline std::string dump_scenario(const Scenario& s) { return to_json(s).dump(2); }

// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
inline std::string scenario_hash(const Scenario& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Equality up to the rounding introduced by dB conversions.
inline bool approx_equal(const Scenario& a, const Scenario& b, double rel = 1e-12) {
  auto close = [rel](double x, double y) { return std::abs(x - y) <= rel * std::max({1.0, std::abs(x), std::abs(y)}); };
  auto close_pts = [&](const std::vector<Point2>& x, const std::vector<Point2>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!close(x[i].x, y[i].x) || !close(x[i].y, y[i].y)) return false;
    return true;
  };
  const SystemParams& p = a.params;
  const SystemParams& q = b.params;
  bool ok = close(p.carrier_freq_hz, q.carrier_freq_hz) && p.num_tx_antennas == q.num_tx_antennas &&
            close(p.antenna_spacing_ratio, q.antenna_spacing_ratio) &&
            close(p.effective_bandwidth_hz, q.effective_bandwidth_hz) &&
            close(p.comm_noise_power_w / q.comm_noise_power_w, 1.0) &&
            close(p.sensing_noise_psd_w_per_hz / q.sensing_noise_psd_w_per_hz, 1.0) &&
            p.num_snapshots == q.num_snapshots && close(p.symbol_duration_s / q.symbol_duration_s, 1.0) &&
            close(p.max_power_w, q.max_power_w) && close(p.rician_factor, q.rician_factor) &&
            p.num_nlos_paths == q.num_nlos_paths && close(p.nlos_spread_rad, q.nlos_spread_rad) &&
            close(p.speed_of_light_m_s, q.speed_of_light_m_s) && close(a.bs_height_m, b.bs_height_m);
  if (!ok || a.bs.size() != b.bs.size() || a.users.size() != b.users.size()) return false;
  for (std::size_t m = 0; m < a.bs.size(); ++m) {
    if (!close(a.bs[m].pos.x, b.bs[m].pos.x) || !close(a.bs[m].pos.y, b.bs[m].pos.y)) return false;
    if (a.bs[m].broadside_rad.has_value() != b.bs[m].broadside_rad.has_value()) return false;
    if (a.bs[m].broadside_rad && !close(*a.bs[m].broadside_rad, *b.bs[m].broadside_rad)) return false;
    if (!close_pts(a.users[m], b.users[m])) return false;
  }
  return close_pts(a.tmt, b.tmt) && close_pts(a.targets, b.targets);
}

}  // namespace isac
