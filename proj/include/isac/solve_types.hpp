#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "isac/conic/ipm.hpp"
#include "isac/metrics.hpp"

namespace isac {

enum class Mode { sensing, comm };
enum class Algorithm { sdr, bisection, sca, zf, mmse, bpm };

inline std::string to_string(Mode m) { return m == Mode::sensing ? "sensing" : "comm"; }

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sdr: return "sdr";
    case Algorithm::bisection: return "bisection";
    case Algorithm::sca: return "sca";
    case Algorithm::zf: return "zf";
    case Algorithm::mmse: return "mmse";
    case Algorithm::bpm: return "bpm";
  }
  return "unknown";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "sensing") return Mode::sensing;
  if (s == "comm" || s == "communication") return Mode::comm;
  throw ParseError("unknown mode '" + s + "' (expected sensing or comm)");
}

inline Algorithm parse_algorithm(const std::string& s) {
  for (Algorithm a : {Algorithm::sdr, Algorithm::bisection, Algorithm::sca, Algorithm::zf, Algorithm::mmse,
                      Algorithm::bpm})
    if (to_string(a) == s) return a;
  throw ParseError("unknown algorithm '" + s + "'");
}

struct Tolerances {
  double sca_rel_tol = 1e-4;
  int sca_max_iterations = 100;
  double bisection_tol = 1e-3;      // relative width of the eta bracket
  double certificate_tol = 1e-4;    // accepted shortfall of the power ratio below 1
  double rank_tol = 1e-4;
  int randomization_candidates = 100;
  double audit_slack = 1e-6;
  double sinr_margin = 1e-5;  // relative tightening of SINR and CRLB rows inside the convex models
  conic::Settings conic{.accuracy = 1e-9};
};

struct SolveRequest {
  Mode mode = Mode::sensing;
  Algorithm algorithm = Algorithm::sdr;
  double eta = 0.0;  // linear SINR threshold (sensing mode)
  // CRLB thresholds in m^2 (comm mode); one value applies to every target.
  std::vector<double> epsilon{std::numeric_limits<double>::infinity()};
  Tolerances tol;
  std::uint64_t seed = 0;

  double epsilon_for(int u) const {
    if (epsilon.empty()) return std::numeric_limits<double>::infinity();
    return epsilon.size() == 1 ? epsilon[0] : epsilon.at(u);
  }
  double sinr_target() const { return eta * (1.0 + tol.sinr_margin); }
};

// Throws ValidationError when the request is inconsistent with the scenario.
inline void validate_request(const Scenario& s, const SolveRequest& r) {
  if (!(r.eta >= 0.0) || !std::isfinite(r.eta)) throw ValidationError("eta must be finite and >= 0");
  for (double e : r.epsilon)
    if (!(e > 0.0)) throw ValidationError("epsilon must be > 0");
  if (r.epsilon.size() > 1 && static_cast<int>(r.epsilon.size()) != s.num_targets())
    throw ValidationError("one epsilon per target expected");
  if (r.mode == Mode::comm && r.algorithm == Algorithm::bpm)
    throw ValidationError("beampattern matching is a sensing-mode baseline");
  if (r.mode == Mode::sensing && r.algorithm == Algorithm::bisection)
    throw ValidationError("bisection solves the comm-mode problem");
  if (r.algorithm == Algorithm::bisection && s.num_bs() != 1) throw ValidationError("bisection requires M=1");
  if (r.algorithm == Algorithm::zf && s.num_antennas() < s.num_bs() * s.users_per_bs())
    throw DimensionError("ZF requires N_t >= M*K");
}

enum class SolveStatus { solved, infeasible, tolerance_not_met };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved: return "solved";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::tolerance_not_met: return "tolerance-not-met";
  }
  return "unknown";
}

struct SolveReport {
  SolveStatus status = SolveStatus::tolerance_not_met;
  Mode mode = Mode::sensing;
  Algorithm algorithm = Algorithm::sdr;
  BeamformerSet beams;

  std::vector<std::vector<double>> sinr;  // [bs][user], linear
  std::vector<double> power_w;
  std::vector<double> crlb_m2;            // per target; +inf when the FIM is singular
  double objective = std::numeric_limits<double>::quiet_NaN();  // max CRLB (sensing) or min SINR (comm)
  double relaxation_bound = std::numeric_limits<double>::quiet_NaN();  // SDP optimum, same units

  std::vector<double> objective_trace;
  std::vector<double> rank_ratios;
  bool rank_degraded = false;
  bool randomized = false;
  std::vector<std::string> solver_statuses;
  int iterations = 0;
  double seconds = 0.0;
  std::string message;

  double min_sinr() const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& row : sinr)
      for (double x : row) v = std::min(v, x);
    return v;
  }
  double max_crlb() const {
    double v = 0.0;
    for (double c : crlb_m2) v = std::max(v, c);
    return v;
  }
  double max_power() const {
    double v = 0.0;
    for (double p : power_w) v = std::max(v, p);
    return v;
  }
};

inline double safe_crlb(const Scenario& s, const ChannelRealization& ch, const BeamformerSet& b, int u) {
  try {
    return crlb(s, ch, b, u).crlb_m2;
  } catch (const SingularFimError&) {
    return std::numeric_limits<double>::infinity();
  }
}

// Fills the achieved metrics from the beams.
inline void evaluate(const Scenario& s, const ChannelRealization& ch, SolveReport& r) {
  r.sinr = all_sinr(s, ch, r.beams);
  r.power_w = per_bs_power(r.beams);
  r.crlb_m2.clear();
  for (int u = 0; u < s.num_targets(); ++u) r.crlb_m2.push_back(safe_crlb(s, ch, r.beams, u));
  r.objective = r.mode == Mode::sensing ? r.max_crlb() : r.min_sinr();
}

// Independent constraint check; returns the violations (empty when clean).
inline std::vector<std::string> audit(const Scenario& s, const SolveRequest& req, const SolveReport& r) {
  std::vector<std::string> bad;
  const double slack = req.tol.audit_slack;
  const double P = s.params.max_power_w;
  for (std::size_t m = 0; m < r.power_w.size(); ++m)
    if (r.power_w[m] > P * (1.0 + slack)) bad.push_back("power at BS " + std::to_string(m));
  if (req.mode == Mode::sensing) {
    for (std::size_t m = 0; m < r.sinr.size(); ++m)
      for (std::size_t k = 0; k < r.sinr[m].size(); ++k)
        if (r.sinr[m][k] < req.eta * (1.0 - slack))
          bad.push_back("SINR of user " + std::to_string(k) + " at BS " + std::to_string(m));
  } else {
    for (std::size_t u = 0; u < r.crlb_m2.size(); ++u)
      if (!(r.crlb_m2[u] <= req.epsilon_for(static_cast<int>(u)) * (1.0 + slack)))
        bad.push_back("CRLB of target " + std::to_string(u));
  }
  return bad;
}

// Evaluate, audit and set the final status unless already infeasible.
inline void finalize(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req, SolveReport& r) {
  r.mode = req.mode;
  r.algorithm = req.algorithm;
  if (r.beams.f.empty()) r.beams = BeamformerSet::zeros(s.num_bs(), s.users_per_bs(), s.num_antennas());
  evaluate(s, ch, r);
  if (r.status == SolveStatus::infeasible) return;
  const auto bad = audit(s, req, r);
  if (!bad.empty()) {
    r.status = SolveStatus::tolerance_not_met;
    std::string msg = "audit failed:";
    for (const auto& b : bad) msg += " " + b + ";";
    r.message = r.message.empty() ? msg : r.message + "; " + msg;
  }
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace isac
