#pragma once

#include "isac/baselines.hpp"
#include "isac/solvers/sca.hpp"
#include "isac/solvers/sdr.hpp"

namespace isac {

// Routes a request to the matching solver. Throws on invalid combinations.
inline SolveReport solve(const Scenario& s, const ChannelRealization& ch, const SolveRequest& req) {
  validate_request(s, req);
  if (req.mode == Mode::sensing) {
    switch (req.algorithm) {
      case Algorithm::sdr: return solvers::solve_sensing_sdr(s, ch, req);
      case Algorithm::sca: return solvers::solve_sensing_sca(s, ch, req);
      case Algorithm::zf: return baselines::solve_zf(s, ch, req);
      case Algorithm::mmse: return baselines::solve_mmse(s, ch, req);
      case Algorithm::bpm: return baselines::beampattern_match(s, ch, req);
      case Algorithm::bisection: break;
    }
  } else {
    switch (req.algorithm) {
      case Algorithm::bisection:
      case Algorithm::sdr: return solvers::solve_comm_bisection(s, ch, req);
      case Algorithm::sca: return solvers::solve_comm_sca(s, ch, req);
      case Algorithm::zf: return baselines::solve_zf(s, ch, req);
      case Algorithm::mmse: return baselines::solve_mmse(s, ch, req);
      case Algorithm::bpm: break;
    }
  }
  throw ValidationError("unsupported mode/algorithm combination");
}

}  // namespace isac
