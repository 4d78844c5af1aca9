#pragma once

#include <string>

#include "isac/scenario_io.hpp"

namespace testing_support {

inline isac::Scenario data_scenario(const std::string& name) {
  return isac::load_scenario_file(std::string(ISAC_DATA_DIR) + "/" + name);
}

// One BS, K users, two TMTs: the smallest well-posed geometry.
inline isac::Scenario tiny_scenario(int nt, int K) {
  isac::Scenario s;
  s.params.num_tx_antennas = nt;
  s.bs.push_back({{80.0, 138.0}, std::nullopt});
  s.tmt = {{50.0, 50.0}, {-50.0, 50.0}};
  s.users.resize(1);
  for (int k = 0; k < K; ++k) s.users[0].push_back({40.0 + 25.0 * k, 110.0 - 5.0 * k});
  s.targets = {{0.0, 0.0}};
  isac::validate(s);
  return s;
}

}  // namespace testing_support
