#include <cstdio>

#include "isac/validation.hpp"

int main(int argc, char** argv) {
  isac::validation::Options opt;
  opt.data_dir = argc > 1 ? argv[1] : ISAC_DATA_DIR;
  int failed = 0;
  const auto results = isac::validation::run_all(opt, [&](const isac::validation::Outcome& o) {
    if (!o.pass) ++failed;
    std::printf("%s\n", isac::validation::format(o).c_str());
    std::fflush(stdout);
  });
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
