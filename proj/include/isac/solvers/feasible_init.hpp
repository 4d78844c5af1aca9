#pragma once

#include <optional>

#include "isac/solvers/common.hpp"

namespace isac::solvers {

struct InitResult {
  std::optional<BeamformerSet> beams;  // empty when eta is unattainable
  double power_ratio = std::numeric_limits<double>::infinity();
  conic::Status status = conic::Status::numerical_failure;
};

// Beams meeting SINR >= eta with the smallest max per-BS power. The SINR rows
// are second-order cones ||(h^H f_ij)_{all i,j}, 1|| <= sqrt(1 + 1/eta) Re(h^H f_mk)
// with the served term's phase fixed real. eta = 0 returns uniform MRT.
inline InitResult feasible_init(const Scenario& s, const ChannelRealization& ch, double eta,
                                const conic::Settings& settings = {}, double margin = 1e-6) {
  const Normalized d = normalize(s, ch);
  InitResult out;
  if (eta <= 0.0) {
    std::vector<std::vector<VectorXcd>> f(d.M, std::vector<VectorXcd>(d.K));
    for (int m = 0; m < d.M; ++m)
      for (int k = 0; k < d.K; ++k) f[m][k] = unit_or_zero(d.chan(m, m, k)) / std::sqrt(static_cast<double>(d.K));
    out.beams = denormalize(d, f);
    out.power_ratio = 1.0;
    out.status = conic::Status::optimal;
    return out;
  }
  const double target = eta * (1.0 + margin);
  Program prog;
  std::vector<std::vector<ComplexVar>> f(d.M);
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) f[m].push_back(add_complex_var(prog, d.nt));
  const AffineExpr t = AffineExpr::var(prog.add_variable());
  for (int m = 0; m < d.M; ++m)
    for (int k = 0; k < d.K; ++k) {
      std::vector<AffineExpr> xs;
      AffineExpr served(0.0);
      for (int i = 0; i < d.M; ++i)
        for (int j = 0; j < d.K; ++j) {
          const auto [re, im] = linear_form(d.chan(i, m, k).conjugate(), f[i][j]);
          xs.push_back(re);
          xs.push_back(im);
          if (i == m && j == k) {
            served = re;
            prog.add_equal(im);
          }
        }
      xs.push_back(AffineExpr(1.0));
      prog.add_soc(std::sqrt(1.0 + 1.0 / target) * served, xs);
    }
  for (int m = 0; m < d.M; ++m) {
    std::vector<AffineExpr> xs;
    for (const ComplexVar& v : f[m])
      for (const AffineExpr& e : v.reals()) xs.push_back(e);
    prog.add_soc(t, xs);
  }
  prog.minimize(t);
  const conic::Solution sol = conic::solve(prog, settings);
  out.status = sol.status;
  if (!sol.usable()) return out;
  out.power_ratio = sol.objective * sol.objective;
  if (out.power_ratio > 1.0) return out;
  std::vector<std::vector<VectorXcd>> fv(d.M);
  for (int m = 0; m < d.M; ++m)
    for (const ComplexVar& v : f[m]) fv[m].push_back(v.value(sol.x));
  out.beams = denormalize(d, fv);
  return out;
}

}  // namespace isac::solvers
