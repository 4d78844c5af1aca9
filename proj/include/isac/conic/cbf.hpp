#pragma once

#include <ostream>
#include <vector>

#include "isac/conic/cones.hpp"
#include "isac/conic/program.hpp"

namespace isac::conic {

// Writes a standard form in the Conic Benchmark Format (CBF, version 3):
// scalar rows -h + ... as "A x + b in K", PSD blocks as PSDCON matrices.
inline void write_cbf(std::ostream& out, const StandardForm& sf) {
  const ConeLayout L(sf);
  const int n = sf.num_vars();
  const int scalar_rows = L.nonneg + (L.psd.empty() ? L.total : L.psd_off.front()) - L.nonneg + sf.num_eq();
  out.precision(17);
  out << "VER\n3\n\nOBJSENSE\nMIN\n\nVAR\n" << n << " 1\nF " << n << "\n\n";

  std::vector<std::pair<const char*, int>> cones;
  if (L.nonneg) cones.push_back({"L+", L.nonneg});
  for (int d : L.soc) cones.push_back({"Q", d});
  if (sf.num_eq()) cones.push_back({"L=", sf.num_eq()});
  out << "CON\n" << scalar_rows << " " << cones.size() << "\n";
  for (const auto& [name, d] : cones) out << name << " " << d << "\n";
  out << "\n";
  if (!L.psd.empty()) {
    out << "PSDCON\n" << L.psd.size() << "\n";
    for (int o : L.psd) out << o << "\n";
    out << "\n";
  }

  std::vector<std::pair<int, double>> obj;
  for (int j = 0; j < n; ++j)
    if (sf.c(j) != 0.0) obj.push_back({j, sf.c(j)});
  out << "OBJACOORD\n" << obj.size() << "\n";
  for (const auto& [j, v] : obj) out << j << " " << v << "\n";
  out << "\nOBJBCOORD\n" << sf.objective_constant << "\n\n";

  // s = h - G x  ->  A = -G, b = h; equalities A x - b = 0.
  const int first_psd_row = L.psd.empty() ? L.total : L.psd_off.front();
  struct Triple { int r, c; double v; };
  std::vector<Triple> acoord;
  std::vector<std::pair<int, double>> bcoord;
  struct Hc { int k, var, i, j; double v; };
  std::vector<Hc> hcoord;
  std::vector<Hc> dcoord;
  const double ir2 = 1.0 / std::sqrt(2.0);
  auto psd_locate = [&](int row, int& blk, int& i, int& j) {
    for (std::size_t b = 0; b < L.psd.size(); ++b) {
      if (row < L.psd_off[b] + svec_size(L.psd[b])) {
        blk = static_cast<int>(b);
        const auto pos = svec_position(row - L.psd_off[b], L.psd[b]);
        i = pos.first;
        j = pos.second;
        return;
      }
    }
  };
  for (int col = 0; col < n; ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sf.G, col); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (r < first_psd_row) {
        acoord.push_back({r, col, -it.value()});
      } else {
        int blk = 0, i = 0, j = 0;
        psd_locate(r, blk, i, j);
        hcoord.push_back({blk, col, i, j, -it.value() * (i == j ? 1.0 : ir2)});
      }
    }
  for (int r = 0; r < L.total; ++r) {
    if (sf.h(r) == 0.0) continue;
    if (r < first_psd_row) {
      bcoord.push_back({r, sf.h(r)});
    } else {
      int blk = 0, i = 0, j = 0;
      psd_locate(r, blk, i, j);
      dcoord.push_back({blk, 0, i, j, sf.h(r) * (i == j ? 1.0 : ir2)});
    }
  }
  for (int col = 0; col < n; ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sf.A, col); it; ++it)
      acoord.push_back({first_psd_row + static_cast<int>(it.row()), col, it.value()});
  for (int r = 0; r < sf.num_eq(); ++r)
    if (sf.b(r) != 0.0) bcoord.push_back({first_psd_row + r, -sf.b(r)});

  out << "ACOORD\n" << acoord.size() << "\n";
  for (const auto& t : acoord) out << t.r << " " << t.c << " " << t.v << "\n";
  out << "\nBCOORD\n" << bcoord.size() << "\n";
  for (const auto& [r, v] : bcoord) out << r << " " << v << "\n";
  if (!L.psd.empty()) {
    out << "\nHCOORD\n" << hcoord.size() << "\n";
    for (const auto& t : hcoord) out << t.k << " " << t.var << " " << t.i << " " << t.j << " " << t.v << "\n";
    out << "\nDCOORD\n" << dcoord.size() << "\n";
    for (const auto& t : dcoord) out << t.k << " " << t.i << " " << t.j << " " << t.v << "\n";
  }
}

}  // namespace isac::conic
