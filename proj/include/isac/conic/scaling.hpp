#pragma once

#include <algorithm>
#include <cmath>

#include "isac/conic/cones.hpp"
#include "isac/conic/program.hpp"

namespace isac::conic {

// Diagonal equilibration: x = D x~ / rhs, s = s~ / (E rhs), z = E z~ / cost,
// y = F y~ / cost. Row factors are constant on each SOC/PSD block so the
// cones are preserved.
struct ScalingRecord {
  VectorXd col;       // D
  VectorXd row;       // E (cone rows)
  VectorXd eq_row;    // F (equality rows)
  double cost = 1.0;  // objective multiplier
  double rhs = 1.0;   // right-hand-side multiplier

  VectorXd scale_x(const VectorXd& x) const { return rhs * x.cwiseQuotient(col); }
  VectorXd unscale_x(const VectorXd& xs) const { return col.cwiseProduct(xs) / rhs; }
  VectorXd scale_s(const VectorXd& s) const { return rhs * row.cwiseProduct(s); }
  VectorXd unscale_s(const VectorXd& ss) const { return ss.cwiseQuotient(row) / rhs; }
  VectorXd scale_z(const VectorXd& z) const { return cost * z.cwiseQuotient(row); }
  VectorXd unscale_z(const VectorXd& zs) const { return row.cwiseProduct(zs) / cost; }
  VectorXd scale_y(const VectorXd& y) const { return cost * y.cwiseQuotient(eq_row); }
  VectorXd unscale_y(const VectorXd& ys) const { return eq_row.cwiseProduct(ys) / cost; }
};

inline ScalingRecord identity_scaling(const StandardForm& sf) {
  ScalingRecord r;
  r.col = VectorXd::Ones(sf.num_vars());
  r.row = VectorXd::Ones(sf.num_cone_rows());
  r.eq_row = VectorXd::Ones(sf.num_eq());
  return r;
}

// Ruiz-style equilibration in place; returns the record needed to unscale.
inline ScalingRecord equilibrate(StandardForm& sf, int passes) {
  const ConeLayout L(sf);
  ScalingRecord rec = identity_scaling(sf);
  const int n = sf.num_vars();
  auto clamp = [](double v) { return std::clamp(v, 1e-8, 1e8); };

  for (int pass = 0; pass < passes; ++pass) {
    VectorXd cmax = VectorXd::Zero(n);
    VectorXd rmax = VectorXd::Zero(sf.num_cone_rows());
    VectorXd emax = VectorXd::Zero(sf.num_eq());
    for (int j = 0; j < n; ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(sf.G, j); it; ++it) {
        const double a = std::abs(it.value());
        cmax(j) = std::max(cmax(j), a);
        rmax(it.row()) = std::max(rmax(it.row()), a);
      }
      for (Eigen::SparseMatrix<double>::InnerIterator it(sf.A, j); it; ++it) {
        const double a = std::abs(it.value());
        cmax(j) = std::max(cmax(j), a);
        emax(it.row()) = std::max(emax(it.row()), a);
      }
    }
    // Blocks share one factor.
    for (std::size_t b = 0; b < L.soc.size(); ++b) {
      auto seg = rmax.segment(L.soc_off[b], L.soc[b]);
      seg.setConstant(seg.maxCoeff());
    }
    for (std::size_t b = 0; b < L.psd.size(); ++b) {
      auto seg = rmax.segment(L.psd_off[b], svec_size(L.psd[b]));
      seg.setConstant(seg.maxCoeff());
    }
    VectorXd dc(n), dr(sf.num_cone_rows()), de(sf.num_eq());
    for (int j = 0; j < n; ++j) dc(j) = cmax(j) > 0.0 ? clamp(1.0 / std::sqrt(cmax(j))) : 1.0;
    for (int i = 0; i < dr.size(); ++i) dr(i) = rmax(i) > 0.0 ? clamp(1.0 / std::sqrt(rmax(i))) : 1.0;
    for (int i = 0; i < de.size(); ++i) de(i) = emax(i) > 0.0 ? clamp(1.0 / std::sqrt(emax(i))) : 1.0;

    sf.G = dr.asDiagonal() * sf.G * dc.asDiagonal();
    sf.A = de.asDiagonal() * sf.A * dc.asDiagonal();
    sf.c = sf.c.cwiseProduct(dc);
    sf.h = sf.h.cwiseProduct(dr);
    sf.b = sf.b.cwiseProduct(de);
    rec.col = rec.col.cwiseProduct(dc);
    rec.row = rec.row.cwiseProduct(dr);
    rec.eq_row = rec.eq_row.cwiseProduct(de);
  }

  const double cn = sf.c.size() ? sf.c.cwiseAbs().maxCoeff() : 0.0;
  if (cn > 0.0) rec.cost = clamp(1.0 / cn);
  double bn = sf.h.size() ? sf.h.cwiseAbs().maxCoeff() : 0.0;
  if (sf.b.size()) bn = std::max(bn, sf.b.cwiseAbs().maxCoeff());
  if (bn > 0.0) rec.rhs = clamp(1.0 / bn);
  sf.c *= rec.cost;
  sf.h *= rec.rhs;
  sf.b *= rec.rhs;
  return rec;
}

}  // namespace isac::conic
