#pragma once

#include <algorithm>

#include "isac/core.hpp"

namespace isac::solvers {

struct RankOne {
  VectorXcd f;
  double ratio = 0.0;  // lambda_2 / lambda_1
};

// Dominant eigenpair sqrt(lambda_1) v_1, phase fixed so the largest-magnitude
// entry is real and nonnegative.
inline RankOne extract_rank_one(const MatrixXcd& F) {
  const int n = static_cast<int>(F.rows());
  RankOne r;
  if (n == 0) return r;
  const MatrixXcd H = 0.5 * (F + F.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
  const VectorXd ev = es.eigenvalues();
  const double l1 = std::max(ev(n - 1), 0.0);
  const double l2 = n > 1 ? std::max(ev(n - 2), 0.0) : 0.0;
  r.ratio = l1 > 0.0 ? l2 / l1 : 0.0;
  r.f = std::sqrt(l1) * es.eigenvectors().col(n - 1);
  Eigen::Index imax = 0;
  r.f.cwiseAbs().maxCoeff(&imax);
  if (std::abs(r.f(imax)) > 0.0) r.f *= std::conj(r.f(imax)) / std::abs(r.f(imax));
  r.f(imax) = std::abs(r.f(imax));
  return r;
}

}  // namespace isac::solvers
