#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "isac/conic.hpp"

using namespace isac;
using namespace isac::conic;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

MatrixXcd random_hermitian(std::mt19937_64& g, int n, bool psd) {
  std::normal_distribution<double> N(0.0, 1.0);
  MatrixXcd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = cdouble(N(g), N(g));
  if (psd) return B * B.adjoint();
  return 0.5 * (B + B.adjoint());
}

double fixed_fim_epigraph(const Eigen::Matrix2d& F) {
  Program p;
  const AffineExpr t = trace_inverse_epigraph(p, {AffineExpr(F(0, 0)), AffineExpr(F(1, 0)), AffineExpr(F(1, 1))});
  p.minimize(t);
  const Solution s = solve(p);
  REQUIRE(s.status == Status::optimal);
  return s.value(t);
}

}  // namespace

TEST_CASE("LP lower bound", "[conic]") {
  Program p;
  const int x = p.add_variable();
  p.add_nonneg(AffineExpr::var(x) - 3.0);
  p.minimize(AffineExpr::var(x));
  const Solution s = solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK_THAT(s.value(x), WithinAbs(3.0, 1e-7));
  CHECK(s.primal_residual < 1e-7);
}

TEST_CASE("LP with equality and several rows", "[conic]") {
  // min -x - 2y  s.t. x + y = 4, x >= 0, y >= 0, y <= 3  -> x = 1, y = 3, obj = -7
  Program p;
  const int x = p.add_variable();
  const int y = p.add_variable();
  p.add_equal(AffineExpr::var(x) + AffineExpr::var(y) - 4.0);
  p.add_nonneg(AffineExpr::var(x));
  p.add_nonneg(AffineExpr::var(y));
  p.add_le(AffineExpr::var(y), 3.0);
  p.minimize(-AffineExpr::var(x) - 2.0 * AffineExpr::var(y));
  const Solution s = solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK_THAT(s.objective, WithinAbs(-7.0, 1e-6));
  CHECK_THAT(s.value(x), WithinAbs(1.0, 1e-6));
}

TEST_CASE("SOCP norm of (3,4)", "[conic]") {
  Program p;
  const int t = p.add_variable();
  p.add_soc(AffineExpr::var(t), {AffineExpr(3.0), AffineExpr(4.0)});
  p.minimize(AffineExpr::var(t));
  const Solution s = solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK_THAT(s.value(t), WithinAbs(5.0, 1e-7));
}

TEST_CASE("rotated SOC: min u s.t. u * 1 >= x^2, x = 3", "[conic]") {
  Program p;
  const int u = p.add_variable();
  const int x = p.add_variable();
  p.add_equal(AffineExpr::var(x) - 3.0);
  p.add_rotated_soc(AffineExpr::var(u), AffineExpr(1.0), {AffineExpr::var(x)});
  p.minimize(AffineExpr::var(u));
  const Solution s = solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK_THAT(s.value(u), WithinAbs(9.0, 1e-6));
}

TEST_CASE("complex SDP with decoupled diagonal", "[conic]") {
  Program p;
  const HermitianVar X = p.add_hermitian(2);
  p.add_nonneg(X.re(0, 0) - 1.0);
  p.add_nonneg(X.re(1, 1) - 2.0);
  p.minimize(X.trace());
  const Solution s = solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK_THAT(s.objective, WithinAbs(3.0, 1e-7));
  const MatrixXcd V = s.value(X);
  CHECK(std::abs(V(0, 1)) < 1e-6);
}

TEST_CASE("complex SDP with an off-diagonal coupling", "[conic]") {
  // min tr(X C) with C = [[1, i],[−i, 1]]... over tr(X) = 1, X >= 0: min eigenvalue of C = 0
  MatrixXcd C(2, 2);
  C << 1.0, cdouble(0, 1), cdouble(0, -1), 1.0;
  Program p;
  const HermitianVar X = p.add_hermitian(2);
  p.add_equal(X.trace() - 1.0);
  p.minimize(X.trace_product(C));
  const Solution s = solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK_THAT(s.objective, WithinAbs(0.0, 1e-7));
  const MatrixXcd V = s.value(X);
  CHECK_THAT(std::real((V * C).trace()), WithinAbs(0.0, 1e-6));
}

TEST_CASE("trace-inverse epigraph on fixed matrices", "[conic]") {
  CHECK_THAT(fixed_fim_epigraph(Eigen::Matrix2d::Identity()), WithinRel(2.0, 1e-6));
  Eigen::Matrix2d D;
  D << 2.0, 0.0, 0.0, 4.0;
  CHECK_THAT(fixed_fim_epigraph(D), WithinRel(0.75, 1e-6));
  std::mt19937_64 g(7);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Matrix2d B;
    B << N(g), N(g), N(g), N(g);
    const Eigen::Matrix2d F = B * B.transpose() + 0.1 * Eigen::Matrix2d::Identity();
    CHECK_THAT(fixed_fim_epigraph(F), WithinRel(F.inverse().trace(), 1e-6));
  }
}

TEST_CASE("embedding of Hermitian matrices", "[conic]") {
  CHECK(embed_hermitian(MatrixXcd::Identity(2, 2)).isApprox(MatrixXd::Identity(4, 4)));
  MatrixXcd H(2, 2);
  H << 2.0, cdouble(0, 1), cdouble(0, -1), 2.0;
  const VectorXd ev = Eigen::SelfAdjointEigenSolver<MatrixXd>(embed_hermitian(H)).eigenvalues();
  CHECK_THAT(ev(0), WithinAbs(1.0, 1e-12));
  CHECK_THAT(ev(1), WithinAbs(1.0, 1e-12));
  CHECK_THAT(ev(2), WithinAbs(3.0, 1e-12));
  CHECK_THAT(ev(3), WithinAbs(3.0, 1e-12));
  MatrixXcd bad(2, 2);
  bad << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(embed_hermitian(bad), std::invalid_argument);

  std::mt19937_64 g(11);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXcd A = random_hermitian(g, 4, trial % 2 == 0);
    VectorXcd v(4);
    for (int i = 0; i < 4; ++i) v(i) = cdouble(N(g), N(g));
    const double quad = std::real(v.dot(A * v));
    const VectorXd vt = embed_vector(v);
    const double quad_r = vt.dot(embed_hermitian(A) * vt);
    CHECK(std::abs(quad - quad_r) <= 1e-12 * A.norm() * v.squaredNorm());
    const double emin_c = Eigen::SelfAdjointEigenSolver<MatrixXcd>(A).eigenvalues()(0);
    const double emin_r = Eigen::SelfAdjointEigenSolver<MatrixXd>(embed_hermitian(A)).eigenvalues()(0);
    CHECK((emin_c >= -1e-10) == (emin_r >= -1e-10));
  }
}

TEST_CASE("Hermitian variable embedding matches the value embedding", "[conic]") {
  Program p;
  const HermitianVar X = p.add_hermitian(3, false);
  std::mt19937_64 g(3);
  const MatrixXcd A = random_hermitian(g, 3, false);
  VectorXd x(X.num_scalars());
  for (int i = 0; i < 3; ++i) x(X.diag_index(i)) = A(i, i).real();
  for (int i = 1; i < 3; ++i)
    for (int j = 0; j < i; ++j) {
      x(X.re_index(i, j)) = A(i, j).real();
      x(X.im_index(i, j)) = A(i, j).imag();
    }
  CHECK(X.value(x).isApprox(A));
  const SymmetricExpr E = X.embedding();
  const MatrixXd ref = embed_hermitian(A);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j <= i; ++j) CHECK_THAT(E(i, j).evaluate(x), WithinAbs(ref(i, j), 1e-14));
  const MatrixXcd C = random_hermitian(g, 3, false);
  CHECK_THAT(X.trace_product(C).evaluate(x), WithinAbs(std::real((A * C).trace()), 1e-12));
}

TEST_CASE("Nesterov-Todd scaling maps s and z to the same point", "[conic]") {
  const ConeLayout L(2, {3, 4}, {3});
  VectorXd s(L.total), z(L.total);
  s << 1.0, 2.0, 3.0, 0.5, 1.0, 4.0, 1.0, 2.0, 0.1, 0, 0, 0, 0, 0;
  z << 0.3, 1.5, 2.0, 1.0, -0.5, 3.0, 0.2, -1.0, 1.5, 0, 0, 0, 0, 0;
  MatrixXd S(3, 3), Z(3, 3);
  S << 2, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0;
  Z << 1, -0.4, 0.2, -0.4, 2.0, 0.3, 0.2, 0.3, 0.7;
  svec(S, s.data() + L.psd_off[0]);
  svec(Z, z.data() + L.psd_off[0]);
  NtScaling W(L);
  REQUIRE(W.update(s, z));
  const VectorXd a = W.apply(NtScaling::Op::W, z);
  const VectorXd b = W.apply(NtScaling::Op::Wtinv, s);
  CHECK((a - b).norm() < 1e-10);
  CHECK((a - W.lambda()).norm() < 1e-10);
  const VectorXd x = VectorXd::LinSpaced(L.total, -1.0, 2.0);
  CHECK((W.apply(NtScaling::Op::Winv, W.apply(NtScaling::Op::W, x)) - x).norm() < 1e-10);
  CHECK((W.apply(NtScaling::Op::Wtinv, W.apply(NtScaling::Op::Wt, x)) - x).norm() < 1e-10);
  // adjointness: <W x, y> = <x, W^T y>
  const VectorXd y = VectorXd::LinSpaced(L.total, 3.0, -1.0);
  CHECK_THAT(W.apply(NtScaling::Op::W, x).dot(y), WithinAbs(x.dot(W.apply(NtScaling::Op::Wt, y)), 1e-10));
}

TEST_CASE("infeasible and unbounded problems are reported as values", "[conic]") {
  {
    Program p;
    const int x = p.add_variable();
    p.add_nonneg(AffineExpr::var(x) - 2.0);
    p.add_le(AffineExpr::var(x), 1.0);
    p.minimize(AffineExpr::var(x));
    CHECK(solve(p).status == Status::infeasible);
  }
  {
    Program p;
    const int x = p.add_variable();
    p.add_le(AffineExpr::var(x), 1.0);
    p.minimize(AffineExpr::var(x));
    CHECK(solve(p).status == Status::unbounded);
  }
}

TEST_CASE("equilibration is transparent", "[conic]") {
  // badly scaled LP/SOCP mix
  Program p;
  const int x = p.add_variable();
  const int y = p.add_variable();
  const int t = p.add_variable();
  p.add_nonneg(1e4 * AffineExpr::var(x) - 2e4);
  p.add_nonneg(1e-3 * AffineExpr::var(y) - 1e-3);
  p.add_soc(AffineExpr::var(t), {AffineExpr::var(x), 5.0 * AffineExpr::var(y)});
  p.minimize(AffineExpr::var(t));
  Settings off;
  off.equilibrate = false;
  const Solution a = solve(p);
  const Solution b = solve(p, off);
  REQUIRE(a.status == Status::optimal);
  REQUIRE(b.status == Status::optimal);
  CHECK_THAT(a.objective, WithinRel(b.objective, 1e-6));
  CHECK_THAT(a.objective, WithinRel(std::sqrt(4.0 + 25.0), 1e-6));

  StandardForm sf = p.standard_form();
  const ScalingRecord rec = equilibrate(sf, 10);
  const VectorXd v = VectorXd::LinSpaced(3, -2.0, 5.0);
  CHECK((rec.unscale_x(rec.scale_x(v)) - v).norm() < 1e-12);
}

TEST_CASE("CBF export lists every block", "[conic]") {
  Program p;
  const HermitianVar X = p.add_hermitian(2);
  const int t = p.add_variable();
  p.add_nonneg(X.re(0, 0) - 1.0);
  p.add_soc(AffineExpr::var(t), {X.re(1, 0)});
  p.minimize(X.trace() + AffineExpr::var(t));
  std::ostringstream os;
  write_cbf(os, p.standard_form());
  const std::string text = os.str();
  CHECK(text.find("PSDCON\n1\n4") != std::string::npos);
  CHECK(text.find("L+ 1") != std::string::npos);
  CHECK(text.find("Q 2") != std::string::npos);
}
