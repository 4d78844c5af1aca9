#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "isac/core.hpp"

namespace isac::conic {

// constant + sum coef * x[var]
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(double c) : constant_(c) {}  // NOLINT(google-explicit-constructor)

  static AffineExpr var(int index, double coef = 1.0) {
    AffineExpr e;
    e.terms_.emplace_back(index, coef);
    return e;
  }

  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }

  AffineExpr& operator+=(const AffineExpr& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    constant_ += o.constant_;
    return *this;
  }
  AffineExpr& operator-=(const AffineExpr& o) { return *this += (-1.0) * o; }
  AffineExpr& operator*=(double a) {
    for (auto& t : terms_) t.second *= a;
    constant_ *= a;
    return *this;
  }
  // Adds coef * x[var] in place (avoids temporaries in hot loops).
  void add_term(int index, double coef) {
    if (coef != 0.0) terms_.emplace_back(index, coef);
  }

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
  friend AffineExpr operator*(AffineExpr a, double s) { return a *= s; }
  friend AffineExpr operator-(AffineExpr a) { return a *= -1.0; }

  double evaluate(const VectorXd& x) const {
    double v = constant_;
    for (const auto& [i, c] : terms_) v += c * x(i);
    return v;
  }

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

// Symmetric n x n matrix of affine expressions (lower triangle stored).
class SymmetricExpr {
 public:
  explicit SymmetricExpr(int n) : n_(n), lower_(static_cast<std::size_t>(n) * (n + 1) / 2) {}
  int size() const { return n_; }
  AffineExpr& operator()(int i, int j) { return lower_[index(i, j)]; }
  const AffineExpr& operator()(int i, int j) const { return lower_[index(i, j)]; }

 private:
  std::size_t index(int i, int j) const {
    if (i < j) std::swap(i, j);
    // column-major lower triangle
    return static_cast<std::size_t>(j) * n_ - static_cast<std::size_t>(j) * (j - 1) / 2 + (i - j);
  }
  int n_;
  std::vector<AffineExpr> lower_;
};

// Complex Hermitian n x n variable stored as n^2 reals: the diagonal, then
// (re, im) for each strictly-lower entry (i > j) in row order.
class HermitianVar {
 public:
  HermitianVar() = default;
  HermitianVar(int n, int offset) : n_(n), offset_(offset) {}
  int size() const { return n_; }
  int offset() const { return offset_; }
  int num_scalars() const { return n_ * n_; }

  int diag_index(int i) const { return offset_ + i; }
  int re_index(int i, int j) const { return offset_ + n_ + 2 * pair(i, j); }
  int im_index(int i, int j) const { return re_index(i, j) + 1; }

  // Re F_ij and Im F_ij as affine expressions.
  AffineExpr re(int i, int j) const {
    if (i == j) return AffineExpr::var(diag_index(i));
    return AffineExpr::var(i > j ? re_index(i, j) : re_index(j, i));
  }
  AffineExpr im(int i, int j) const {
    if (i == j) return AffineExpr(0.0);
    return i > j ? AffineExpr::var(im_index(i, j)) : AffineExpr::var(im_index(j, i), -1.0);
  }

  // Re tr(F C) for Hermitian C.
  AffineExpr trace_product(const MatrixXcd& C) const {
    AffineExpr e;
    for (int i = 0; i < n_; ++i) e.add_term(diag_index(i), C(i, i).real());
    for (int i = 1; i < n_; ++i)
      for (int j = 0; j < i; ++j) {
        // F_ij C_ji + F_ji C_ij = 2 Re(F_ij C_ji)
        const cdouble c = C(j, i);
        e.add_term(re_index(i, j), 2.0 * c.real());
        e.add_term(im_index(i, j), -2.0 * c.imag());
      }
    return e;
  }

  AffineExpr trace() const {
    AffineExpr e;
    for (int i = 0; i < n_; ++i) e.add_term(diag_index(i), 1.0);
    return e;
  }

  // [[Re F, -Im F], [Im F, Re F]]
  SymmetricExpr embedding() const {
    SymmetricExpr E(2 * n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j <= i; ++j) {
        E(i, j) = re(i, j);
        E(i + n_, j + n_) = re(i, j);
        E(i + n_, j) = im(i, j);
        if (i != j) E(j + n_, i) = im(j, i);
      }
    return E;
  }

  MatrixXcd value(const VectorXd& x) const {
    MatrixXcd F(n_, n_);
    for (int i = 0; i < n_; ++i) F(i, i) = x(diag_index(i));
    for (int i = 1; i < n_; ++i)
      for (int j = 0; j < i; ++j) {
        F(i, j) = cdouble(x(re_index(i, j)), x(im_index(i, j)));
        F(j, i) = std::conj(F(i, j));
      }
    return F;
  }

 private:
  int pair(int i, int j) const { return i * (i - 1) / 2 + j; }
  int n_ = 0;
  int offset_ = 0;
};

// [[Re H, -Im H], [Im H, Re H]] of a Hermitian matrix.
inline MatrixXd embed_hermitian(const MatrixXcd& H, double tol = 1e-9) {
  if (H.rows() != H.cols()) throw DimensionError("embed_hermitian: matrix must be square");
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > tol * scale)
    throw std::invalid_argument("embed_hermitian: matrix is not Hermitian");
  const MatrixXcd S = 0.5 * (H + H.adjoint());
  const Eigen::Index n = S.rows();
  MatrixXd E(2 * n, 2 * n);
  E.topLeftCorner(n, n) = S.real();
  E.topRightCorner(n, n) = -S.imag();
  E.bottomLeftCorner(n, n) = S.imag();
  E.bottomRightCorner(n, n) = S.real();
  return E;
}

inline VectorXd embed_vector(const VectorXcd& v) {
  VectorXd out(2 * v.size());
  out << v.real(), v.imag();
  return out;
}

enum class ConeKind { nonneg, soc, psd };

// min c'x + c0  s.t.  G x + s = h, s in K;  A x = b.
// Row order: nonnegative rows, then SOC blocks, then PSD blocks in svec form
// (lower triangle, column-major, off-diagonals scaled by sqrt 2).
struct StandardForm {
  VectorXd c;
  double objective_constant = 0.0;
  Eigen::SparseMatrix<double> G;
  VectorXd h;
  Eigen::SparseMatrix<double> A;
  VectorXd b;
  int num_nonneg = 0;
  std::vector<int> soc_dims;
  std::vector<int> psd_orders;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_cone_rows() const { return static_cast<int>(h.size()); }
  int num_eq() const { return static_cast<int>(b.size()); }
};

inline int svec_size(int n) { return n * (n + 1) / 2; }

class Program {
 public:
  int add_variable() { return num_vars_++; }

  std::vector<int> add_variables(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = num_vars_++;
    return v;
  }

  // Hermitian n x n variable, constrained PSD unless psd = false.
  HermitianVar add_hermitian(int n, bool psd = true) {
    HermitianVar H(n, num_vars_);
    num_vars_ += n * n;
    if (psd) add_psd(H.embedding());
    return H;
  }

  void add_nonneg(const AffineExpr& e) { nonneg_.push_back(e); }
  void add_le(const AffineExpr& lhs, const AffineExpr& rhs) { nonneg_.push_back(rhs - lhs); }
  void add_equal(const AffineExpr& e) { equal_.push_back(e); }

  // ||xs|| <= t
  void add_soc(const AffineExpr& t, const std::vector<AffineExpr>& xs) {
    std::vector<AffineExpr> block;
    block.reserve(xs.size() + 1);
    block.push_back(t);
    block.insert(block.end(), xs.begin(), xs.end());
    soc_.push_back(std::move(block));
  }

  // ||xs||^2 <= u v with u, v >= 0, as ||(u - v, 2 xs)|| <= u + v.
  void add_rotated_soc(const AffineExpr& u, const AffineExpr& v, const std::vector<AffineExpr>& xs) {
    std::vector<AffineExpr> rest;
    rest.reserve(xs.size() + 1);
    rest.push_back(u - v);
    for (const AffineExpr& x : xs) rest.push_back(2.0 * x);
    add_soc(u + v, rest);
  }

  void add_psd(const SymmetricExpr& M) { psd_.push_back(M); }

  void minimize(const AffineExpr& objective) { objective_ = objective; }
  void maximize(const AffineExpr& objective) { objective_ = -objective; }
  const AffineExpr& objective() const { return objective_; }

  int num_vars() const { return num_vars_; }

  StandardForm standard_form() const {
    StandardForm sf;
    const int n = num_vars_;
    sf.c = VectorXd::Zero(n);
    for (const auto& [i, a] : objective_.terms()) sf.c(i) += a;
    sf.objective_constant = objective_.constant();

    std::vector<Eigen::Triplet<double>> gt;
    std::vector<double> h;
    int row = 0;
    // expr >= 0 in cone  <=>  s = expr = h - G x  with h = const, G = -coef
    auto push_row = [&](const AffineExpr& e, double scale) {
      for (const auto& [i, a] : e.terms()) gt.emplace_back(row, i, -scale * a);
      h.push_back(scale * e.constant());
      ++row;
    };
    for (const AffineExpr& e : nonneg_) push_row(e, 1.0);
    sf.num_nonneg = static_cast<int>(nonneg_.size());
    for (const auto& block : soc_) {
      for (const AffineExpr& e : block) push_row(e, 1.0);
      sf.soc_dims.push_back(static_cast<int>(block.size()));
    }
    const double r2 = std::sqrt(2.0);
    for (const SymmetricExpr& M : psd_) {
      const int m = M.size();
      for (int j = 0; j < m; ++j)
        for (int i = j; i < m; ++i) push_row(M(i, j), i == j ? 1.0 : r2);
      sf.psd_orders.push_back(m);
    }
    sf.G.resize(row, n);
    sf.G.setFromTriplets(gt.begin(), gt.end());  // duplicates are summed
    sf.G.prune(0.0);
    sf.h = Eigen::Map<VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));

    std::vector<Eigen::Triplet<double>> at;
    sf.b.resize(static_cast<Eigen::Index>(equal_.size()));
    for (std::size_t r = 0; r < equal_.size(); ++r) {
      for (const auto& [i, a] : equal_[r].terms()) at.emplace_back(static_cast<int>(r), i, a);
      sf.b(static_cast<Eigen::Index>(r)) = -equal_[r].constant();
    }
    sf.A.resize(static_cast<Eigen::Index>(equal_.size()), n);
    sf.A.setFromTriplets(at.begin(), at.end());
    sf.A.prune(0.0);
    return sf;
  }

 private:
  int num_vars_ = 0;
  AffineExpr objective_;
  std::vector<AffineExpr> nonneg_;
  std::vector<AffineExpr> equal_;
  std::vector<std::vector<AffineExpr>> soc_;
  std::vector<SymmetricExpr> psd_;
};

// Adds U (2x2 symmetric) with [[U, I], [I, fim]] >= 0 and returns tr(U).
// fim holds the (0,0), (1,0), (1,1) entries.
inline AffineExpr trace_inverse_epigraph(Program& p, const std::array<AffineExpr, 3>& fim) {
  const std::vector<int> u = p.add_variables(3);
  SymmetricExpr M(4);
  M(0, 0) = AffineExpr::var(u[0]);
  M(1, 0) = AffineExpr::var(u[1]);
  M(1, 1) = AffineExpr::var(u[2]);
  M(2, 0) = AffineExpr(1.0);
  M(3, 1) = AffineExpr(1.0);
  M(2, 2) = fim[0];
  M(3, 2) = fim[1];
  M(3, 3) = fim[2];
  p.add_psd(M);
  return AffineExpr::var(u[0]) + AffineExpr::var(u[2]);
}

}  // namespace isac::conic
