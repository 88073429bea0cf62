#pragma once

// Finite-dimensional semifinite von Neumann algebras: weighted direct sums of
// complex matrix blocks with trace tau(x) = sum_i w_i Tr(x_i). Spectral
// calculus, projections and their lattice, operator order, and decreasing
// rearrangements.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ncmax/errors.hpp"
#include "ncmax/spaces.hpp"
#include "ncmax/step_function.hpp"
#include "ncmax/tolerance.hpp"

namespace ncmax {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

struct Block {
  int dim;
  double weight;
  friend bool operator==(const Block&, const Block&) = default;
};

/// Weighted direct sum of full matrix algebras.
class Algebra {
 public:
  Algebra() = default;
  explicit Algebra(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    for (const auto& b : blocks_) {
      if (b.dim <= 0) throw ConfigError("Algebra: block dimension must be positive");
      if (!(b.weight > 0.0) || !std::isfinite(b.weight)) throw ConfigError("Algebra: block weight must be positive");
    }
  }

  static Algebra matrix(int n, double weight = 1.0) { return Algebra({{n, weight}}); }

  /// n one-dimensional blocks: the commutative algebra of functions on n atoms.
  static Algebra atoms(const std::vector<double>& weights) {
    std::vector<Block> b;
    for (double w : weights) b.push_back({1, w});
    return Algebra(std::move(b));
  }

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  int dim(std::size_t i) const { return blocks_[i].dim; }
  double weight(std::size_t i) const { return blocks_[i].weight; }
  int total_dim() const {
    int n = 0;
    for (const auto& b : blocks_) n += b.dim;
    return n;
  }
  double unit_trace() const {
    double t = 0.0;
    for (const auto& b : blocks_) t += b.weight * b.dim;
    return t;
  }
  bool commutative() const {
    return std::all_of(blocks_.begin(), blocks_.end(), [](const Block& b) { return b.dim == 1; });
  }

  friend bool operator==(const Algebra&, const Algebra&) = default;

 private:
  std::vector<Block> blocks_;
};

/// Element of an Algebra, stored block by block.
class TracialOperator {
 public:
  TracialOperator() = default;
  TracialOperator(Algebra algebra, std::vector<Matrix> blocks)
      : algebra_(std::move(algebra)), blocks_(std::move(blocks)) {
    if (blocks_.size() != algebra_.num_blocks()) throw AlgebraMismatch("operator has wrong number of blocks");
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      if (blocks_[i].rows() != algebra_.dim(i) || blocks_[i].cols() != algebra_.dim(i))
        throw AlgebraMismatch("operator block shape does not match the algebra");
    }
  }

  static TracialOperator zero(const Algebra& a) {
    std::vector<Matrix> b;
    for (const auto& blk : a.blocks()) b.push_back(Matrix::Zero(blk.dim, blk.dim));
    return {a, std::move(b)};
  }
  static TracialOperator identity(const Algebra& a) {
    std::vector<Matrix> b;
    for (const auto& blk : a.blocks()) b.push_back(Matrix::Identity(blk.dim, blk.dim));
    return {a, std::move(b)};
  }
  /// Diagonal operator; `entries` lists the diagonals of all blocks in order.
  static TracialOperator diagonal(const Algebra& a, const std::vector<double>& entries) {
    if (static_cast<int>(entries.size()) != a.total_dim()) throw AlgebraMismatch("diagonal: wrong number of entries");
    std::vector<Matrix> b;
    std::size_t pos = 0;
    for (const auto& blk : a.blocks()) {
      Matrix m = Matrix::Zero(blk.dim, blk.dim);
      for (int j = 0; j < blk.dim; ++j) m(j, j) = entries[pos++];
      b.push_back(std::move(m));
    }
    return {a, std::move(b)};
  }

  const Algebra& algebra() const { return algebra_; }
  const std::vector<Matrix>& blocks() const { return blocks_; }
  const Matrix& block(std::size_t i) const { return blocks_[i]; }
  Matrix& block(std::size_t i) { return blocks_[i]; }

  TracialOperator adjoint() const {
    auto out = *this;
    for (auto& m : out.blocks_) m = m.adjoint().eval();
    return out;
  }

  /// (x + x*) / 2.
  TracialOperator hermitian_part() const {
    auto out = *this;
    for (auto& m : out.blocks_) m = (0.5 * (m + m.adjoint())).eval();
    return out;
  }

  /// tau(x) = sum_i w_i Tr(x_i).
  Complex trace_complex() const {
    Complex t = 0.0;
    for (std::size_t i = 0; i < blocks_.size(); ++i) t += algebra_.weight(i) * blocks_[i].trace();
    return t;
  }
  double trace() const { return trace_complex().real(); }

  double max_abs_entry() const {
    double m = 0.0;
    for (const auto& b : blocks_) {
      if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
    }
    return m;
  }

  /// Operator norm ||x||_inf.
  double operator_norm() const {
    double m = 0.0;
    for (const auto& b : blocks_) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(b.adjoint() * b, Eigen::EigenvaluesOnly);
      m = std::max(m, std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())));
    }
    return m;
  }

  bool is_hermitian(double tol = 1e-12) const {
    const double scale = std::max(1.0, max_abs_entry());
    for (const auto& b : blocks_) {
      if ((b - b.adjoint()).cwiseAbs().maxCoeff() > tol * scale) return false;
    }
    return true;
  }

  /// Byte-exact equality.
  friend bool operator==(const TracialOperator& x, const TracialOperator& y) {
    if (!(x.algebra_ == y.algebra_)) return false;
    for (std::size_t i = 0; i < x.blocks_.size(); ++i) {
      if (!(x.blocks_[i].array() == y.blocks_[i].array()).all()) return false;
    }
    return true;
  }

  TracialOperator& operator+=(const TracialOperator& y) {
    require_same(y);
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += y.blocks_[i];
    return *this;
  }
  TracialOperator& operator-=(const TracialOperator& y) {
    require_same(y);
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= y.blocks_[i];
    return *this;
  }
  TracialOperator& operator*=(double c) {
    for (auto& b : blocks_) b *= c;
    return *this;
  }
  friend TracialOperator operator+(TracialOperator x, const TracialOperator& y) { return x += y; }
  friend TracialOperator operator-(TracialOperator x, const TracialOperator& y) { return x -= y; }
  friend TracialOperator operator*(TracialOperator x, double c) { return x *= c; }
  friend TracialOperator operator*(double c, TracialOperator x) { return x *= c; }
  friend TracialOperator operator*(const TracialOperator& x, const TracialOperator& y) {
    x.require_same(y);
    auto out = x;
    for (std::size_t i = 0; i < out.blocks_.size(); ++i) out.blocks_[i] = x.blocks_[i] * y.blocks_[i];
    return out;
  }

  void require_same(const TracialOperator& y) const {
    if (!(algebra_ == y.algebra_)) throw AlgebraMismatch("operators belong to different algebras");
  }

 private:
  Algebra algebra_;
  std::vector<Matrix> blocks_;
};

/// Eigen-decomposition of one Hermitian block; eigenvalues descending.
struct BlockSpectrum {
  Eigen::VectorXd values;
  Matrix vectors;
};

struct Spectrum {
  Algebra algebra;
  std::vector<BlockSpectrum> blocks;

  double min_eigenvalue() const {
    double m = kInf;
    for (const auto& b : blocks) {
      if (b.values.size() > 0) m = std::min(m, b.values.minCoeff());
    }
    return m;
  }
  double max_eigenvalue() const {
    double m = -kInf;
    for (const auto& b : blocks) {
      if (b.values.size() > 0) m = std::max(m, b.values.maxCoeff());
    }
    return m;
  }

  /// V f(Lambda) V* blockwise.
  TracialOperator apply(const std::function<double(double)>& fn) const {
    std::vector<Matrix> out;
    for (const auto& b : blocks) {
      Eigen::VectorXd f = b.values.unaryExpr(fn);
      Matrix m = b.vectors * f.cast<Complex>().asDiagonal() * b.vectors.adjoint();
      out.push_back((0.5 * (m + m.adjoint())).eval());
    }
    return {algebra, std::move(out)};
  }

  /// Maximal reconstruction error ||x - V Lambda V*||_max.
  double reconstruction_error(const TracialOperator& x) const {
    const auto r = apply([](double v) { return v; });
    double e = 0.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (x.block(i).size() > 0) e = std::max(e, (x.block(i) - r.block(i)).cwiseAbs().maxCoeff());
    }
    return e;
  }
};

/// Blockwise Hermitian eigendecomposition (deterministic for fixed input).
inline Spectrum spectral_decompose(const TracialOperator& x) {
  if (!x.is_hermitian()) throw InputError("spectral_decompose: operator is not Hermitian");
  Spectrum s{x.algebra(), {}};
  for (const auto& b : x.blocks()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    if (es.info() != Eigen::Success) throw InputError("spectral_decompose: eigensolver failed");
    const Eigen::Index n = b.rows();
    BlockSpectrum bs{Eigen::VectorXd(n), Matrix(n, n)};
    for (Eigen::Index j = 0; j < n; ++j) {
      bs.values(j) = es.eigenvalues()(n - 1 - j);
      bs.vectors.col(j) = es.eigenvectors().col(n - 1 - j);
    }
    s.blocks.push_back(std::move(bs));
  }
  return s;
}

/// Orthogonal projection, stored with an orthonormal basis of its range per block.
class Projection {
 public:
  Projection() = default;

  /// From orthonormal column bases (dim x rank per block); P = V V*.
  static Projection from_basis(const Algebra& a, std::vector<Matrix> bases) {
    if (bases.size() != a.num_blocks()) throw AlgebraMismatch("projection basis has wrong number of blocks");
    std::vector<Matrix> ops;
    for (std::size_t i = 0; i < bases.size(); ++i) {
      if (bases[i].rows() != a.dim(static_cast<std::size_t>(i))) throw AlgebraMismatch("projection basis shape mismatch");
      Matrix m = bases[i] * bases[i].adjoint();
      ops.push_back((0.5 * (m + m.adjoint())).eval());
    }
    Projection p;
    p.op_ = TracialOperator(a, std::move(ops));
    p.bases_ = std::move(bases);
    return p;
  }

  /// Validates that e is Hermitian with eigenvalues within 1e-10 of {0, 1}.
  static Projection from_operator(const TracialOperator& e) {
    if (!e.is_hermitian(1e-10)) throw InputError("projection must be Hermitian");
    const auto spec = spectral_decompose(e.hermitian_part());
    std::vector<Matrix> bases;
    for (const auto& b : spec.blocks) {
      int rank = 0;
      for (Eigen::Index j = 0; j < b.values.size(); ++j) {
        const double v = b.values(j);
        if (std::abs(v) > 1e-10 && std::abs(v - 1.0) > 1e-10)
          throw InputError("projection eigenvalues must lie in {0, 1}");
        if (v > 0.5) ++rank;
      }
      bases.push_back(b.vectors.leftCols(rank));
    }
    return from_basis(e.algebra(), std::move(bases));
  }

  static Projection zero(const Algebra& a) {
    std::vector<Matrix> b;
    for (const auto& blk : a.blocks()) b.push_back(Matrix(blk.dim, 0));
    return from_basis(a, std::move(b));
  }
  static Projection identity(const Algebra& a) {
    std::vector<Matrix> b;
    for (const auto& blk : a.blocks()) b.push_back(Matrix::Identity(blk.dim, blk.dim));
    return from_basis(a, std::move(b));
  }

  const TracialOperator& op() const { return op_; }
  const Algebra& algebra() const { return op_.algebra(); }
  const Matrix& basis(std::size_t i) const { return bases_[i]; }
  int rank(std::size_t i) const { return static_cast<int>(bases_[i].cols()); }
  int total_rank() const {
    int r = 0;
    for (const auto& b : bases_) r += static_cast<int>(b.cols());
    return r;
  }

  /// tau(e) = sum_i w_i rank_i.
  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < bases_.size(); ++i) t += algebra().weight(i) * static_cast<double>(bases_[i].cols());
    return t;
  }
  bool is_zero() const { return total_rank() == 0; }
  bool is_identity() const { return total_rank() == algebra().total_dim(); }

  /// e^perp = 1 - e.
  Projection complement() const {
    std::vector<Matrix> out;
    for (std::size_t i = 0; i < bases_.size(); ++i) {
      const int n = algebra().dim(i);
      const int r = rank(i);
      if (r == 0) {
        out.push_back(Matrix::Identity(n, n));
        continue;
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(op_.block(i));
      // ascending eigenvalues: the first n - r span the kernel
      out.push_back(es.eigenvectors().leftCols(n - r));
    }
    return from_basis(algebra(), std::move(out));
  }

 private:
  TracialOperator op_;
  std::vector<Matrix> bases_;
};

/// Rank tolerance of the projection lattice operations.
inline constexpr double kLatticeRankTol = 1e-9;

/// Projection onto range(e) ∩ range(f): kernel of B*(1 - f)B inside range(e) = span B.
inline Projection lattice_meet(const Projection& e, const Projection& f) {
  if (!(e.algebra() == f.algebra())) throw AlgebraMismatch("lattice_meet: projections in different algebras");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < e.algebra().num_blocks(); ++i) {
    const Matrix& b = e.basis(i);
    if (b.cols() == 0 || f.rank(i) == 0) {
      out.push_back(Matrix(e.algebra().dim(i), 0));
      continue;
    }
    if (f.rank(i) == e.algebra().dim(i)) {
      out.push_back(b);
      continue;
    }
    Matrix fb = f.basis(i).adjoint() * b;
    Matrix m = Matrix::Identity(b.cols(), b.cols()) - fb.adjoint() * fb;
    Eigen::SelfAdjointEigenSolver<Matrix> es((0.5 * (m + m.adjoint())).eval());
    Eigen::Index k = 0;
    while (k < es.eigenvalues().size() && es.eigenvalues()(k) <= kLatticeRankTol) ++k;
    Matrix basis = b * es.eigenvectors().leftCols(k);
    // re-orthonormalize against rounding
    if (k > 0) {
      Eigen::HouseholderQR<Matrix> qr(basis);
      basis = qr.householderQ() * Matrix::Identity(basis.rows(), k);
    }
    out.push_back(std::move(basis));
  }
  return Projection::from_basis(e.algebra(), std::move(out));
}

/// Projection onto range(e) + range(f) (range of e + f).
inline Projection lattice_join(const Projection& e, const Projection& f) {
  if (!(e.algebra() == f.algebra())) throw AlgebraMismatch("lattice_join: projections in different algebras");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < e.algebra().num_blocks(); ++i) {
    Matrix s = e.op().block(i) + f.op().block(i);
    Eigen::SelfAdjointEigenSolver<Matrix> es((0.5 * (s + s.adjoint())).eval());
    const Eigen::Index n = s.rows();
    Eigen::Index k = 0;
    while (k < n && es.eigenvalues()(n - 1 - k) > kLatticeRankTol) ++k;
    out.push_back(es.eigenvectors().rightCols(k));
  }
  return Projection::from_basis(e.algebra(), std::move(out));
}

/// Meet of a finite family (identity for the empty family).
inline Projection lattice_meet_all(const Algebra& a, const std::vector<Projection>& family) {
  Projection acc = Projection::identity(a);
  for (const auto& e : family) {
    acc = lattice_meet(acc, e);
    if (acc.is_zero()) break;
  }
  return acc;
}

/// Spectral projection onto eigenvalues in (lo, hi]. Eigenvalues within
/// kClusterTol * |cut| of a cut are snapped onto it first.
inline Projection spectral_projection(const Spectrum& s, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("spectral_projection: empty interval");
  auto snap = [](double v, double cut) {
    return std::isfinite(cut) && std::abs(v - cut) <= kClusterTol * std::abs(cut) ? cut : v;
  };
  std::vector<Matrix> out;
  for (const auto& b : s.blocks) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < b.values.size(); ++j) {
      const double v = snap(snap(b.values(j), lo), hi);
      if (v > lo && v <= hi) cols.push_back(j);
    }
    Matrix basis(b.vectors.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) basis.col(static_cast<Eigen::Index>(c)) = b.vectors.col(cols[c]);
    out.push_back(std::move(basis));
  }
  return Projection::from_basis(s.algebra, std::move(out));
}

inline Projection spectral_projection(const TracialOperator& x, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("spectral_projection: empty interval");
  return spectral_projection(spectral_decompose(x), lo, hi);
}

/// chi_[0, theta](x) for PSD x (eigenvalues at or below theta).
inline Projection spectral_sublevel(const TracialOperator& x, double theta) {
  return spectral_projection(x, -kInf, theta);
}

/// Tolerances for turning numerical singular values into a step function.
struct MuOptions {
  double merge_tol = 1e-12;  // relative to the largest singular value
  double zero_tol = 1e-13;
};

/// Decreasing rearrangement mu(x): singular values laid out with block-weight lengths.
inline StepFunction mu(const TracialOperator& x, const MuOptions& opt = {}) {
  std::vector<std::pair<double, double>> pieces;
  const bool herm = x.is_hermitian();
  for (std::size_t i = 0; i < x.blocks().size(); ++i) {
    const auto& b = x.block(i);
    Eigen::VectorXd sv;
    if (herm) {
      Eigen::SelfAdjointEigenSolver<Matrix> es((0.5 * (b + b.adjoint())).eval(), Eigen::EigenvaluesOnly);
      sv = es.eigenvalues().cwiseAbs();
    } else {
      Eigen::JacobiSVD<Matrix> svd(b);
      sv = svd.singularValues();
    }
    for (Eigen::Index j = 0; j < sv.size(); ++j) pieces.emplace_back(sv(j), x.algebra().weight(i));
  }
  return StepFunction::rearrange(std::move(pieces), opt.merge_tol, opt.zero_tol);
}

inline double order_margin(const TracialOperator& x, const TracialOperator& y) {
  x.require_same(y);
  return spectral_decompose((y - x).hermitian_part()).min_eigenvalue();
}

/// x <= y: min eigenvalue of y - x >= -(tol.abs + tol.rel * ||y||).
inline bool order_leq(const TracialOperator& x, const TracialOperator& y, const Tolerance& tol = kDefaultTolerance) {
  x.require_same(y);
  if (!x.is_hermitian(1e-10) || !y.is_hermitian(1e-10)) throw InputError("order_leq: operands must be Hermitian");
  return order_margin(x, y) >= -(tol.abs + tol.rel * y.operator_norm());
}

/// tau(Phi(x)) = sum of w * Phi(lambda) over eigenvalues of PSD x.
inline double phi_trace(const TracialOperator& x, const OrliczFunction& phi, double neg_tol = 1e-10) {
  const auto s = spectral_decompose(x);
  const double scale = std::max(1.0, std::abs(s.max_eigenvalue()));
  double acc = 0.0;
  for (std::size_t i = 0; i < s.blocks.size(); ++i) {
    for (Eigen::Index j = 0; j < s.blocks[i].values.size(); ++j) {
      const double v = s.blocks[i].values(j);
      if (v < -neg_tol * scale) throw InputError("phi_trace: operator is not positive semidefinite");
      acc += s.algebra.weight(i) * phi(std::max(v, 0.0));
    }
  }
  return acc;
}

}  // namespace ncmax
