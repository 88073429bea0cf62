#pragma once

// Seeded random instances: PSD operators, projections, unitaries, step functions.
// Every generator draws from a caller-owned std::mt19937_64 so a fixed seed
// reproduces the whole instance stream.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "ncmax/tracial.hpp"

namespace ncmax {

using Rng = std::mt19937_64;

inline Matrix random_gaussian_matrix(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
inline Matrix random_unitary(Rng& rng, int n) {
  Matrix z = random_gaussian_matrix(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    if (a > 0.0) q.col(j) *= d / a;
  }
  return q;
}

inline TracialOperator random_hermitian(Rng& rng, const Algebra& a) {
  std::vector<Matrix> blocks;
  for (const auto& b : a.blocks()) {
    Matrix z = random_gaussian_matrix(rng, b.dim, b.dim);
    blocks.push_back((0.5 * (z + z.adjoint())).eval());
  }
  return {a, std::move(blocks)};
}

/// x = z*z blockwise, rescaled so that ||x||_inf is uniform in [1/2, 2].
inline TracialOperator random_psd(Rng& rng, const Algebra& a) {
  std::vector<Matrix> blocks;
  for (const auto& b : a.blocks()) {
    Matrix z = random_gaussian_matrix(rng, b.dim, b.dim);
    Matrix x = z.adjoint() * z;
    blocks.push_back((0.5 * (x + x.adjoint())).eval());
  }
  TracialOperator x(a, std::move(blocks));
  std::uniform_real_distribution<double> target(0.5, 2.0);
  const double t = target(rng);
  const double n = x.operator_norm();
  return n > 0.0 ? x * (t / n) : x;
}

/// U diag(eigenvalues) U* with Haar-random block unitaries; `eigenvalues`
/// lists the diagonals of all blocks in order.
inline TracialOperator random_with_spectrum(Rng& rng, const Algebra& a, const std::vector<double>& eigenvalues) {
  auto d = TracialOperator::diagonal(a, eigenvalues);
  std::vector<Matrix> blocks;
  for (std::size_t i = 0; i < a.num_blocks(); ++i) {
    Matrix u = random_unitary(rng, a.dim(i));
    Matrix m = u * d.block(i) * u.adjoint();
    blocks.push_back((0.5 * (m + m.adjoint())).eval());
  }
  return {a, std::move(blocks)};
}

/// Spectral projection of a random Hermitian onto its top-k eigenvectors,
/// k uniform in [min_rank, total_dim].
inline Projection random_projection(Rng& rng, const Algebra& a, int min_rank = 1) {
  const auto h = random_hermitian(rng, a);
  const auto s = spectral_decompose(h);
  std::uniform_int_distribution<int> kd(std::min(min_rank, a.total_dim()), a.total_dim());
  const int k = kd(rng);
  std::vector<double> all;
  for (const auto& b : s.blocks) {
    for (Eigen::Index j = 0; j < b.values.size(); ++j) all.push_back(b.values(j));
  }
  std::sort(all.begin(), all.end(), std::greater<>());
  const double cut = all[static_cast<std::size_t>(k - 1)];
  std::vector<Matrix> bases;
  for (const auto& b : s.blocks) {
    Eigen::Index r = 0;
    while (r < b.values.size() && b.values(r) >= cut) ++r;
    bases.push_back(b.vectors.leftCols(r));
  }
  return Projection::from_basis(a, std::move(bases));
}

/// Random nonincreasing step function with `pieces` pieces and zero tail.
inline StepFunction random_step_function(Rng& rng, int pieces, double max_value = 4.0, double max_length = 2.0) {
  std::uniform_real_distribution<double> val(0.0, max_value);
  std::uniform_real_distribution<double> len(0.05, max_length);
  std::vector<std::pair<double, double>> pcs;
  for (int i = 0; i < pieces; ++i) pcs.emplace_back(val(rng) + 1e-3, len(rng));
  return StepFunction::rearrange(std::move(pcs));
}

}  // namespace ncmax
