// SPDX-License-Identifier: Apache-2.0
//
// The coupled internal-mode eigenproblem as a generalized matrix pencil
// K x = lambda B x on the stacked state (C1, S1, C2, S2, C_V, S_V, C_N, S_N).
// lambda enters linearly because the wave phase eps = lambda*sqrt(omega) always
// multiplies the whole right-hand side of the first-order wave subsystem.
// Dirichlet rows close the four Schrodinger blocks; the wave rows use one-sided
// first-derivative stencils and carry no boundary condition.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "zakspec/grid.hpp"
#include "zakspec/operators.hpp"
#include "zakspec/wave.hpp"

namespace zakspec {

/// Fixed block order of the stacked eigenvector.
enum class Block : int { C1 = 0, S1 = 1, C2 = 2, S2 = 3, CV = 4, SV = 5, CN = 6, SN = 7 };

/// Index bookkeeping for the 8-block stacked state.
struct StateLayout {
  std::size_t n = 0;  ///< nodes per block

  [[nodiscard]] std::size_t total() const { return 8 * n; }
  [[nodiscard]] std::size_t index(Block b, std::size_t i) const {
    return static_cast<std::size_t>(static_cast<int>(b)) * n + i;
  }
  template <typename Vec>
  [[nodiscard]] auto block(Vec&& x, Block b) const {
    return x.segment(static_cast<Eigen::Index>(index(b, 0)), static_cast<Eigen::Index>(n));
  }
};

/// Assembled pencil K x = lambda B x together with its grid and parameters.
struct EigenPencil {
  GridSpec grid;
  StateLayout layout;
  double omega = 0.0;
  double beta = 0.0;
  Eigen::SparseMatrix<double> K;
  Eigen::SparseMatrix<double> B;
};

/// One converged eigenpair with its quality metrics.
struct EigenResult {
  std::complex<double> lambda;
  Eigen::VectorXcd vec;       ///< normalized stacked eigenvector (8n)
  double residual = 0.0;      ///< ||K x - lambda B x||_2 / ||x||_2
  double localization = 0.0;  ///< mass fraction inside |y| <= L/2
  double boundary_amp = 0.0;  ///< max |x| over the edge nodes of every block
};

namespace detail {

inline void add_banded(std::vector<Eigen::Triplet<double>>& trips, const BandedOperator& op,
                       std::size_t row0, std::size_t col0) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(op.n);
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (int off = -2; off <= 2; ++off) {
      const std::ptrdiff_t j = i + off;
      if (j < 0 || j >= n) continue;
      const double c = op.band[static_cast<std::size_t>(off + 2)][static_cast<std::size_t>(i)];
      if (c != 0.0)
        trips.emplace_back(static_cast<int>(row0 + static_cast<std::size_t>(i)),
                           static_cast<int>(col0 + static_cast<std::size_t>(j)), c);
    }
}

}  // namespace detail

/// Assemble the pencil at one (omega, beta) point.
inline EigenPencil assemble_pencil(const GridSpec& g, const SolitonProfiles& p, double omega,
                                   double beta) {
  if (!(omega > 0.0))
    throw std::invalid_argument("assemble_pencil: omega must be positive, got " +
                                std::to_string(omega));
  if (!(std::abs(beta) < 1.0))
    throw std::invalid_argument("assemble_pencil: beta outside (-1,1), got " +
                                std::to_string(beta));
  const std::size_t n = g.size();
  EigenPencil pc;
  pc.grid = g;
  pc.layout.n = n;
  pc.omega = omega;
  pc.beta = beta;

  const double sw = std::sqrt(omega);
  const double gamma = 2.0 * beta / (1.0 + beta * beta);
  const double kappa = 2.0 * (1.0 + beta * beta) / (1.0 - beta * beta);
  const Eigen::Matrix4d A = matrix_A(beta);

  const auto Lp = assemble_operator(OperatorKind::Lplus, g, p);
  const auto Lm = assemble_operator(OperatorKind::Lminus, g, p);
  const auto D1 = assemble_operator(OperatorKind::D1, g, p);

  auto at = [&](Block b, std::size_t i) { return pc.layout.index(b, i); };
  auto is_edge = [&](std::size_t i) { return i == 0 || i + 1 == n; };

  std::vector<Eigen::Triplet<double>> kt, bt;
  kt.reserve(30 * n);
  bt.reserve(30 * n);

  // Schrodinger rows. Dirichlet edge rows keep only the identity in K and have
  // no lambda term, so the matching B rows stay empty.
  detail::add_banded(kt, Lp, at(Block::C1, 0), at(Block::C1, 0));
  detail::add_banded(kt, Lp, at(Block::S1, 0), at(Block::S1, 0));
  detail::add_banded(kt, Lm, at(Block::C2, 0), at(Block::C2, 0));
  detail::add_banded(kt, Lm, at(Block::S2, 0), at(Block::S2, 0));
  for (std::size_t i = 0; i < n; ++i) {
    if (is_edge(i)) continue;
    const double Q = p.q[i];
    // L+ C1 - Q C_N = -lambda S2
    kt.emplace_back(static_cast<int>(at(Block::C1, i)), static_cast<int>(at(Block::CN, i)), -Q);
    bt.emplace_back(static_cast<int>(at(Block::C1, i)), static_cast<int>(at(Block::S2, i)), -1.0);
    // L+ S1 - Q S_N = lambda C2
    kt.emplace_back(static_cast<int>(at(Block::S1, i)), static_cast<int>(at(Block::SN, i)), -Q);
    bt.emplace_back(static_cast<int>(at(Block::S1, i)), static_cast<int>(at(Block::C2, i)), 1.0);
    // L- C2 = lambda S1
    bt.emplace_back(static_cast<int>(at(Block::C2, i)), static_cast<int>(at(Block::S1, i)), 1.0);
    // L- S2 = -lambda C1
    bt.emplace_back(static_cast<int>(at(Block::S2, i)), static_cast<int>(at(Block::C1, i)), -1.0);
  }

  // Wave rows: X' = lambda*sqrt(omega) * (A X + kappa*(-Q S1, Q C1, -gamma Q S1, gamma Q C1)).
  const Block wave[4] = {Block::CV, Block::SV, Block::CN, Block::SN};
  for (int r = 0; r < 4; ++r) {
    detail::add_banded(kt, D1, at(wave[r], 0), at(wave[r], 0));
    for (int c = 0; c < 4; ++c) {
      if (A(r, c) == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i)
        bt.emplace_back(static_cast<int>(at(wave[r], i)), static_cast<int>(at(wave[c], i)),
                        sw * A(r, c));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double cq = sw * kappa * p.q[i];
    bt.emplace_back(static_cast<int>(at(Block::CV, i)), static_cast<int>(at(Block::S1, i)), -cq);
    bt.emplace_back(static_cast<int>(at(Block::SV, i)), static_cast<int>(at(Block::C1, i)), cq);
    bt.emplace_back(static_cast<int>(at(Block::CN, i)), static_cast<int>(at(Block::S1, i)),
                    -gamma * cq);
    bt.emplace_back(static_cast<int>(at(Block::SN, i)), static_cast<int>(at(Block::C1, i)),
                    gamma * cq);
  }

  const auto N = static_cast<Eigen::Index>(pc.layout.total());
  pc.K.resize(N, N);
  pc.B.resize(N, N);
  pc.K.setFromTriplets(kt.begin(), kt.end());
  pc.B.setFromTriplets(bt.begin(), bt.end());
  pc.K.makeCompressed();
  pc.B.makeCompressed();
  return pc;
}

/// Pencil residual ||K x - lambda B x||_2 / ||x||_2.
inline double pencil_residual(const EigenPencil& pc, std::complex<double> lambda,
                              const Eigen::VectorXcd& x) {
  const Eigen::VectorXcd r = pc.K * x - lambda * (pc.B * x);
  return r.norm() / x.norm();
}

/// Fraction of the squared mass carried by nodes with |y| <= L/2 (all blocks).
inline double localization(const EigenPencil& pc, const Eigen::VectorXcd& x) {
  const std::size_t n = pc.layout.n;
  const double half = 0.5 * pc.grid.half_width;
  double inside = 0.0, total = 0.0;
  for (std::size_t b = 0; b < 8; ++b)
    for (std::size_t i = 0; i < n; ++i) {
      const double m = std::norm(x(static_cast<Eigen::Index>(b * n + i)));
      total += m;
      if (std::abs(pc.grid.nodes[i]) <= half) inside += m;
    }
  return total > 0.0 ? inside / total : 0.0;
}

/// Max |x| over the first and last node of every block (normalized input).
inline double boundary_amplitude(const EigenPencil& pc, const Eigen::VectorXcd& x) {
  const std::size_t n = pc.layout.n;
  double m = 0.0;
  for (std::size_t b = 0; b < 8; ++b) {
    m = std::max(m, std::abs(x(static_cast<Eigen::Index>(b * n))));
    m = std::max(m, std::abs(x(static_cast<Eigen::Index>(b * n + n - 1))));
  }
  return m;
}

/// Build a fully-populated EigenResult from a normalized eigenpair.
inline EigenResult make_result(const EigenPencil& pc, std::complex<double> lambda,
                               Eigen::VectorXcd vec) {
  vec.normalize();
  EigenResult r;
  r.lambda = lambda;
  r.residual = pencil_residual(pc, lambda, vec);
  r.localization = localization(pc, vec);
  r.boundary_amp = boundary_amplitude(pc, vec);
  r.vec = std::move(vec);
  return r;
}

}  // namespace zakspec
