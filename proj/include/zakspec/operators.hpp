// SPDX-License-Identifier: Apache-2.0
//
// Banded finite-difference operators around the solitary wave: the two
// Schrodinger operators L+ = -d2 + 1 - 3Q^2 and L- = -d2 + 1 - Q^2, the free
// operator M = -d2 + 1 and its square, the first-order factors S = d - Q'/Q
// and S* = -d - Q'/Q, and plain derivative stencils. Second-order central
// differences everywhere; Dirichlet (identity) rows close second-order kinds,
// one-sided second-order stencils close first-order kinds.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "zakspec/grid.hpp"

namespace zakspec {

enum class OperatorKind { Lplus, Lminus, M, M2, S, Sstar, D1, D2 };

inline const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::Lplus: return "Lplus";
    case OperatorKind::Lminus: return "Lminus";
    case OperatorKind::M: return "M";
    case OperatorKind::M2: return "M2";
    case OperatorKind::S: return "S";
    case OperatorKind::Sstar: return "Sstar";
    case OperatorKind::D1: return "D1";
    case OperatorKind::D2: return "D2";
  }
  return "?";
}

/// Banded operator stored as five diagonals (offsets -2..+2).
/// band[off + 2][i] multiplies f[i + off]; out-of-range offsets are zero.
/// boundary_rows counts the rows at each end whose stencil differs from the
/// interior one (Dirichlet identity rows, one-sided rows, truncated rows);
/// residual checks should stay clear of them.
struct BandedOperator {
  OperatorKind kind{};
  std::size_t n = 0;
  double spacing = 0.0;
  int reach = 0;          ///< interior stencil half-width (1 or 2)
  int boundary_rows = 0;  ///< modified rows at each end
  std::array<std::vector<double>, 5> band;

  [[nodiscard]] double& at(std::size_t row, int off) { return band[static_cast<std::size_t>(off + 2)][row]; }
  [[nodiscard]] double at(std::size_t row, int off) const { return band[static_cast<std::size_t>(off + 2)][row]; }
};

/// Assemble one of the pinned operator kinds on a grid.
inline BandedOperator assemble_operator(OperatorKind kind, const GridSpec& g,
                                        const SolitonProfiles& p) {
  const std::size_t n = g.size();
  const double h = g.spacing;
  const double h2 = h * h;
  BandedOperator op;
  op.kind = kind;
  op.n = n;
  op.spacing = h;
  for (auto& b : op.band) b.assign(n, 0.0);

  auto dirichlet_row = [&](std::size_t i) { op.at(i, 0) = 1.0; };

  switch (kind) {
    case OperatorKind::Lplus:
    case OperatorKind::Lminus:
    case OperatorKind::M: {
      op.reach = 1;
      op.boundary_rows = 1;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        double v = 0.0;
        if (kind == OperatorKind::Lplus) v = 3.0 * p.q[i] * p.q[i];
        if (kind == OperatorKind::Lminus) v = p.q[i] * p.q[i];
        op.at(i, -1) = -1.0 / h2;
        op.at(i, +1) = -1.0 / h2;
        op.at(i, 0) = 2.0 / h2 + 1.0 - v;
      }
      dirichlet_row(0);
      dirichlet_row(n - 1);
      break;
    }
    case OperatorKind::M2: {
      // (d2 - 1)^2 = d4 - 2 d2 + 1 as an explicit five-band stencil; the two
      // rows next to each end keep the stencil with outside neighbors dropped
      // (zero extension, consistent with the Dirichlet closure).
      op.reach = 2;
      op.boundary_rows = 2;
      const double h4 = h2 * h2;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        if (i >= 2 && i + 2 < n) {
          op.at(i, -2) = 1.0 / h4;
          op.at(i, +2) = 1.0 / h4;
        }
        op.at(i, -1) = -4.0 / h4 - 2.0 / h2;
        op.at(i, +1) = -4.0 / h4 - 2.0 / h2;
        op.at(i, 0) = 6.0 / h4 + 4.0 / h2 + 1.0;
      }
      dirichlet_row(0);
      dirichlet_row(n - 1);
      break;
    }
    case OperatorKind::S:
    case OperatorKind::Sstar:
    case OperatorKind::D1: {
      op.reach = 1;
      op.boundary_rows = 1;
      const double sgn = (kind == OperatorKind::Sstar) ? -1.0 : 1.0;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        op.at(i, -1) = -sgn * 0.5 / h;
        op.at(i, +1) = sgn * 0.5 / h;
      }
      // One-sided second-order rows.
      op.at(0, 0) = -sgn * 1.5 / h;
      op.at(0, +1) = sgn * 2.0 / h;
      op.at(0, +2) = -sgn * 0.5 / h;
      op.at(n - 1, 0) = sgn * 1.5 / h;
      op.at(n - 1, -1) = -sgn * 2.0 / h;
      op.at(n - 1, -2) = sgn * 0.5 / h;
      if (kind != OperatorKind::D1) {
        // S and S* carry the same multiplier -Q'/Q = tanh(y).
        for (std::size_t i = 0; i < n; ++i) op.at(i, 0) += -p.q_prime[i] / p.q[i];
      }
      break;
    }
    case OperatorKind::D2: {
      op.reach = 1;
      op.boundary_rows = 1;
      for (std::size_t i = 1; i + 1 < n; ++i) {
        op.at(i, -1) = 1.0 / h2;
        op.at(i, +1) = 1.0 / h2;
        op.at(i, 0) = -2.0 / h2;
      }
      dirichlet_row(0);
      dirichlet_row(n - 1);
      break;
    }
  }
  return op;
}

/// Apply a banded operator to a sampled function.
inline std::vector<double> apply(const BandedOperator& op, const std::vector<double>& f) {
  if (f.size() != op.n)
    throw std::invalid_argument("apply: size mismatch, operator has " + std::to_string(op.n) +
                                " rows, input has " + std::to_string(f.size()));
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(op.n);
  std::vector<double> out(op.n, 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int off = -2; off <= 2; ++off) {
      const std::ptrdiff_t j = i + off;
      if (j < 0 || j >= n) continue;
      const double c = op.band[static_cast<std::size_t>(off + 2)][static_cast<std::size_t>(i)];
      if (c != 0.0) s += c * f[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

/// Max |v[i]| over rows at least `margin` away from both ends.
inline double interior_max_abs(const std::vector<double>& v, std::size_t margin) {
  double m = 0.0;
  for (std::size_t i = margin; i + margin < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

/// Residual of the factorization S^2 L+ L- = M^2 S^2 applied to a probe f,
/// measured away from the boundary closure (margin 8 rows each end).
inline double check_factorization(const GridSpec& g, const SolitonProfiles& p,
                                  const std::vector<double>& f) {
  const auto S = assemble_operator(OperatorKind::S, g, p);
  const auto Lp = assemble_operator(OperatorKind::Lplus, g, p);
  const auto Lm = assemble_operator(OperatorKind::Lminus, g, p);
  const auto M2 = assemble_operator(OperatorKind::M2, g, p);
  const auto lhs = zakspec::apply(S, zakspec::apply(S, zakspec::apply(Lp, zakspec::apply(Lm, f))));
  const auto rhs = zakspec::apply(M2, zakspec::apply(S, zakspec::apply(S, f)));
  double r = 0.0;
  for (std::size_t i = 8; i + 8 < f.size(); ++i) r = std::max(r, std::abs(lhs[i] - rhs[i]));
  return r;
}

struct IdentityRecord {
  std::string name;
  double residual = 0.0;
};

/// Interior residuals of the pinned operator identities. Each entry is an
/// exact continuum identity, so the reported value is pure discretization
/// error and must shrink at second order under grid refinement.
inline std::vector<IdentityRecord> operator_identity_suite(const GridSpec& g,
                                                           const SolitonProfiles& p) {
  const std::size_t n = g.size();
  const auto Lp = assemble_operator(OperatorKind::Lplus, g, p);
  const auto Lm = assemble_operator(OperatorKind::Lminus, g, p);
  const auto S = assemble_operator(OperatorKind::S, g, p);
  const auto Ss = assemble_operator(OperatorKind::Sstar, g, p);

  std::vector<IdentityRecord> out;
  auto push = [&](std::string name, const std::vector<double>& v, std::size_t margin) {
    out.push_back({std::move(name), interior_max_abs(v, margin)});
  };

  // L+ (Lambda Q) = -Q
  {
    auto v = zakspec::apply(Lp, p.lambda_q);
    for (std::size_t i = 0; i < n; ++i) v[i] += p.q[i];
    push("lplus_lambda_q", v, 1);
  }
  // L- Q = 0
  push("lminus_q", zakspec::apply(Lm, p.q), 1);
  // L+ Q' = 0
  push("lplus_qprime", zakspec::apply(Lp, p.q_prime), 1);
  // L- (y Q) = -2 Q'
  {
    auto v = zakspec::apply(Lm, p.y_q);
    for (std::size_t i = 0; i < n; ++i) v[i] += 2.0 * p.q_prime[i];
    push("lminus_yq", v, 1);
  }
  // L- = S* S on a smooth decaying probe
  {
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = g.nodes[i];
      f[i] = std::exp(-0.5 * y * y) * (1.0 + 0.3 * y);
    }
    auto lhs = zakspec::apply(Lm, f);
    auto rhs = zakspec::apply(Ss, zakspec::apply(S, f));
    for (std::size_t i = 0; i < n; ++i) lhs[i] -= rhs[i];
    push("lminus_sstar_s", lhs, 3);
  }
  // S^2 (Q gfun) = Q gfun'' with gfun = exp(-y^2/2), gfun'' analytic
  {
    std::vector<double> qg(n), target(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = g.nodes[i];
      const double gf = std::exp(-0.5 * y * y);
      qg[i] = p.q[i] * gf;
      target[i] = p.q[i] * (y * y - 1.0) * gf;
    }
    auto v = zakspec::apply(S, zakspec::apply(S, qg));
    for (std::size_t i = 0; i < n; ++i) v[i] -= target[i];
    push("s2_gauge", v, 3);
  }
  // S^2 L+ L- = M^2 S^2 on the same gaussian probe
  {
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = std::exp(-0.5 * g.nodes[i] * g.nodes[i]);
    out.push_back({"factorization", check_factorization(g, p, f)});
  }
  // L+ L- f = f'''' - 2 f'' + 4 Q^2 f'' + 4 Q Q' f' + f  (expanded product)
  {
    std::vector<double> f(n), fp(n), fpp(n), f4(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = g.nodes[i];
      const double gf = std::exp(-0.5 * y * y);
      f[i] = gf;
      fp[i] = -y * gf;
      fpp[i] = (y * y - 1.0) * gf;
      f4[i] = (y * y * y * y - 6.0 * y * y + 3.0) * gf;
    }
    auto lhs = zakspec::apply(Lp, zakspec::apply(Lm, f));
    for (std::size_t i = 0; i < n; ++i) {
      const double rhs = f4[i] - 2.0 * fpp[i] + 4.0 * p.q[i] * p.q[i] * fpp[i] +
                         4.0 * p.q[i] * p.q_prime[i] * fp[i] + f[i];
      lhs[i] -= rhs;
    }
    push("lplus_lminus_expansion", lhs, 3);
  }
  return out;
}

}  // namespace zakspec
