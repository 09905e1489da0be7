// SPDX-License-Identifier: Apache-2.0
//
// The first-order wave subsystem: the constant matrix A, its closed-form
// propagator exp(eps*y*A), the decaying Duhamel solution driven by (C1, S1),
// the four trigonometric orthogonality residuals that characterize decay at
// -infinity, and a boundary decay check.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "zakspec/grid.hpp"

namespace zakspec {

/// Parameters of the wave block. eps = lambda * sqrt(omega) is the slow
/// frequency; gamma and kappa are the pinned rational functions of beta.
struct WaveParams {
  double omega = 0.0;
  double beta = 0.0;
  double lambda = 0.0;

  [[nodiscard]] double eps() const { return lambda * std::sqrt(omega); }
  [[nodiscard]] double gamma() const { return 2.0 * beta / (1.0 + beta * beta); }
  [[nodiscard]] double kappa() const { return 2.0 * (1.0 + beta * beta) / (1.0 - beta * beta); }
};

inline void validate(const WaveParams& wp) {
  if (!(wp.omega > 0.0))
    throw std::invalid_argument("WaveParams: omega must be positive, got " +
                                std::to_string(wp.omega));
  if (!(std::abs(wp.beta) < 1.0))
    throw std::invalid_argument("WaveParams: beta outside (-1,1), got " +
                                std::to_string(wp.beta));
}

/// The four wave fields sampled on a grid.
struct WaveState {
  std::vector<double> c_v, s_v, c_n, s_n;

  [[nodiscard]] std::size_t size() const { return c_v.size(); }
};

/// Coupling matrix A(beta); eigenvalues are +-i/(1+beta), +-i/(1-beta).
inline Eigen::Matrix4d matrix_A(double beta) {
  if (!(std::abs(beta) < 1.0))
    throw std::invalid_argument("matrix_A: beta outside (-1,1), got " + std::to_string(beta));
  Eigen::Matrix4d A;
  A << 0.0, -beta, 0.0, -1.0,
       beta, 0.0, 1.0, 0.0,
       0.0, -1.0, 0.0, -beta,
       1.0, 0.0, beta, 0.0;
  return A / (1.0 - beta * beta);
}

/// Half-sum/half-difference trig helpers evaluated at phase arguments
/// eps*y/(1+beta) and eps*y/(1-beta).
struct TrigBasis {
  double s_plus, s_minus, c_plus, c_minus;       // s^+/-, c^+/-
  double sg_plus, sg_minus, cg_plus, cg_minus;   // s_gamma^+/-, c_gamma^+/-
};

inline TrigBasis trig_basis(const WaveParams& wp, double y) {
  const double ap = wp.eps() * y / (1.0 + wp.beta);
  const double am = wp.eps() * y / (1.0 - wp.beta);
  const double g = wp.gamma();
  TrigBasis t;
  t.s_plus = 0.5 * (std::sin(ap) + std::sin(am));
  t.s_minus = 0.5 * (std::sin(ap) - std::sin(am));
  t.c_plus = 0.5 * (std::cos(ap) + std::cos(am));
  t.c_minus = 0.5 * (std::cos(ap) - std::cos(am));
  t.sg_plus = 0.5 * (1.0 - g) * std::sin(ap) + 0.5 * (1.0 + g) * std::sin(am);
  t.sg_minus = 0.5 * (1.0 - g) * std::sin(ap) - 0.5 * (1.0 + g) * std::sin(am);
  t.cg_plus = 0.5 * (1.0 - g) * std::cos(ap) + 0.5 * (1.0 + g) * std::cos(am);
  t.cg_minus = 0.5 * (1.0 - g) * std::cos(ap) - 0.5 * (1.0 + g) * std::cos(am);
  return t;
}

/// Closed-form propagator exp(eps*y*A) as a trigonometric matrix. The matrix
/// is orthogonal: M(y)^T = M(-y) = M(y)^{-1}.
inline Eigen::Matrix4d propagator(double y, const WaveParams& wp) {
  validate(wp);
  const TrigBasis t = trig_basis(wp, y);
  Eigen::Matrix4d M;
  M << t.c_plus, t.s_minus, -t.c_minus, -t.s_plus,
       -t.s_minus, t.c_plus, t.s_plus, -t.c_minus,
       -t.c_minus, -t.s_plus, t.c_plus, t.s_minus,
       t.s_plus, -t.c_minus, -t.s_minus, t.c_plus;
  return M;
}

/// Decaying Duhamel solution of the wave subsystem driven by (C1, S1):
///   X(y) = -eps*kappa * M(y) * integral_y^{+inf} Q(z) u(z) dz,
/// with the u entries built from the gamma-weighted trig basis. The tail
/// beyond the grid edge is dropped (Q decays like e^{-|y|}; the truncation is
/// far below double rounding for the pinned half-widths).
inline WaveState duhamel_solve(const GridSpec& g, const WaveParams& wp,
                               const std::vector<double>& c1, const std::vector<double>& s1) {
  validate(wp);
  const std::size_t n = g.size();
  if (c1.size() != n || s1.size() != n)
    throw std::invalid_argument("duhamel_solve: input block size mismatch");
  const double ek = wp.eps() * wp.kappa();

  std::array<std::vector<double>, 4> integrand;
  for (auto& v : integrand) v.resize(n);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = g.nodes[i];
    const double Q = std::sqrt(2.0) / std::cosh(y);
    const TrigBasis t = trig_basis(wp, y);
    integrand[0][i] = Q * (-t.cg_plus * s1[i] - t.sg_minus * c1[i]);
    integrand[1][i] = Q * (-t.sg_minus * s1[i] + t.cg_plus * c1[i]);
    integrand[2][i] = Q * (t.cg_minus * s1[i] + t.sg_plus * c1[i]);
    integrand[3][i] = Q * (t.sg_plus * s1[i] - t.cg_minus * c1[i]);
    q[i] = Q;
  }
  std::array<std::vector<double>, 4> tail;
  for (int k = 0; k < 4; ++k) tail[static_cast<std::size_t>(k)] = cumulative_from_right(g, integrand[static_cast<std::size_t>(k)]);

  WaveState ws;
  ws.c_v.resize(n);
  ws.s_v.resize(n);
  ws.c_n.resize(n);
  ws.s_n.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Matrix4d M = propagator(g.nodes[i], wp);
    Eigen::Vector4d I(tail[0][i], tail[1][i], tail[2][i], tail[3][i]);
    const Eigen::Vector4d X = -ek * (M * I);
    ws.c_v[i] = X(0);
    ws.s_v[i] = X(1);
    ws.c_n[i] = X(2);
    ws.s_n[i] = X(3);
  }
  return ws;
}

/// The four orthogonality residuals (left-hand side minus right-hand side):
///   int cos(eps y/(1+b)) Q C1 = int sin(eps y/(1+b)) Q S1
///   int sin(eps y/(1+b)) Q C1 = -int cos(eps y/(1+b)) Q S1
///   int cos(eps y/(1-b)) Q C1 = -int sin(eps y/(1-b)) Q S1
///   int sin(eps y/(1-b)) Q C1 = int cos(eps y/(1-b)) Q S1
/// All four vanish exactly when the wave fields decay at -infinity.
inline std::array<double, 4> orthogonality_residuals(const GridSpec& g, const WaveParams& wp,
                                                     const std::vector<double>& c1,
                                                     const std::vector<double>& s1) {
  validate(wp);
  const std::size_t n = g.size();
  if (c1.size() != n || s1.size() != n)
    throw std::invalid_argument("orthogonality_residuals: input block size mismatch");
  std::array<double, 4> acc{0.0, 0.0, 0.0, 0.0};
  const double h = g.spacing;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = g.nodes[i];
    const double Q = std::sqrt(2.0) / std::cosh(y);
    const double ap = wp.eps() * y / (1.0 + wp.beta);
    const double am = wp.eps() * y / (1.0 - wp.beta);
    const double w = (i == 0 || i + 1 == n) ? 0.5 * h : h;
    acc[0] += w * Q * (std::cos(ap) * c1[i] - std::sin(ap) * s1[i]);
    acc[1] += w * Q * (std::sin(ap) * c1[i] + std::cos(ap) * s1[i]);
    acc[2] += w * Q * (std::cos(am) * c1[i] + std::sin(am) * s1[i]);
    acc[3] += w * Q * (std::sin(am) * c1[i] - std::cos(am) * s1[i]);
  }
  return acc;
}

/// True when every wave field is below tol in magnitude at both grid edges.
inline bool decay_check(const WaveState& ws, double tol) {
  const std::size_t n = ws.size();
  if (n == 0) return true;
  for (const auto* f : {&ws.c_v, &ws.s_v, &ws.c_n, &ws.s_n}) {
    if (std::abs(f->front()) > tol || std::abs(f->back()) > tol) return false;
  }
  return true;
}

}  // namespace zakspec
