// SPDX-License-Identifier: Apache-2.0
//
// Uniform symmetric grids on [-L, L], the solitary-wave profile family built
// from Q(y) = sqrt(2)/cosh(y), trapezoid quadrature, and the auxiliary
// profile h used by the weighted coercivity estimate.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace zakspec {

namespace detail {

/// Compact %.6g formatting for diagnostics strings.
inline std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

}  // namespace detail

/// Uniform grid on [-L, L]. Nodes are generated symmetrically about 0, so for
/// odd n the origin is an exact node and y[i] + y[n-1-i] == 0 to the last bit.
struct GridSpec {
  double half_width = 0.0;      ///< L
  double spacing = 0.0;         ///< h = 2L/(n-1)
  std::vector<double> nodes;    ///< y[0] = -L, ..., y[n-1] = +L

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

/// Sampled solitary-wave profiles. All entries are evaluated analytically
/// (no finite differencing): q'' uses the profile equation Q'' = Q - Q^3.
struct SolitonProfiles {
  std::vector<double> q;         ///< Q = sqrt(2) sech y
  std::vector<double> q_prime;   ///< Q' = -Q tanh y
  std::vector<double> q_second;  ///< Q'' = Q - Q^3
  std::vector<double> lambda_q;  ///< (Lambda Q) = (Q + y Q')/2
  std::vector<double> y_q;       ///< y Q
};

/// Build a uniform symmetric grid.
///
/// Throws std::invalid_argument for L <= 0 or n < 8 (stencils need room).
inline GridSpec build_grid(double half_width, std::size_t n) {
  if (!(half_width > 0.0))
    throw std::invalid_argument("build_grid: half_width must be positive, got " +
                                std::to_string(half_width));
  if (n < 8)
    throw std::invalid_argument("build_grid: need at least 8 nodes, got " +
                                std::to_string(n));
  GridSpec g;
  g.half_width = half_width;
  g.spacing = 2.0 * half_width / static_cast<double>(n - 1);
  g.nodes.resize(n);
  const double mid = 0.5 * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    g.nodes[i] = (static_cast<double>(i) - mid) * g.spacing;
  g.nodes.front() = -half_width;
  g.nodes.back() = half_width;
  return g;
}

/// Sample the profile family on a grid.
inline SolitonProfiles soliton_profiles(const GridSpec& g) {
  const std::size_t n = g.size();
  SolitonProfiles p;
  p.q.resize(n);
  p.q_prime.resize(n);
  p.q_second.resize(n);
  p.lambda_q.resize(n);
  p.y_q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = g.nodes[i];
    const double q = std::sqrt(2.0) / std::cosh(y);
    const double qp = -q * std::tanh(y);
    p.q[i] = q;
    p.q_prime[i] = qp;
    p.q_second[i] = q - q * q * q;
    p.lambda_q[i] = 0.5 * (q + y * qp);
    p.y_q[i] = y * q;
  }
  return p;
}

/// Auxiliary profile h(y) = (1/Q) * integral_y^inf z Q(z)^2 dz.
///
/// Evaluated through the identity h*Q = 4y/(e^{2y}+1) + 2 log(1+e^{-2y})
/// (y >= 0, even reflection), which is algebraically equal to the closed form
/// (1/Q)(3 ln 2 - 2 ln Q + 2 y Q'/Q) but free of the large-|y| cancellation.
inline double h_profile_at(double y) {
  const double a = std::abs(y);
  const double hq = 4.0 * a / (std::exp(2.0 * a) + 1.0) + 2.0 * std::log1p(std::exp(-2.0 * a));
  const double q = std::sqrt(2.0) / std::cosh(a);
  return hq / q;
}

/// Sample h on a grid.
inline std::vector<double> h_profile(const GridSpec& g) {
  std::vector<double> h(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) h[i] = h_profile_at(g.nodes[i]);
  return h;
}

/// Trapezoid quadrature of a sampled function.
inline double trapezoid(const GridSpec& g, const std::vector<double>& f) {
  const std::size_t n = g.size();
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < n; ++i) s += f[i];
  return s * g.spacing;
}

/// Trapezoid quadrature of f*g2, optionally with an extra pointwise weight:
/// integral f(y) g2(y) [weight(y)] dy.
inline double weighted_dot(const GridSpec& g, const std::vector<double>& f,
                           const std::vector<double>& g2,
                           const std::vector<double>* weight = nullptr) {
  const std::size_t n = g.size();
  auto term = [&](std::size_t i) {
    double t = f[i] * g2[i];
    if (weight) t *= (*weight)[i];
    return t;
  };
  double s = 0.5 * (term(0) + term(n - 1));
  for (std::size_t i = 1; i + 1 < n; ++i) s += term(i);
  return s * g.spacing;
}

/// Cumulative trapezoid from the right edge: out[i] = integral_{y_i}^{L} f.
/// The value at the last node is 0; tails beyond L are the caller's concern.
inline std::vector<double> cumulative_from_right(const GridSpec& g,
                                                 const std::vector<double>& f) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;)
    out[i] = out[i + 1] + 0.5 * g.spacing * (f[i] + f[i + 1]);
  return out;
}

/// Cumulative trapezoid from the origin node: out[i] = integral_0^{y_i} f.
/// Requires an odd-sized grid so that 0 is a node.
inline std::vector<double> cumulative_from_center(const GridSpec& g,
                                                  const std::vector<double>& f) {
  const std::size_t n = g.size();
  if (n % 2 == 0)
    throw std::invalid_argument("cumulative_from_center: grid must have odd size");
  const std::size_t m = n / 2;
  std::vector<double> out(n, 0.0);
  for (std::size_t i = m; i + 1 < n; ++i)
    out[i + 1] = out[i] + 0.5 * g.spacing * (f[i] + f[i + 1]);
  for (std::size_t i = m; i-- > 0;)
    out[i] = out[i + 1] - 0.5 * g.spacing * (f[i] + f[i + 1]);
  return out;
}

}  // namespace zakspec
