// SPDX-License-Identifier: Apache-2.0
//
// Proof-machinery probes: the transformed fourth-order problem obtained by
// conjugating with S twice, weighted virial identities with smooth cutoff
// weights, constrained coercivity constants of the two Schrodinger forms,
// the weighted lower bound driven by the auxiliary profile h, and a registry
// of inequality probes that evaluate both sides of the a-priori estimates
// satisfied by internal-mode data. Probes never assert unquantified analytic
// constants; they report (LHS, RHS, ratio) so tests can pin regressions.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "zakspec/grid.hpp"
#include "zakspec/operators.hpp"
#include "zakspec/pencil.hpp"

namespace zakspec {

// ---------------------------------------------------------------------------
// Probe records
// ---------------------------------------------------------------------------

/// One evaluated probe: both sides of an identity or inequality, plus the
/// empirical constant LHS/RHS when the right side is meaningful.
struct ProbeRecord {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;   ///< lhs / rhs when |rhs| > 0, else 0
  std::string note;     ///< parameters / auxiliary outputs, human-readable
};

/// Scale-aware identity residual |lhs - rhs| / (1 + |lhs| + |rhs|).
inline double probe_residual(const ProbeRecord& r) {
  return std::abs(r.lhs - r.rhs) / (1.0 + std::abs(r.lhs) + std::abs(r.rhs));
}

namespace detail {

inline double safe_ratio(double lhs, double rhs) {
  return rhs != 0.0 ? lhs / rhs : 0.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Transformed problem
// ---------------------------------------------------------------------------

/// Images of the second Schrodinger pair under two applications of the first
/// order factor S: w2 = S^2 c2, z2 = S^2 s2. For eigenpair data these solve
/// the free fourth-order problem M^2 w = lambda^2 w + forcing.
struct TransformedPair {
  std::vector<double> w2;
  std::vector<double> z2;
};

inline TransformedPair transform(const GridSpec& g, const SolitonProfiles& p,
                                 const std::vector<double>& c2,
                                 const std::vector<double>& s2) {
  const auto S = assemble_operator(OperatorKind::S, g, p);
  TransformedPair tp;
  tp.w2 = zakspec::apply(S, zakspec::apply(S, c2));
  tp.z2 = zakspec::apply(S, zakspec::apply(S, s2));
  return tp;
}

/// Interior sup-norm residuals of the transformed equations
///   M^2 w2 = lambda^2 w2 + lambda Q s_n''  and
///   M^2 z2 = lambda^2 z2 - lambda Q c_n''.
struct TransformedResiduals {
  double mw = 0.0;
  double mz = 0.0;
};

inline TransformedResiduals transformed_residual(const GridSpec& g,
                                                 const SolitonProfiles& p,
                                                 const TransformedPair& tp,
                                                 double lambda,
                                                 const std::vector<double>& s_n,
                                                 const std::vector<double>& c_n,
                                                 std::size_t margin = 8) {
  const std::size_t n = g.size();
  const auto M2 = assemble_operator(OperatorKind::M2, g, p);
  const auto D2 = assemble_operator(OperatorKind::D2, g, p);
  const auto snpp = zakspec::apply(D2, s_n);
  const auto cnpp = zakspec::apply(D2, c_n);
  auto rw = zakspec::apply(M2, tp.w2);
  auto rz = zakspec::apply(M2, tp.z2);
  for (std::size_t i = 0; i < n; ++i) {
    rw[i] -= lambda * lambda * tp.w2[i] + lambda * p.q[i] * snpp[i];
    rz[i] -= lambda * lambda * tp.z2[i] - lambda * p.q[i] * cnpp[i];
  }
  return {interior_max_abs(rw, margin), interior_max_abs(rz, margin)};
}

// ---------------------------------------------------------------------------
// Virial weights
// ---------------------------------------------------------------------------

namespace detail {

/// Evaluations of the smooth cutoff chi at one point: chi is 1 on [0,1], 0 on
/// [2,inf), and on [1,2] descends through the Gaussian-mollified step
/// chi = erfc((y - 3/2) / w) / 2 with w = 1/10, clamped to its plateaus at the
/// band edges. The clamp discards only erfc(5) ~ 1.5e-12 tails, so the worst
/// induced derivative jump (in chi'''', ~7e-5) contributes ~1e-8-scale cell
/// errors. The profile shape matters for quadrature accuracy: a C^k
/// polynomial step leaves an O(1e7) derivative jump at the joins, and an
/// exp(-1/t) bump concentrates its high derivatives in spikes narrower than
/// the production grid spacing; both flush 1e-4..1e-3-scale errors into the
/// weighted trapezoid sums. The erf profile keeps every derivative entire
/// with feature width w, so the first trapezoid alias is ~exp(-16) even for
/// the quartic chi' terms of the fourth weight derivative.
struct ChiEval {
  double chi = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  double d4 = 0.0;
};

inline ChiEval chi_smooth(double y) {
  ChiEval e;
  if (y <= 1.0) {
    e.chi = 1.0;
    return e;
  }
  if (y >= 2.0) return e;
  constexpr double w = 0.1;
  constexpr double inv_sqrt_pi = 0.5641895835477562869;
  const double x = (y - 1.5) / w;
  const double gss = std::exp(-x * x) * inv_sqrt_pi;
  e.chi = 0.5 * std::erfc(x);
  e.d1 = -gss / w;
  e.d2 = 2.0 * x * gss / (w * w);
  e.d3 = -(4.0 * x * x - 2.0) * gss / (w * w * w);
  e.d4 = (8.0 * x * x * x - 12.0 * x) * gss / (w * w * w * w);
  return e;
}

/// zeta^2 = exp(-2 g) with g(y) = (y/A)(1 - chi(y)), evaluated for y >= 0
/// together with its first, second and fourth y-derivatives. chi keeps its
/// own transition band [1,2]; only the exponential envelope carries the 1/A.
struct WeightEval {
  double z2 = 0.0;   ///< zeta^2
  double d1 = 0.0;   ///< (zeta^2)'
  double d2 = 0.0;   ///< (zeta^2)''
  double d4 = 0.0;   ///< (zeta^2)''''
};

inline WeightEval weight_kernel(double y, double A) {
  const ChiEval c = chi_smooth(y);
  const double u = 1.0 - c.chi;
  const double u1 = -c.d1, u2 = -c.d2, u3 = -c.d3, u4 = -c.d4;
  const double g = y * u / A;
  const double g1 = (u + y * u1) / A;
  const double g2 = (2.0 * u1 + y * u2) / A;
  const double g3 = (3.0 * u2 + y * u3) / A;
  const double g4 = (4.0 * u3 + y * u4) / A;
  const double E = std::exp(-2.0 * g);
  WeightEval w;
  w.z2 = E;
  w.d1 = -2.0 * g1 * E;
  w.d2 = (4.0 * g1 * g1 - 2.0 * g2) * E;
  w.d4 = (16.0 * g1 * g1 * g1 * g1 - 48.0 * g1 * g1 * g2 + 12.0 * g2 * g2 +
          16.0 * g1 * g3 - 2.0 * g4) * E;
  return w;
}

}  // namespace detail

/// Sampled virial weights: the even cutoff zeta_A^2 = exp(-2(|y|/A)(1-chi)),
/// its analytic derivatives, and the odd primitive Phi_A(y) = int_0^y zeta_A^2.
/// chi is 1 on [0,1] and 0 on [2,inf), so zeta == 1 exactly on [-1,1] and
/// zeta = exp(-|y|/A) beyond |y| >= 2, with a Gaussian-mollified transition
/// in between; the weights tend to (1, y) pointwise as A grows.
struct VirialWeights {
  double scale = 0.0;             ///< A (0 marks the flat limit zeta == 1)
  std::vector<double> zeta2;      ///< zeta_A^2, even
  std::vector<double> dzeta2;     ///< (zeta_A^2)', odd
  std::vector<double> d2zeta2;    ///< (zeta_A^2)'', even
  std::vector<double> d4zeta2;    ///< (zeta_A^2)'''', even
  std::vector<double> phi;        ///< Phi_A, odd, |Phi_A| <= |y|
};

/// Build the weights for cutoff scale A > 1.
inline VirialWeights make_virial_weights(const GridSpec& g, double A) {
  if (!(A > 1.0))
    throw std::invalid_argument("make_virial_weights: cutoff scale must exceed 1, got " +
                                std::to_string(A));
  const std::size_t n = g.size();
  VirialWeights vw;
  vw.scale = A;
  vw.zeta2.resize(n);
  vw.dzeta2.resize(n);
  vw.d2zeta2.resize(n);
  vw.d4zeta2.resize(n);
  vw.phi.resize(n);

  // Fine cumulative integral of zeta^2 across the transition band [1, 2];
  // the integrand is smooth there, so a dense trapezoid reaches ~1e-10.
  constexpr std::size_t kFine = (1u << 16) + 1u;
  std::vector<double> cum(kFine, 0.0);
  const double fine_h = 1.0 / static_cast<double>(kFine - 1);
  double prev = detail::weight_kernel(1.0, A).z2;
  for (std::size_t j = 1; j < kFine; ++j) {
    const double yj = 1.0 + fine_h * static_cast<double>(j);
    const double cur = detail::weight_kernel(yj, A).z2;
    cum[j] = cum[j - 1] + 0.5 * fine_h * (prev + cur);
    prev = cur;
  }
  const double phi_2 = 1.0 + cum[kFine - 1];  // Phi at y = 2

  auto phi_at = [&](double a) {
    // a = |y| >= 0
    if (a <= 1.0) return a;
    if (a >= 2.0) {
      // zeta^2 = exp(-2y/A) beyond the band; integrate it in closed form.
      return phi_2 + 0.5 * A * (std::exp(-4.0 / A) - std::exp(-2.0 * a / A));
    }
    const double s = (a - 1.0) / fine_h;
    const auto j = static_cast<std::size_t>(s);
    const double frac = s - static_cast<double>(j);
    const std::size_t j1 = std::min(j + 1, kFine - 1);
    return 1.0 + (1.0 - frac) * cum[j] + frac * cum[j1];
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double y = g.nodes[i];
    const double a = std::abs(y);
    const double sgn = (y < 0.0) ? -1.0 : 1.0;
    const detail::WeightEval w = detail::weight_kernel(a, A);
    vw.zeta2[i] = w.z2;
    vw.dzeta2[i] = sgn * w.d1;
    vw.d2zeta2[i] = w.d2;
    vw.d4zeta2[i] = w.d4;
    vw.phi[i] = sgn * phi_at(a);
  }
  return vw;
}

/// Flat limit of the weights: zeta == 1, Phi == y. The weighted identities
/// then reduce to their unweighted (Pohozaev-type) forms.
inline VirialWeights flat_virial_weights(const GridSpec& g) {
  const std::size_t n = g.size();
  VirialWeights vw;
  vw.scale = 0.0;
  vw.zeta2.assign(n, 1.0);
  vw.dzeta2.assign(n, 0.0);
  vw.d2zeta2.assign(n, 0.0);
  vw.d4zeta2.assign(n, 0.0);
  vw.phi = g.nodes;
  return vw;
}

// ---------------------------------------------------------------------------
// Smooth test fields
// ---------------------------------------------------------------------------

/// A smooth decaying test function together with the derivative samples the
/// virial identities consume. Producing the derivatives analytically keeps
/// quadrature superconvergent; the finite-difference fallback is O(h^2).
struct SmoothField {
  std::vector<double> f;
  std::vector<double> f1;
  std::vector<double> f2;
  std::vector<double> f4;
};

namespace detail {

/// p(y) -> p'(y) - 2 alpha y p(y), the polynomial factor of the derivative of
/// p(y) exp(-alpha y^2).
inline std::vector<double> gaussian_step(const std::vector<double>& p, double alpha) {
  std::vector<double> out(p.size() + 1, 0.0);
  for (std::size_t j = 1; j < p.size(); ++j) out[j - 1] += static_cast<double>(j) * p[j];
  for (std::size_t j = 0; j < p.size(); ++j) out[j + 1] -= 2.0 * alpha * p[j];
  return out;
}

inline double poly_horner(const std::vector<double>& c, double y) {
  double v = 0.0;
  for (std::size_t j = c.size(); j-- > 0;) v = v * y + c[j];
  return v;
}

}  // namespace detail

/// Gaussian-enveloped polynomial p(y) exp(-alpha y^2) with closed-form
/// derivatives obtained by coefficient calculus.
inline SmoothField gaussian_poly_field(const GridSpec& g,
                                       std::vector<double> poly_coeffs,
                                       double alpha = 1.0) {
  if (poly_coeffs.empty()) poly_coeffs = {1.0};
  const std::size_t n = g.size();
  std::vector<std::vector<double>> p(5);
  p[0] = std::move(poly_coeffs);
  for (int k = 1; k <= 4; ++k) p[static_cast<std::size_t>(k)] =
      detail::gaussian_step(p[static_cast<std::size_t>(k - 1)], alpha);
  SmoothField sf;
  sf.f.resize(n);
  sf.f1.resize(n);
  sf.f2.resize(n);
  sf.f4.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = g.nodes[i];
    const double env = std::exp(-alpha * y * y);
    sf.f[i] = detail::poly_horner(p[0], y) * env;
    sf.f1[i] = detail::poly_horner(p[1], y) * env;
    sf.f2[i] = detail::poly_horner(p[2], y) * env;
    sf.f4[i] = detail::poly_horner(p[4], y) * env;
  }
  return sf;
}

/// Random member of the test family: degree <= 4 polynomial with coefficients
/// in [-1, 1] under a unit-width Gaussian envelope.
inline SmoothField random_gaussian_field(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_real_distribution<double> width(0.6, 1.4);
  std::vector<double> c(5);
  for (auto& v : c) v = coeff(rng);
  if (std::abs(c[0]) < 0.1) c[0] = std::copysign(0.1, c[0] == 0.0 ? 1.0 : c[0]);
  return gaussian_poly_field(g, std::move(c), width(rng));
}

/// Finite-difference fallback when only samples of f are available.
inline SmoothField field_from_samples(const GridSpec& g, const SolitonProfiles& p,
                                      std::vector<double> f) {
  const auto D1 = assemble_operator(OperatorKind::D1, g, p);
  const auto D2 = assemble_operator(OperatorKind::D2, g, p);
  SmoothField sf;
  sf.f1 = zakspec::apply(D1, f);
  sf.f2 = zakspec::apply(D2, f);
  sf.f4 = zakspec::apply(D2, sf.f2);
  sf.f = std::move(f);
  return sf;
}

// ---------------------------------------------------------------------------
// Virial identity probe
// ---------------------------------------------------------------------------

/// Evaluate both sides of every weighted integration-by-parts identity used by
/// the virial arguments, on one smooth decaying field. Identities come in two
/// groups: multiplier Phi f' (second-order problem) and the symmetrized
/// multiplier 2 Phi f' + Phi' f (fourth-order problem).
inline std::vector<ProbeRecord> virial_identity_probe(const GridSpec& g,
                                                      const SolitonProfiles& p,
                                                      const SmoothField& sf,
                                                      const VirialWeights& vw) {
  const std::size_t n = g.size();
  std::vector<ProbeRecord> out;
  auto push = [&](std::string name, double lhs, double rhs) {
    ProbeRecord r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.ratio = detail::safe_ratio(lhs, rhs);
    r.note = "A=" + detail::num(vw.scale);
    out.push_back(std::move(r));
  };

  // Multiplier Phi f'.
  push("fourth_phi",
       weighted_dot(g, sf.f4, sf.f1, &vw.phi),
       1.5 * weighted_dot(g, sf.f2, sf.f2, &vw.zeta2) -
           0.5 * weighted_dot(g, sf.f1, sf.f1, &vw.d2zeta2));
  push("second_phi",
       weighted_dot(g, sf.f2, sf.f1, &vw.phi),
       -0.5 * weighted_dot(g, sf.f1, sf.f1, &vw.zeta2));
  push("zeroth_phi",
       weighted_dot(g, sf.f, sf.f1, &vw.phi),
       -0.5 * weighted_dot(g, sf.f, sf.f, &vw.zeta2));
  {
    // Potential part 4 Q^2 f'' + 4 Q Q' f' against Phi f'.
    std::vector<double> lhs_field(n), q2z(n);
    for (std::size_t i = 0; i < n; ++i) {
      lhs_field[i] = 4.0 * p.q[i] * p.q[i] * sf.f2[i] + 4.0 * p.q[i] * p.q_prime[i] * sf.f1[i];
      q2z[i] = p.q[i] * p.q[i] * vw.zeta2[i];
    }
    push("potential_phi",
         weighted_dot(g, lhs_field, sf.f1, &vw.phi),
         -2.0 * weighted_dot(g, sf.f1, sf.f1, &q2z));
  }

  // Symmetrized multiplier 2 Phi f' + zeta^2 f.
  std::vector<double> mult(n);
  for (std::size_t i = 0; i < n; ++i)
    mult[i] = 2.0 * vw.phi[i] * sf.f1[i] + vw.zeta2[i] * sf.f[i];
  push("fourth_sym",
       weighted_dot(g, sf.f4, mult),
       4.0 * weighted_dot(g, sf.f2, sf.f2, &vw.zeta2) -
           3.0 * weighted_dot(g, sf.f1, sf.f1, &vw.d2zeta2) +
           0.5 * weighted_dot(g, sf.f, sf.f, &vw.d4zeta2));
  push("second_sym",
       weighted_dot(g, sf.f2, mult),
       -2.0 * weighted_dot(g, sf.f1, sf.f1, &vw.zeta2) +
           0.5 * weighted_dot(g, sf.f, sf.f, &vw.d2zeta2));
  push("zeroth_sym", weighted_dot(g, sf.f, mult), 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Coercivity constants
// ---------------------------------------------------------------------------

enum class FormNormalization { h1, l2 };

struct CoercivityResult {
  double minimum = 0.0;             ///< smallest constrained Rayleigh quotient
  Eigen::Index constraint_count = 0;
  Eigen::Index constraint_rank = 0;
  [[nodiscard]] bool rank_deficient() const { return constraint_rank < constraint_count; }
};

/// Minimize the quadratic form of L+ or L- over the chosen unit sphere
/// (H^1 by default, L^2 for ground-energy oracles), subject to trapezoid-L^2
/// orthogonality to the given constraint vectors. The constraint null space is
/// extracted by column-pivoted QR and the reduced symmetric-definite pencil is
/// solved densely.
inline CoercivityResult coercivity_constant(const GridSpec& g, const SolitonProfiles& p,
                                            OperatorKind kind,
                                            const std::vector<std::vector<double>>& constraints,
                                            FormNormalization norm = FormNormalization::h1) {
  if (kind != OperatorKind::Lplus && kind != OperatorKind::Lminus)
    throw std::invalid_argument("coercivity_constant: kind must be Lplus or Lminus");
  const auto n = static_cast<Eigen::Index>(g.size());
  const double h = g.spacing;

  // Trapezoid weights and potential.
  Eigen::VectorXd wq(n), pot(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    wq(i) = h * w;
    const double q2 = p.q[static_cast<std::size_t>(i)] * p.q[static_cast<std::size_t>(i)];
    pot(i) = 1.0 - (kind == OperatorKind::Lplus ? 3.0 : 1.0) * q2;
  }

  // Form matrix A = forward-difference stiffness + potential mass, and the
  // normalization matrix B (stiffness + mass for H^1, mass alone for L^2).
  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> ta, tb;
  ta.reserve(static_cast<std::size_t>(4 * n));
  tb.reserve(static_cast<std::size_t>(4 * n));
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double k = 1.0 / h;
    ta.emplace_back(i, i, k);
    ta.emplace_back(i + 1, i + 1, k);
    ta.emplace_back(i, i + 1, -k);
    ta.emplace_back(i + 1, i, -k);
    if (norm == FormNormalization::h1) {
      tb.emplace_back(i, i, k);
      tb.emplace_back(i + 1, i + 1, k);
      tb.emplace_back(i, i + 1, -k);
      tb.emplace_back(i + 1, i, -k);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    ta.emplace_back(i, i, wq(i) * pot(i));
    tb.emplace_back(i, i, wq(i));
  }
  Eigen::SparseMatrix<double> A(n, n), B(n, n);
  A.setFromTriplets(ta.begin(), ta.end());
  B.setFromTriplets(tb.begin(), tb.end());

  CoercivityResult res;
  res.constraint_count = static_cast<Eigen::Index>(constraints.size());

  Eigen::MatrixXd Z;
  if (constraints.empty()) {
    Z = Eigen::MatrixXd::Identity(n, n);
    res.constraint_rank = 0;
  } else {
    Eigen::MatrixXd G(n, res.constraint_count);
    for (Eigen::Index j = 0; j < res.constraint_count; ++j) {
      const auto& c = constraints[static_cast<std::size_t>(j)];
      if (static_cast<Eigen::Index>(c.size()) != n)
        throw std::invalid_argument("coercivity_constant: constraint size mismatch");
      for (Eigen::Index i = 0; i < n; ++i) G(i, j) = wq(i) * c[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
    res.constraint_rank = qr.rank();
    Eigen::MatrixXd Qfull = qr.householderQ();
    Z = Qfull.rightCols(n - res.constraint_rank);
  }

  const Eigen::MatrixXd AZ = A * Z;
  const Eigen::MatrixXd BZ = B * Z;
  const Eigen::MatrixXd Ar = Z.transpose() * AZ;
  const Eigen::MatrixXd Br = Z.transpose() * BZ;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges;
  ges.compute(Ar, Br, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("coercivity_constant: reduced eigensolve failed");
  res.minimum = ges.eigenvalues()(0);
  return res;
}

// ---------------------------------------------------------------------------
// Weighted lower bound via the auxiliary profile h
// ---------------------------------------------------------------------------

/// Evaluate both sides of the weighted coercivity estimate
///   int Q^{1/2} w^2  <=  C [ (int h w)^2 + int (w')^2 ]
/// with the forward-difference H^1 convention; the ratio is the empirical C.
inline ProbeRecord lemma_h_probe(const GridSpec& g, const SolitonProfiles& p,
                                 const std::vector<double>& w) {
  const std::size_t n = g.size();
  if (w.size() != n) throw std::invalid_argument("lemma_h_probe: size mismatch");
  const auto haux = h_profile(g);
  std::vector<double> sqrtq(n);
  for (std::size_t i = 0; i < n; ++i) sqrtq[i] = std::sqrt(p.q[i]);
  const double lhs = weighted_dot(g, w, w, &sqrtq);
  const double hw = weighted_dot(g, haux, w);
  double grad = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = (w[i + 1] - w[i]) / g.spacing;
    grad += g.spacing * d * d;
  }
  ProbeRecord r;
  r.name = "lemma_h";
  r.lhs = lhs;
  r.rhs = hw * hw + grad;
  r.ratio = detail::safe_ratio(lhs, r.rhs);
  r.note = "hw=" + detail::num(hw) + " grad2=" + detail::num(grad);
  return r;
}

// ---------------------------------------------------------------------------
// Inequality-probe registry
// ---------------------------------------------------------------------------

/// Data bundle for the estimate registry: the eight mode components plus the
/// spectral parameters. Empty vectors stand for identically-zero components.
struct ProbeData {
  double lambda = 0.0;
  double omega = 0.0;
  double beta = 0.0;
  std::vector<double> c1, s1, c2, s2, cn, sn, cv, sv;
  [[nodiscard]] double epsilon() const { return lambda * std::sqrt(omega); }
};

/// Extract a ProbeData bundle from a solved mode (real parts of the blocks).
inline ProbeData probe_data_from_mode(const StateLayout& layout, double omega, double beta,
                                      const EigenResult& mode) {
  ProbeData d;
  d.lambda = std::abs(mode.lambda.real());
  d.omega = omega;
  d.beta = beta;
  auto grab = [&](Block b) {
    std::vector<double> v(layout.n);
    for (std::size_t i = 0; i < layout.n; ++i)
      v[i] = mode.vec[static_cast<Eigen::Index>(layout.index(b, i))].real();
    return v;
  };
  d.c1 = grab(Block::C1);
  d.s1 = grab(Block::S1);
  d.c2 = grab(Block::C2);
  d.s2 = grab(Block::S2);
  d.cv = grab(Block::CV);
  d.sv = grab(Block::SV);
  d.cn = grab(Block::CN);
  d.sn = grab(Block::SN);
  return d;
}

namespace detail {

/// Shared precomputations for the registry.
struct ProbeWork {
  const GridSpec& g;
  const SolitonProfiles& p;
  std::size_t n;
  double lam, eps, beta;
  std::vector<double> c1, s1, c2, s2, cn, sn, cv, sv;
  std::vector<double> c1p, s1p, c2p, s2p, c2pp, s2pp;
  std::vector<double> w2, z2, w2p, z2p;
  std::vector<double> sqrtq, two_yqp_q, yq;

  ProbeWork(const GridSpec& g_, const SolitonProfiles& p_, const ProbeData& d)
      : g(g_), p(p_), n(g_.size()), lam(d.lambda), eps(d.epsilon()), beta(d.beta) {
    auto fill = [&](const std::vector<double>& v) {
      if (v.empty()) return std::vector<double>(n, 0.0);
      if (v.size() != n) throw std::invalid_argument("inequality_probe: component size mismatch");
      return v;
    };
    c1 = fill(d.c1); s1 = fill(d.s1); c2 = fill(d.c2); s2 = fill(d.s2);
    cn = fill(d.cn); sn = fill(d.sn); cv = fill(d.cv); sv = fill(d.sv);
    const auto D1 = assemble_operator(OperatorKind::D1, g, p);
    const auto D2 = assemble_operator(OperatorKind::D2, g, p);
    c1p = zakspec::apply(D1, c1); s1p = zakspec::apply(D1, s1);
    c2p = zakspec::apply(D1, c2); s2p = zakspec::apply(D1, s2);
    c2pp = zakspec::apply(D2, c2); s2pp = zakspec::apply(D2, s2);
    const auto S = assemble_operator(OperatorKind::S, g, p);
    w2 = zakspec::apply(S, zakspec::apply(S, c2));
    z2 = zakspec::apply(S, zakspec::apply(S, s2));
    w2p = zakspec::apply(D1, w2);
    z2p = zakspec::apply(D1, z2);
    sqrtq.resize(n); two_yqp_q.resize(n); yq.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      sqrtq[i] = std::sqrt(p.q[i]);
      two_yqp_q[i] = 2.0 * g.nodes[i] * p.q_prime[i] + p.q[i];
      yq[i] = g.nodes[i] * p.q[i];
    }
  }

  [[nodiscard]] double qdot(const std::vector<double>& a, const std::vector<double>& b) const {
    return weighted_dot(g, a, b, &p.q);
  }
  [[nodiscard]] double qnorm2(const std::vector<double>& a) const { return qdot(a, a); }
  [[nodiscard]] double sqnorm2(const std::vector<double>& a) const {
    return weighted_dot(g, a, a, &sqrtq);
  }
  [[nodiscard]] double dot(const std::vector<double>& a, const std::vector<double>& b) const {
    return weighted_dot(g, a, b);
  }
  [[nodiscard]] double h1norm2(const std::vector<double>& a) const {
    double s = weighted_dot(g, a, a);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double d = (a[i + 1] - a[i]) / g.spacing;
      s += g.spacing * d * d;
    }
    return s;
  }
  [[nodiscard]] double inv_lam() const { return lam > 0.0 ? 1.0 / lam : 0.0; }
};

}  // namespace detail

/// Names accepted by inequality_probe, in report order.
inline const std::vector<std::string>& inequality_probe_names() {
  static const std::vector<std::string> names = {
      "estim1C2", "estim1S2", "estim1DT", "estim2DT", "estim2SC",
      "estim3S2", "estim3C2", "estim4C2", "estim5C2", "estim5S2",
      "r2",       "estim6C2", "estim6S2", "estim7SC", "estim8SC",
      "estim7SCp", "G", "H", "up2"};
  return names;
}

/// Evaluate one named a-priori estimate on the given data bundle. Both sides
/// are computed literally as written; the ratio is the empirical constant.
/// Unknown names throw std::invalid_argument.
inline ProbeRecord inequality_probe(const GridSpec& g, const SolitonProfiles& p,
                                    const std::string& name, const ProbeData& data) {
  detail::ProbeWork w(g, p, data);
  ProbeRecord r;
  r.name = name;
  r.note = "lambda=" + detail::num(w.lam) + " eps=" + detail::num(w.eps) +
           " beta=" + detail::num(w.beta);
  const double eps = w.eps, lam = w.lam;

  if (name == "estim1C2") {
    r.lhs = std::abs(w.dot(w.c2, p.lambda_q));
    r.rhs = w.inv_lam() * std::sqrt(w.qnorm2(w.sn));
  } else if (name == "estim1S2") {
    r.lhs = std::abs(w.dot(w.s2, p.lambda_q));
    r.rhs = w.inv_lam() * std::sqrt(w.qnorm2(w.cn));
  } else if (name == "estim1DT") {
    double m = 0.0;
    for (std::size_t i = 0; i < w.n; ++i)
      m = std::max(m, std::abs(w.cv[i]) + std::abs(w.sv[i]) + std::abs(w.cn[i]) + std::abs(w.sn[i]));
    r.lhs = m;
    r.rhs = eps * std::sqrt(w.qnorm2(w.s1) + w.qnorm2(w.c1));
  } else if (name == "estim2DT") {
    r.lhs = w.qnorm2(w.cv) + w.qnorm2(w.sv) + w.qnorm2(w.cn) + w.qnorm2(w.sn);
    r.rhs = eps * eps * (w.qnorm2(w.s1) + w.qnorm2(w.c1));
  } else if (name == "estim2SC") {
    r.lhs = std::abs(w.dot(w.c2, p.lambda_q)) + std::abs(w.dot(w.s2, p.lambda_q));
    r.rhs = eps * w.inv_lam() * std::sqrt(w.qnorm2(w.s1) + w.qnorm2(w.c1));
  } else if (name == "estim3S2") {
    r.lhs = std::abs(w.dot(w.two_yqp_q, w.s2));
    r.rhs = eps * lam * std::sqrt(w.qnorm2(w.s1)) + eps * eps * std::sqrt(w.qnorm2(w.s2));
  } else if (name == "estim3C2") {
    r.lhs = std::abs(w.dot(w.two_yqp_q, w.c2));
    r.rhs = eps * lam * std::sqrt(w.qnorm2(w.c1)) + eps * eps * std::sqrt(w.qnorm2(w.c2));
  } else if (name == "estim4C2") {
    r.lhs = std::abs(w.dot(w.s2, p.q)) + std::abs(w.dot(w.c2, p.q));
    r.rhs = eps * (lam + w.inv_lam()) * std::sqrt(w.qnorm2(w.s1) + w.qnorm2(w.c1)) +
            eps * eps * std::sqrt(w.qnorm2(w.s2));
  } else if (name == "estim5C2") {
    r.lhs = std::abs(w.dot(w.c2, p.q_prime));
    r.rhs = eps * lam * std::sqrt(w.qnorm2(w.c1)) + eps * eps * std::sqrt(w.qnorm2(w.c2));
  } else if (name == "estim5S2") {
    r.lhs = std::abs(w.dot(w.s2, p.q_prime));
    r.rhs = eps * lam * std::sqrt(w.qnorm2(w.s1)) + eps * eps * std::sqrt(w.qnorm2(w.s2));
  } else if (name == "r2") {
    // Taylor remainder of the slow-envelope expansion of
    // Psi = L_-( (1+b) cos(eps y/(1+b)) Q + (1-b) cos(eps y/(1-b)) Q ):
    // pointwise |Psi - (2 eps^2/(1-b^2)) (2yQ'+Q)| <= C eps^4 (1+|y|^3) Q.
    const double bp = 1.0 + w.beta, bm = 1.0 - w.beta;
    double sup = 0.0;
    for (std::size_t i = 0; i < w.n; ++i) {
      const double y = g.nodes[i];
      const double weight = (1.0 + std::abs(y) * std::abs(y) * std::abs(y)) * p.q[i];
      if (weight < 1e-250) continue;
      const double psi = 2.0 * eps * p.q_prime[i] *
                             (std::sin(eps * y / bp) + std::sin(eps * y / bm)) +
                         eps * eps * p.q[i] *
                             (std::cos(eps * y / bp) / bp + std::cos(eps * y / bm) / bm);
      const double lead = 2.0 * eps * eps / (bp * bm) * w.two_yqp_q[i];
      sup = std::max(sup, std::abs(psi - lead) / weight);
    }
    r.lhs = sup;
    r.rhs = eps * eps * eps * eps;
  } else if (name == "estim6C2") {
    r.lhs = w.qnorm2(w.c2);
    r.rhs = w.sqnorm2(w.w2) + eps * eps * (w.qnorm2(w.c1) + w.qnorm2(w.s1));
  } else if (name == "estim6S2") {
    r.lhs = w.qnorm2(w.s2);
    r.rhs = w.sqnorm2(w.z2) + eps * eps * (w.qnorm2(w.s1) + w.qnorm2(w.c1));
  } else if (name == "estim7SC") {
    r.lhs = w.qnorm2(w.c1) + w.qnorm2(w.s1);
    r.rhs = w.sqnorm2(w.w2) + w.sqnorm2(w.z2);
  } else if (name == "estim8SC") {
    r.lhs = w.qnorm2(w.c2) + w.qnorm2(w.c2p) + w.qnorm2(w.c2pp) +
            w.qnorm2(w.s2) + w.qnorm2(w.s2p) + w.qnorm2(w.s2pp);
    r.rhs = w.sqnorm2(w.w2) + w.sqnorm2(w.z2);
  } else if (name == "estim7SCp") {
    r.lhs = w.qnorm2(w.c1p) + w.qnorm2(w.s1p);
    r.rhs = w.sqnorm2(w.w2p) + w.sqnorm2(w.z2p) + w.sqnorm2(w.w2) + w.sqnorm2(w.z2);
  } else if (name == "G") {
    std::vector<double> gfield(w.n), cns2(w.n), snc2(w.n);
    for (std::size_t i = 0; i < w.n; ++i) {
      gfield[i] = lam * lam * (w.s2[i] * w.s2[i] + w.c2[i] * w.c2[i]) +
                  w.s2pp[i] * w.s2pp[i] + w.c2pp[i] * w.c2pp[i];
      cns2[i] = w.cn[i] * w.s2p[i];
      snc2[i] = w.sn[i] * w.c2p[i];
    }
    std::vector<double> one(w.n, 1.0);
    r.lhs = weighted_dot(g, gfield, one);
    r.rhs = lam * (std::abs(w.dot(w.yq, cns2)) + std::abs(w.dot(w.yq, snc2)));
  } else if (name == "H") {
    // Energy pairing of the first Schrodinger pair against its upper bound:
    // <L+ s1, s1> + <L- c2, c2> - int Q s1 sn  <=  lam (||s1||_H1^2 + ||c2||_H1^2),
    // with the full aggregate of H^1 norms recorded in the note.
    const auto Lp = assemble_operator(OperatorKind::Lplus, g, p);
    const auto Lm = assemble_operator(OperatorKind::Lminus, g, p);
    const double pairing = w.dot(zakspec::apply(Lp, w.s1), w.s1) +
                           w.dot(zakspec::apply(Lm, w.c2), w.c2) - w.qdot(w.s1, w.sn);
    const double agg = w.h1norm2(w.s1) + w.h1norm2(w.c1) + w.h1norm2(w.s2) + w.h1norm2(w.c2);
    r.lhs = pairing;
    r.rhs = lam * (w.h1norm2(w.s1) + w.h1norm2(w.c2));
    r.note += " aggregate=" + detail::num(agg);
  } else if (name == "up2") {
    // Unweighted virial identity tying the forcing to the quadratic form of
    // the second Schrodinger pair (exact for eigendata, O(h^2) discretely):
    // lam int yQ sn c2' = 3/2 int (c2'')^2 + int (1-2Q^2)(c2')^2
    //                     + (lam^2-1)/2 int c2^2.
    std::vector<double> one_m_2q2(w.n);
    for (std::size_t i = 0; i < w.n; ++i) one_m_2q2[i] = 1.0 - 2.0 * p.q[i] * p.q[i];
    std::vector<double> snq(w.n);
    for (std::size_t i = 0; i < w.n; ++i) snq[i] = w.yq[i] * w.sn[i];
    r.lhs = lam * weighted_dot(g, snq, w.c2p);
    r.rhs = 1.5 * w.dot(w.c2pp, w.c2pp) + weighted_dot(g, w.c2p, w.c2p, &one_m_2q2) +
            0.5 * (lam * lam - 1.0) * w.dot(w.c2, w.c2);
  } else {
    throw std::invalid_argument("inequality_probe: unknown probe name '" + name + "'");
  }
  r.ratio = detail::safe_ratio(r.lhs, r.rhs);
  return r;
}

// ---------------------------------------------------------------------------
// Resonance at the edge of the continuous spectrum
// ---------------------------------------------------------------------------

/// Interior residuals of the non-decaying resonance relations at the upper
/// threshold: L-(1) = 1 - Q^2 (exact for the discrete stencil), L+(1-Q^2) = 1
/// (second-order), and the companion pair identity (S*)^2 h = -(Q + 2yQ').
struct ResonanceResiduals {
  double lminus_one = 0.0;
  double lplus_gap = 0.0;
  double h_pair = 0.0;
};

inline ResonanceResiduals resonance_check(const GridSpec& g, const SolitonProfiles& p,
                                          std::size_t margin = 2) {
  const std::size_t n = g.size();
  const auto Lm = assemble_operator(OperatorKind::Lminus, g, p);
  const auto Lp = assemble_operator(OperatorKind::Lplus, g, p);
  const auto Ss = assemble_operator(OperatorKind::Sstar, g, p);

  std::vector<double> one(n, 1.0), gap(n);
  for (std::size_t i = 0; i < n; ++i) gap[i] = 1.0 - p.q[i] * p.q[i];

  auto r1 = zakspec::apply(Lm, one);
  for (std::size_t i = 0; i < n; ++i) r1[i] -= gap[i];
  auto r2 = zakspec::apply(Lp, gap);
  for (std::size_t i = 0; i < n; ++i) r2[i] -= 1.0;
  auto r3 = zakspec::apply(Ss, zakspec::apply(Ss, h_profile(g)));
  for (std::size_t i = 0; i < n; ++i) r3[i] += p.q[i] + 2.0 * g.nodes[i] * p.q_prime[i];

  ResonanceResiduals res;
  res.lminus_one = interior_max_abs(r1, margin);
  res.lplus_gap = interior_max_abs(r2, margin);
  res.h_pair = interior_max_abs(r3, std::max<std::size_t>(margin, 3));
  return res;
}

}  // namespace zakspec
