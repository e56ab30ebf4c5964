#pragma once

#include <cmath>
#include <stdexcept>

#include "qmk/cost.hpp"
#include "qmk/fock.hpp"
#include "qmk/states.hpp"

namespace qmk {

/// Closed forms for the two-coherent-state matching problem with equal
/// masses:
///   R = (|a><a| + |-a><-a|)/2,  S = (|b><b| + |-b><-b|)/2,  a, b > 0,
/// in the orthonormal bases phi_± = (|a> ± |-a>)/sqrt(2(1±lambda)),
/// psi_± = (|b> ± |-b>)/sqrt(2(1±mu)). Everything is expressed in the ordered
/// product basis {phi+psi+, phi+psi-, phi-psi+, phi-psi-}.
struct BipartiteInstance {
  double a;
  double b;
  double hbar;

  BipartiteInstance(double a_, double b_, double hbar_)
      : a(a_), b(b_), hbar(hbar_) {
    if (a <= 0.0 || b <= 0.0 || hbar <= 0.0) {
      throw std::invalid_argument("BipartiteInstance: a, b, hbar must be > 0");
    }
  }

  double lambda() const { return std::exp(-a * a / hbar); }
  double mu() const { return std::exp(-b * b / hbar); }
};

/// The optimal coupling F (trace one, PSD, rank two) with marginals
/// diag((1±lambda)/2) and diag((1±mu)/2).
inline RealMatrix coupling_matrix(const BipartiteInstance& inst) {
  const double l = inst.lambda(), m = inst.mu();
  const double s1 = std::sqrt((1 + l * m) * (1 + l * m) - (l + m) * (l + m));
  const double s2 = std::sqrt((1 - l * m) * (1 - l * m) - (l - m) * (l - m));
  RealMatrix f(4, 4);
  f << 1 + l * m + l + m, 0, 0, s1,
       0, 1 - l * m + l - m, s2, 0,
       0, s2, 1 - l * m - l + m, 0,
       s1, 0, 0, 1 + l * m - l - m;
  return f / 4.0;
}

namespace detail {

struct CostEntries {
  double A, B, C, D, gamma, delta;
};

inline CostEntries cost_entries(const BipartiteInstance& inst) {
  const double l = inst.lambda(), m = inst.mu();
  const double a2 = inst.a * inst.a, b2 = inst.b * inst.b;
  const double root = std::sqrt((1 - l * l) * (1 - m * m));
  return {a2 * (1 - l) / (1 + l) + b2 * (1 - m) / (1 + m),
          a2 * (1 - l) / (1 + l) + b2 * (1 + m) / (1 - m),
          a2 * (1 + l) / (1 - l) + b2 * (1 - m) / (1 + m),
          a2 * (1 + l) / (1 - l) + b2 * (1 + m) / (1 - m),
          -2.0 * inst.a * inst.b * (1 - l * m) / root,
          -2.0 * inst.a * inst.b * (1 + l * m) / root};
}

}  // namespace detail

/// The projected cost C' on span{phi±} (x) span{psi±}.
inline RealMatrix cost_matrix(const BipartiteInstance& inst) {
  const auto e = detail::cost_entries(inst);
  const double h2 = 2.0 * inst.hbar;
  RealMatrix c(4, 4);
  c << e.A + h2, 0, 0, e.gamma,
       0, e.B + h2, e.delta, 0,
       0, e.delta, e.C + h2, 0,
       e.gamma, 0, 0, e.D + h2;
  return c;
}

/// Projected harmonic oscillator on span{phi±}: diag(a^2(1∓lambda)/(1±lambda)
/// + hbar) -- the coherent-state energy <±a|H|±a> = a^2 + hbar mixed through
/// the even/odd combinations.
inline RealMatrix oscillator_left(const BipartiteInstance& inst) {
  const double l = inst.lambda(), a2 = inst.a * inst.a;
  RealMatrix h = RealMatrix::Zero(2, 2);
  h(0, 0) = a2 * (1 - l) / (1 + l) + inst.hbar;
  h(1, 1) = a2 * (1 + l) / (1 - l) + inst.hbar;
  return h;
}

inline RealMatrix oscillator_right(const BipartiteInstance& inst) {
  return oscillator_left(BipartiteInstance(inst.b, inst.a, inst.hbar));
}

/// Projected position/momentum on span{phi±}. Q is a/sqrt(1-lambda^2) times
/// the symmetric swap, P is -i a lambda/sqrt(1-lambda^2) times the
/// antisymmetric swap.
inline Matrix position_left(const BipartiteInstance& inst) {
  Matrix q(2, 2);
  const double c = inst.a / std::sqrt(1 - inst.lambda() * inst.lambda());
  q << 0, c, c, 0;
  return q;
}

inline Matrix momentum_left(const BipartiteInstance& inst) {
  Matrix p(2, 2);
  const double l = inst.lambda();
  const Complex c = Complex(0, -1) * inst.a * l / std::sqrt(1 - l * l);
  p << 0, c, -c, 0;
  return p;
}

inline Matrix position_right(const BipartiteInstance& inst) {
  return position_left(BipartiteInstance(inst.b, inst.a, inst.hbar));
}

inline Matrix momentum_right(const BipartiteInstance& inst) {
  return momentum_left(BipartiteInstance(inst.b, inst.a, inst.hbar));
}

/// Diagonal dual pair (A, B) feasible for C' with
/// tr(RA) + tr(SB) = tr(F C'). The four linear relations
///   abar = a1 + b1 - A, bbar = a1 + b2 - B, cbar = a2 + b1 - C,
///   dbar = a2 + b2 - D
/// are closed under abar + dbar = bbar + cbar = x,
/// abar - dbar = 4ab(1-lm)(l+m)/((1-l^2)(1-m^2)) and
/// bbar - cbar = 4ab(1+lm)(l-m)/((1-l^2)(1-m^2)) -- the exact factorizations
/// of sqrt(x^2-4 gamma^2) and sqrt(x^2-4 delta^2), the second signed by
/// (lambda - mu) so that feasibility holds on both sides of a = b. These
/// relations solve the matching problem for the cost C' - 2 hbar; shifting
/// each potential by +hbar restores the pair for C' itself. The gauge is
/// fixed by a1 = 0.
struct BipartiteDual {
  RealMatrix A;             // feasible for C' (shifted by +hbar)
  RealMatrix B;
  RealMatrix A_unshifted;   // feasible for C' - 2 hbar
  RealMatrix B_unshifted;
  double value;             // tr(RA) + tr(SB) for the shifted pair
};

inline BipartiteDual dual_pair(const BipartiteInstance& inst) {
  const double l = inst.lambda(), m = inst.mu();
  const auto e = detail::cost_entries(inst);
  const double denom = (1 - l * l) * (1 - m * m);
  const double x = -4.0 * inst.a * inst.b * (1 - l * l * m * m) / denom;
  const double disc_gamma = 4.0 * inst.a * inst.b * (1 - l * m) * (l + m) / denom;
  const double disc_delta = 4.0 * inst.a * inst.b * (1 + l * m) * (l - m) / denom;
  const double abar = 0.5 * (x + disc_gamma);
  const double dbar = 0.5 * (x - disc_gamma);
  const double bbar = 0.5 * (x + disc_delta);
  const double cbar = 0.5 * (x - disc_delta);

  const double a1 = 0.0;
  const double b1 = abar + e.A - a1;
  const double b2 = bbar + e.B - a1;
  const double a2 = cbar + e.C - b1;
  if (std::abs((a2 + b2) - (dbar + e.D)) > 1e-9 * (1.0 + std::abs(dbar + e.D))) {
    throw std::runtime_error("dual_pair: inconsistent linear relations");
  }

  BipartiteDual out;
  out.A_unshifted = RealMatrix::Zero(2, 2);
  out.B_unshifted = RealMatrix::Zero(2, 2);
  out.A_unshifted.diagonal() << a1, a2;
  out.B_unshifted.diagonal() << b1, b2;
  out.A = out.A_unshifted + inst.hbar * RealMatrix::Identity(2, 2);
  out.B = out.B_unshifted + inst.hbar * RealMatrix::Identity(2, 2);
  const double alpha_p = 0.5 * (1 + l), alpha_m = 0.5 * (1 - l);
  const double beta_p = 0.5 * (1 + m), beta_m = 0.5 * (1 - m);
  out.value = alpha_p * out.A(0, 0) + alpha_m * out.A(1, 1) +
              beta_p * out.B(0, 0) + beta_m * out.B(1, 1);

  // Feasibility of the shifted pair for C': the slack blocks have
  // determinant zero by construction, so the minimum eigenvalue should only
  // be rounding away from zero.
  RealMatrix slack = cost_matrix(inst);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      slack(2 * i + j, 2 * i + j) -= out.A(i, i) + out.B(j, j);
    }
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(slack, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9 * (1.0 + slack.cwiseAbs().maxCoeff())) {
    throw std::runtime_error("dual_pair: shifted pair fails feasibility check");
  }
  return out;
}

/// Optimal transport value tr(F C').
inline double mk2_value(const BipartiteInstance& inst) {
  return (coupling_matrix(inst) * cost_matrix(inst)).trace();
}

/// The closed-form objects expressed in a truncated Fock basis.
struct BipartiteLift {
  DensityOperator R;
  DensityOperator S;
  CouplingOperator F;
  Matrix left_basis;   // columns phi+, phi-
  Matrix right_basis;  // columns psi+, psi-
};

inline BipartiteLift lift_to_fock(const BipartiteInstance& inst,
                                  const FockSpace& space,
                                  double tail_tol = 1e-10) {
  if (space.dim_d != 1) {
    throw std::invalid_argument("lift_to_fock: one spatial dimension only");
  }
  if (std::abs(space.hbar - inst.hbar) > 0.0) {
    throw std::invalid_argument("lift_to_fock: hbar mismatch");
  }
  RealVector qa(1), qb(1), zero(1);
  qa << inst.a;
  qb << inst.b;
  zero << 0.0;
  if (coherent_tail(space, qa, zero) > tail_tol ||
      coherent_tail(space, qb, zero) > tail_tol) {
    throw std::runtime_error("lift_to_fock: coherent tail exceeds tail_tol");
  }
  const double l = inst.lambda(), m = inst.mu();
  const Vector ca = coherent_state(space, inst.a, 0.0);
  const Vector cma = coherent_state(space, -inst.a, 0.0);
  const Vector cb = coherent_state(space, inst.b, 0.0);
  const Vector cmb = coherent_state(space, -inst.b, 0.0);

  Matrix left(space.dim(), 2), right(space.dim(), 2);
  left.col(0) = (ca + cma) / std::sqrt(2.0 * (1 + l));
  left.col(1) = (ca - cma) / std::sqrt(2.0 * (1 - l));
  right.col(0) = (cb + cmb) / std::sqrt(2.0 * (1 + m));
  right.col(1) = (cb - cmb) / std::sqrt(2.0 * (1 - m));

  DensityOperator r{space,
                    0.5 * (ca * ca.adjoint() + cma * cma.adjoint()),
                    "bipartite-left"};
  DensityOperator s{space,
                    0.5 * (cb * cb.adjoint() + cmb * cmb.adjoint()),
                    "bipartite-right"};
  r.matrix /= real_trace(r.matrix);
  s.matrix /= real_trace(s.matrix);

  const Matrix basis = kron(left, right);
  const Matrix f_full =
      basis * coupling_matrix(inst).cast<Complex>() * basis.adjoint();
  return {r, s, CouplingOperator{space, f_full, r, s}, left, right};
}

}  // namespace qmk
