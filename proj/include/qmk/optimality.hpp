#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qmk/fock.hpp"
#include "qmk/linalg.hpp"
#include "qmk/sdp.hpp"

namespace qmk {

/// Commutator derivation (i/hbar)[conj_op, op]. The phase-space derivatives
/// are D_q S = (i/hbar)[P, S] and D_p S = -(i/hbar)[Q, S]; callers select the
/// sign.
inline Matrix quantum_derivative(const Matrix& op, const Matrix& conj_op,
                                 double hbar) {
  if (op.rows() != conj_op.rows() || op.cols() != conj_op.cols()) {
    throw std::invalid_argument("quantum_derivative: dimension mismatch");
  }
  return Complex(0.0, 1.0 / hbar) * (conj_op * op - op * conj_op);
}

/// Optimality criterion: every eigenvector of F carrying mass must lie in the
/// kernel of (cost - A (x) I - I (x) B). Numerically, the kernel is the span
/// of slack eigenvectors below null_tol = null_tol_factor * ||cost||, and
/// membership is measured by principal angles.
struct KernelCriterion {
  std::vector<double> angles;  // one per F range direction, descending
  bool pass = false;
  int null_dimension = 0;
};

inline KernelCriterion kernel_criterion(const Matrix& cost, const Matrix& a,
                                        const Matrix& b, const Matrix& f,
                                        double tol,
                                        double rank_tol = 1e-9,
                                        double null_tol_factor = 1e-6) {
  const Eigen::Index m = a.rows(), n = b.rows();
  if (cost.rows() != m * n || f.rows() != m * n) {
    throw std::invalid_argument("kernel_criterion: dimension mismatch");
  }
  const Matrix slack =
      hermitize(cost - kron(a, Matrix(Matrix::Identity(n, n))) -
                kron(Matrix(Matrix::Identity(m, m)), b));
  auto [w, v] = hermitian_eigensystem(slack);
  const double cost_norm =
      hermitian_eigensystem(cost).values.cwiseAbs().maxCoeff();
  const double null_tol = null_tol_factor * cost_norm;

  KernelCriterion result;
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) < null_tol) null_cols.push_back(i);
  }
  result.null_dimension = static_cast<int>(null_cols.size());

  auto [wf, vf] = hermitian_eigensystem(hermitize(f));
  const double fmax = std::max(wf.maxCoeff(), 0.0);
  std::vector<Eigen::Index> range_cols;
  for (Eigen::Index i = 0; i < wf.size(); ++i) {
    if (wf[i] > rank_tol * fmax) range_cols.push_back(i);
  }
  if (range_cols.empty()) {
    result.pass = true;
    return result;
  }
  if (null_cols.empty()) {
    result.angles.assign(range_cols.size(), std::numbers::pi / 2.0);
    result.pass = false;
    return result;
  }
  Matrix null_basis(slack.rows(), static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t k = 0; k < null_cols.size(); ++k) {
    null_basis.col(k) = v.col(null_cols[k]);
  }
  // Angle of each F range vector to the null span.
  const Matrix proj = null_basis * null_basis.adjoint();
  for (std::size_t k = 0; k < range_cols.size(); ++k) {
    const Vector phi = vf.col(range_cols[k]);
    const double in_plane = std::min(1.0, (proj * phi).norm());
    result.angles.push_back(std::acos(in_plane));
  }
  std::sort(result.angles.rbegin(), result.angles.rend());
  result.pass = result.angles.front() < tol;
  return result;
}

/// Residual norms of the transport-structure identities, one set of four per
/// spatial axis. Whichever variant was evaluated, the four entries are the
/// Frobenius norms of the compressed identity matrices driven by
/// (P_j left, Q_j left, P_j right, Q_j right) in that order.
struct AxisResiduals {
  double q_left = 0.0;   // identity generated by P_j on the left factor
  double p_left = 0.0;   // identity generated by Q_j on the left factor
  double q_right = 0.0;  // identity generated by P_j on the right factor
  double p_right = 0.0;  // identity generated by Q_j on the right factor
};

struct StructureReport {
  enum class Variant { full_space, finite_rank };
  Variant variant = Variant::finite_rank;
  std::vector<AxisResiduals> per_axis;
  Matrix script_a;  // (H - A)/2, or the projected variant
  Matrix script_b;

  double max_residual() const {
    double r = 0.0;
    for (const auto& ax : per_axis) {
      r = std::max({r, ax.q_left, ax.p_left, ax.q_right, ax.p_right});
    }
    return r;
  }
};

/// Full-space structure residuals:
///   F^{1/2}(I (x) q_j - D_{q_j}A (x) I)F^{1/2} = 0  (and the p_j line),
///   F^{1/2}(q_j (x) I - I (x) D_{q_j}B)F^{1/2} = 0  (and the p_j line),
/// with script A = (H - A)/2, script B = (H - B)/2. Requires (A, B) extended
/// to the full one-particle space.
inline StructureReport transport_residuals_full(const Matrix& f, const Matrix& a,
                                                const Matrix& b,
                                                const FockSpace& space) {
  const Eigen::Index n = space.dim();
  if (f.rows() != n * n || a.rows() != n || b.rows() != n) {
    throw std::invalid_argument("transport_residuals_full: dimension mismatch");
  }
  StructureReport report;
  report.variant = StructureReport::Variant::full_space;
  const Matrix h = harmonic_hamiltonian(space).entries;
  report.script_a = 0.5 * (h - a);
  report.script_b = 0.5 * (h - b);
  const Matrix sqrt_f = psd_sqrt(f);
  const Matrix id = Matrix::Identity(n, n);
  for (int j = 0; j < space.dim_d; ++j) {
    const Matrix q = position_operator(space, j).entries;
    const Matrix p = momentum_operator(space, j).entries;
    AxisResiduals ax;
    const Matrix dq_a = quantum_derivative(report.script_a, p, space.hbar);
    const Matrix dp_a = -quantum_derivative(report.script_a, q, space.hbar);
    const Matrix dq_b = quantum_derivative(report.script_b, p, space.hbar);
    const Matrix dp_b = -quantum_derivative(report.script_b, q, space.hbar);
    ax.q_left = (sqrt_f * (kron(id, q) - kron(dq_a, id)) * sqrt_f).norm();
    ax.p_left = (sqrt_f * (kron(id, p) - kron(dp_a, id)) * sqrt_f).norm();
    ax.q_right = (sqrt_f * (kron(q, id) - kron(id, dq_b)) * sqrt_f).norm();
    ax.p_right = (sqrt_f * (kron(p, id) - kron(id, dp_b)) * sqrt_f).norm();
    report.per_axis.push_back(ax);
  }
  return report;
}

namespace detail {

/// Operators compressed onto a support basis.
struct ProjectedFrame {
  std::vector<Matrix> q;  // one per axis
  std::vector<Matrix> p;
  Matrix h;
};

inline ProjectedFrame project_frame(const FockSpace& space, const Matrix& basis) {
  ProjectedFrame frame;
  for (int j = 0; j < space.dim_d; ++j) {
    frame.q.push_back(basis.adjoint() * position_operator(space, j).entries * basis);
    frame.p.push_back(basis.adjoint() * momentum_operator(space, j).entries * basis);
  }
  frame.h = hermitize(basis.adjoint() * harmonic_hamiltonian(space).entries * basis);
  return frame;
}

}  // namespace detail

/// Finite-rank structure residuals on the supports. With projected operators
/// W^R = P W P, W^S = Q W Q and script A' = (P H P - A)/2,
/// script B' = (Q H Q - B)/2, the four identities per axis j are
///   F^{1/2}( sum_k (i/hbar)[W_j, Q_k^R] (x) Q_k^S + (i/hbar)[W_j, P_k^R] (x) P_k^S
///            - (i/hbar)[W_j, A'] (x) I ) F^{1/2} = 0,  W_j in {P_j^R, Q_j^R},
/// and mirrored with the roles of the factors exchanged and B' in place of
/// A'. The same commutator (i/hbar)[W, .] appears in every term of a line;
/// the bracket with the potential is not sign-flipped on the Q_j lines, which
/// is what direct evaluation on the closed-form matching instance confirms.
inline StructureReport transport_residuals_finite_rank(
    const Matrix& f, const Matrix& a, const Matrix& b, const Matrix& left_basis,
    const Matrix& right_basis, const FockSpace& space, double orth_tol = 1e-10) {
  require_orthonormal(left_basis, orth_tol);
  require_orthonormal(right_basis, orth_tol);
  const Eigen::Index m = left_basis.cols(), n = right_basis.cols();
  if (f.rows() != m * n || a.rows() != m || b.rows() != n) {
    throw std::invalid_argument(
        "transport_residuals_finite_rank: dimension mismatch");
  }
  const auto left = detail::project_frame(space, left_basis);
  const auto right = detail::project_frame(space, right_basis);

  StructureReport report;
  report.variant = StructureReport::Variant::finite_rank;
  report.script_a = 0.5 * (left.h - a);
  report.script_b = 0.5 * (right.h - b);
  const Matrix sqrt_f = psd_sqrt(f);
  const Matrix id_l = Matrix::Identity(m, m);
  const Matrix id_r = Matrix::Identity(n, n);
  const double hbar = space.hbar;

  auto left_line = [&](const Matrix& w) {
    Matrix acc = -kron(quantum_derivative(report.script_a, w, hbar), id_r);
    for (int k = 0; k < space.dim_d; ++k) {
      acc += kron(quantum_derivative(left.q[k], w, hbar), right.q[k]);
      acc += kron(quantum_derivative(left.p[k], w, hbar), right.p[k]);
    }
    return (sqrt_f * acc * sqrt_f).norm();
  };
  auto right_line = [&](const Matrix& w) {
    Matrix acc = -kron(id_l, quantum_derivative(report.script_b, w, hbar));
    for (int k = 0; k < space.dim_d; ++k) {
      acc += kron(left.q[k], quantum_derivative(right.q[k], w, hbar));
      acc += kron(left.p[k], quantum_derivative(right.p[k], w, hbar));
    }
    return (sqrt_f * acc * sqrt_f).norm();
  };

  for (int j = 0; j < space.dim_d; ++j) {
    AxisResiduals ax;
    ax.q_left = left_line(left.p[j]);
    ax.p_left = left_line(left.q[j]);
    ax.q_right = right_line(right.p[j]);
    ax.p_right = right_line(right.q[j]);
    report.per_axis.push_back(ax);
  }
  return report;
}

/// Expected phase-space coordinates and their transported images. The
/// transported coordinate of axis j is tr(D_{q_j}A' R), tr(D_{p_j}A' R) with
/// A' = (P H P - A)/2 on the left support; at an optimal pair it reproduces
/// the expectations of the right marginal, which is the finite-rank shadow of
/// the Ehrenfest transport relation.
struct EhrenfestCheck {
  std::vector<double> z_left;         // (tr(Q_j R), tr(P_j R)) per axis
  std::vector<double> z_right;        // (tr(Q_j S), tr(P_j S)) per axis
  std::vector<double> z_transported;  // (tr(D_{q_j}A' R), tr(D_{p_j}A' R))
  double gap = 0.0;                   // max |z_right - z_transported|
};

inline EhrenfestCheck ehrenfest_check(const Matrix& f, const Matrix& a,
                                      const Matrix& left_basis,
                                      const Matrix& right_basis,
                                      const FockSpace& space) {
  const Eigen::Index m = left_basis.cols(), n = right_basis.cols();
  if (f.rows() != m * n || a.rows() != m) {
    throw std::invalid_argument("ehrenfest_check: dimension mismatch");
  }
  const auto left = detail::project_frame(space, left_basis);
  const auto right = detail::project_frame(space, right_basis);
  const Matrix r = trace_out_second(f, m, n);
  const Matrix s = trace_out_first(f, m, n);
  const Matrix script_a = 0.5 * (left.h - a);

  EhrenfestCheck check;
  for (int j = 0; j < space.dim_d; ++j) {
    check.z_left.push_back(real_trace_product(left.q[j], r));
    check.z_left.push_back(real_trace_product(left.p[j], r));
    check.z_right.push_back(real_trace_product(right.q[j], s));
    check.z_right.push_back(real_trace_product(right.p[j], s));
    const Matrix dq = quantum_derivative(script_a, left.p[j], space.hbar);
    const Matrix dp = -quantum_derivative(script_a, left.q[j], space.hbar);
    check.z_transported.push_back(real_trace_product(dq, r));
    check.z_transported.push_back(real_trace_product(dp, r));
  }
  for (std::size_t i = 0; i < check.z_right.size(); ++i) {
    check.gap = std::max(check.gap,
                         std::abs(check.z_right[i] - check.z_transported[i]));
  }
  return check;
}

}  // namespace qmk
