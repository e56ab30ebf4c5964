#pragma once

#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "qmk/cost.hpp"
#include "qmk/linalg.hpp"
#include "qmk/states.hpp"

namespace qmk {

/// Coupling problem restricted to the marginal supports:
///   minimize tr(F cost) over Hermitian PSD F with
///   tr_2 F = marginal_left, tr_1 F = marginal_right.
struct PrimalProblem {
  Matrix cost;           // Hermitian, (r m * r s) square
  Matrix marginal_left;  // Hermitian PSD trace-one, r m square
  Matrix marginal_right; // Hermitian PSD trace-one, r s square

  Eigen::Index dim_left() const { return marginal_left.rows(); }
  Eigen::Index dim_right() const { return marginal_right.rows(); }
};

struct SolveOptions {
  double rho = 1.0;
  double tol = 1e-9;        // combined residual, relative to 1 + |F|_F
  int max_iter = 200000;
  double over_relaxation = 1.6;
  double feas_tol = 1e-9;   // dual slack may dip this far below zero
};

struct SolveReport {
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  Matrix F;
  Matrix A;
  Matrix B;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  /// Combined residual over the most recent iterations (diagnostic).
  std::vector<double> residual_history;
};

inline void validate_problem(const PrimalProblem& p) {
  const Eigen::Index m = p.dim_left(), n = p.dim_right();
  if (p.cost.rows() != m * n || p.cost.cols() != m * n) {
    throw std::invalid_argument("solve: cost dimension mismatch");
  }
  if (std::abs(real_trace(p.marginal_left) - 1.0) > 1e-8 ||
      std::abs(real_trace(p.marginal_right) - 1.0) > 1e-8) {
    throw std::invalid_argument("solve: infeasible marginals (trace mismatch)");
  }
  if (hermitian_defect(p.cost) > 1e-8 ||
      hermitian_defect(p.marginal_left) > 1e-10 ||
      hermitian_defect(p.marginal_right) > 1e-10) {
    throw std::invalid_argument("solve: inputs not Hermitian");
  }
}

/// Orthogonal (Frobenius-nearest) projection onto the affine set
/// {F : tr_2 F = R, tr_1 F = S}. Writing the correction as
/// Y_L (x) I + I (x) Y_R, the normal equations
///   n Y_L + tr(Y_R) I = R - tr_2 M,   m Y_R + tr(Y_L) I = S - tr_1 M
/// are solved in closed form with the balanced gauge
/// tr(Y_L) = tr(Y_R) = (1 - tr M)/(m + n); the projection itself is
/// independent of the gauge since t I (x) I - I (x) t I spans the null
/// direction of the lift.
inline Matrix affine_project(const Matrix& m_in, const PrimalProblem& p) {
  const Eigen::Index m = p.dim_left(), n = p.dim_right();
  if (m_in.rows() != m * n || m_in.cols() != m * n) {
    throw std::invalid_argument("affine_project: dimension mismatch");
  }
  const Matrix dl = p.marginal_left - trace_out_second(m_in, m, n);
  const Matrix dr = p.marginal_right - trace_out_first(m_in, m, n);
  const Complex t = (1.0 - m_in.trace()) / static_cast<double>(m + n);
  const Matrix yl = (dl - t * Matrix::Identity(m, m)) / static_cast<double>(n);
  const Matrix yr = (dr - t * Matrix::Identity(n, n)) / static_cast<double>(m);
  return m_in + kron(yl, Matrix(Matrix::Identity(n, n))) +
         kron(Matrix(Matrix::Identity(m, m)), yr);
}

namespace detail {

/// Least-squares split of M onto the subspace {A (x) I + I (x) B}:
///   n A + tr(B) I = tr_2 M,   m B + tr(A) I = tr_1 M,
/// gauge-balanced with tr(A) = tr(B) = tr(M)/(m + n).
inline std::pair<Matrix, Matrix> split_kron_sum(const Matrix& m_in,
                                                Eigen::Index m, Eigen::Index n) {
  const Complex t = m_in.trace() / static_cast<double>(m + n);
  Matrix a = (trace_out_second(m_in, m, n) - t * Matrix::Identity(m, m)) /
             static_cast<double>(n);
  Matrix b = (trace_out_first(m_in, m, n) - t * Matrix::Identity(n, n)) /
             static_cast<double>(m);
  return {hermitize(a), hermitize(b)};
}

}  // namespace detail

/// Operator-splitting solver: alternating projection onto the marginal
/// affine set and the PSD cone with a scaled running multiplier and
/// over-relaxation. Deterministic; no randomness, fixed iteration order.
/// The returned F is the affine-feasible iterate, so its partial traces
/// match the marginals to rounding; its PSD defect is bounded by the primal
/// residual. The dual pair is recovered from the multiplier and shifted to
/// exact feasibility.
inline SolveReport solve_primal(const PrimalProblem& p,
                                const SolveOptions& opts = {}) {
  validate_problem(p);
  const Eigen::Index m = p.dim_left(), n = p.dim_right();
  const Matrix cost = hermitize(p.cost);

  Matrix z = affine_project(Matrix::Zero(m * n, m * n), p);
  Matrix u = Matrix::Zero(m * n, m * n);
  Matrix x = z;

  SolveReport report;
  std::deque<double> history;
  const double alpha = opts.over_relaxation;
  int iter = 0;
  double r_primal = 0.0, r_dual = 0.0;
  bool converged = false;
  for (iter = 1; iter <= opts.max_iter; ++iter) {
    x = affine_project(z - u - cost / opts.rho, p);
    const Matrix x_relaxed = alpha * x + (1.0 - alpha) * z;
    const Matrix z_next = psd_project(x_relaxed + u);
    u += x_relaxed - z_next;
    r_primal = (x - z_next).norm();
    r_dual = opts.rho * (z_next - z).norm();
    z = z_next;
    const double combined = std::max(r_primal, r_dual);
    history.push_back(combined);
    if (history.size() > 64) history.pop_front();
    if (combined <= opts.tol * (1.0 + x.norm())) {
      converged = true;
      break;
    }
  }

  report.F = hermitize(x);
  report.iterations = std::min(iter, opts.max_iter);
  report.converged = converged;
  report.primal_residual = r_primal;
  report.dual_residual = r_dual;
  report.residual_history.assign(history.begin(), history.end());
  report.primal_value = real_trace_product(report.F, cost);

  // Multiplier stationarity gives cost + rho U in the span of
  // {A (x) I + I (x) B}; the orthogonal remainder is the converged slack.
  auto [a, b] = detail::split_kron_sum(cost + opts.rho * u, m, n);
  Matrix slack = cost - kron(a, Matrix(Matrix::Identity(n, n))) -
                 kron(Matrix(Matrix::Identity(m, m)), b);
  const double nu = min_eigenvalue(slack);
  if (nu < 0.0) {
    a -= 0.5 * (-nu) * Matrix::Identity(m, m);
    b -= 0.5 * (-nu) * Matrix::Identity(n, n);
  }
  report.A = a;
  report.B = b;
  report.dual_value = real_trace_product(p.marginal_left, a) +
                      real_trace_product(p.marginal_right, b);
  report.gap = report.primal_value - report.dual_value;
  return report;
}

struct DualSolution {
  Matrix A;
  Matrix B;
  double value;
};

inline DualSolution solve_dual(const PrimalProblem& p,
                               const SolveOptions& opts = {}) {
  SolveReport report = solve_primal(p, opts);
  return {report.A, report.B, report.dual_value};
}

/// Optimality certificate: duality gap, marginal residuals, dual feasibility
/// margin, the low end of the slack spectrum, and the largest principal angle
/// between range(F) and the near-null eigenspace of the slack.
struct CertificateSummary {
  double gap = 0.0;
  double marginal_residual_left = 0.0;
  double marginal_residual_right = 0.0;
  double dual_feasibility_margin = 0.0;  // min eig of (cost - A(x)I - I(x)B)
  std::vector<double> smallest_slack_eigenvalues;
  double kernel_angle = 0.0;             // radians; 0 when either span is empty
  double complementarity = 0.0;          // tr(F (cost - A(x)I - I(x)B))
  bool dual_feasible = false;
};

inline CertificateSummary certify(const SolveReport& report,
                                  const PrimalProblem& p,
                                  double feas_tol = 1e-9,
                                  double rank_tol = 1e-9,
                                  double null_tol_factor = 1e-6) {
  const Eigen::Index m = p.dim_left(), n = p.dim_right();
  CertificateSummary cert;
  cert.gap = report.gap;
  cert.marginal_residual_left =
      (trace_out_second(report.F, m, n) - p.marginal_left).norm();
  cert.marginal_residual_right =
      (trace_out_first(report.F, m, n) - p.marginal_right).norm();

  const Matrix slack = hermitize(
      p.cost - kron(report.A, Matrix(Matrix::Identity(n, n))) -
      kron(Matrix(Matrix::Identity(m, m)), report.B));
  auto [w, v] = hermitian_eigensystem(slack);
  cert.dual_feasibility_margin = w.minCoeff();
  cert.dual_feasible = cert.dual_feasibility_margin >= -feas_tol;
  const int keep = static_cast<int>(std::min<Eigen::Index>(4, w.size()));
  cert.smallest_slack_eigenvalues.assign(w.data(), w.data() + keep);
  cert.complementarity = real_trace_product(report.F, slack);

  const double cost_norm =
      hermitian_eigensystem(p.cost).values.cwiseAbs().maxCoeff();
  const double null_tol = null_tol_factor * cost_norm;
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (std::abs(w[i]) < null_tol) null_cols.push_back(i);
  }
  auto [wf, vf] = hermitian_eigensystem(report.F);
  const double fmax = std::max(wf.maxCoeff(), 0.0);
  std::vector<Eigen::Index> range_cols;
  for (Eigen::Index i = 0; i < wf.size(); ++i) {
    if (wf[i] > rank_tol * fmax) range_cols.push_back(i);
  }
  if (!null_cols.empty() && !range_cols.empty()) {
    Matrix null_basis(slack.rows(), static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t k = 0; k < null_cols.size(); ++k) {
      null_basis.col(k) = v.col(null_cols[k]);
    }
    Matrix range_basis(report.F.rows(), static_cast<Eigen::Index>(range_cols.size()));
    for (std::size_t k = 0; k < range_cols.size(); ++k) {
      range_basis.col(k) = vf.col(range_cols[k]);
    }
    const auto angles = principal_angles(null_basis, range_basis);
    cert.kernel_angle = angles.empty() ? 0.0 : angles.front();
    for (double theta : angles) cert.kernel_angle = std::max(cert.kernel_angle, theta);
  } else if (!range_cols.empty()) {
    cert.kernel_angle = std::numbers::pi / 2.0;  // no null space to contain range(F)
  }
  return cert;
}

/// Full-space transport distance: compresses both densities onto their
/// supports, projects the cost, solves there, and lifts the coupling back.
struct DistanceResult {
  SolveReport report;       // on the supports
  Matrix left_basis;        // Ker(R)^perp basis columns
  Matrix right_basis;       // Ker(S)^perp basis columns
  Matrix coupling_full;     // lifted optimal coupling
  double mk2 = 0.0;
};

inline DistanceResult compute_mk2(const DensityOperator& r,
                                  const DensityOperator& s,
                                  const SolveOptions& opts = {},
                                  double rank_tol = 1e-9) {
  if (!(r.space == s.space)) {
    throw std::invalid_argument("compute_mk2: spaces differ");
  }
  const CostMatrix cost = build_cost(r.space);
  DistanceResult out;
  out.left_basis = support_projector(r, rank_tol);
  out.right_basis = support_projector(s, rank_tol);
  PrimalProblem problem;
  problem.cost = project_cost(cost, out.left_basis, out.right_basis);
  problem.marginal_left =
      hermitize(out.left_basis.adjoint() * r.matrix * out.left_basis);
  problem.marginal_right =
      hermitize(out.right_basis.adjoint() * s.matrix * out.right_basis);
  // Compression can shed a sliver of trace at rank_tol scale; renormalize so
  // the solver sees exact densities.
  problem.marginal_left /= real_trace(problem.marginal_left);
  problem.marginal_right /= real_trace(problem.marginal_right);
  out.report = solve_primal(problem, opts);
  const Matrix basis = kron(out.left_basis, out.right_basis);
  out.coupling_full = basis * out.report.F * basis.adjoint();
  out.mk2 = out.report.primal_value;
  return out;
}

}  // namespace qmk
