#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmk/fock.hpp"
#include "qmk/linalg.hpp"

namespace qmk {

/// Hermitian PSD trace-one matrix in a truncated Fock basis.
struct DensityOperator {
  FockSpace space;
  Matrix matrix;
  std::string label;
  /// Trace removed by truncation before renormalization (0 when exact).
  double truncation_deficit = 0.0;
};

struct DensityTolerances {
  double hermitian = 1e-12;
  double eigenvalue = 1e-10;
  double trace = 1e-10;
};

inline void validate_density(const DensityOperator& rho,
                             const DensityTolerances& tol = {}) {
  if (rho.matrix.rows() != rho.space.dim() || rho.matrix.rows() != rho.matrix.cols()) {
    throw std::invalid_argument("density: dimension does not match space");
  }
  if (hermitian_defect(rho.matrix) > tol.hermitian) {
    throw std::invalid_argument("density: not Hermitian within tolerance");
  }
  if (std::abs(real_trace(rho.matrix) - 1.0) > tol.trace) {
    throw std::invalid_argument("density: trace differs from one");
  }
  if (min_eigenvalue(rho.matrix) < -tol.eigenvalue) {
    throw std::invalid_argument("density: negative eigenvalue");
  }
}

/// Finite weighted point set {(q_k, p_k), w_k} on phase space R^{2d},
/// weights nonnegative and summing to one.
struct PhasePoint {
  RealVector q;
  RealVector p;
};

struct PhaseSpaceMeasure {
  std::vector<PhasePoint> points;
  std::vector<double> weights;

  int dim_d() const {
    return points.empty() ? 0 : static_cast<int>(points.front().q.size());
  }
};

inline PhaseSpaceMeasure make_measure_1d(
    const std::vector<std::pair<double, double>>& qp,
    const std::vector<double>& weights) {
  PhaseSpaceMeasure mu;
  for (const auto& [q, p] : qp) {
    RealVector qv(1), pv(1);
    qv << q;
    pv << p;
    mu.points.push_back({qv, pv});
  }
  mu.weights = weights;
  return mu;
}

inline void validate_measure(const PhaseSpaceMeasure& mu, double tol = 1e-12) {
  if (mu.points.empty()) throw std::invalid_argument("measure: empty support");
  if (mu.points.size() != mu.weights.size()) {
    throw std::invalid_argument("measure: points/weights size mismatch");
  }
  double sum = 0.0;
  for (double w : mu.weights) {
    if (w < 0.0) throw std::invalid_argument("measure: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw std::invalid_argument("measure: weights do not sum to one");
  }
  const auto d = mu.points.front().q.size();
  for (const auto& pt : mu.points) {
    if (pt.q.size() != d || pt.p.size() != d) {
      throw std::invalid_argument("measure: inconsistent point dimension");
    }
  }
}

/// Hermitian PSD trace-one matrix on the two-particle space together with its
/// declared marginals. Supported on Ker(R)^perp (x) Ker(S)^perp.
struct CouplingOperator {
  FockSpace space;  // one-particle space; matrix is dim()^2 square
  Matrix matrix;
  DensityOperator marginal_left;
  DensityOperator marginal_right;
};

/// Largest squared coherent displacement |z|^2 = (|q|^2+|p|^2)/(2 hbar)
/// appearing in the measure; drives the cutoff choice.
inline double max_displacement_sq(const PhaseSpaceMeasure& mu, double hbar) {
  double max_z2 = 0.0;
  for (const auto& pt : mu.points) {
    max_z2 = std::max(max_z2,
                      (pt.q.squaredNorm() + pt.p.squaredNorm()) / (2.0 * hbar));
  }
  return max_z2;
}

/// Toeplitz quantization of a discrete symbol: sum_k w_k |q_k,p_k><q_k,p_k|,
/// renormalized to unit trace after truncation. The removed trace is recorded
/// in `truncation_deficit`. Throws when any point's truncation tail exceeds
/// tail_tol.
inline DensityOperator toeplitz_quantize(const PhaseSpaceMeasure& mu,
                                         const FockSpace& space,
                                         double tail_tol = 1e-10) {
  validate_measure(mu);
  if (mu.dim_d() != space.dim_d) {
    throw std::invalid_argument("toeplitz_quantize: dimension mismatch");
  }
  const Eigen::Index n = space.dim();
  Matrix rho = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < mu.points.size(); ++k) {
    if (coherent_tail(space, mu.points[k].q, mu.points[k].p) > tail_tol) {
      throw std::runtime_error(
          "toeplitz_quantize: coherent tail exceeds tail_tol at cutoff " +
          std::to_string(space.cutoff));
    }
    const Vector c = coherent_state(space, mu.points[k].q, mu.points[k].p);
    rho += mu.weights[k] * (c * c.adjoint());
  }
  const double tr = real_trace(rho);
  DensityOperator out{space, rho / tr, "toeplitz", 1.0 - tr};
  return out;
}

/// Husimi transform (2 pi hbar)^{-d} <q,p|A|q,p> of a one-particle operator,
/// or (2 pi hbar)^{-2d} <z1,z2|A|z1,z2> of a two-particle operator when q, p
/// have length 2d (first d components are z1, last d are z2).
inline Complex husimi(const FockSpace& space, const Matrix& op,
                      const RealVector& q, const RealVector& p) {
  const Eigen::Index n = space.dim();
  const double two_pi_hbar = 2.0 * std::numbers::pi * space.hbar;
  if (op.rows() == n) {
    if (q.size() != space.dim_d || p.size() != space.dim_d) {
      throw std::invalid_argument("husimi: point must have length dim_d");
    }
    const Vector c = coherent_state(space, q, p);
    return c.dot(op * c) / std::pow(two_pi_hbar, space.dim_d);
  }
  if (op.rows() == n * n) {
    if (q.size() != 2 * space.dim_d || p.size() != 2 * space.dim_d) {
      throw std::invalid_argument(
          "husimi: two-particle point must have length 2*dim_d");
    }
    const Vector c1 = coherent_state(space, q.head(space.dim_d), p.head(space.dim_d));
    const Vector c2 = coherent_state(space, q.tail(space.dim_d), p.tail(space.dim_d));
    const Vector c = kron(c1, c2);
    return c.dot(op * c) / std::pow(two_pi_hbar, 2 * space.dim_d);
  }
  throw std::invalid_argument("husimi: operator dimension matches neither one- nor two-particle space");
}

inline Complex husimi(const DensityOperator& rho, const RealVector& q,
                      const RealVector& p) {
  return husimi(rho.space, rho.matrix, q, p);
}

/// Marginal of a two-particle matrix after tracing out the second factor:
/// returns the left marginal R.
inline DensityOperator partial_trace_right(const Matrix& f, const FockSpace& space,
                                           const std::string& label = "") {
  const Eigen::Index n = space.dim();
  if (f.rows() != n * n) {
    throw std::invalid_argument(
        "partial trace: matrix dimension is not the square of the one-particle dimension");
  }
  return {space, trace_out_second(f, n, n), label};
}

/// Marginal after tracing out the first factor: returns the right marginal S.
inline DensityOperator partial_trace_left(const Matrix& f, const FockSpace& space,
                                          const std::string& label = "") {
  const Eigen::Index n = space.dim();
  if (f.rows() != n * n) {
    throw std::invalid_argument(
        "partial trace: matrix dimension is not the square of the one-particle dimension");
  }
  return {space, trace_out_first(f, n, n), label};
}

inline DensityOperator partial_trace_right(const CouplingOperator& f) {
  return partial_trace_right(f.matrix, f.space, f.marginal_left.label);
}

inline DensityOperator partial_trace_left(const CouplingOperator& f) {
  return partial_trace_left(f.matrix, f.space, f.marginal_right.label);
}

/// Product coupling R (x) S; the unique coupling when R is a rank-one
/// projection.
inline CouplingOperator tensor_coupling(const DensityOperator& r,
                                        const DensityOperator& s) {
  if (!(r.space == s.space)) {
    throw std::invalid_argument("tensor_coupling: spaces differ");
  }
  return {r.space, kron(r.matrix, s.matrix), r, s};
}

/// Orthonormal basis of Ker(R)^perp: eigenvectors with eigenvalue above
/// rank_tol relative to the largest.
inline Matrix support_projector(const DensityOperator& rho,
                                double rank_tol = 1e-9) {
  auto [w, v] = hermitian_eigensystem(rho.matrix);
  const double wmax = w.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > rank_tol * wmax) keep.push_back(i);
  }
  Matrix basis(rho.matrix.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) basis.col(k) = v.col(keep[k]);
  return basis;
}

struct CouplingTolerances {
  double hermitian = 1e-10;
  double psd = 1e-10;
  double trace = 1e-10;
  double marginal = 1e-7;
};

inline void validate_coupling(const CouplingOperator& f,
                              const CouplingTolerances& tol = {}) {
  const Eigen::Index n = f.space.dim();
  if (f.matrix.rows() != n * n || f.matrix.cols() != n * n) {
    throw std::invalid_argument("coupling: dimension mismatch");
  }
  if (hermitian_defect(f.matrix) > tol.hermitian) {
    throw std::invalid_argument("coupling: not Hermitian");
  }
  if (std::abs(real_trace(f.matrix) - 1.0) > tol.trace) {
    throw std::invalid_argument("coupling: trace differs from one");
  }
  if (min_eigenvalue(f.matrix) < -tol.psd) {
    throw std::invalid_argument("coupling: negative eigenvalue");
  }
  const Matrix r = trace_out_second(f.matrix, n, n);
  const Matrix s = trace_out_first(f.matrix, n, n);
  if ((r - f.marginal_left.matrix).norm() > tol.marginal ||
      (s - f.marginal_right.matrix).norm() > tol.marginal) {
    throw std::invalid_argument("coupling: marginals do not match declaration");
  }
}

/// Cyclicity identity for the energy trace:
///   tr(F^{1/2} (H (x) I) F^{1/2}) = tr(R^{1/2} H R^{1/2})
/// whenever the left marginal of F is R. A gap beyond rounding signals a
/// marginal-constraint violation.
struct EnergyTraceCheck {
  double lhs;
  double rhs;
  double gap;
  bool marginal_consistent;
};

inline EnergyTraceCheck energy_trace_identity_check(const CouplingOperator& f,
                                                    const OperatorMatrix& h,
                                                    double marginal_tol = 1e-7) {
  const Eigen::Index n = f.space.dim();
  if (h.entries.rows() != n) {
    throw std::invalid_argument("energy_trace_identity_check: H dimension mismatch");
  }
  const Matrix sqrt_f = psd_sqrt(f.matrix);
  const Matrix h_left = kron(h.entries, Matrix(Matrix::Identity(n, n)));
  const double lhs = real_trace(sqrt_f * h_left * sqrt_f);
  const Matrix sqrt_r = psd_sqrt(f.marginal_left.matrix);
  const double rhs = real_trace(sqrt_r * h.entries * sqrt_r);
  const double realized =
      (trace_out_second(f.matrix, n, n) - f.marginal_left.matrix).norm();
  return {lhs, rhs, std::abs(lhs - rhs), realized < marginal_tol};
}

}  // namespace qmk
