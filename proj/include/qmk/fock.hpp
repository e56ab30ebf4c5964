#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qmk/linalg.hpp"

namespace qmk {

/// Truncated harmonic-oscillator (Fock) basis: `cutoff` levels per spatial
/// axis, `dim_d` axes tensored together, Planck constant `hbar`.
struct FockSpace {
  double hbar = 1.0;
  int cutoff = 1;
  int dim_d = 1;

  FockSpace() = default;
  FockSpace(double hbar_, int cutoff_, int dim_d_ = 1)
      : hbar(hbar_), cutoff(cutoff_), dim_d(dim_d_) {
    if (hbar <= 0.0) throw std::invalid_argument("FockSpace: hbar must be > 0");
    if (cutoff < 1) throw std::invalid_argument("FockSpace: cutoff must be >= 1");
    if (dim_d < 1) throw std::invalid_argument("FockSpace: dim_d must be >= 1");
  }

  /// One-particle dimension N^d.
  Eigen::Index dim() const {
    Eigen::Index n = 1;
    for (int j = 0; j < dim_d; ++j) n *= cutoff;
    return n;
  }

  Eigen::Index two_particle_dim() const { return dim() * dim(); }

  /// Occupation of axis `j` in the one-particle basis state `index`
  /// (axis 0 varies slowest, matching Kronecker-product layout).
  int level(Eigen::Index index, int j) const {
    Eigen::Index stride = 1;
    for (int k = dim_d - 1; k > j; --k) stride *= cutoff;
    return static_cast<int>((index / stride) % cutoff);
  }

  int total_quanta(Eigen::Index index) const {
    int total = 0;
    for (int j = 0; j < dim_d; ++j) total += level(index, j);
    return total;
  }

  bool operator==(const FockSpace& other) const {
    return hbar == other.hbar && cutoff == other.cutoff && dim_d == other.dim_d;
  }
};

/// Dense operator on a truncated Fock space (one- or two-particle).
struct OperatorMatrix {
  FockSpace space;
  Matrix entries;
};

/// Single-factor annihilation matrix: a[n-1, n] = sqrt(n).
inline Matrix ladder_matrix(const FockSpace& space) {
  const int n = space.cutoff;
  Matrix a = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

namespace detail {

/// Embeds a single-factor operator on axis `axis`, identity elsewhere.
inline Matrix on_axis(const FockSpace& space, const Matrix& factor, int axis) {
  if (axis < 0 || axis >= space.dim_d) {
    throw std::invalid_argument("axis out of range");
  }
  Matrix out = axis == 0 ? factor : Matrix(Matrix::Identity(space.cutoff, space.cutoff));
  for (int j = 1; j < space.dim_d; ++j) {
    const Matrix& next = (j == axis)
                             ? factor
                             : Matrix(Matrix::Identity(space.cutoff, space.cutoff));
    out = kron(out, next);
  }
  return out;
}

}  // namespace detail

/// Position operator on axis `axis` (0-based): Q = sqrt(hbar/2) (a + a*).
/// Matrix elements are exact; truncation is a compression, not a product of
/// truncated factors.
inline OperatorMatrix position_operator(const FockSpace& space, int axis = 0) {
  Matrix a = ladder_matrix(space);
  Matrix q1 = std::sqrt(space.hbar / 2.0) * (a + a.adjoint());
  return {space, detail::on_axis(space, q1, axis)};
}

/// Momentum operator on axis `axis`: P = i sqrt(hbar/2) (a* - a).
inline OperatorMatrix momentum_operator(const FockSpace& space, int axis = 0) {
  Matrix a = ladder_matrix(space);
  Matrix p1 = Complex(0.0, 1.0) * std::sqrt(space.hbar / 2.0) * (a.adjoint() - a);
  return {space, detail::on_axis(space, p1, axis)};
}

/// Exact compression of H = sum_j (Q_j^2 + P_j^2): diagonal with entries
/// hbar (2(n_1 + ... + n_d) + d). Built analytically so the spectral lower
/// bound hbar*d survives truncation.
inline OperatorMatrix harmonic_hamiltonian(const FockSpace& space) {
  const Eigen::Index n = space.dim();
  Matrix h = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i, i) = space.hbar * (2.0 * space.total_quanta(i) + space.dim_d);
  }
  return {space, h};
}

/// Analytic number operator sum_j a_j* a_j (diagonal, exact at any cutoff).
inline OperatorMatrix number_operator(const FockSpace& space) {
  const Eigen::Index n = space.dim();
  Matrix h = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) = space.total_quanta(i);
  return {space, h};
}

/// Conjugate-linear-in-first-argument inner product <u|v>.
inline Complex overlap(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("overlap: dimension mismatch");
  }
  return u.dot(v);
}

/// Truncated coefficient vector of the coherent state centered at (q, p).
/// Per factor c_n = e^{i q p / (2 hbar)} e^{-|z|^2/2} z^n / sqrt(n!) with
/// z = (q + i p) / sqrt(2 hbar); the global phase e^{i q p / 2 hbar} matches
/// the Gaussian wave packet (pi hbar)^{-1/4} e^{-(x-q)^2/2 hbar} e^{i p x / hbar}
/// expanded over Hermite functions. The vector is not renormalized; the
/// truncation deficit 1 - |c|^2 is the Poisson tail of mean |z|^2.
inline Vector coherent_state(const FockSpace& space, const RealVector& q,
                             const RealVector& p) {
  if (q.size() != space.dim_d || p.size() != space.dim_d) {
    throw std::invalid_argument("coherent_state: q, p must have length dim_d");
  }
  const int n = space.cutoff;
  Vector out;
  for (int j = 0; j < space.dim_d; ++j) {
    const Complex z = Complex(q[j], p[j]) / std::sqrt(2.0 * space.hbar);
    const Complex phase =
        std::exp(Complex(0.0, q[j] * p[j] / (2.0 * space.hbar)));
    Vector c(n);
    Complex term = phase * std::exp(-0.5 * std::norm(z));
    c[0] = term;
    for (int k = 1; k < n; ++k) {
      term *= z / std::sqrt(static_cast<double>(k));
      c[k] = term;
    }
    out = (j == 0) ? c : Vector(kron(out, c));
  }
  return out;
}

inline Vector coherent_state(const FockSpace& space, double q, double p) {
  RealVector qv(1), pv(1);
  qv << q;
  pv << p;
  return coherent_state(space, qv, pv);
}

/// Upper tail P[X >= n] of a Poisson variable with the given mean.
inline double poisson_tail(double mean, int n) {
  if (mean <= 0.0) return n > 0 ? 0.0 : 1.0;
  double term = std::exp(-mean);
  for (int k = 1; k < n; ++k) term *= mean / k;
  // term = pmf(n-1); sum forward from pmf(n)
  double tail = 0.0;
  for (int k = n; k < n + 2000; ++k) {
    term *= mean / k;
    tail += term;
    if (term < tail * 1e-18 && k > mean) break;
  }
  return tail;
}

/// Truncation deficit 1 - |c|^2 of a coherent state at (q, p): the sum over
/// axes of the Poisson tails with means |z_j|^2.
inline double coherent_tail(const FockSpace& space, const RealVector& q,
                            const RealVector& p) {
  double deficit = 0.0;
  for (int j = 0; j < space.dim_d; ++j) {
    const double mean =
        (q[j] * q[j] + p[j] * p[j]) / (2.0 * space.hbar);
    deficit += poisson_tail(mean, space.cutoff);
  }
  return deficit;
}

/// Smallest per-axis cutoff N whose Poisson tail stays below tail_tol for a
/// phase-space point of squared radius max_z2 = max_j (q_j^2+p_j^2)/(2 hbar).
inline int auto_cutoff(double max_z2, int dim_d, double tail_tol = 1e-10) {
  int n = 2;
  while (dim_d * poisson_tail(max_z2, n) >= tail_tol) {
    ++n;
    if (n > 4096) throw std::runtime_error("auto_cutoff: no cutoff below 4096");
  }
  return n;
}

}  // namespace qmk
