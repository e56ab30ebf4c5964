#pragma once

#include <stdexcept>
#include <vector>

#include "qmk/fock.hpp"
#include "qmk/linalg.hpp"

namespace qmk {

/// Two-particle quantum transport cost
///   C = sum_j ((x_j - y_j)^2 - hbar^2 (d_{x_j} - d_{y_j})^2)
/// in the truncated two-particle Fock basis. Hermitian, bounded below by
/// 2 d hbar (Heisenberg), block diagonal with respect to the total number
/// of quanta of both particles.
struct CostMatrix {
  FockSpace space;
  Matrix entries;
};

struct CostOptions {
  /// Guard against accidentally huge dense two-particle matrices.
  Eigen::Index max_one_particle_dim = 64;
};

/// Assembles C = H(x)I + I(x)H - 2 sum_j (Q_j(x)Q_j + P_j(x)P_j), each summand
/// an exact compression, so the whole matrix is the exact compression of C.
inline CostMatrix build_cost(const FockSpace& space, const CostOptions& opts = {}) {
  const Eigen::Index n = space.dim();
  if (n > opts.max_one_particle_dim) {
    throw std::runtime_error(
        "build_cost: one-particle dimension " + std::to_string(n) +
        " exceeds limit " + std::to_string(opts.max_one_particle_dim));
  }
  const Matrix id = Matrix::Identity(n, n);
  const Matrix h = harmonic_hamiltonian(space).entries;
  Matrix c = kron(h, id) + kron(id, h);
  for (int j = 0; j < space.dim_d; ++j) {
    const Matrix q = position_operator(space, j).entries;
    const Matrix p = momentum_operator(space, j).entries;
    c -= 2.0 * (kron(q, q) + kron(p, p));
  }
  return {space, hermitize(c)};
}

inline EigenSystem eigensystem(const CostMatrix& cost) {
  return hermitian_eigensystem(cost.entries);
}

/// Total quanta of both particles for a two-particle basis index.
inline int total_quanta_two_particle(const FockSpace& space, Eigen::Index index) {
  const Eigen::Index n = space.dim();
  return space.total_quanta(index / n) + space.total_quanta(index % n);
}

/// A total-quanta block is fully enclosed by the truncation iff every basis
/// state with that total is representable, i.e. T <= cutoff - 1.
inline bool block_enclosed(const FockSpace& space, int total_quanta) {
  return total_quanta <= space.cutoff - 1;
}

/// Indices of the two-particle basis states with the given total quanta.
inline std::vector<Eigen::Index> block_indices(const FockSpace& space,
                                               int total_quanta) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < space.two_particle_dim(); ++i) {
    if (total_quanta_two_particle(space, i) == total_quanta) out.push_back(i);
  }
  return out;
}

inline void require_orthonormal(const Matrix& basis, double tol) {
  Matrix gram = basis.adjoint() * basis;
  gram -= Matrix::Identity(basis.cols(), basis.cols());
  if (gram.cwiseAbs().maxCoeff() > tol) {
    throw std::invalid_argument("basis is not orthonormal within tolerance");
  }
}

/// Compression of C to span(left) (x) span(right) in the supplied product
/// basis; columns of `left_basis` and `right_basis` must be orthonormal.
/// Compressions preserve the lower bound 2 d hbar.
inline Matrix project_cost(const CostMatrix& cost, const Matrix& left_basis,
                           const Matrix& right_basis,
                           double orth_tol = 1e-10) {
  require_orthonormal(left_basis, orth_tol);
  require_orthonormal(right_basis, orth_tol);
  const Matrix b = kron(left_basis, right_basis);
  if (b.rows() != cost.entries.rows()) {
    throw std::invalid_argument("project_cost: basis dimension mismatch");
  }
  return hermitize(b.adjoint() * cost.entries * b);
}

}  // namespace qmk
