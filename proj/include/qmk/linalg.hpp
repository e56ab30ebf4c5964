#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace qmk {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

constexpr double kHermitianTol = 1e-12;

inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline double hermitian_defect(const Matrix& m) {
  return (m - m.adjoint()).norm();
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending,
/// eigenvectors orthonormal columns.
struct EigenSystem {
  RealVector values;
  Matrix vectors;
};

inline EigenSystem hermitian_eigensystem(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(m));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian eigendecomposition failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(m),
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

/// Frobenius-nearest positive semidefinite matrix: symmetrize, then clip
/// negative eigenvalues to zero.
inline Matrix psd_project(const Matrix& m) {
  auto [w, v] = hermitian_eigensystem(m);
  RealVector clipped = w.cwiseMax(0.0);
  return v * clipped.asDiagonal() * v.adjoint();
}

/// Hermitian square root of a PSD matrix. Eigenvalues below
/// rank_cutoff * max_eigenvalue are treated as exact zeros so that the root
/// annihilates the numerical kernel instead of amplifying rounding noise
/// into O(sqrt(eps)) components. Throws if the input is materially negative.
inline Matrix psd_sqrt(const Matrix& m, double neg_tol = 1e-6,
                       double rank_cutoff = 1e-13) {
  auto [w, v] = hermitian_eigensystem(m);
  const double wmax = w.size() > 0 ? std::max(w.maxCoeff(), 0.0) : 0.0;
  RealVector root(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] < -neg_tol) {
      throw std::runtime_error("psd_sqrt: materially negative eigenvalue " +
                               std::to_string(w[i]));
    }
    root[i] = w[i] > rank_cutoff * wmax ? std::sqrt(w[i]) : 0.0;
  }
  return v * root.asDiagonal() * v.adjoint();
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a[i] * b;
  }
  return out;
}

/// Partial trace over the second (right) tensor factor of an (m*n)x(m*n)
/// matrix; returns the m x m block sums M[(i,k)] = sum_j M[(i,j),(k,j)].
inline Matrix trace_out_second(const Matrix& m, Eigen::Index dim_left,
                               Eigen::Index dim_right) {
  if (m.rows() != dim_left * dim_right || m.cols() != m.rows()) {
    throw std::invalid_argument("trace_out_second: dimension mismatch");
  }
  Matrix out = Matrix::Zero(dim_left, dim_left);
  for (Eigen::Index i = 0; i < dim_left; ++i) {
    for (Eigen::Index k = 0; k < dim_left; ++k) {
      Complex acc = 0.0;
      for (Eigen::Index j = 0; j < dim_right; ++j) {
        acc += m(i * dim_right + j, k * dim_right + j);
      }
      out(i, k) = acc;
    }
  }
  return out;
}

/// Partial trace over the first (left) tensor factor.
inline Matrix trace_out_first(const Matrix& m, Eigen::Index dim_left,
                              Eigen::Index dim_right) {
  if (m.rows() != dim_left * dim_right || m.cols() != m.rows()) {
    throw std::invalid_argument("trace_out_first: dimension mismatch");
  }
  Matrix out = Matrix::Zero(dim_right, dim_right);
  for (Eigen::Index j = 0; j < dim_right; ++j) {
    for (Eigen::Index l = 0; l < dim_right; ++l) {
      Complex acc = 0.0;
      for (Eigen::Index i = 0; i < dim_left; ++i) {
        acc += m(i * dim_right + j, i * dim_right + l);
      }
      out(j, l) = acc;
    }
  }
  return out;
}

/// Principal angles (radians, ascending) between the column spans of two
/// matrices with orthonormal columns. Cosines come from the SVD of U*V and
/// sines from the projection residual (I - V V*) U; combining them through
/// atan2 keeps small angles accurate to rounding instead of sqrt(eps).
inline std::vector<double> principal_angles(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows()) {
    throw std::invalid_argument("principal_angles: row dimension mismatch");
  }
  if (u.cols() == 0 || v.cols() == 0) return {};
  Eigen::JacobiSVD<Matrix> svd_cos(u.adjoint() * v);
  RealVector cosines = svd_cos.singularValues();  // descending
  Eigen::JacobiSVD<Matrix> svd_sin(u - v * (v.adjoint() * u));
  RealVector sines = svd_sin.singularValues();    // descending
  const Eigen::Index k = std::min(cosines.size(), sines.size());
  std::vector<double> angles(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double c = std::min(1.0, std::max(0.0, cosines[i]));
    const double s = std::min(1.0, std::max(0.0, sines[sines.size() - 1 - i]));
    angles[i] = std::atan2(s, c);
  }
  return angles;
}

inline double real_trace(const Matrix& m) { return m.trace().real(); }

/// Re tr(A B) without forming the product.
inline double real_trace_product(const Matrix& a, const Matrix& b) {
  return a.cwiseProduct(b.transpose()).sum().real();
}

}  // namespace qmk
