#pragma once

// Gauss-Hermite quadrature oracle for validating truncated-basis matrix
// elements against the defining integrals. Test-only; kept independent of the
// library's operator construction so that agreement is meaningful.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qmk_test {

struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;          // for integrals against e^{-u^2}
  Eigen::VectorXd weights_plain;    // weights * e^{u^2}: integrate f(u) du directly
};

/// Hermite functions h_0..h_{nmax-1} at u, by the stable three-term
/// recurrence h_{n+1} = sqrt(2/(n+1)) u h_n - sqrt(n/(n+1)) h_{n-1}.
inline Eigen::VectorXd hermite_functions(int nmax, double u) {
  Eigen::VectorXd h(nmax);
  h[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * u * u);
  if (nmax > 1) h[1] = std::sqrt(2.0) * u * h[0];
  for (int n = 1; n + 1 < nmax; ++n) {
    h[n + 1] = std::sqrt(2.0 / (n + 1)) * u * h[n] -
               std::sqrt(static_cast<double>(n) / (n + 1)) * h[n - 1];
  }
  return h;
}

/// Golub-Welsch nodes (eigenvalues of the Jacobi matrix). The compensated
/// weights w e^{u^2} come from the Christoffel identity
/// w_k e^{u_k^2} = 1 / sum_{j<n} h_j(u_k)^2, which stays accurate at the
/// extreme nodes where the raw weights underflow relative precision.
inline GaussHermite gauss_hermite(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double off = std::sqrt(k / 2.0);
    jacobi(k - 1, k) = off;
    jacobi(k, k - 1) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi,
                                                        Eigen::EigenvaluesOnly);
  GaussHermite gh;
  gh.nodes = solver.eigenvalues();
  gh.weights.resize(n);
  gh.weights_plain.resize(n);
  for (int k = 0; k < n; ++k) {
    const double u = gh.nodes[k];
    gh.weights_plain[k] = 1.0 / hermite_functions(n, u).squaredNorm();
    gh.weights[k] = gh.weights_plain[k] * std::exp(-u * u);
  }
  return gh;
}

/// d/du of the Hermite functions: h_n' = sqrt(n/2) h_{n-1} - sqrt((n+1)/2) h_{n+1}.
inline Eigen::VectorXd hermite_function_derivatives(int nmax, double u) {
  Eigen::VectorXd h = hermite_functions(nmax + 1, u);
  Eigen::VectorXd dh(nmax);
  for (int n = 0; n < nmax; ++n) {
    dh[n] = (n > 0 ? std::sqrt(n / 2.0) * h[n - 1] : 0.0) -
            std::sqrt((n + 1) / 2.0) * h[n + 1];
  }
  return dh;
}

/// Matrix elements <m| x |n> of the position operator on the hbar-scaled
/// Hermite basis, by quadrature of the defining multiplication operator.
inline Eigen::MatrixXd position_by_quadrature(int nmax, double hbar, int nodes) {
  const GaussHermite gh = gauss_hermite(nodes);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nmax, nmax);
  for (int k = 0; k < nodes; ++k) {
    const double u = gh.nodes[k];
    const Eigen::VectorXd h = hermite_functions(nmax, u);
    // x = sqrt(hbar) u; basis phi_n(x) = hbar^{-1/4} h_n(x/sqrt(hbar))
    out += gh.weights_plain[k] * std::sqrt(hbar) * u * (h * h.transpose());
  }
  return out;
}

/// Matrix elements <m| -i hbar d/dx |n> (imaginary part only; the matrix is
/// i * antisymmetric real).
inline Eigen::MatrixXcd momentum_by_quadrature(int nmax, double hbar, int nodes) {
  const GaussHermite gh = gauss_hermite(nodes);
  Eigen::MatrixXd deriv = Eigen::MatrixXd::Zero(nmax, nmax);  // int h_m h_n' du
  for (int k = 0; k < nodes; ++k) {
    const double u = gh.nodes[k];
    const Eigen::VectorXd h = hermite_functions(nmax, u);
    const Eigen::VectorXd dh = hermite_function_derivatives(nmax, u);
    deriv += gh.weights_plain[k] * (h * dh.transpose());
  }
  // <m| -i hbar d/dx |n> = -i sqrt(hbar) int h_m h_n' du
  return std::complex<double>(0.0, -std::sqrt(hbar)) *
         deriv.cast<std::complex<double>>();
}

/// Coefficients <n|q,p> of the Gaussian wave packet
/// (pi hbar)^{-1/4} e^{-(x-q)^2 / 2 hbar} e^{i p x / hbar} over the scaled
/// Hermite basis, by quadrature.
inline Eigen::VectorXcd coherent_by_quadrature(int nmax, double hbar, double q,
                                               double p, int nodes) {
  const GaussHermite gh = gauss_hermite(nodes);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(nmax);
  for (int k = 0; k < nodes; ++k) {
    const double u = gh.nodes[k];
    const double x = std::sqrt(hbar) * u;
    const std::complex<double> f =
        std::pow(std::numbers::pi * hbar, -0.25) *
        std::exp(std::complex<double>(-(x - q) * (x - q) / (2.0 * hbar),
                                      p * x / hbar));
    const Eigen::VectorXd h = hermite_functions(nmax, u);
    c += gh.weights_plain[k] * std::sqrt(hbar) * std::pow(hbar, -0.25) * f *
         h.cast<std::complex<double>>();
  }
  return c;
}

/// Fock-basis coefficients of the two-particle ground cost eigenfunction
///   Psi_00(x, y) = (2 hbar)^{-1/2} h_0((x+y)/(2 sqrt(2 hbar))) h_0((x-y)/sqrt(2 hbar))
/// by tensor quadrature, flattened with the x-index slowest.
inline Eigen::VectorXd cost_ground_by_quadrature(int nmax, double hbar, int nodes) {
  const GaussHermite gh = gauss_hermite(nodes);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nmax * nmax);
  const double pref = std::pow(2.0 * hbar, -0.5);
  for (int a = 0; a < nodes; ++a) {
    const double x = std::sqrt(hbar) * gh.nodes[a];
    const Eigen::VectorXd hx = hermite_functions(nmax, gh.nodes[a]);
    for (int b = 0; b < nodes; ++b) {
      const double y = std::sqrt(hbar) * gh.nodes[b];
      const Eigen::VectorXd hy = hermite_functions(nmax, gh.nodes[b]);
      const double u_com = (x + y) / (2.0 * std::sqrt(2.0 * hbar));
      const double u_rel = (x - y) / std::sqrt(2.0 * hbar);
      const double psi = pref * hermite_functions(1, u_com)[0] *
                         hermite_functions(1, u_rel)[0];
      const double w = gh.weights_plain[a] * gh.weights_plain[b] * hbar *
                       std::pow(hbar, -0.5) * psi;
      for (int i = 0; i < nmax; ++i) {
        for (int j = 0; j < nmax; ++j) {
          out[i * nmax + j] += w * hx[i] * hy[j];
        }
      }
    }
  }
  return out;
}

}  // namespace qmk_test
