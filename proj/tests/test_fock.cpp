#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "qmk/fock.hpp"
#include "support/quadrature.hpp"

using namespace qmk;
using Catch::Approx;

TEST_CASE("ladder matrix definition") {
  FockSpace one(1.0, 1);
  REQUIRE(ladder_matrix(one).rows() == 1);
  REQUIRE(ladder_matrix(one).cwiseAbs().maxCoeff() == 0.0);

  FockSpace three(1.0, 3);
  Matrix a = ladder_matrix(three);
  REQUIRE(a(1, 2).real() == Approx(std::sqrt(2.0)).margin(1e-15));
  REQUIRE(a(0, 1).real() == Approx(1.0).margin(1e-15));
  REQUIRE(a(2, 1) == Complex(0.0, 0.0));
}

TEST_CASE("ladder commutator picks up the truncation corner") {
  FockSpace space(1.0, 4);
  Matrix a = ladder_matrix(space);
  Matrix comm = a * a.adjoint() - a.adjoint() * a;
  Matrix expected = Matrix::Identity(4, 4);
  expected(3, 3) = 1.0 - 4.0;
  REQUIRE((comm - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("position operator at N=2") {
  FockSpace space(1.0, 2);
  Matrix q = position_operator(space).entries;
  REQUIRE(q(0, 1).real() == Approx(1.0 / std::sqrt(2.0)).margin(1e-15));
  REQUIRE(q(1, 0).real() == Approx(1.0 / std::sqrt(2.0)).margin(1e-15));
  REQUIRE(std::abs(q(0, 0)) < 1e-15);
}

TEST_CASE("canonical commutator holds on interior levels") {
  FockSpace space(0.7, 6);
  Matrix q = position_operator(space).entries;
  Matrix p = momentum_operator(space).entries;
  // [Q, P] = i hbar I interior, so (i/hbar)[P, Q] = I there; the truncation
  // shows up only in the last diagonal entry, 1 - N.
  Matrix comm = Complex(0, 1.0 / space.hbar) * (p * q - q * p);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const Complex expected = i == j ? Complex(1, 0) : Complex(0, 0);
      REQUIRE(std::abs(comm(i, j) - expected) < 1e-13);
    }
  }
  REQUIRE(comm(5, 5).real() == Approx(1.0 - 6.0).margin(1e-13));
}

TEST_CASE("operators are Hermitian") {
  FockSpace space(0.5, 7, 2);
  REQUIRE(hermitian_defect(position_operator(space, 0).entries) < 1e-14);
  REQUIRE(hermitian_defect(position_operator(space, 1).entries) < 1e-14);
  REQUIRE(hermitian_defect(momentum_operator(space, 1).entries) < 1e-14);
  REQUIRE(hermitian_defect(harmonic_hamiltonian(space).entries) < 1e-14);
  REQUIRE_THROWS_AS(position_operator(space, 2), std::invalid_argument);
}

TEST_CASE("harmonic hamiltonian diagonal") {
  FockSpace d1(1.0, 3);
  Matrix h = harmonic_hamiltonian(d1).entries;
  REQUIRE(h(0, 0).real() == Approx(1.0));
  REQUIRE(h(1, 1).real() == Approx(3.0));
  REQUIRE(h(2, 2).real() == Approx(5.0));

  FockSpace d2(1.0, 2, 2);
  Matrix h2 = harmonic_hamiltonian(d2).entries;
  REQUIRE(h2(0, 0).real() == Approx(2.0));
  REQUIRE(h2(1, 1).real() == Approx(4.0));
  REQUIRE(h2(2, 2).real() == Approx(4.0));
  REQUIRE(h2(3, 3).real() == Approx(6.0));

  // minimum entry is d * hbar for any cutoff
  FockSpace d3(0.25, 5, 3);
  Matrix h3 = harmonic_hamiltonian(d3).entries;
  REQUIRE(h3.real().diagonal().minCoeff() == Approx(3 * 0.25));
}

TEST_CASE("position and momentum match quadrature of the defining operators") {
  // exact-compression property: analytic matrix elements against
  // Gauss-Hermite quadrature for m, n <= 12
  const int nmax = 13;
  for (double hbar : {0.5, 1.0, 2.0}) {
    FockSpace space(hbar, nmax);
    const int nodes = 4 * nmax;
    auto q_quad = qmk_test::position_by_quadrature(nmax, hbar, nodes);
    auto p_quad = qmk_test::momentum_by_quadrature(nmax, hbar, nodes);
    Matrix q = position_operator(space).entries;
    Matrix p = momentum_operator(space).entries;
    REQUIRE((q - q_quad.cast<Complex>()).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE((p - p_quad).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("coherent state basics") {
  FockSpace space(1.0, 12);
  Vector ground = coherent_state(space, 0.0, 0.0);
  REQUIRE(std::abs(ground[0] - Complex(1, 0)) < 1e-15);
  REQUIRE(ground.tail(11).norm() < 1e-15);
}

TEST_CASE("coherent overlaps reproduce Gaussian formulas") {
  const double hbar = 0.8;
  FockSpace space(hbar, 40);
  const double a = 1.1, b = -0.4;
  Vector ca = coherent_state(space, a, 0.0);
  Vector cma = coherent_state(space, -a, 0.0);
  Vector cb = coherent_state(space, b, 0.0);
  // <a|-a> = e^{-a^2/hbar}
  REQUIRE(std::abs(overlap(ca, cma) - std::exp(-a * a / hbar)) < 1e-12);
  // <a|b> = e^{-(a-b)^2/(4 hbar)}
  REQUIRE(std::abs(overlap(ca, cb) - std::exp(-(a - b) * (a - b) / (4 * hbar))) <
          1e-12);
  REQUIRE_THROWS_AS(overlap(ca, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("coherent norm deficit follows the Poisson tail") {
  FockSpace space(1.0, 30);
  Vector c = coherent_state(space, 1.0, 0.0);
  REQUIRE(std::abs(c.squaredNorm() - 1.0) < 1e-12);

  // deficit decreases monotonically in the cutoff at fixed (q, p)
  double prev = 1.0;
  for (int n : {4, 6, 8, 12, 16}) {
    FockSpace s(1.0, n);
    const double deficit = 1.0 - coherent_state(s, 1.3, 0.7).squaredNorm();
    REQUIRE(deficit >= -1e-14);
    REQUIRE(deficit <= prev + 1e-14);
    prev = deficit;
    REQUIRE(std::abs(deficit - coherent_tail(s, (RealVector(1) << 1.3).finished(),
                                             (RealVector(1) << 0.7).finished())) <
            1e-12);
  }
}

TEST_CASE("coherent phase matches quadrature of the wave packet") {
  // The global phase e^{i q p / (2 hbar)} is fixed by expanding the Gaussian
  // wave packet over Hermite functions; the quadrature oracle checks the full
  // complex coefficients, not just moduli.
  const int nmax = 16;
  for (auto [hbar, q, p] : {std::tuple{1.0, 0.9, -1.3}, {0.7, -0.6, 0.8},
                            {2.0, 1.5, 1.0}}) {
    FockSpace space(hbar, nmax);
    Vector c = coherent_state(space, q, p);
    auto c_quad = qmk_test::coherent_by_quadrature(nmax, hbar, q, p, 4 * nmax);
    REQUIRE((c - c_quad).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("coherent states in two dimensions") {
  FockSpace space(1.0, 18, 2);
  RealVector q(2), p(2);
  q << 0.5, -0.3;
  p << 0.2, 0.9;
  Vector c = coherent_state(space, q, p);
  REQUIRE(std::abs(c.squaredNorm() - 1.0) < 1e-10);
  // oscillator expectation at a coherent point: |q|^2 + |p|^2 + d hbar
  Matrix h = harmonic_hamiltonian(space).entries;
  const double expected = q.squaredNorm() + p.squaredNorm() + 2.0;
  REQUIRE(std::abs(c.dot(h * c).real() - expected) < 1e-9);
}

TEST_CASE("auto cutoff keeps tails below tolerance") {
  const double z2 = 2.0;  // (q^2+p^2)/(2 hbar)
  const int n = auto_cutoff(z2, 1, 1e-10);
  REQUIRE(poisson_tail(z2, n) < 1e-10);
  REQUIRE(poisson_tail(z2, n - 1) >= 1e-10);
}

TEST_CASE("fock space validation") {
  REQUIRE_THROWS_AS(FockSpace(-1.0, 3), std::invalid_argument);
  REQUIRE_THROWS_AS(FockSpace(1.0, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(FockSpace(1.0, 3, 0), std::invalid_argument);
  FockSpace s(1.0, 3, 2);
  REQUIRE(s.dim() == 9);
  REQUIRE(s.two_particle_dim() == 81);
  REQUIRE(s.level(5, 0) == 1);  // index 5 = 1*3 + 2
  REQUIRE(s.level(5, 1) == 2);
  REQUIRE(s.total_quanta(5) == 3);
}
