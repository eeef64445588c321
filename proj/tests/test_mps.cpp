#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "topoprobe/mps.hpp"

using namespace topo;
using namespace std::complex_literals;

TEST_CASE("product MPS reports product expectations") {
  Eigen::VectorXcd plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  auto psi = product_mps(4, plus);
  Eigen::VectorXcd z(2);
  z << 1.0, -1.0;
  CHECK(std::abs(diagonal_expectation(psi, {{1, z}})) < 1e-12);
  CHECK(std::abs(diagonal_expectation(psi, {{0, z}, {3, z}})) < 1e-12);
  CHECK(diagonal_expectation(psi, {}).real() == doctest::Approx(1.0));
  for (int b = 0; b <= 4; ++b) CHECK(psi.bond_entropy(b) == doctest::Approx(0.0));
}

TEST_CASE("single-site unitaries rotate expectations") {
  Eigen::VectorXcd up(2);
  up << 1.0, 0.0;
  auto psi = product_mps(3, up);
  // Hadamard on site 1: <Z_1> goes from 1 to 0.
  Eigen::MatrixXcd had(2, 2);
  had << 1, 1, 1, -1;
  had /= std::sqrt(2.0);
  apply_site_unitary(psi, 1, had);
  Eigen::VectorXcd z(2);
  z << 1.0, -1.0;
  CHECK(std::abs(diagonal_expectation(psi, {{1, z}})) < 1e-12);
  CHECK(diagonal_expectation(psi, {{0, z}}).real() == doctest::Approx(1.0));
}

TEST_CASE("diagonal bond gate entangles and matches the dense picture") {
  // CZ-like phase gate on |++>: produces a state with bond entropy and exact
  // known correlators.
  Eigen::VectorXcd plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  auto psi = product_mps(2, plus);
  Eigen::VectorXcd phases(4);  // exp(-i pi/4 * Z Z): diag over (p,q)
  double a = M_PI / 4;
  phases << std::polar(1.0, -a), std::polar(1.0, a), std::polar(1.0, a),
      std::polar(1.0, -a);
  double disc = apply_diagonal_bond_gate(psi, 0, phases, 8);
  CHECK(disc < 1e-12);
  // exp(-i pi/4 ZZ)|++> = (|++> - i |-->)/sqrt(2): maximally entangled.
  CHECK(psi.bond_entropy(1) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  Eigen::VectorXcd z(2);
  z << 1.0, -1.0;
  CHECK(std::abs(diagonal_expectation(psi, {{0, z}, {1, z}})) < 1e-12);
}

TEST_CASE("bond gates reproduce dense amplitudes on a random 3-site chain") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  Eigen::VectorXcd plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  auto psi = product_mps(3, plus);
  Eigen::VectorXcd dense = Eigen::VectorXcd::Constant(8, 1.0 / std::sqrt(8.0));

  for (int rep = 0; rep < 6; ++rep) {
    int bond = rep % 2;
    Eigen::VectorXcd phases(4);
    for (int j = 0; j < 4; ++j) phases(j) = std::polar(1.0, u(rng));
    apply_diagonal_bond_gate(psi, bond, phases, 8);
    for (int s = 0; s < 8; ++s) {
      int p = (s >> bond) & 1;       // dense index: site i is bit i
      int q = (s >> (bond + 1)) & 1;
      dense(s) *= phases(p * 2 + q);
    }
  }
  // Rotate every site by a Hadamard so the accumulated phases show up in
  // basis probabilities, then compare against the dense state.
  Eigen::MatrixXcd had(2, 2);
  had << 1, 1, 1, -1;
  had /= std::sqrt(2.0);
  for (int i = 0; i < 3; ++i) apply_site_unitary(psi, i, had);
  Eigen::VectorXcd rotated = Eigen::VectorXcd::Zero(8);
  for (int s = 0; s < 8; ++s)
    for (int s2 = 0; s2 < 8; ++s2) {
      std::complex<double> amp = 1.0;
      for (int i = 0; i < 3; ++i) amp *= had((s >> i) & 1, (s2 >> i) & 1);
      rotated(s) += amp * dense(s2);
    }
  dense = rotated;
  for (int s = 0; s < 8; ++s) {
    std::map<int, Eigen::VectorXcd> proj;
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2);
      v((s >> i) & 1) = 1.0;
      proj[i] = v;
    }
    double want = std::norm(dense(s));
    CHECK(diagonal_expectation(psi, proj).real() == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("truncation cap reports discarded weight") {
  // Chain of entangling gates with chi_max = 1 must discard weight.
  Eigen::VectorXcd plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  auto psi = product_mps(2, plus);
  Eigen::VectorXcd phases(4);
  double a = M_PI / 4;
  phases << std::polar(1.0, -a), std::polar(1.0, a), std::polar(1.0, a),
      std::polar(1.0, -a);
  double disc = apply_diagonal_bond_gate(psi, 0, phases, 1);
  CHECK(disc == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(psi.max_bond_dim() == 1);
}

TEST_CASE("mps guards reject malformed input") {
  Eigen::VectorXcd plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK_THROWS_AS(product_mps(1, plus), mps_error);
  Eigen::VectorXcd unnorm(2);
  unnorm << 1.0, 1.0;
  CHECK_THROWS_AS(product_mps(3, unnorm), mps_error);
  auto psi = product_mps(3, plus);
  CHECK_THROWS_AS(apply_site_unitary(psi, 0, Eigen::MatrixXcd::Identity(3, 3)), mps_error);
  Eigen::VectorXcd phases = Eigen::VectorXcd::Ones(4);
  CHECK_THROWS_AS(apply_diagonal_bond_gate(psi, 2, phases, 8), mps_error);
  Eigen::VectorXcd z(2);
  z << 1.0, -1.0;
  CHECK_THROWS_AS(diagonal_expectation(psi, {{5, z}}), mps_error);
}
