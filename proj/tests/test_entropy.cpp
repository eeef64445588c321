#include "doctest.h"

#include <cmath>

#include "topoprobe/entropy.hpp"

using namespace topo;

TEST_CASE("von Neumann entropy basics") {
  Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
  CHECK(von_neumann(mixed) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Eigen::MatrixXcd pure = Eigen::MatrixXcd::Zero(2, 2);
  pure(0, 0) = 1.0;
  CHECK(von_neumann(pure) == doctest::Approx(0.0));

  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(von_neumann(bad), entropy_error);  // trace 2

  Eigen::MatrixXcd neg = Eigen::MatrixXcd::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(von_neumann(neg), entropy_error);
}

TEST_CASE("Renyi-2 entropy") {
  Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
  CHECK(renyi2(mixed) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(renyi2_from_purity(1.0) == doctest::Approx(0.0));
  CHECK(renyi2_from_purity(0.25) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK_THROWS_AS(renyi2_from_purity(0.0), entropy_error);
  CHECK_THROWS_AS(renyi2_from_purity(1.1), entropy_error);
}

TEST_CASE("mutual information report and bounds") {
  double l2 = std::log(2.0);
  auto r = mutual_information(2 * l2, 2 * l2, 3 * l2);
  CHECK(r.mutual == doctest::Approx(l2));
  auto zero = mutual_information(0, 0, 0);
  CHECK(zero.mutual == doctest::Approx(0.0));
  CHECK_THROWS_AS(mutual_information(1.0, 1.0, 2.5), entropy_error);   // I < 0
  CHECK_THROWS_AS(mutual_information(0.1, 2.0, 0.0), entropy_error);   // I > 2 min
  // Renyi-2 kind skips the bounds.
  CHECK_NOTHROW(mutual_information(1.0, 1.0, 2.5, EntropyKind::Renyi2));
}

TEST_CASE("snapshot weights rank basis probabilities") {
  std::vector<std::complex<double>> amps = {
      {0.1, 0.0}, {0.0, 0.8}, {0.5, 0.0}, {0.0, 0.0}};
  auto top = snapshot_weights(amps, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].configuration == 1);
  CHECK(top[0].probability == doctest::Approx(0.64));
  CHECK(top[1].configuration == 2);
  CHECK(top[1].probability == doctest::Approx(0.25));
}
