// Rydberg-blockade model on the single ruby-lattice star: constrained basis,
// Hamiltonian limits, and the boundary-detuning ramp that reveals a log(2)
// mutual information between the two opening regions.

#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "topoprobe/entropy.hpp"
#include "topoprobe/lattice.hpp"
#include "topoprobe/pxp.hpp"

using namespace topo;

namespace {

constexpr double kTau = 2 * M_PI;

}  // namespace

TEST_CASE("blockade basis enumerates admissible configurations") {
  auto star = build_ruby_star();
  auto basis = build_blockade_basis(star);
  CHECK(basis.n_atoms() == 12);
  CHECK(basis.dim() == 198);
  CHECK(basis.dim() < (1 << 12));

  auto pairs = blockade_pairs(star);
  CHECK(pairs.size() == 18);
  for (uint16_t c : basis.configs)
    for (const auto& [a, b] : pairs) CHECK(!((c >> a & 1) && (c >> b & 1)));
  CHECK(std::is_sorted(basis.configs.begin(), basis.configs.end()));
  CHECK(basis.configs.front() == 0);  // all atoms in |g>
  for (int i = 0; i < basis.dim(); ++i) CHECK(basis.index[basis.configs[i]] == i);
  // the fully blockaded string (two adjacent atoms excited) is rejected
  CHECK(basis.index[(1u << 0) | (1u << 1)] == -1);
}

TEST_CASE("pxp hamiltonian is symmetric and classical at zero drive") {
  auto star = build_ruby_star();
  auto basis = build_blockade_basis(star);
  auto delta = pxp_detunings(basis, 4 * kTau, 2 * kTau, {6, 7, 8, 9, 10, 11});
  auto h = build_pxp(basis, kTau, delta);
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12);

  // Omega = 0: purely diagonal; the ground state is the admissible pattern
  // with the largest total detuning reward.
  auto hc = build_pxp(basis, 0.0, delta);
  CHECK(hc.diagonal().asDiagonal().toDenseMatrix() == hc);
  int best = 0;
  for (int i = 1; i < basis.dim(); ++i)
    if (hc(i, i) < hc(best, best)) best = i;
  double reward = 0;
  for (int a = 0; a < 12; ++a)
    if (basis.configs[best] >> a & 1) reward += delta(a);
  for (int i = 0; i < basis.dim(); ++i) {
    double r = 0;
    for (int a = 0; a < 12; ++a)
      if (basis.configs[i] >> a & 1) r += delta(a);
    CHECK(r <= reward + 1e-12);
  }
}

TEST_CASE("initial star ground state has uncorrelated openings") {
  auto star = build_ruby_star();
  auto basis = build_blockade_basis(star);
  auto proto = star_protocol(star);
  auto res = run_boundary_ramp(basis, proto, kTau, 4 * kTau, 2 * kTau,
                               10 * kTau, 0.1, 0.002, 50);
  // a near-instant quench leaves the mutual information at its initial value
  CHECK(res.trajectory.front().mutual < 0.01);
  CHECK(res.trajectory.back().mutual < 0.05);
}

TEST_CASE("boundary ramp builds log 2 mutual information at the openings") {
  auto star = build_ruby_star();
  auto basis = build_blockade_basis(star);
  auto proto = star_protocol(star);
  CHECK(proto.ramped == std::vector<int>{7, 8, 10, 11});
  CHECK(proto.c1 == std::vector<int>{6, 0});
  CHECK(proto.c2 == std::vector<int>{9, 3});

  auto res = run_boundary_ramp(basis, proto, kTau, 4 * kTau, 2 * kTau,
                               10 * kTau, 17.45, 0.002, 1745);
  CHECK(res.trajectory.front().mutual < 0.01);
  double final_i = res.trajectory.back().mutual;
  CHECK(final_i > 0.9 * std::log(2.0));
  CHECK(final_i < 1.1 * std::log(2.0));
  CHECK(res.trajectory.back().leading_pair > 0.53);
  CHECK(res.trajectory.back().leading_pair < 0.63);

  // the shaded atoms are forced into |g>
  for (int a : proto.ramped)
    CHECK(pxp_occupation(basis, res.final_state, a) < 0.01);
  CHECK(std::abs(res.final_state.norm() - 1.0) < 1e-8);

  // the star's reflection symmetry shows up as exactly degenerate snapshot
  // weights of the two alternating hexagon patterns
  auto top = snapshot_weights(blockade_to_dense(basis, res.final_state), 3);
  uint64_t alt_a = 0b000000101010, alt_b = 0b000000010101;
  double pa = -1, pb = -1;
  for (const auto& s : top) {
    if (s.configuration == alt_a) pa = s.probability;
    if (s.configuration == alt_b) pb = s.probability;
  }
  REQUIRE(pa >= 0);
  REQUIRE(pb >= 0);
  CHECK(pa == doctest::Approx(pb).epsilon(1e-8));
}

TEST_CASE("pxp guards reject malformed input") {
  auto star = build_ruby_star();
  auto basis = build_blockade_basis(star);
  CHECK_THROWS_AS(star_protocol(star, 2, 2), pxp_error);
  CHECK_THROWS_AS(star_protocol(star, -1, 3), pxp_error);
  CHECK_THROWS_AS(star_protocol(build_square_link_lattice(1), 0, 3), pxp_error);
  CHECK_THROWS_AS(build_pxp(basis, 1.0, Eigen::VectorXd::Zero(3)), pxp_error);
  CHECK_THROWS_AS(pxp_detunings(basis, 1.0, 1.0, {99}), pxp_error);
  auto proto = star_protocol(star);
  CHECK_THROWS_AS(run_boundary_ramp(basis, proto, kTau, 4 * kTau, 2 * kTau,
                                    10 * kTau, 1.0001, 0.002, 50),
                  pxp_error);
}
