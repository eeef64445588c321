#pragma once

// Rydberg-blockade (PXP) toy model on the single ruby-lattice star: the
// blockade-constrained basis, the detuning Hamiltonian with site-resolved
// boundary detunings, and the boundary-detuning ramp that trivializes the
// outer atoms. Mutual information is taken between the two atoms left out of
// the ramped region.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "topoprobe/dense.hpp"
#include "topoprobe/entropy.hpp"
#include "topoprobe/lattice.hpp"
#include "topoprobe/stringnet.hpp"  // evolve_constrained

namespace topo {

class pxp_error : public std::runtime_error {
public:
  explicit pxp_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct BlockadeBasis {
  LinkLattice lattice;
  std::vector<uint16_t> configs;  // admissible bitstrings, ascending
  std::vector<int> index;         // bitstring -> basis index, -1 if blockaded

  int n_atoms() const { return lattice.n_links; }
  int dim() const { return (int)configs.size(); }
};

inline BlockadeBasis build_blockade_basis(const LinkLattice& lat) {
  if (lat.n_links > 20)
    throw pxp_error("build_blockade_basis: too many atoms to enumerate");
  auto pairs = blockade_pairs(lat);
  BlockadeBasis basis;
  basis.lattice = lat;
  basis.index.assign(1 << lat.n_links, -1);
  for (uint32_t c = 0; c < (1u << lat.n_links); ++c) {
    bool ok = true;
    for (const auto& [a, b] : pairs)
      if ((c >> a & 1) && (c >> b & 1)) {
        ok = false;
        break;
      }
    if (ok) {
      basis.index[c] = (int)basis.configs.size();
      basis.configs.push_back((uint16_t)c);
    }
  }
  return basis;
}

// H = P [ Omega sum_i X_i - sum_i delta_i n_i ] P in the blockade basis.
inline Eigen::MatrixXd build_pxp(const BlockadeBasis& basis, double omega,
                                 const Eigen::VectorXd& delta) {
  if (delta.size() != basis.n_atoms())
    throw pxp_error("build_pxp: one detuning per atom required");
  const int dim = basis.dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    uint16_t c = basis.configs[i];
    for (int a = 0; a < basis.n_atoms(); ++a) {
      if (c >> a & 1) h(i, i) -= delta(a);
      int j = basis.index[c ^ (1u << a)];
      if (j >= 0) h(j, i) += omega;
    }
  }
  return h;
}

// Uniform detunings with a boundary override.
inline Eigen::VectorXd pxp_detunings(const BlockadeBasis& basis, double bulk,
                                     double boundary,
                                     const std::vector<int>& boundary_atoms) {
  Eigen::VectorXd delta = Eigen::VectorXd::Constant(basis.n_atoms(), bulk);
  for (int a : boundary_atoms) {
    if (a < 0 || a >= basis.n_atoms())
      throw pxp_error("pxp_detunings: atom out of range");
    delta(a) = boundary;
  }
  return delta;
}

// Drive diagonal +sum_{i in ramped} n_i. With a growing schedule this raises
// the energy of boundary Rydberg excitations, emptying the ramped atoms into
// |g> (the detuning convention of the model is -delta n, so the ramp enters
// with the opposite sign).
inline Eigen::VectorXd pxp_boundary_drive(const BlockadeBasis& basis,
                                          const std::vector<int>& ramped) {
  Eigen::VectorXd drive = Eigen::VectorXd::Zero(basis.dim());
  for (int i = 0; i < basis.dim(); ++i)
    for (int a : ramped) {
      if (a < 0 || a >= basis.n_atoms())
        throw pxp_error("pxp_boundary_drive: atom out of range");
      if (basis.configs[i] >> a & 1) drive(i) += 1.0;
    }
  return drive;
}

// Embeds a blockade-basis state into the full 2^n product space (needed for
// reduced density matrices of atom subsets).
inline State blockade_to_dense(const BlockadeBasis& basis,
                               const Eigen::VectorXcd& psi) {
  if (psi.size() != basis.dim())
    throw pxp_error("blockade_to_dense: state dimension mismatch");
  State out(1ull << basis.n_atoms(), 0.0);
  for (int i = 0; i < basis.dim(); ++i) out[basis.configs[i]] = psi(i);
  return out;
}

inline double pxp_occupation(const BlockadeBasis& basis,
                             const Eigen::VectorXcd& psi, int atom) {
  double n = 0;
  for (int i = 0; i < basis.dim(); ++i)
    if (basis.configs[i] >> atom & 1) n += std::norm(psi(i));
  return n;
}

// Default protocol layout on the 12-atom star: the six spokes carry the
// boundary detuning; four of them form the ramped (shaded) region. The two
// spokes left out mark the openings, and each probe region consists of that
// spoke plus one adjacent hexagon atom (the two outermost atoms at the
// opening).
struct StarProtocol {
  std::vector<int> boundary;       // atoms with the boundary detuning
  std::vector<int> ramped;         // atoms whose detuning is ramped
  std::vector<int> c1, c2;         // the two probe regions
};

inline StarProtocol star_protocol(const LinkLattice& lat, int opening1 = 0,
                                  int opening2 = 3) {
  if (lat.kind != LatticeKind::RubyStar)
    throw pxp_error("star_protocol: ruby-star lattice required");
  if (opening1 < 0 || opening1 >= 6 || opening2 < 0 || opening2 >= 6 ||
      opening1 == opening2)
    throw pxp_error("star_protocol: openings must be two distinct spokes");
  StarProtocol proto;
  for (int s = 6; s < 12; ++s) proto.boundary.push_back(s);
  proto.c1 = {6 + opening1, opening1};
  proto.c2 = {6 + opening2, opening2};
  for (int s : proto.boundary)
    if (s != 6 + opening1 && s != 6 + opening2) proto.ramped.push_back(s);
  return proto;
}

struct PXPTrajectoryPoint {
  double t = 0;
  double delta_b = 0;  // current detuning on the ramped atoms
  double mutual = 0;
  double leading_pair = 0;  // total weight of the two leading snapshots
};

struct PXPRampResult {
  std::vector<PXPTrajectoryPoint> trajectory;
  Eigen::VectorXcd final_state;
};

// Ground state of H(0), then a linear increase of the ramp drive by
// `delta_push` over time T. Mutual information I(C1:C2) is sampled every
// `stride` steps.
inline PXPRampResult run_boundary_ramp(const BlockadeBasis& basis,
                                       const StarProtocol& proto, double omega,
                                       double delta_bulk, double delta_b0,
                                       double delta_push, double total_time,
                                       double dt, int stride = 50) {
  auto delta = pxp_detunings(basis, delta_bulk, delta_b0, proto.boundary);
  Eigen::MatrixXd h0 = build_pxp(basis, omega, delta);
  Eigen::VectorXd drive = pxp_boundary_drive(basis, proto.ramped);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h0);
  Eigen::VectorXcd psi = es.eigenvectors().col(0).cast<std::complex<double>>();

  auto sample = [&](double t, double db, const Eigen::VectorXcd& st) {
    State dense = blockade_to_dense(basis, st);
    std::vector<int> both = proto.c1;
    both.insert(both.end(), proto.c2.begin(), proto.c2.end());
    auto r1 = reduced_density_matrix(dense, basis.n_atoms(), proto.c1);
    auto r2 = reduced_density_matrix(dense, basis.n_atoms(), proto.c2);
    auto r12 = reduced_density_matrix(dense, basis.n_atoms(), both);
    auto top = snapshot_weights(dense, 2);
    double pair = top.empty() ? 0.0 : top[0].probability;
    if (top.size() > 1) pair += top[1].probability;
    return PXPTrajectoryPoint{
        t, db, von_neumann(r1) + von_neumann(r2) - von_neumann(r12), pair};
  };

  RampSchedule sched{0.0, delta_push, total_time};
  PXPRampResult out;
  const long steps = std::lround(total_time / dt);
  if (std::abs(steps * dt - total_time) > 1e-9)
    throw pxp_error("run_boundary_ramp: total time must be a multiple of dt");
  out.trajectory.push_back(sample(0.0, delta_b0, psi));
  long done = 0;
  while (done < steps) {
    long chunk = std::min<long>(stride, steps - done);
    RampSchedule part{sched.value(done * dt), sched.value((done + chunk) * dt),
                      chunk * dt};
    evolve_constrained(h0, drive, part, psi, chunk * dt, dt);
    done += chunk;
    out.trajectory.push_back(
        sample(done * dt, delta_b0 + sched.value(done * dt), psi));
  }
  out.final_state = psi;
  return out;
}

}  // namespace topo
