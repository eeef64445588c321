#pragma once

// One-dimensional dual description of the trivializing ramp: a transverse
// field Ising chain (Z2) or N-state clock chain (ZN) living on the ring
// plaquettes, with scheduled couplings on the driven bonds and no coupling
// across the two openings. Includes a TEBD evolver on top of mps.hpp, dense
// oracles for small chains, reconstruction of the physical opening state by
// operator tomography, and the ramp-time scaling study.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topoprobe/dense.hpp"
#include "topoprobe/entropy.hpp"
#include "topoprobe/lattice.hpp"
#include "topoprobe/mps.hpp"

namespace topo {

class chain_error : public std::runtime_error {
public:
  explicit chain_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Ring of n_sites dual spins. Bond b joins sites (b, b+1 mod n); driven bonds
// carry the scheduled coupling h(t), the bonds listed under the two openings
// carry none. Site ordering is chosen so that only opening bonds wrap around
// the chain end, which makes every driven bond MPS-local.
struct ChainHamiltonian {
  int n_sites = 0;
  int phys_dim = 2;
  double eps = 1.0;
  RampSchedule schedule;
  std::vector<int> driven_bonds;
  std::array<std::vector<int>, 2> opening_bonds;

  // Uniform on-site term: -eps X for Ising, -(eps/N) sum_s tau^s for clock.
  Eigen::MatrixXcd site_term() const {
    const int d = phys_dim;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
    if (d == 2) {
      h(0, 1) = h(1, 0) = -eps;
    } else {
      for (int s = 0; s < d; ++s)
        for (int k = 0; k < d; ++k) h((k + s) % d, k) -= eps / d;
    }
    return h;
  }

  // Diagonal of the bond coupling, indexed p*d+q. Multiplied by h(t).
  Eigen::VectorXd bond_diag() const {
    const int d = phys_dim;
    Eigen::VectorXd v(d * d);
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q)
        v(p * d + q) = d == 2 ? (1 - 2 * p) * (1 - 2 * q)
                              : 2.0 * std::cos(2.0 * M_PI * (q - p) / d);
    return v;
  }

  int n_driven() const { return (int)driven_bonds.size(); }

  void validate() const {
    if (n_sites < 2) throw chain_error("chain: need at least 2 sites");
    if (phys_dim < 2) throw chain_error("chain: physical dimension must be >= 2");
    std::vector<int> seen(n_sites, 0);
    for (int b : driven_bonds) {
      if (b < 0 || b >= n_sites) throw chain_error("chain: driven bond out of range");
      if (b == n_sites - 1)
        throw chain_error("chain: driven bond may not wrap the chain end");
      seen[b] = 1;
    }
    for (const auto& op : opening_bonds)
      for (int b : op) {
        if (b < 0 || b >= n_sites) throw chain_error("chain: opening bond out of range");
        if (seen[b]) throw chain_error("chain: bond both driven and open");
      }
  }
};

namespace detail {

inline ChainHamiltonian ring_chain(int phys_dim, int n_driven, double eps,
                                   RampSchedule schedule, int opening_width) {
  if (n_driven < 2) throw chain_error("dual chain: need at least 2 driven bonds");
  if (opening_width < 1) throw chain_error("dual chain: opening width must be >= 1");
  ChainHamiltonian c;
  c.phys_dim = phys_dim;
  c.eps = eps;
  c.schedule = schedule;
  const int w = opening_width;
  const int n = n_driven + 2 * w;
  c.n_sites = n;
  // Opening 1 occupies the wrapping bonds n-w .. n-1, opening 2 sits across
  // the ring; everything else is driven.
  for (int b = 0; b < w; ++b) c.opening_bonds[0].push_back(n - w + b);
  if (n / 2 - w < 1) throw chain_error("dual chain: openings overlap");
  for (int b = 0; b < w; ++b) c.opening_bonds[1].push_back(n / 2 - w + b);
  for (int b = 0; b < n - 1; ++b) {
    bool open = false;
    for (const auto& op : c.opening_bonds)
      for (int ob : op) open = open || ob == b;
    if (!open) c.driven_bonds.push_back(b);
  }
  c.validate();
  if (c.n_driven() != n_driven) throw chain_error("dual chain: opening layout clash");
  return c;
}

}  // namespace detail

inline ChainHamiltonian build_dual_ising(int n_driven, double eps,
                                         RampSchedule schedule,
                                         int opening_width = 2) {
  return detail::ring_chain(2, n_driven, eps, schedule, opening_width);
}

// N-state clock chain: on-site -(eps/N) sum_s tau^s, bonds h(t)(sigma^dag
// sigma + h.c.). For N = 2 the clock operators reduce to Paulis and the 1/N
// weight plus the constant s=0 term are absorbed into the -eps X convention,
// so the builder coincides with build_dual_ising. Ramps should run to
// *negative* coupling (clock-aligning); the positive sign pins neighboring
// phase differences to pi, which is frustrated for odd N.
inline ChainHamiltonian build_dual_clock(int n_states, int n_driven, double eps,
                                         RampSchedule schedule,
                                         int opening_width = 2) {
  if (n_states < 2) throw chain_error("build_dual_clock: need N >= 2");
  return detail::ring_chain(n_states, n_driven, eps, schedule, opening_width);
}

// Ground state of the pure transverse part: the uniform on-site state.
inline MPSState initial_chain_mps(const ChainHamiltonian& chain) {
  Eigen::VectorXcd plus =
      Eigen::VectorXcd::Constant(chain.phys_dim, 1.0 / std::sqrt((double)chain.phys_dim));
  return product_mps(chain.n_sites, plus);
}

// --------------------------------------------------------------------------
// Dense oracles.

// Qubit chains re-use the split-step engine; the uniform initial state is
// the all-|+> product.
inline HamiltonianSpec chain_to_spec(const ChainHamiltonian& chain) {
  if (chain.phys_dim != 2)
    throw chain_error("chain_to_spec: only qubit chains map to Pauli terms");
  chain.validate();
  HamiltonianSpec h;
  h.n_sites = chain.n_sites;
  h.schedules.push_back(chain.schedule);
  for (int i = 0; i < chain.n_sites; ++i)
    h.add_term(std::uint64_t(1) << i, 0, -chain.eps);
  for (int b : chain.driven_bonds)
    h.add_term(0, (std::uint64_t(3)) << b, 1.0, 0);
  return h;
}

inline State chain_initial_dense(const ChainHamiltonian& chain) {
  if (chain.phys_dim != 2)
    throw chain_error("chain_initial_dense: qubit chains only");
  State psi(std::size_t(1) << chain.n_sites,
            1.0 / std::sqrt(double(std::size_t(1) << chain.n_sites)));
  return psi;
}

// Full matrix for small chains of any physical dimension (clock validation).
inline Eigen::MatrixXcd dense_chain_hamiltonian(const ChainHamiltonian& chain,
                                                double t) {
  chain.validate();
  double dim_d = std::pow((double)chain.phys_dim, chain.n_sites);
  if (dim_d > 4096.5) throw chain_error("dense_chain_hamiltonian: chain too large");
  const int d = chain.phys_dim;
  const long dim = (long)std::llround(dim_d);
  Eigen::MatrixXcd h1 = chain.site_term();
  Eigen::VectorXd bd = chain.bond_diag();
  const double hv = chain.schedule.value(t);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<int> digits(chain.n_sites);
  for (long s = 0; s < dim; ++s) {
    long r = s;
    for (int i = 0; i < chain.n_sites; ++i) { digits[i] = r % d; r /= d; }
    double diag = 0;
    for (int b : chain.driven_bonds)
      diag += hv * bd(digits[b] * d + digits[(b + 1) % chain.n_sites]);
    h(s, s) += diag;
    long stride = 1;
    for (int i = 0; i < chain.n_sites; ++i) {
      for (int p = 0; p < d; ++p) {
        if (p == digits[i]) { h(s, s) += h1(p, p).real(); continue; }
        long s2 = s + (p - digits[i]) * stride;
        h(s2, s) += h1(p, digits[i]);
      }
      stride *= d;
    }
  }
  return h;
}

// --------------------------------------------------------------------------
// TEBD evolution: Strang split into the exact on-site half steps and the
// mutually commuting diagonal bond gates at the midpoint coupling.

struct TebdLog {
  double truncation = 0;   // cumulative relative discarded weight
  int max_bond = 1;
  double max_step_truncation = 0;
};

using ChainSampler = std::function<void(double t, const MPSState& psi)>;

inline MPSState tebd_evolve(const ChainHamiltonian& chain, int chi_max,
                            double dt, double total_time, TebdLog* log = nullptr,
                            const ChainSampler& sampler = {},
                            int sample_stride = 0) {
  chain.validate();
  if (chi_max < 2) throw chain_error("tebd_evolve: chi_max must be >= 2");
  if (dt <= 0) throw chain_error("tebd_evolve: dt must be positive");
  const long n_steps = std::lround(total_time / dt);
  if (std::abs(n_steps * dt - total_time) > 1e-9 * std::max(1.0, total_time))
    throw chain_error("tebd_evolve: total time is not a multiple of dt");

  MPSState psi = initial_chain_mps(chain);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(chain.site_term());
  Eigen::VectorXcd phase_half(chain.phys_dim);
  for (int j = 0; j < chain.phys_dim; ++j)
    phase_half(j) = std::polar(1.0, -0.5 * dt * es.eigenvalues()(j));
  Eigen::MatrixXcd u_half = es.eigenvectors() * phase_half.asDiagonal() *
                            es.eigenvectors().adjoint();
  const Eigen::VectorXd bd = chain.bond_diag();

  if (sampler) sampler(0.0, psi);
  for (long step = 0; step < n_steps; ++step) {
    const double t = step * dt;
    const double hm = chain.schedule.value(t + 0.5 * dt);
    for (int i = 0; i < psi.n_sites(); ++i) apply_site_unitary(psi, i, u_half);
    if (hm != 0) {
      Eigen::VectorXcd phases(bd.size());
      for (int j = 0; j < bd.size(); ++j)
        phases(j) = std::polar(1.0, -dt * hm * bd(j));
      double step_disc = 0;
      for (int b : chain.driven_bonds)
        step_disc += apply_diagonal_bond_gate(psi, b, phases, chi_max);
      if (log) {
        log->truncation += step_disc;
        log->max_step_truncation = std::max(log->max_step_truncation, step_disc);
      }
    }
    for (int i = 0; i < psi.n_sites(); ++i) apply_site_unitary(psi, i, u_half);
    if (log) log->max_bond = std::max(log->max_bond, psi.max_bond_dim());
    if (sampler && ((sample_stride > 0 && (step + 1) % sample_stride == 0) ||
                    step + 1 == n_steps))
      sampler((step + 1) * dt, psi);
  }
  return psi;
}

// --------------------------------------------------------------------------
// Reconstruction of the physical state on the opening links.
//
// In the conserved-charge sector the clock operator of an opening link equals
// sigma_p^dag sigma_q on its two neighboring dual sites, while every
// shift-type string on the openings violates a vertex charge and has exactly
// zero expectation. The opening density matrix is therefore diagonal in the
// link-clock basis, with probabilities fixed by the dual moments.

// One (p, q) dual-site pair per opening link, C1 links first.
using OpeningPairs = std::vector<std::array<int, 2>>;

namespace detail {

template <typename Moment>
Eigen::MatrixXcd tomography(int phys_dim, const OpeningPairs& c1,
                            const OpeningPairs& c2, const Moment& moment) {
  const int d = phys_dim;
  OpeningPairs links = c1;
  links.insert(links.end(), c2.begin(), c2.end());
  const int k = (int)links.size();
  if (k < 1 || k > 4) throw chain_error("reconstruction: need 1..4 opening links");
  long dim = 1;
  for (int j = 0; j < k; ++j) dim *= d;

  const cplx omega = std::polar(1.0, 2.0 * M_PI / d);
  std::vector<cplx> moments(dim);
  std::vector<int> a(k);
  for (long idx = 0; idx < dim; ++idx) {
    long r = idx;
    for (int j = k - 1; j >= 0; --j) { a[j] = r % d; r /= d; }
    std::map<int, int> power;  // accumulated clock power per dual site
    for (int j = 0; j < k; ++j) {
      power[links[j][0]] = (power[links[j][0]] - a[j] % d + d) % d;
      power[links[j][1]] = (power[links[j][1]] + a[j]) % d;
    }
    moments[idx] = moment(power);
  }

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<int> g(k);
  for (long gi = 0; gi < dim; ++gi) {
    long r = gi;
    for (int j = k - 1; j >= 0; --j) { g[j] = r % d; r /= d; }
    cplx p = 0;
    for (long idx = 0; idx < dim; ++idx) {
      long rr = idx;
      int dot = 0;
      for (int j = k - 1; j >= 0; --j) { dot += (rr % d) * g[j]; rr /= d; }
      cplx character = std::pow(omega, -(dot % d));
      p += moments[idx] * character;
    }
    p /= (double)dim;
    if (std::abs(p.imag()) > 1e-7 || p.real() < -1e-7)
      throw chain_error("reconstruction: probabilities violate positivity");
    rho(gi, gi) = std::max(p.real(), 0.0);
  }
  double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-7)
    throw chain_error("reconstruction: trace deviates from one");
  rho /= tr;
  return rho;
}

}  // namespace detail

inline Eigen::MatrixXcd reconstruct_opening_state(const MPSState& psi,
                                                  const OpeningPairs& c1,
                                                  const OpeningPairs& c2) {
  const int d = psi.phys_dim;
  const cplx omega = std::polar(1.0, 2.0 * M_PI / d);
  auto moment = [&](const std::map<int, int>& power) {
    std::map<int, Eigen::VectorXcd> ops;
    for (const auto& [site, pw] : power) {
      if (pw == 0) continue;
      Eigen::VectorXcd v(d);
      for (int kk = 0; kk < d; ++kk) v(kk) = std::pow(omega, (pw * kk) % d);
      ops[site] = v;
    }
    return diagonal_expectation(psi, ops);
  };
  return detail::tomography(d, c1, c2, moment);
}

// Dense-state variant (qudit vector in little-endian digit order), used for
// the dense-chain and 2D-sector oracles.
inline Eigen::MatrixXcd reconstruct_opening_state_dense(const Eigen::VectorXcd& psi,
                                                        int n_sites, int phys_dim,
                                                        const OpeningPairs& c1,
                                                        const OpeningPairs& c2) {
  const int d = phys_dim;
  const cplx omega = std::polar(1.0, 2.0 * M_PI / d);
  std::vector<long> stride(n_sites, 1);
  for (int i = 1; i < n_sites; ++i) stride[i] = stride[i - 1] * d;
  auto moment = [&](const std::map<int, int>& power) {
    cplx acc = 0;
    for (long s = 0; s < psi.size(); ++s) {
      int phase = 0;
      for (const auto& [site, pw] : power)
        phase += pw * (int)((s / stride[site]) % d);
      acc += std::norm(psi(s)) * std::pow(omega, phase % d);
    }
    return acc;
  };
  return detail::tomography(d, c1, c2, moment);
}

// Opening-link dual pairs of a generically built ring chain, C1 then C2.
inline std::array<OpeningPairs, 2> chain_opening_pairs(const ChainHamiltonian& chain) {
  std::array<OpeningPairs, 2> out;
  for (int o = 0; o < 2; ++o)
    for (int b : chain.opening_bonds[o])
      out[o].push_back({b, (b + 1) % chain.n_sites});
  return out;
}

// Mutual information I(C1:C2) from a density matrix on C1 u C2 with k1/k2
// qudits of dimension d, C1 digits most significant.
inline EntropyReport opening_mutual_information(const Eigen::MatrixXcd& rho,
                                                int d, int k1, int k2,
                                                EntropyKind kind = EntropyKind::VonNeumann) {
  long d1 = 1, d2 = 1;
  for (int j = 0; j < k1; ++j) d1 *= d;
  for (int j = 0; j < k2; ++j) d2 *= d;
  if (rho.rows() != d1 * d2)
    throw chain_error("opening_mutual_information: dimension mismatch");
  Eigen::MatrixXcd rho1 = Eigen::MatrixXcd::Zero(d1, d1);
  Eigen::MatrixXcd rho2 = Eigen::MatrixXcd::Zero(d2, d2);
  for (long a = 0; a < d1; ++a)
    for (long b = 0; b < d1; ++b)
      for (long c = 0; c < d2; ++c) rho1(a, b) += rho(a * d2 + c, b * d2 + c);
  for (long a = 0; a < d2; ++a)
    for (long b = 0; b < d2; ++b)
      for (long c = 0; c < d1; ++c) rho2(a, b) += rho(c * d2 + a, c * d2 + b);
  auto s = [&](const Eigen::MatrixXcd& m) {
    return kind == EntropyKind::VonNeumann ? von_neumann(m) : renyi2(m);
  };
  return mutual_information(s(rho1), s(rho2), s(rho), kind);
}

// Convenience: final I(C1:C2) of a full TEBD ramp.
inline double final_opening_mutual(const ChainHamiltonian& chain, int chi_max,
                                   double dt, double total_time,
                                   TebdLog* log = nullptr) {
  MPSState psi = tebd_evolve(chain, chi_max, dt, total_time, log);
  auto pairs = chain_opening_pairs(chain);
  auto rho = reconstruct_opening_state(psi, pairs[0], pairs[1]);
  return opening_mutual_information(rho, chain.phys_dim,
                                    (int)pairs[0].size(), (int)pairs[1].size())
      .mutual;
}

// --------------------------------------------------------------------------
// Chain derived from a 2D lattice geometry, with opening pairs in the same
// link order as the physical RegionSpec (so reduced matrices compare
// elementwise against the 2D engine).

struct DualProtocol {
  ChainHamiltonian chain;
  OpeningPairs c1_pairs, c2_pairs;  // in regions.c1_links / c2_links order
};

inline DualProtocol dual_ising_protocol(const LinkLattice& lat,
                                        const RegionSpec& regions,
                                        const DualChainMap& map, double eps,
                                        RampSchedule schedule) {
  const int n = map.n_sites();
  // Guard the tomography assumption: a shift-type operator on the opening
  // links must always violate some vertex charge. Check all X-subsets of the
  // opening links for vertex-parity neutrality.
  std::vector<int> opening = regions.c1_links;
  opening.insert(opening.end(), regions.c2_links.begin(), regions.c2_links.end());
  const int k = (int)opening.size();
  if (k > 4) throw chain_error("dual_ising_protocol: more than 4 opening links");
  for (int mask = 1; mask < (1 << k); ++mask) {
    std::map<int, int> par;
    for (int j = 0; j < k; ++j)
      if (mask & (1 << j))
        for (int v : lat.link_vertices[opening[j]]) par[v] ^= 1;
    bool neutral = true;
    for (const auto& [v, p] : par) neutral = neutral && p == 0;
    if (neutral)
      throw chain_error("dual_ising_protocol: opening geometry admits a "
                        "charge-neutral shift string; mapping incomplete");
  }

  // Rotate the ring so that the C1 bonds sit at the wrapping end of the chain.
  auto ring_bonds = [&](const std::vector<int>& links) {
    std::vector<int> b;
    for (int l : links) b.push_back(map.chain_bond_of_link.at(l));
    return b;
  };
  std::vector<int> c1b = ring_bonds(regions.c1_links);
  std::vector<int> in_c1(n, 0);
  for (int b : c1b) in_c1[b] = 1;
  int b0 = -1;
  for (int b : c1b)
    if (!in_c1[(b + n - 1) % n]) b0 = b;
  if (b0 < 0) throw chain_error("dual_ising_protocol: C1 bonds are not contiguous");
  const int w = (int)c1b.size();
  const int offset = (b0 + w) % n;
  auto chain_bond = [&](int ring_bond) { return (ring_bond - offset + n) % n; };

  DualProtocol proto;
  proto.chain.n_sites = n;
  proto.chain.phys_dim = 2;
  proto.chain.eps = eps;
  proto.chain.schedule = schedule;
  for (int l : regions.b_links)
    proto.chain.driven_bonds.push_back(chain_bond(map.chain_bond_of_link.at(l)));
  std::sort(proto.chain.driven_bonds.begin(), proto.chain.driven_bonds.end());
  for (int b : c1b) proto.chain.opening_bonds[0].push_back(chain_bond(b));
  for (int b : ring_bonds(regions.c2_links))
    proto.chain.opening_bonds[1].push_back(chain_bond(b));
  proto.chain.validate();
  for (int b : proto.chain.opening_bonds[0])
    proto.c1_pairs.push_back({b, (b + 1) % n});
  for (int b : proto.chain.opening_bonds[1])
    proto.c2_pairs.push_back({b, (b + 1) % n});
  return proto;
}

// --------------------------------------------------------------------------
// Scaling study.

// Exact large-ring limit of the final mutual information when the ramp stops
// at a finite coupling h: the two dual sites flanking each opening keep
// residual transverse fluctuations, giving end-to-end arc correlators
// c = 1 - (eps/h)^2 and I = log 2 - H2((1 + c^2)/2), independent of the ring
// length. I -> log 2 only as h/eps -> infinity.
inline double ramp_endpoint_mutual_information(double eps, double h_end) {
  if (h_end <= eps) throw chain_error("ramp endpoint: need h_end > eps");
  double c = 1.0 - (eps / h_end) * (eps / h_end);
  double p = 0.5 * (1.0 + c * c);
  auto h2 = [](double x) {
    double s = 0;
    if (x > 0) s -= x * std::log(x);
    if (x < 1) s -= (1 - x) * std::log(1 - x);
    return s;
  };
  return std::log(2.0) - h2(p);
}

struct ScalingCurve {
  int n_b = 0;                     // driven-bond count
  std::vector<double> ramp_times;  // T grid
  std::vector<double> final_mutual;
  double t_star = 0;
  bool reached = false;
};

struct ScalingStudy {
  std::vector<ScalingCurve> curves;
  double threshold = 0.99;
  double target = 0;  // absolute I the threshold fraction refers to
};

// Runs the ramp for every (|B|, T) pair, T = x * |B|^2 over the shared grid of
// rescaled times x, and reports the first grid crossing of threshold*target.
inline ScalingStudy ramp_scaling_study(
    const std::vector<int>& n_b_list, const std::vector<double>& rescaled_times,
    double eps, double h_end, double threshold = 0.99, int chi_max = 64,
    double dt = 0.05, int opening_width = 2, double target = -1,
    const std::function<void(int, double, double)>& progress = {}) {
  if (threshold <= 0 || threshold >= 1)
    throw chain_error("ramp_scaling_study: threshold must be in (0,1)");
  ScalingStudy study;
  study.threshold = threshold;
  study.target = target > 0 ? target : ramp_endpoint_mutual_information(eps, h_end);
  for (int nb : n_b_list) {
    ScalingCurve curve;
    curve.n_b = nb;
    for (double x : rescaled_times) {
      double T = x * nb * (double)nb;
      T = std::max(dt, std::round(T / dt) * dt);
      ChainHamiltonian chain =
          build_dual_ising(nb, eps, {0.0, h_end, T}, opening_width);
      double mi = final_opening_mutual(chain, chi_max, dt, T);
      curve.ramp_times.push_back(T);
      curve.final_mutual.push_back(mi);
      if (progress) progress(nb, T, mi);
      if (!curve.reached && mi >= threshold * study.target) {
        curve.reached = true;
        curve.t_star = T;
      }
    }
    study.curves.push_back(std::move(curve));
  }
  return study;
}

}  // namespace topo
