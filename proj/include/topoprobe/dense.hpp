#pragma once

// Dense state-vector engine: Hamiltonian assembly from Pauli-string terms,
// ground states, adiabatic ramp evolution with a commuting-group split-step
// integrator, and partial traces. Ground truth for every other engine.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "topoprobe/lattice.hpp"

namespace topo {

using cplx = std::complex<double>;
using State = std::vector<cplx>;

class dense_error : public std::runtime_error {
public:
  explicit dense_error(const std::string& msg) : std::runtime_error(msg) {}
};
class convergence_error : public dense_error {
public:
  explicit convergence_error(const std::string& msg) : dense_error(msg) {}
};

struct RampSchedule {
  double start = 0, end = 0, total_time = 1;
  double value(double t) const {
    if (total_time <= 0) throw dense_error("RampSchedule: total time must be > 0");
    double f = std::clamp(t / total_time, 0.0, 1.0);
    return start + (end - start) * f;
  }
};

// Pauli string prod_{i in xmask} X_i * prod_{i in zmask} Z_i. Overlapping
// masks (Y components) are not needed by any model here and are rejected so
// every term is manifestly Hermitian.
struct PauliTerm {
  std::uint64_t xmask = 0, zmask = 0;
  double coeff = 0;
  int schedule = -1;  // index into HamiltonianSpec::schedules, -1 = static
};

struct HamiltonianSpec {
  int n_sites = 0;
  std::vector<PauliTerm> terms;
  std::vector<RampSchedule> schedules;

  void add_term(std::uint64_t xmask, std::uint64_t zmask, double coeff,
                int schedule = -1) {
    if (xmask & zmask)
      throw dense_error("HamiltonianSpec: overlapping X/Z masks (Y) unsupported");
    if ((xmask | zmask) >> n_sites)
      throw dense_error("HamiltonianSpec: term acts outside the lattice");
    terms.push_back({xmask, zmask, coeff, schedule});
  }

  double coeff_at(const PauliTerm& term, double t) const {
    return term.schedule < 0 ? term.coeff
                             : term.coeff * schedules.at(term.schedule).value(t);
  }

  std::size_t dim() const { return std::size_t(1) << n_sites; }
};

inline std::uint64_t mask_of(const std::vector<int>& sites) {
  std::uint64_t m = 0;
  for (int s : sites) m |= std::uint64_t(1) << s;
  return m;
}

// H_TC = -e_e sum_v A_v - e_m sum_p B_p with A_v = prod Z, B_p = prod X.
inline HamiltonianSpec build_toric_code(const LinkLattice& lat, double eps_e,
                                        double eps_m) {
  if (lat.n_links > 26) throw dense_error("build_toric_code: lattice too large for ED");
  HamiltonianSpec h;
  h.n_sites = lat.n_links;
  for (int v = 0; v < lat.n_vertices; ++v)
    h.add_term(0, mask_of(lat.vertex_links[v]), -eps_e);
  for (int p = 0; p < lat.n_plaquettes; ++p)
    h.add_term(mask_of(lat.plaquette_links[p]), 0, -eps_m);
  return h;
}

// Adds h(t) sum_{l in B} Z_l (axis 'Z') or g(t) sum X_l (axis 'X').
inline HamiltonianSpec add_trivializing_field(HamiltonianSpec h,
                                              const RegionSpec& regions,
                                              char axis, RampSchedule schedule) {
  if (regions.b_links.empty())
    throw dense_error("add_trivializing_field: trivializing region is empty");
  int sid = (int)h.schedules.size();
  h.schedules.push_back(schedule);
  for (int l : regions.b_links) {
    std::uint64_t m = std::uint64_t(1) << l;
    if (axis == 'Z') h.add_term(0, m, 1.0, sid);
    else if (axis == 'X') h.add_term(m, 0, 1.0, sid);
    else throw dense_error("add_trivializing_field: axis must be 'X' or 'Z'");
  }
  return h;
}

inline void apply_hamiltonian(const HamiltonianSpec& h, double t,
                              const State& in, State& out) {
  const std::size_t dim = h.dim();
  out.assign(dim, cplx(0));
  for (const auto& term : h.terms) {
    double c = h.coeff_at(term, t);
    if (c == 0) continue;
    if (term.xmask == 0) {
      for (std::size_t s = 0; s < dim; ++s) {
        double sign = (std::popcount(s & term.zmask) & 1) ? -1.0 : 1.0;
        out[s] += c * sign * in[s];
      }
    } else {
      for (std::size_t s = 0; s < dim; ++s) {
        double sign = (std::popcount(s & term.zmask) & 1) ? -1.0 : 1.0;
        out[s ^ term.xmask] += c * sign * in[s];
      }
    }
  }
}

// |psi> = 2^{-n_P/2} prod_p (1 + B_p) |all-up>: exact planar ground state.
inline State toric_code_ground_state(const LinkLattice& lat) {
  if (lat.n_links > 26) throw dense_error("toric_code_ground_state: lattice too large");
  State psi(std::size_t(1) << lat.n_links, cplx(0));
  psi[0] = 1.0;
  for (int p = 0; p < lat.n_plaquettes; ++p) {
    std::uint64_t x = mask_of(lat.plaquette_links[p]);
    State next = psi;
    for (std::size_t s = 0; s < psi.size(); ++s)
      if (psi[s] != cplx(0)) next[s ^ x] += psi[s];
    psi = std::move(next);
  }
  double norm = 0;
  for (auto& a : psi) norm += std::norm(a);
  norm = std::sqrt(norm);
  for (auto& a : psi) a /= norm;
  return psi;
}

// Lanczos with full reorthogonalization. Returns (energy, ground vector).
inline std::pair<double, State> lanczos_ground(
    std::size_t dim, const std::function<void(const State&, State&)>& matvec,
    int max_iter = 300, double tol = 1e-10, unsigned seed = 12345) {
  max_iter = std::min<std::size_t>(max_iter, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<State> basis;
  State v(dim), w(dim);
  for (auto& a : v) a = cplx(gauss(rng), gauss(rng));
  auto nrm = [](const State& x) {
    double n = 0;
    for (auto& a : x) n += std::norm(a);
    return std::sqrt(n);
  };
  double n0 = nrm(v);
  for (auto& a : v) a /= n0;

  std::vector<double> alpha, beta;
  Eigen::VectorXd ritz;
  double energy = 0;
  for (int it = 0; it < max_iter; ++it) {
    basis.push_back(v);
    matvec(v, w);
    cplx a_it = 0;
    for (std::size_t s = 0; s < dim; ++s) a_it += std::conj(v[s]) * w[s];
    alpha.push_back(a_it.real());
    // Full reorthogonalization, twice for stability.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        cplx ov = 0;
        for (std::size_t s = 0; s < dim; ++s) ov += std::conj(b[s]) * w[s];
        for (std::size_t s = 0; s < dim; ++s) w[s] -= ov * b[s];
      }
    double b_it = nrm(w);

    int m = (int)alpha.size();
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tri(i, i) = alpha[i];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    energy = es.eigenvalues()(0);
    ritz = es.eigenvectors().col(0);
    double scale = std::abs(alpha[0]) + 1.0;
    for (double a : alpha) scale = std::max(scale, std::abs(a));
    if (b_it * std::abs(ritz(m - 1)) < tol * scale || b_it < 1e-14 ||
        m == (int)dim) {
      State ground(dim, cplx(0));
      for (int i = 0; i < m; ++i)
        for (std::size_t s = 0; s < dim; ++s) ground[s] += ritz(i) * basis[i][s];
      double gn = nrm(ground);
      for (auto& a : ground) a /= gn;
      return {energy, ground};
    }
    beta.push_back(b_it);
    for (auto& a : w) a /= b_it;
    v = w;
  }
  throw convergence_error("lanczos_ground: no convergence after " +
                          std::to_string(max_iter) + " iterations");
}

inline std::pair<double, State> ground_state(const HamiltonianSpec& h,
                                             double t = 0.0) {
  if (h.n_sites > 26) throw dense_error("ground_state: Hilbert space too large");
  return lanczos_ground(h.dim(), [&](const State& in, State& out) {
    apply_hamiltonian(h, t, in, out);
  });
}

// Partial trace onto `sites` (bit j of the reduced index = sites[j]).
inline Eigen::MatrixXcd reduced_density_matrix(const State& psi, int n_sites,
                                               const std::vector<int>& sites) {
  if (sites.size() > 12)
    throw dense_error("reduced_density_matrix: region larger than 12 sites");
  const std::size_t dk = std::size_t(1) << sites.size();
  std::uint64_t region_mask = mask_of(sites);
  std::uint64_t env_mask = ((std::uint64_t(1) << n_sites) - 1) & ~region_mask;
  std::vector<std::uint64_t> scatter(dk, 0);
  for (std::size_t r = 0; r < dk; ++r)
    for (std::size_t j = 0; j < sites.size(); ++j)
      if (r >> j & 1) scatter[r] |= std::uint64_t(1) << sites[j];

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dk, dk);
  Eigen::VectorXcd v(dk);
  std::uint64_t e = 0;
  do {
    for (std::size_t r = 0; r < dk; ++r) v(r) = psi[e | scatter[r]];
    rho.noalias() += v * v.adjoint();
    e = (e - env_mask) & env_mask;
  } while (e != 0);
  return rho;
}

inline void apply_pauli(State& psi, char axis, int site) {
  std::uint64_t bit = std::uint64_t(1) << site;
  if (axis == 'Z') {
    for (std::size_t s = 0; s < psi.size(); ++s)
      if (s & bit) psi[s] = -psi[s];
  } else if (axis == 'X') {
    for (std::size_t s = 0; s < psi.size(); ++s)
      if (!(s & bit)) std::swap(psi[s], psi[s ^ bit]);
  } else {
    throw dense_error("apply_pauli: axis must be 'X' or 'Z'");
  }
}

struct ErrorEvent {
  double time = 0;
  char axis = 'Z';
  int site = 0;
};

// Split-step ramp evolution. H(t) splits into a diagonal part (Z strings,
// including scheduled fields) and a set of mutually commuting X strings; each
// step applies exp(-i dt/2 D) exp(-i dt Ox) exp(-i dt/2 D) with all
// coefficients sampled at the step midpoint (per-step error O(dt^3), exactly
// unitary). The sampler runs after every `sample_stride` steps and at t = 0
// and t = T.
inline void evolve_ramp(
    const HamiltonianSpec& h, State& psi, double total_time, double dt,
    const std::vector<ErrorEvent>& errors = {},
    const std::function<void(double, const State&)>& sampler = nullptr,
    int sample_stride = 1) {
  if (dt <= 0 || total_time < 0) throw dense_error("evolve_ramp: bad time step");
  const std::size_t dim = h.dim();
  if (psi.size() != dim) throw dense_error("evolve_ramp: state dimension mismatch");
  long n_steps = std::lround(total_time / dt);
  if (std::abs(n_steps * dt - total_time) > 1e-9 * std::max(1.0, total_time))
    throw dense_error("evolve_ramp: total time must be a multiple of dt");

  // Diagonal caches: static part plus one profile per schedule.
  std::vector<double> diag0(dim, 0.0);
  std::vector<std::vector<double>> diag_sched(h.schedules.size());
  std::vector<const PauliTerm*> x_terms;
  for (const auto& term : h.terms) {
    if (term.xmask != 0) {
      x_terms.push_back(&term);
      continue;
    }
    std::vector<double>* target = &diag0;
    double c = term.coeff;
    if (term.schedule >= 0) {
      auto& ds = diag_sched[term.schedule];
      if (ds.empty()) ds.assign(dim, 0.0);
      target = &ds;
    }
    for (std::size_t s = 0; s < dim; ++s)
      (*target)[s] += ((std::popcount(s & term.zmask) & 1) ? -c : c);
  }

  auto events = errors;
  std::sort(events.begin(), events.end(),
            [](const ErrorEvent& a, const ErrorEvent& b) { return a.time < b.time; });
  std::size_t next_event = 0;

  auto half_diag = [&](double tm, double step) {
    std::vector<double> svals(h.schedules.size());
    for (std::size_t j = 0; j < h.schedules.size(); ++j)
      svals[j] = h.schedules[j].value(tm);
    for (std::size_t s = 0; s < dim; ++s) {
      double e = diag0[s];
      for (std::size_t j = 0; j < svals.size(); ++j)
        if (!diag_sched[j].empty()) e += svals[j] * diag_sched[j][s];
      psi[s] *= std::polar(1.0, -0.5 * step * e);
    }
  };
  auto x_rotation = [&](const PauliTerm& term, double theta) {
    std::uint64_t pick = term.xmask & (~term.xmask + 1);  // lowest set bit
    double c = std::cos(theta), sn = std::sin(theta);
    for (std::size_t s = 0; s < dim; ++s) {
      if (s & pick) continue;
      std::size_t s2 = s ^ term.xmask;
      cplx a = psi[s], b = psi[s2];
      psi[s] = c * a - cplx(0, sn) * b;
      psi[s2] = c * b - cplx(0, sn) * a;
    }
  };

  if (sampler) sampler(0.0, psi);
  for (long step = 0; step < n_steps; ++step) {
    double t = step * dt;
    while (next_event < events.size() && events[next_event].time < t + dt) {
      apply_pauli(psi, events[next_event].axis, events[next_event].site);
      ++next_event;
    }
    double tm = t + 0.5 * dt;
    half_diag(tm, dt);
    for (const auto* term : x_terms) {
      double c = h.coeff_at(*term, tm);
      if (c != 0) x_rotation(*term, dt * c);
    }
    half_diag(tm, dt);
    if (sampler && ((step + 1) % sample_stride == 0 || step + 1 == n_steps))
      sampler((step + 1) * dt, psi);
  }
  double norm = 0;
  for (auto& a : psi) norm += std::norm(a);
  if (std::abs(std::sqrt(norm) - 1.0) > 1e-7)
    throw dense_error("evolve_ramp: norm drift beyond tolerance; reduce dt");
}

}  // namespace topo
