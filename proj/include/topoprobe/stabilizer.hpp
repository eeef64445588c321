#pragma once

// Exact entanglement entropies of Pauli stabilizer states via binary
// symplectic rank counting, the closed-form toric-code geometry results, and
// block-orthogonal incoherent anyon mixtures.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "topoprobe/f2.hpp"
#include "topoprobe/lattice.hpp"

namespace topo {

inline constexpr double kLog2 = std::numbers::ln2;

class stabilizer_error : public std::runtime_error {
public:
  explicit stabilizer_error(const std::string& msg) : std::runtime_error(msg) {}
};

// One generator in symplectic (X|Z) form. CSS groups keep the x and z parts
// disjoint per row, so phases compose by XOR under row reduction.
struct PauliRow {
  BitVec x, z;
  bool phase = false;  // sign (-1)^phase

  explicit PauliRow(int n = 0) : x(n), z(n) {}
  bool commutes(const PauliRow& o) const {
    return ((x.popcount_and(o.z) + z.popcount_and(o.x)) & 1) == 0;
  }
};

struct StabilizerGroup {
  int n_qubits = 0;
  std::vector<PauliRow> gens;

  explicit StabilizerGroup(int n = 0) : n_qubits(n) {}

  void add_z(const std::vector<int>& support, bool sign = false) {
    PauliRow r(n_qubits);
    for (int q : support) r.z.flip(q);
    r.phase = sign;
    gens.push_back(std::move(r));
  }
  void add_x(const std::vector<int>& support, bool sign = false) {
    PauliRow r(n_qubits);
    for (int q : support) r.x.flip(q);
    r.phase = sign;
    gens.push_back(std::move(r));
  }

  bool all_commute() const {
    for (size_t i = 0; i < gens.size(); ++i)
      for (size_t j = i + 1; j < gens.size(); ++j)
        if (!gens[i].commutes(gens[j])) return false;
    return true;
  }

  // Remove dependent rows in place (CSS-safe phase tracking).
  void reduce() {
    int rank = 0;
    const int n2 = 2 * n_qubits;
    auto bit = [&](const PauliRow& r, int c) {
      return c < n_qubits ? r.x.get(c) : r.z.get(c - n_qubits);
    };
    for (int col = 0; col < n2 && rank < (int)gens.size(); ++col) {
      int pivot = -1;
      for (int r = rank; r < (int)gens.size(); ++r)
        if (bit(gens[r], col)) { pivot = r; break; }
      if (pivot < 0) continue;
      std::swap(gens[rank], gens[pivot]);
      for (int r = 0; r < (int)gens.size(); ++r)
        if (r != rank && bit(gens[r], col)) {
          gens[r].x ^= gens[rank].x;
          gens[r].z ^= gens[rank].z;
          gens[r].phase ^= gens[rank].phase;
        }
      ++rank;
    }
    // Drop all-zero rows; a zero row with negative sign means -1 in the
    // group, i.e. inconsistent sign assignments.
    std::vector<PauliRow> keep;
    for (auto& g : gens) {
      if (g.x.any() || g.z.any()) keep.push_back(std::move(g));
      else if (g.phase) throw stabilizer_error("inconsistent stabilizer signs (-1 in group)");
    }
    gens = std::move(keep);
  }

  bool is_pure() const { return (int)gens.size() == n_qubits; }
};

namespace detail {

// Combinations c (over generators) with sum_j c_j g_j supported inside the
// region, i.e. vanishing on the complement columns. Returns a basis of the
// kernel of the complement-restriction map.
inline std::vector<BitVec> region_kernel(const StabilizerGroup& g,
                                         const std::vector<char>& in_region) {
  const int m = (int)g.gens.size();
  // Build restricted rows (complement columns only) with identity tracking.
  std::vector<int> comp_cols;
  for (int q = 0; q < g.n_qubits; ++q)
    if (!in_region[q]) comp_cols.push_back(q);
  const int nc = (int)comp_cols.size();
  std::vector<BitVec> rows(m, BitVec(2 * nc)), track(m, BitVec(m));
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < nc; ++c) {
      if (g.gens[r].x.get(comp_cols[c])) rows[r].set(c);
      if (g.gens[r].z.get(comp_cols[c])) rows[r].set(nc + c);
    }
    track[r].set(r);
  }
  int rank = 0;
  for (int col = 0; col < 2 * nc && rank < m; ++col) {
    int pivot = -1;
    for (int r = rank; r < m; ++r)
      if (rows[r].get(col)) { pivot = r; break; }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    std::swap(track[rank], track[pivot]);
    for (int r = 0; r < m; ++r)
      if (r != rank && rows[r].get(col)) { rows[r] ^= rows[rank]; track[r] ^= track[rank]; }
    ++rank;
  }
  std::vector<BitVec> kernel;
  for (int r = rank; r < m; ++r) kernel.push_back(track[r]);
  return kernel;
}

}  // namespace detail

// S = (|R| - k) log 2 with k the number of independent stabilizer group
// elements supported entirely on the region. The group must stabilize a pure
// state.
inline double stabilizer_entropy(const StabilizerGroup& group,
                                 const std::vector<int>& region) {
  StabilizerGroup g = group;
  g.reduce();
  if (!g.is_pure())
    throw stabilizer_error("stabilizer_entropy: group does not fix a pure state");
  if (region.empty()) return 0.0;
  std::vector<char> in_region(g.n_qubits, 0);
  for (int q : region) in_region.at(q) = 1;
  int k = (int)detail::region_kernel(g, in_region).size();
  return ((int)region.size() - k) * kLog2;
}

// ---------------------------------------------------------------------------
// Closed-form geometry results (values in nats).

// Simply connected Lx x Ly plaquette block, boundary length L = 2(Lx+Ly).
inline double closed_form_simply_connected(int Lx, int Ly) {
  if (Lx < 1 || Ly < 1) throw stabilizer_error("closed form: sizes must be >= 1");
  return (2 * (Lx + Ly) - 1) * kLog2;
}

// Annulus: outer block Lx x Ly with an inner hole Lx2 x Ly2.
inline double closed_form_annulus(int Lx, int Ly, int Lx2, int Ly2) {
  if (Lx2 < 1 || Ly2 < 1 || Lx2 > Lx - 2 || Ly2 > Ly - 2)
    throw stabilizer_error("closed form: hole does not fit");
  return (2 * (Lx + Ly) + 2 * (Lx2 + Ly2) - 2) * kLog2;
}

// Two strips wrapping a cylinder (sphere-like after capping): I = log 2.
inline double closed_form_cylinder_strips_mi(int L, int W) {
  if (L < 1 || W < 1) throw stabilizer_error("closed form: sizes must be >= 1");
  return kLog2;
}

// Two strips wrapping a torus: I = 2 log 2 (uses the logical loops).
inline double closed_form_torus_strips_mi(int L, int W) {
  if (L < 1 || W < 1) throw stabilizer_error("closed form: sizes must be >= 1");
  return 2 * kLog2;
}

// ---------------------------------------------------------------------------
// Stabilizer groups of toric-code fixed-point states.

// Planar lattice with smooth boundary: unique ground state.
inline StabilizerGroup toric_code_group(const LinkLattice& lat) {
  StabilizerGroup g(lat.n_links);
  for (int v = 0; v < lat.n_vertices; ++v) g.add_z(lat.vertex_links[v]);
  for (int p = 0; p < lat.n_plaquettes; ++p) g.add_x(lat.plaquette_links[p]);
  g.reduce();
  return g;
}

// Square lattice wrapped around a cylinder (periodic in x, open and
// plaquette-terminated in y) or a torus. Circumference L, H plaquette rows.
// The unique-state purification uses operators winding the *short* (vertical)
// direction, which never fit inside the horizontal strips below: a vertical
// Z-line on the cylinder, a vertical Z-line plus a vertical X-loop on the
// torus. Generator order: stars row-major, plaquettes row-major, then the
// purifying loops (for mixture sign flips).
struct WrappedLattice {
  int L = 0, H = 0;
  bool periodic_y = false;
  int x_link(int x, int y) const { return ((y % yrows_x()) + yrows_x()) % yrows_x() * 2 * L + ((x % L) + L) % L; }
  int y_link(int x, int y) const { return ((y % H) + H) % H * 2 * L + L + ((x % L) + L) % L; }
  int yrows_x() const { return periodic_y ? H : H + 1; }  // rows of x-links
  int n_links() const { return periodic_y ? 2 * L * H : L * (2 * H + 1); }
  int n_stars() const { return periodic_y ? L * H : L * (H + 1); }
  int star_index(int x, int y) const { return y * L + x; }
  int plaq_index(int x, int y) const { return n_stars() + y * L + x; }
};

inline StabilizerGroup toric_code_wrapped_group(const WrappedLattice& c) {
  // Open cylinder: x-link rows 0..H, y-link rows 0..H-1. The layout leaves
  // the top x-row at indices 2LH..2LH+L-1.
  StabilizerGroup g(c.n_links());
  for (int y = 0; y < (c.periodic_y ? c.H : c.H + 1); ++y)
    for (int x = 0; x < c.L; ++x) {
      std::vector<int> s{c.x_link(x, y), c.x_link(x - 1, y)};
      if (c.periodic_y || y < c.H) s.push_back(c.y_link(x, y));
      if (c.periodic_y || y > 0) s.push_back(c.y_link(x, y - 1));
      g.add_z(s);
    }
  for (int y = 0; y < c.H; ++y)
    for (int x = 0; x < c.L; ++x)
      g.add_x({c.x_link(x, y), c.x_link(x, y + 1), c.y_link(x, y), c.y_link(x + 1, y)});
  std::vector<int> zline, xloop;
  for (int y = 0; y < c.yrows_x(); ++y) zline.push_back(c.x_link(0, y));
  g.add_z(zline);
  if (c.periodic_y) {
    for (int y = 0; y < c.H; ++y) xloop.push_back(c.y_link(0, y));
    g.add_x(xloop);
  }
  return g;
}

// Horizontal strip covering plaquette rows y0..y0+W-1 (all links of those
// plaquettes). For the closed-form strip values to apply, keep at least one
// plaquette row of clearance from the open ends and at least two rows
// between strips (a single-row gap lets per-column star pairs bridge it).
inline std::vector<int> wrapped_strip_links(const WrappedLattice& c, int y0, int W) {
  std::vector<int> out;
  for (int y = y0; y <= y0 + W; ++y)
    for (int x = 0; x < c.L; ++x) out.push_back(c.x_link(x, y));
  for (int y = y0; y < y0 + W; ++y)
    for (int x = 0; x < c.L; ++x) out.push_back(c.y_link(x, y));
  return out;
}

// ---------------------------------------------------------------------------
// Incoherent mixtures of sign-flipped stabilizer blocks.

struct StabilizerMixture {
  StabilizerGroup base;  // reduced pure group; blocks flip generator signs
  struct Block {
    double weight;
    BitVec flips;  // flips.get(j): block negates generator j
  };
  std::vector<Block> blocks;
};

// Builds the mixture for anyon insertions on a lattice group: each block
// lists vertices with flipped stars (e anyons) and plaquettes with flipped
// B_p (m anyons). Generator order must match toric_code_group before
// reduction, so the group is rebuilt here.
struct AnyonInsertion {
  std::vector<int> e_vertices;
  std::vector<int> m_plaquettes;
};

inline StabilizerMixture make_anyon_mixture(const LinkLattice& lat,
                                            const std::vector<std::pair<double, AnyonInsertion>>& spec) {
  double total = 0;
  for (auto& [w, ins] : spec) {
    if (w < 0 || w > 1) throw stabilizer_error("mixture weights must lie in [0,1]");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw stabilizer_error("mixture weights must sum to 1");

  StabilizerMixture mix;
  mix.base = StabilizerGroup(lat.n_links);
  for (int v = 0; v < lat.n_vertices; ++v) mix.base.add_z(lat.vertex_links[v]);
  for (int p = 0; p < lat.n_plaquettes; ++p) mix.base.add_x(lat.plaquette_links[p]);
  const int m = (int)mix.base.gens.size();
  for (auto& [w, ins] : spec) {
    BitVec flips(m);
    for (int v : ins.e_vertices) flips.flip(v);
    for (int p : ins.m_plaquettes) flips.flip(lat.n_vertices + p);
    mix.blocks.push_back({w, flips});
  }
  // Reduction would scramble the generator<->flip correspondence, so the
  // entropy routine below tracks combinations against the unreduced rows.
  return mix;
}

inline StabilizerMixture make_anyon_mixture_wrapped(
    const WrappedLattice& c,
    const std::vector<std::pair<double, AnyonInsertion>>& spec) {
  double total = 0;
  for (auto& [w, ins] : spec) {
    if (w < 0 || w > 1) throw stabilizer_error("mixture weights must lie in [0,1]");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw stabilizer_error("mixture weights must sum to 1");
  StabilizerMixture mix;
  mix.base = toric_code_wrapped_group(c);
  const int m = (int)mix.base.gens.size();
  for (auto& [w, ins] : spec) {
    BitVec flips(m);
    for (int v : ins.e_vertices) flips.flip(v);        // star_index(x,y) ids
    for (int p : ins.m_plaquettes) flips.flip(p);      // plaq_index(x,y) ids
    mix.blocks.push_back({w, flips});
  }
  return mix;
}

// Entropy (nats) of the reduced mixture on a region. Blocks whose sign
// functionals agree on every region-supported group element share a reduced
// state; distinct classes are orthogonal and add the Shannon term.
inline double mixture_entropy(const StabilizerMixture& mix, const std::vector<int>& region) {
  StabilizerGroup reduced = mix.base;
  reduced.reduce();
  if (!reduced.is_pure())
    throw stabilizer_error("mixture_entropy: base group must fix a pure state");
  if (region.empty()) return 0.0;
  std::vector<char> in_region(mix.base.n_qubits, 0);
  for (int q : region) in_region.at(q) = 1;

  // Kernel over the *unreduced* generators so flip vectors line up.
  auto kernel = detail::region_kernel(mix.base, in_region);
  // k counts independent region-supported elements; dependent combinations of
  // the unreduced rows also land in the kernel, so subtract the global
  // dependency count.
  int n_dep = (int)mix.base.gens.size() - (int)reduced.gens.size();
  int k = (int)kernel.size() - n_dep;
  double s_block = ((int)region.size() - k) * kLog2;

  // Class signature: signs of all kernel elements.
  std::vector<double> class_weight;
  std::vector<std::vector<bool>> class_sig;
  for (auto& b : mix.blocks) {
    std::vector<bool> sig;
    sig.reserve(kernel.size());
    for (auto& c : kernel) sig.push_back(c.popcount_and(b.flips) & 1);
    bool found = false;
    for (size_t i = 0; i < class_sig.size(); ++i)
      if (class_sig[i] == sig) { class_weight[i] += b.weight; found = true; break; }
    if (!found) { class_sig.push_back(std::move(sig)); class_weight.push_back(b.weight); }
  }
  double shannon = 0;
  for (double p : class_weight)
    if (p > 0) shannon -= p * std::log(p);
  return s_block + shannon;
}

inline double mixture_mutual_information(const StabilizerMixture& mix,
                                         const std::vector<int>& region_a,
                                         const std::vector<int>& region_b) {
  std::vector<int> joint = region_a;
  joint.insert(joint.end(), region_b.begin(), region_b.end());
  return mixture_entropy(mix, region_a) + mixture_entropy(mix, region_b) -
         mixture_entropy(mix, joint);
}

}  // namespace topo
