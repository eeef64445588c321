#pragma once

// String-net models on links: N-state clock models on the square lattice and
// the Fibonacci model on collapsed honeycomb strips. States live in the
// constrained (closed-net) basis, Hamiltonians are dense matrices there, and
// plaquette operators are generated from the category's F-symbols. Includes
// fixed-point states (two independent construction paths), link-splitting
// reduced states, analytic mutual-information targets, and the trivializing
// ramp evolution.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "topoprobe/dense.hpp"
#include "topoprobe/lattice.hpp"

namespace topo {

class category_error : public std::runtime_error {
public:
  explicit category_error(const std::string& msg) : std::runtime_error(msg) {}
};

class stringnet_error : public std::runtime_error {
public:
  explicit stringnet_error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Fusion categories

struct FusionCategory {
  std::string name;
  int n_labels = 0;
  Eigen::VectorXd d;     // quantum dimensions d_s
  double total_d = 0;    // D = sum_s d_s^2
  int zn = 0;            // N for the clock categories, 0 for Fibonacci

  bool abelian() const { return zn > 0; }

  int dual(int a) const { return zn > 0 ? (zn - a) % zn : a; }

  // Fusion admissibility delta_{abc} of an unordered/incoming label triple.
  bool fuses(int a, int b, int c) const {
    if (zn > 0) return (a + b + c) % zn == 0;
    // Fibonacci: forbidden iff exactly one label is 1.
    return (a + b + c) != 1;
  }

  // F-matrix entry [F^{abc}_d]_{ef}. Tree admissibility is enforced:
  // (a,b,e*), (e,c,d*), (b,c,f*), (a,f,d*) must all fuse.
  double f_symbol(int a, int b, int c, int dd, int e, int f) const {
    if (!fuses(a, b, dual(e)) || !fuses(e, c, dual(dd)) ||
        !fuses(b, c, dual(f)) || !fuses(a, f, dual(dd)))
      return 0.0;
    if (zn > 0) return 1.0;
    if (a == 1 && b == 1 && c == 1 && dd == 1) {
      const double phi = d(1);
      if (e == 0 && f == 0) return 1.0 / phi;
      if (e == 1 && f == 1) return -1.0 / phi;
      return 1.0 / std::sqrt(phi);
    }
    return 1.0;
  }
};

inline FusionCategory zn_category(int n) {
  if (n < 2) throw category_error("zn_category: need N >= 2");
  FusionCategory cat;
  cat.name = "Z" + std::to_string(n);
  cat.n_labels = n;
  cat.zn = n;
  cat.d = Eigen::VectorXd::Ones(n);
  cat.total_d = n;
  return cat;
}

inline FusionCategory fibonacci_category() {
  FusionCategory cat;
  cat.name = "Fibonacci";
  cat.n_labels = 2;
  cat.zn = 0;
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  cat.d = Eigen::VectorXd(2);
  cat.d << 1.0, phi;
  cat.total_d = 1.0 + phi * phi;
  return cat;
}

// Checks the fusion-dimension identity d_a d_b = sum_c d_c delta_{a b c*} and
// the pentagon relation for the stored F-symbols over all label assignments.
inline void validate_category(const FusionCategory& cat, double tol = 1e-12) {
  const int n = cat.n_labels;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double rhs = 0;
      for (int c = 0; c < n; ++c)
        if (cat.fuses(a, b, cat.dual(c))) rhs += cat.d(c);
      if (std::abs(cat.d(a) * cat.d(b) - rhs) > tol)
        throw category_error(cat.name + ": fusion-dimension identity fails");
    }
  // Pentagon: [F^{fcd}_e]_{gl} [F^{abl}_e]_{fk}
  //           = sum_h [F^{abc}_g]_{fh} [F^{ahd}_e]_{gk} [F^{bcd}_k]_{hl}.
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int dd = 0; dd < n; ++dd)
          for (int e = 0; e < n; ++e)
            for (int f = 0; f < n; ++f)
              for (int g = 0; g < n; ++g)
                for (int k = 0; k < n; ++k)
                  for (int l = 0; l < n; ++l) {
                    double lhs = cat.f_symbol(f, c, dd, e, g, l) *
                                 cat.f_symbol(a, b, l, e, f, k);
                    double rhs = 0;
                    for (int h = 0; h < n; ++h)
                      rhs += cat.f_symbol(a, b, c, g, f, h) *
                             cat.f_symbol(a, h, dd, e, g, k) *
                             cat.f_symbol(b, c, dd, k, h, l);
                    if (std::abs(lhs - rhs) > 1e-10)
                      throw category_error(cat.name + ": pentagon relation fails");
                  }
}

// ---------------------------------------------------------------------------
// Constrained Hilbert spaces

struct StringNetHilbert {
  LinkLattice lattice;
  FusionCategory category;
  std::vector<uint32_t> configs;            // packed link labels, ascending
  std::unordered_map<uint32_t, int> index;  // packed config -> basis index

  int dim() const { return (int)configs.size(); }

  int label(int basis_index, int link) const {
    uint32_t c = configs.at(basis_index);
    for (int l = 0; l < link; ++l) c /= category.n_labels;
    return int(c % category.n_labels);
  }

  std::vector<int> labels(int basis_index) const {
    std::vector<int> out(lattice.n_links);
    uint32_t c = configs.at(basis_index);
    for (int l = 0; l < lattice.n_links; ++l) {
      out[l] = int(c % category.n_labels);
      c /= category.n_labels;
    }
    return out;
  }

  uint32_t pack(const std::vector<int>& labels) const {
    uint32_t c = 0;
    for (int l = lattice.n_links - 1; l >= 0; --l)
      c = c * category.n_labels + uint32_t(labels[l]);
    return c;
  }

  int find(const std::vector<int>& labels) const {
    auto it = index.find(pack(labels));
    return it == index.end() ? -1 : it->second;
  }
};

namespace detail {

// Vertex admissibility of a full label assignment. Square lattices use the
// oriented divergence rule (x-links point right, y-links point up; outgoing
// labels count +, incoming ones -); trivalent lattices use the fusion tensor.
inline bool config_admissible(const LinkLattice& lat, const FusionCategory& cat,
                              const std::vector<int>& labels) {
  if (lat.kind == LatticeKind::SquareLinks) {
    const int n = cat.zn;
    if (n < 2) throw stringnet_error("square string-nets need a clock category");
    const int ext = lat.extent;
    for (int y = 0; y <= ext; ++y)
      for (int x = 0; x <= ext; ++x) {
        int div = 0;
        if (x < ext) div += labels[lat.x_link(x, y)];
        if (y < ext) div += labels[lat.y_link(x, y)];
        if (x > 0) div -= labels[lat.x_link(x - 1, y)];
        if (y > 0) div -= labels[lat.y_link(x, y - 1)];
        if (((div % n) + n) % n != 0) return false;
      }
    return true;
  }
  if (cat.zn > 2)
    throw stringnet_error(
        "trivalent lattices support only self-dual label sets here");
  for (const auto& inc : lat.vertex_links) {
    if (inc.size() != 3)
      throw stringnet_error("fusion constraints need a trivalent lattice");
    if (!cat.fuses(labels[inc[0]], labels[inc[1]], labels[inc[2]])) return false;
  }
  return true;
}

}  // namespace detail

inline StringNetHilbert build_stringnet_hilbert(const LinkLattice& lat,
                                                const FusionCategory& cat) {
  if (lat.n_links * std::log2((double)cat.n_labels) > 26)
    throw stringnet_error("build_stringnet_hilbert: lattice too large to enumerate");
  StringNetHilbert h;
  h.lattice = lat;
  h.category = cat;
  uint64_t total = 1;
  for (int l = 0; l < lat.n_links; ++l) total *= cat.n_labels;
  std::vector<int> labels(lat.n_links);
  for (uint64_t c = 0; c < total; ++c) {
    uint64_t rest = c;
    for (int l = 0; l < lat.n_links; ++l) {
      labels[l] = int(rest % cat.n_labels);
      rest /= cat.n_labels;
    }
    if (detail::config_admissible(lat, cat, labels)) {
      h.index.emplace((uint32_t)c, (int)h.configs.size());
      h.configs.push_back((uint32_t)c);
    }
  }
  if (h.configs.empty() || h.configs[0] != 0)
    throw stringnet_error("build_stringnet_hilbert: vacuum configuration missing");
  return h;
}

// ---------------------------------------------------------------------------
// Plaquette operators

namespace detail {

struct PlaquetteBoundary {
  std::vector<int> edges;     // boundary links in cyclic order
  std::vector<int> vertices;  // vertices[i] joins edges[i] and edges[i+1]
  std::vector<int> legs;      // third link at vertices[i]
};

inline PlaquetteBoundary plaquette_boundary(const LinkLattice& lat, int p) {
  PlaquetteBoundary pb;
  pb.edges = lat.plaquette_links.at(p);
  const int n = (int)pb.edges.size();
  std::vector<int> used;  // 2-gons share both endpoints; keep them distinct
  for (int i = 0; i < n; ++i) {
    int e1 = pb.edges[i], e2 = pb.edges[(i + 1) % n];
    int shared = -1;
    for (int v1 : lat.link_vertices[e1])
      for (int v2 : lat.link_vertices[e2])
        if (v1 == v2 && std::find(used.begin(), used.end(), v1) == used.end())
          shared = v1;
    if (shared < 0) throw stringnet_error("plaquette edges are not cyclic");
    used.push_back(shared);
    pb.vertices.push_back(shared);
    int leg = -1;
    for (int l : lat.vertex_links[shared])
      if (l != e1 && l != e2) leg = l;
    if (leg < 0) throw stringnet_error("plaquette vertex has no external leg");
    pb.legs.push_back(leg);
  }
  return pb;
}

// Vertex factor of the plaquette operator B_p^s in the unitary gauge: the
// s-loop is fused into the two boundary edges (eL,eR) -> (eL',eR') meeting at
// a vertex with external leg l. The F-matrix normalized by the edge dimensions
// supplies the weight.
inline double plaquette_vertex_factor(const FusionCategory& cat, int l, int s,
                                      int el, int er, int elp, int erp) {
  if (!cat.fuses(l, el, er) || !cat.fuses(l, elp, erp)) return 0.0;
  double f = 1.0;
  if (cat.zn == 0 && l == 1 && s == 1 && el == 1 && erp == 1) {
    const double phi = cat.d(1);
    if (er == 0 && elp == 0) f = 1.0 / phi;
    else if (er == 1 && elp == 1) f = -1.0 / phi;
    else f = 1.0 / std::sqrt(phi);
  }
  return f / std::sqrt(cat.d(er) * cat.d(elp));
}

}  // namespace detail

// Dense matrix of B_p^s in the constrained basis. On square lattices this is
// the oriented clock-shift string around the plaquette; on trivalent lattices
// the matrix elements are products of F-symbol vertex factors and edge
// dimension factors.
inline Eigen::MatrixXd plaquette_operator(const StringNetHilbert& hil, int p,
                                          int s) {
  const auto& lat = hil.lattice;
  const auto& cat = hil.category;
  if (p < 0 || p >= lat.n_plaquettes)
    throw stringnet_error("plaquette_operator: plaquette out of range");
  if (s < 0 || s >= cat.n_labels)
    throw stringnet_error("plaquette_operator: label out of range");
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(hil.dim(), hil.dim());

  if (lat.kind == LatticeKind::SquareLinks) {
    const int n = cat.zn;
    int px = p % lat.extent, py = p / lat.extent;
    // Counter-clockwise circulation: bottom and right links are traversed
    // along their orientation (+s), top and left against it (-s).
    std::vector<std::pair<int, int>> shifts = {
        {lat.x_link(px, py), s},
        {lat.y_link(px + 1, py), s},
        {lat.x_link(px, py + 1), n - s},
        {lat.y_link(px, py), n - s}};
    for (int i = 0; i < hil.dim(); ++i) {
      auto labels = hil.labels(i);
      for (auto [l, sh] : shifts) labels[l] = (labels[l] + sh) % n;
      int j = hil.find(labels);
      if (j < 0) throw stringnet_error("plaquette shift left the constrained basis");
      b(j, i) = 1.0;
    }
    return b;
  }

  auto pb = detail::plaquette_boundary(lat, p);
  const int ne = (int)pb.edges.size();
  for (int i = 0; i < hil.dim(); ++i) {
    auto labels = hil.labels(i);
    // Enumerate all fusion-allowed relabelings e -> e' of the boundary edges.
    std::vector<int> ep(ne, 0);
    std::vector<int> stack{0};
    while (!stack.empty()) {
      int depth = (int)stack.size() - 1;
      int& cur = stack.back();
      if (cur >= cat.n_labels) {
        stack.pop_back();
        if (!stack.empty()) ++stack.back();
        continue;
      }
      if (!cat.fuses(labels[pb.edges[depth]], s, cat.dual(cur))) {
        ++cur;
        continue;
      }
      ep[depth] = cur;
      if (depth + 1 < ne) {
        stack.push_back(0);
        continue;
      }
      double amp = 1.0;
      for (int k = 0; k < ne; ++k)
        amp *= std::sqrt(cat.d(labels[pb.edges[k]]) * cat.d(ep[k]));
      for (int k = 0; k < ne; ++k) {
        int kn = (k + 1) % ne;
        amp *= detail::plaquette_vertex_factor(
            cat, labels[pb.legs[k]], s, labels[pb.edges[k]],
            labels[pb.edges[kn]], ep[k], ep[kn]);
      }
      auto target = labels;
      for (int k = 0; k < ne; ++k) target[pb.edges[k]] = ep[k];
      int j = hil.find(target);
      if (j >= 0) b(j, i) += amp;
      else if (std::abs(amp) > 1e-12)
        throw stringnet_error("plaquette move left the constrained basis");
      ++cur;
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Hamiltonians

// H = -eps_e sum_v A_v - eps_m sum_p (1/N) sum_s B_p^s in the constrained
// basis (the vertex projectors are constant there).
inline Eigen::MatrixXd build_zn_hamiltonian(const StringNetHilbert& hil,
                                            double eps_e, double eps_m) {
  if (hil.category.zn < 2)
    throw stringnet_error("build_zn_hamiltonian: clock category required");
  const int dim = hil.dim();
  Eigen::MatrixXd h = -eps_e * hil.lattice.n_vertices *
                      Eigen::MatrixXd::Identity(dim, dim);
  for (int p = 0; p < hil.lattice.n_plaquettes; ++p)
    for (int s = 0; s < hil.category.zn; ++s)
      h -= (eps_m / hil.category.zn) * plaquette_operator(hil, p, s);
  return h;
}

// H = -sum_v A_v - sum_p sum_s (d_s/D) B_p^s with B^0 = 1.
inline Eigen::MatrixXd build_fibonacci_hamiltonian(const StringNetHilbert& hil) {
  if (hil.category.zn != 0)
    throw stringnet_error("build_fibonacci_hamiltonian: Fibonacci category required");
  const int dim = hil.dim();
  const double dtot = hil.category.total_d;
  Eigen::MatrixXd h = -(hil.lattice.n_vertices + hil.lattice.n_plaquettes / dtot) *
                      Eigen::MatrixXd::Identity(dim, dim);
  for (int p = 0; p < hil.lattice.n_plaquettes; ++p)
    h -= (hil.category.d(1) / dtot) * plaquette_operator(hil, p, 1);
  return h;
}

// ---------------------------------------------------------------------------
// Fixed-point states

// Path A: apply the plaquette projectors (1/D) sum_s d_s B_p^s to the vacuum
// and scale by D^{n_P/2} so the result is normalized.
inline Eigen::VectorXd fixed_point_state(const StringNetHilbert& hil) {
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(hil.dim());
  psi(0) = 1.0;
  const double dtot = hil.category.total_d;
  for (int p = 0; p < hil.lattice.n_plaquettes; ++p) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(hil.dim());
    for (int s = 0; s < hil.category.n_labels; ++s)
      next += (hil.category.d(s) / dtot) * (plaquette_operator(hil, p, s) * psi);
    psi = next;
  }
  psi *= std::pow(dtot, hil.lattice.n_plaquettes / 2.0);
  if (std::abs(psi.norm() - 1.0) > 1e-8)
    throw stringnet_error("fixed_point_state: projector product is not normalized");
  return psi;
}

namespace detail {

// Path B: diagrammatic evaluation of a labeled closed net by series-parallel
// reduction (loop removal, strand merging at two-valent points, bubble
// collapses). Valid for self-dual categories; returns the amplitude relative
// to the empty diagram.
inline double graph_evaluation(const FusionCategory& cat,
                               const LinkLattice& lat,
                               const std::vector<int>& labels) {
  struct Edge {
    int u, v, label;
    bool alive;
  };
  std::vector<Edge> edges;
  for (int l = 0; l < lat.n_links; ++l)
    if (labels[l] != 0)
      edges.push_back({lat.link_vertices[l][0], lat.link_vertices[l][1],
                       labels[l], true});
  int next_vertex = lat.n_vertices;
  double factor = 1.0;

  auto degree = [&](int v) {
    int deg = 0;
    for (const auto& e : edges)
      if (e.alive) deg += (e.u == v) + (e.v == v);
    return deg;
  };
  auto incident = [&](int v) {
    std::vector<int> out;
    for (int i = 0; i < (int)edges.size(); ++i)
      if (edges[i].alive && (edges[i].u == v || edges[i].v == v))
        out.push_back(i);
    return out;
  };

  while (true) {
    int alive = 0;
    for (const auto& e : edges) alive += e.alive;
    if (alive == 0) return factor;
    bool progress = false;

    // Isolated closed loops.
    for (auto& e : edges) {
      if (!e.alive || e.u != e.v) continue;
      if (degree(e.u) == 2) {
        factor *= cat.d(e.label);
        e.alive = false;
        progress = true;
      } else {
        return 0.0;  // tadpole: loop with a dangling charged strand
      }
    }
    if (progress) continue;

    // Two-valent points: merge equal-labeled strands, zero otherwise.
    // One-valent points terminate a charged strand: amplitude zero.
    for (int v = 0; v < next_vertex && !progress; ++v) {
      auto inc = incident(v);
      if (inc.size() == 1) return 0.0;
      if (inc.size() != 2) continue;
      Edge& e1 = edges[inc[0]];
      Edge& e2 = edges[inc[1]];
      if (e1.label != e2.label) return 0.0;
      int a = e1.u == v ? e1.v : e1.u;
      int b = e2.u == v ? e2.v : e2.u;
      e1.alive = false;
      e2.alive = false;
      edges.push_back({a, b, e1.label, true});
      progress = true;
    }
    if (progress) continue;

    // Bubbles between trivalent points.
    for (int i = 0; i < (int)edges.size() && !progress; ++i) {
      if (!edges[i].alive || edges[i].u == edges[i].v) continue;
      for (int j = i + 1; j < (int)edges.size() && !progress; ++j) {
        if (!edges[j].alive) continue;
        bool parallel = (edges[i].u == edges[j].u && edges[i].v == edges[j].v) ||
                        (edges[i].u == edges[j].v && edges[i].v == edges[j].u);
        if (!parallel) continue;
        int u = edges[i].u, v = edges[i].v;
        auto iu = incident(u), iv = incident(v);
        if (iu.size() != 3 || iv.size() != 3) continue;
        int cu = -1, cv = -1;
        for (int k : iu)
          if (k != i && k != j) cu = k;
        for (int k : iv)
          if (k != i && k != j) cv = k;
        if (cu < 0 || cv < 0) continue;  // theta handled via cu == cv below
        if (edges[cu].label != edges[cv].label) return 0.0;
        double da = cat.d(edges[i].label), db = cat.d(edges[j].label);
        double dc = cat.d(edges[cu].label);
        factor *= std::sqrt(da * db / dc);
        edges[i].alive = false;
        edges[j].alive = false;
        if (cu == cv) {
          factor *= dc;  // closed theta
          edges[cu].alive = false;
        } else {
          int x = edges[cu].u == u ? edges[cu].v : edges[cu].u;
          int y = edges[cv].u == v ? edges[cv].v : edges[cv].u;
          edges[cu].alive = false;
          edges[cv].alive = false;
          edges.push_back({x, y, edges[cu].label, true});
        }
        progress = true;
      }
    }
    if (!progress)
      throw stringnet_error("graph_evaluation: diagram is not series-parallel");
  }
}

}  // namespace detail

// Fixed-point amplitude of a single configuration, computed along both paths
// (plaquette-projector product and diagrammatic reduction) and cross-checked
// to 1e-10. Configurations violating the vertex constraints have amplitude
// zero and set *valid = false.
inline double fixed_point_amplitude(const StringNetHilbert& hil,
                                    const std::vector<int>& labels,
                                    bool* valid = nullptr) {
  if ((int)labels.size() != hil.lattice.n_links)
    throw stringnet_error("fixed_point_amplitude: label count mismatch");
  if (valid) *valid = true;
  int idx = hil.find(labels);
  if (idx < 0) {
    if (valid) *valid = false;
    return 0.0;
  }
  double path_a = fixed_point_state(hil)(idx);
  // Abelian diagrams evaluate to 1 (all d_s = 1); non-abelian strips go
  // through the diagrammatic reduction.
  double evaluation =
      hil.category.abelian()
          ? 1.0
          : detail::graph_evaluation(hil.category, hil.lattice, labels);
  double path_b =
      std::pow(hil.category.total_d, -hil.lattice.n_plaquettes / 2.0) *
      evaluation;
  if (std::abs(path_a - path_b) > 1e-10)
    throw stringnet_error("fixed_point_amplitude: construction paths disagree");
  return path_a;
}

// ---------------------------------------------------------------------------
// Entropies

// I(C1:C2) at the trivialized endpoint:
// -log D - 2 sum_s (d_s^2/D) log(d_s/D); reduces to log N for clock categories.
inline double analytic_mutual_information(const FusionCategory& cat) {
  double acc = 0;
  for (int s = 0; s < cat.n_labels; ++s)
    acc += (cat.d(s) * cat.d(s) / cat.total_d) *
           std::log(cat.d(s) / cat.total_d);
  return -std::log(cat.total_d) - 2.0 * acc;
}

// Reduced state after splitting every region link into two half-links that
// carry the same label: the split forces the state diagonal in the region
// labels, with the marginal label distribution on the diagonal. Index order
// follows `region` with region[0] the most significant digit.
inline Eigen::MatrixXcd link_split_reduced_state(const StringNetHilbert& hil,
                                                 const Eigen::VectorXcd& psi,
                                                 const std::vector<int>& region) {
  if (psi.size() != hil.dim())
    throw stringnet_error("link_split_reduced_state: state dimension mismatch");
  int dim = 1;
  for (int l : region) {
    if (l < 0 || l >= hil.lattice.n_links)
      throw stringnet_error("link_split_reduced_state: link out of range");
    dim *= hil.category.n_labels;
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < hil.dim(); ++i) {
    int r = 0;
    for (int l : region) r = r * hil.category.n_labels + hil.label(i, l);
    rho(r, r) += std::norm(psi(i));
  }
  return rho;
}

// Conventional partial trace over the complement, with each link embedded as
// one full qudit (no splitting). Used as the abelian cross-check.
inline Eigen::MatrixXcd unsplit_reduced_state(const StringNetHilbert& hil,
                                              const Eigen::VectorXcd& psi,
                                              const std::vector<int>& region) {
  if (psi.size() != hil.dim())
    throw stringnet_error("unsplit_reduced_state: state dimension mismatch");
  int dim = 1;
  for (size_t k = 0; k < region.size(); ++k) dim *= hil.category.n_labels;
  std::map<std::vector<int>, std::vector<std::pair<int, int>>> groups;
  for (int i = 0; i < hil.dim(); ++i) {
    auto labels = hil.labels(i);
    int r = 0;
    for (int l : region) r = r * hil.category.n_labels + labels[l];
    for (int l : region) labels[l] = 0;
    groups[labels].push_back({r, i});
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [env, members] : groups)
    for (auto [r, i] : members)
      for (auto [rp, j] : members)
        rho(r, rp) += psi(i) * std::conj(psi(j));
  return rho;
}

// ---------------------------------------------------------------------------
// Trivializing ramps

// Drive diagonal for the clock magnetic field -h sum_{l in B} (sigma+sigma^+):
// entries sum_{l in B} -2 cos(2 pi s_l / N), so a growing positive schedule
// favors the label-0 vacuum on the driven links.
inline Eigen::VectorXd zn_magnetic_drive(const StringNetHilbert& hil,
                                         const std::vector<int>& b_links) {
  if (hil.category.zn < 2)
    throw stringnet_error("zn_magnetic_drive: clock category required");
  Eigen::VectorXd drive = Eigen::VectorXd::Zero(hil.dim());
  for (int i = 0; i < hil.dim(); ++i)
    for (int l : b_links)
      drive(i) -= 2.0 * std::cos(2.0 * M_PI * hil.label(i, l) / hil.category.zn);
  return drive;
}

// Drive diagonal for the Fibonacci flux penalty Delta sum_{l in B} |1><1|_l.
inline Eigen::VectorXd flux_penalty_drive(const StringNetHilbert& hil,
                                          const std::vector<int>& b_links) {
  Eigen::VectorXd drive = Eigen::VectorXd::Zero(hil.dim());
  for (int i = 0; i < hil.dim(); ++i)
    for (int l : b_links)
      if (hil.label(i, l) == 1) drive(i) += 1.0;
  return drive;
}

// Evolves psi under H(t) = h0 + schedule(t) * diag(drive) with a second-order
// split step: the static part is applied through its (precomputed)
// eigendecomposition, the drive through exact diagonal half steps at the
// interval midpoint.
inline void evolve_constrained(const Eigen::MatrixXd& h0,
                               const Eigen::VectorXd& drive,
                               const RampSchedule& schedule,
                               Eigen::VectorXcd& psi, double total_time,
                               double dt) {
  if (psi.size() != h0.rows() || drive.size() != h0.rows())
    throw stringnet_error("evolve_constrained: dimension mismatch");
  if (dt <= 0 || total_time < 0)
    throw stringnet_error("evolve_constrained: bad time step");
  const std::complex<double> minus_i(0.0, -1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h0);
  Eigen::MatrixXcd u0 = es.eigenvectors().cast<std::complex<double>>();
  Eigen::VectorXcd exp0(h0.rows());
  for (int k = 0; k < h0.rows(); ++k)
    exp0(k) = std::exp(minus_i * dt * es.eigenvalues()(k));
  const long steps = std::lround(total_time / dt);
  for (long step = 0; step < steps; ++step) {
    double hmid = schedule.value((step + 0.5) * dt);
    for (int k = 0; k < psi.size(); ++k)
      psi(k) *= std::exp(minus_i * (dt / 2.0) * hmid * drive(k));
    psi = u0 * (exp0.asDiagonal() * (u0.adjoint() * psi));
    for (int k = 0; k < psi.size(); ++k)
      psi(k) *= std::exp(minus_i * (dt / 2.0) * hmid * drive(k));
  }
}

// ---------------------------------------------------------------------------
// Protocol regions on the honeycomb strip. The strip is the collapsed annulus
// picture: its outer boundary is the band to trivialize, with two openings
// left at the middle plaquette (its top and bottom arcs). Those openings are
// C1 and C2; the interior rungs carry the loop connecting them.

struct StripRegions {
  std::vector<int> b_links, c1_links, c2_links;
};

inline StripRegions strip_protocol_regions(const LinkLattice& lat) {
  if (lat.kind != LatticeKind::Honeycomb || lat.n_plaquettes < 3 ||
      lat.n_plaquettes % 2 == 0)
    throw stringnet_error("strip_protocol_regions: need an odd strip of >= 3 plaquettes");
  int mid = lat.n_plaquettes / 2;
  // Outer boundary links belong to exactly one plaquette.
  std::vector<int> owners(lat.n_links, 0);
  for (const auto& cyc : lat.plaquette_links)
    for (int l : cyc) ++owners[l];
  StripRegions r;
  for (int l : lat.plaquette_links[mid])
    if (owners[l] == 1) {
      if (r.c1_links.empty()) r.c1_links.push_back(l);
      else r.c2_links.push_back(l);
    }
  if (r.c1_links.size() != 1 || r.c2_links.size() != 1)
    throw stringnet_error("strip_protocol_regions: middle plaquette has no two openings");
  for (int l = 0; l < lat.n_links; ++l)
    if (owners[l] == 1 && l != r.c1_links[0] && l != r.c2_links[0])
      r.b_links.push_back(l);
  return r;
}

}  // namespace topo
