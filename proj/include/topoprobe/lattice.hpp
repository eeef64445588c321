#pragma once

// Lattice geometries for the trivialization protocol: spins-on-links square
// lattice with smooth boundary, collapsed honeycomb strips for string-nets,
// and the 12-atom ruby-star layout. All objects are immutable after
// construction.

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace topo {

enum class LatticeKind { SquareLinks, Honeycomb, RubyStar };

class lattice_error : public std::runtime_error {
public:
  explicit lattice_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct LinkLattice {
  LatticeKind kind = LatticeKind::SquareLinks;
  int extent = 0;  // side N (square), plaquette count (honeycomb strip)

  int n_vertices = 0;
  int n_links = 0;
  int n_plaquettes = 0;

  std::vector<std::array<int, 2>> link_vertices;   // endpoints of each link
  std::vector<std::vector<int>> vertex_links;      // incidence vertex -> links
  std::vector<std::vector<int>> plaquette_links;   // cycle of links per plaquette

  // --- square-links addressing -------------------------------------------
  // Link order is row-major with the x-links of a row enumerated before the
  // row's y-links. An x-link at (x,y) joins vertices (x,y)-(x+1,y); a y-link
  // at (x,y) joins (x,y)-(x,y+1).

  int vertex(int x, int y) const { return y * (extent + 1) + x; }
  int plaq(int px, int py) const { return py * extent + px; }

  int x_link(int x, int y) const {
    check_square();
    if (x < 0 || x >= extent || y < 0 || y > extent)
      throw lattice_error("x_link out of range");
    return y * (2 * extent + 1) + x;
  }
  int y_link(int x, int y) const {
    check_square();
    if (x < 0 || x > extent || y < 0 || y >= extent)
      throw lattice_error("y_link out of range");
    return y * (2 * extent + 1) + extent + x;
  }
  bool is_x_link(int l) const { return l % (2 * extent + 1) < extent; }

  // Plaquettes adjacent to a link; -1 where the lattice ends.
  // An x-link at (x,y) separates plaquettes (x,y-1) and (x,y); a y-link at
  // (x,y) separates (x-1,y) and (x,y).
  std::array<int, 2> link_plaquettes(int l) const {
    check_square();
    int row = l / (2 * extent + 1), col = l % (2 * extent + 1);
    std::array<int, 2> out{-1, -1};
    if (col < extent) {  // x-link at (col,row)
      if (row > 0) out[0] = plaq(col, row - 1);
      if (row < extent) out[1] = plaq(col, row);
    } else {  // y-link at (col-extent,row)
      int x = col - extent;
      if (x > 0) out[0] = plaq(x - 1, row);
      if (x < extent) out[1] = plaq(x, row);
    }
    return out;
  }

private:
  void check_square() const {
    if (kind != LatticeKind::SquareLinks)
      throw lattice_error("square-links addressing on non-square lattice");
  }
};

// Square lattice of side N with smooth (plaquette-terminated) boundary:
// 2N(N+1) links, N^2 plaquettes, (N+1)^2 vertices.
inline LinkLattice build_square_link_lattice(int N) {
  if (N < 1) throw lattice_error("build_square_link_lattice: N must be >= 1");
  LinkLattice lat;
  lat.kind = LatticeKind::SquareLinks;
  lat.extent = N;
  lat.n_vertices = (N + 1) * (N + 1);
  lat.n_links = 2 * N * (N + 1);
  lat.n_plaquettes = N * N;

  lat.link_vertices.resize(lat.n_links);
  lat.vertex_links.resize(lat.n_vertices);
  for (int y = 0; y <= N; ++y) {
    for (int x = 0; x < N; ++x) {
      int l = lat.x_link(x, y);
      lat.link_vertices[l] = {lat.vertex(x, y), lat.vertex(x + 1, y)};
    }
    if (y < N)
      for (int x = 0; x <= N; ++x) {
        int l = lat.y_link(x, y);
        lat.link_vertices[l] = {lat.vertex(x, y), lat.vertex(x, y + 1)};
      }
  }
  for (int l = 0; l < lat.n_links; ++l)
    for (int v : lat.link_vertices[l]) lat.vertex_links[v].push_back(l);

  lat.plaquette_links.resize(lat.n_plaquettes);
  for (int py = 0; py < N; ++py)
    for (int px = 0; px < N; ++px)
      lat.plaquette_links[lat.plaq(px, py)] = {
          lat.x_link(px, py), lat.y_link(px + 1, py),
          lat.x_link(px, py + 1), lat.y_link(px, py)};
  return lat;
}

// Honeycomb strip of `cols` plaquettes with boundary guide links removed and
// the resulting two-valent chains merged into single links. Every remaining
// vertex is three-valent. Supported geometry: a single row.
//
// Edge layout for cols = c >= 2:
//   arc0 (outer arc of plaquette 1), v_1..v_{c-1} (shared inter-plaquette
//   links), t_i / b_i (top and bottom arcs of the interior plaquettes
//   i = 2..c-1), arc_c (outer arc of plaquette c).
inline LinkLattice build_honeycomb(int rows, int cols) {
  if (rows < 1 || cols < 1) throw lattice_error("build_honeycomb: sizes must be >= 1");
  if (rows != 1)
    throw lattice_error("build_honeycomb: only single-row strips are supported");
  if (cols < 2)
    throw lattice_error("build_honeycomb: a strip needs at least 2 plaquettes");

  LinkLattice lat;
  lat.kind = LatticeKind::Honeycomb;
  lat.extent = cols;

  // Link ids.
  int next = 0;
  int arc_l = next++;
  std::vector<int> v(cols);  // v[i] joins plaquette i and i+1 (1-based i)
  std::vector<int> t(cols), b(cols);
  for (int i = 1; i < cols; ++i) v[i] = next++;
  for (int i = 2; i < cols; ++i) { t[i] = next++; b[i] = next++; }
  int arc_r = next++;
  lat.n_links = next;

  // Vertices: top/bottom endpoint pairs of each shared link.
  lat.n_vertices = 2 * (cols - 1);
  auto top = [&](int i) { return 2 * (i - 1); };
  auto bot = [&](int i) { return 2 * (i - 1) + 1; };

  auto top_arc = [&](int i) {  // top path of plaquette i (1-based)
    if (i == 1) return arc_l;
    if (i == cols) return arc_r;
    return t[i];
  };
  auto bot_arc = [&](int i) {
    if (i == 1) return arc_l;
    if (i == cols) return arc_r;
    return b[i];
  };

  lat.link_vertices.assign(lat.n_links, {-1, -1});
  lat.vertex_links.resize(lat.n_vertices);
  auto attach = [&](int link, int vert) {
    lat.vertex_links[vert].push_back(link);
    if (lat.link_vertices[link][0] < 0) lat.link_vertices[link][0] = vert;
    else lat.link_vertices[link][1] = vert;
  };
  for (int i = 1; i < cols; ++i) {
    attach(v[i], top(i));
    attach(v[i], bot(i));
    attach(top_arc(i), top(i));
    attach(top_arc(i + 1), top(i));
    attach(bot_arc(i), bot(i));
    attach(bot_arc(i + 1), bot(i));
  }

  lat.n_plaquettes = cols;
  lat.plaquette_links.resize(cols);
  lat.plaquette_links[0] = {arc_l, v[1]};
  for (int i = 2; i < cols; ++i)
    lat.plaquette_links[i - 1] = {v[i - 1], t[i], v[i], b[i]};
  lat.plaquette_links[cols - 1] = {v[cols - 1], arc_r};
  return lat;
}

// Single star of the ruby lattice: the six edges of a kagome hexagon plus the
// six outward spokes. Atoms sit on the links; two atoms are blockade
// neighbors when their links share a vertex.
//
// Link ids: hexagon edges h_i = i (joining hexagon corners i and i+1),
// spokes s_i = 6 + i (attached at corner i).
inline LinkLattice build_ruby_star() {
  LinkLattice lat;
  lat.kind = LatticeKind::RubyStar;
  lat.extent = 1;
  lat.n_links = 12;
  lat.n_vertices = 12;  // 6 hexagon corners + 6 free spoke tips
  lat.n_plaquettes = 1;
  lat.link_vertices.resize(12);
  lat.vertex_links.resize(12);
  for (int i = 0; i < 6; ++i) {
    lat.link_vertices[i] = {i, (i + 1) % 6};        // hexagon edge
    lat.link_vertices[6 + i] = {i, 6 + i};          // spoke
  }
  for (int l = 0; l < 12; ++l)
    for (int v : lat.link_vertices[l]) lat.vertex_links[v].push_back(l);
  lat.plaquette_links.resize(1);
  for (int i = 0; i < 6; ++i) lat.plaquette_links[0].push_back(i);
  return lat;
}

// Union of the link cycles of a set of plaquettes (sorted, deduplicated).
inline std::vector<int> links_of_plaquettes(const LinkLattice& lat,
                                            const std::vector<int>& plaqs) {
  std::vector<char> seen(lat.n_links, 0);
  for (int p : plaqs)
    for (int l : lat.plaquette_links.at(p)) seen[l] = 1;
  std::vector<int> out;
  for (int l = 0; l < lat.n_links; ++l)
    if (seen[l]) out.push_back(l);
  return out;
}

// Plaquette ids of a rectangular block [px0, px0+w) x [py0, py0+h).
inline std::vector<int> plaquette_block(const LinkLattice& lat, int px0, int py0,
                                        int w, int h) {
  std::vector<int> out;
  for (int py = py0; py < py0 + h; ++py)
    for (int px = px0; px < px0 + w; ++px) out.push_back(lat.plaq(px, py));
  return out;
}

// Pairs of links sharing a vertex (the blockade adjacency of the star).
inline std::vector<std::array<int, 2>> blockade_pairs(const LinkLattice& lat) {
  std::vector<std::array<int, 2>> pairs;
  for (const auto& inc : lat.vertex_links)
    for (size_t a = 0; a < inc.size(); ++a)
      for (size_t b = a + 1; b < inc.size(); ++b)
        pairs.push_back({inc[a], inc[b]});
  return pairs;
}

// ---------------------------------------------------------------------------

enum class Region : uint8_t { Exterior, A, B, C1, C2 };

struct RegionSpec {
  int L = 0, d = 0, ell = 0, thickness = 1;
  std::vector<Region> link_region;
  std::vector<int> b_links, c1_links, c2_links;

  // Thickness-1 ring structure: plaquettes of the annulus in cyclic order and
  // the link realizing each ring bond (-1 where an opening interrupts it).
  std::vector<int> ring_plaquettes;
  std::vector<int> ring_bond_link;

  std::vector<int> links_of(Region r) const {
    std::vector<int> out;
    for (size_t l = 0; l < link_region.size(); ++l)
      if (link_region[l] == r) out.push_back((int)l);
    return out;
  }
};

class region_error : public std::runtime_error {
public:
  explicit region_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Annular trivializing region B around a central d x d hole, with two
// openings of width `ell` at the middles of the left and right sides.
// Opening links are assigned to C1 (left) and C2 (right); links inside the
// hole belong to the bulk A.
inline RegionSpec define_protocol_regions(const LinkLattice& lat, int d, int ell,
                                          int thickness = 1) {
  if (lat.kind != LatticeKind::SquareLinks)
    throw region_error("protocol regions require a square-links lattice");
  const int N = lat.extent;
  if (d < 0) throw region_error("region layout: d must be >= 0");
  if (ell < 1) throw region_error("region layout: opening width must be >= 1");
  if (thickness < 1) throw region_error("region layout: thickness must be >= 1");
  const int s = d + 2 * thickness;  // outer block side, in plaquettes
  if (s > N)
    throw region_error("region layout: annulus of outer side " + std::to_string(s) +
                       " does not fit in lattice of side " + std::to_string(N));
  if (ell > std::max(1, d))
    throw region_error("region layout: opening width exceeds the hole side");

  const int ox = (N - s) / 2, oy = (N - s) / 2;
  const int cy = oy + (s - ell + 1) / 2;  // first opening row (x-link y index)
  if (cy <= oy || cy + ell - 1 >= oy + s)
    throw region_error("region layout: opening does not fit inside the band");

  auto in_band = [&](int px, int py) {
    if (px < ox || px >= ox + s || py < oy || py >= oy + s) return false;
    return px < ox + thickness || px >= ox + s - thickness ||
           py < oy + thickness || py >= oy + s - thickness;
  };
  auto in_hole = [&](int px, int py) {
    return px >= ox + thickness && px < ox + s - thickness &&
           py >= oy + thickness && py < oy + s - thickness;
  };

  RegionSpec spec;
  spec.L = N;
  spec.d = d;
  spec.ell = ell;
  spec.thickness = thickness;
  spec.link_region.assign(lat.n_links, Region::Exterior);

  // Opening links: horizontal links in the band columns at the window rows.
  auto in_opening = [&](int l, bool& left) {
    if (!lat.is_x_link(l)) return false;
    int row = l / (2 * N + 1), x = l % (2 * N + 1);
    if (row < cy || row >= cy + ell) return false;
    if (x >= ox && x < ox + thickness) { left = true; return true; }
    if (x >= ox + s - thickness && x < ox + s) { left = false; return true; }
    return false;
  };

  for (int l = 0; l < lat.n_links; ++l) {
    auto [p1, p2] = lat.link_plaquettes(l);
    bool both_band = p1 >= 0 && p2 >= 0 && in_band(p1 % N, p1 / N) && in_band(p2 % N, p2 / N);
    bool left = false;
    if (both_band && in_opening(l, left)) {
      spec.link_region[l] = left ? Region::C1 : Region::C2;
    } else if (both_band) {
      spec.link_region[l] = Region::B;
    } else {
      bool hole1 = p1 >= 0 && in_hole(p1 % N, p1 / N);
      bool hole2 = p2 >= 0 && in_hole(p2 % N, p2 / N);
      if (hole1 && hole2) spec.link_region[l] = Region::A;
    }
  }
  spec.b_links = spec.links_of(Region::B);
  spec.c1_links = spec.links_of(Region::C1);
  spec.c2_links = spec.links_of(Region::C2);
  if (spec.c1_links.empty() || spec.c2_links.empty())
    throw region_error("region layout: openings ended up empty");

  if (thickness == 1) {
    // Cyclic walk of the ring plaquettes, counter-clockwise starting at the
    // bottom-left corner of the band.
    auto push = [&](int px, int py) { spec.ring_plaquettes.push_back(lat.plaq(px, py)); };
    for (int px = ox; px < ox + s; ++px) push(px, oy);
    for (int py = oy + 1; py < oy + s; ++py) push(ox + s - 1, py);
    for (int px = ox + s - 2; px >= ox; --px) push(px, oy + s - 1);
    for (int py = oy + s - 2; py > oy; --py) push(ox, py);

    const int n = (int)spec.ring_plaquettes.size();
    spec.ring_bond_link.assign(n, -1);
    for (int i = 0; i < n; ++i) {
      int pa = spec.ring_plaquettes[i], pb = spec.ring_plaquettes[(i + 1) % n];
      // shared link of the two adjacent plaquettes
      int ax = pa % N, ay = pa / N, bx = pb % N, by = pb / N;
      int shared;
      if (ax == bx)
        shared = lat.x_link(ax, std::max(ay, by));
      else
        shared = lat.y_link(std::max(ax, bx), ay);
      if (spec.link_region[shared] == Region::B)
        spec.ring_bond_link[i] = shared;
    }
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Duality dictionary for the thickness-1 fixed-point geometry: dual sites are
// the ring plaquettes, Z on a ring link maps to the Z-pair of its adjacent
// dual sites, and the plaquette flips B_p map to single dual X operators.
// Plaquettes outside the ring are fixed to the X_p = +1 eigenstate.

struct DualChainMap {
  std::vector<int> sites;             // plaquette id per chain position
  std::vector<int> site_of_plaquette; // inverse map, -1 if off-chain
  std::vector<int> bond_link;         // bond i joins chain sites i, i+1 (cyclic)
  std::vector<int> chain_bond_of_link;// link id -> bond index, -1 otherwise

  int n_sites() const { return (int)sites.size(); }

  // Dual image of Z on a ring link: the two adjacent dual sites.
  std::array<int, 2> z_image(int link) const {
    int b = chain_bond_of_link.at(link);
    if (b < 0) throw lattice_error("z_image: link is not part of the dual chain");
    return {b, (b + 1) % n_sites()};
  }

  // Dual image of X on a ring link: the downstream X-string (domain-wall
  // flip). Undefined for the bond closing the ring.
  std::vector<int> x_image(int link) const {
    int b = chain_bond_of_link.at(link);
    if (b < 0) throw lattice_error("x_image: link is not part of the dual chain");
    if (b == n_sites() - 1)
      throw lattice_error("x_image: no dual image for the ring-closing bond");
    std::vector<int> out;
    for (int j = b + 1; j < n_sites(); ++j) out.push_back(j);
    return out;
  }
};

inline DualChainMap build_dual_map(const LinkLattice& lat, const RegionSpec& regions) {
  if (regions.thickness != 1)
    throw lattice_error("build_dual_map: only thickness-1 geometries are supported");
  if (regions.ring_plaquettes.empty())
    throw lattice_error("build_dual_map: region spec carries no ring");
  DualChainMap map;
  map.sites = regions.ring_plaquettes;
  map.site_of_plaquette.assign(lat.n_plaquettes, -1);
  for (int i = 0; i < (int)map.sites.size(); ++i)
    map.site_of_plaquette[map.sites[i]] = i;
  map.chain_bond_of_link.assign(lat.n_links, -1);
  const int n = (int)map.sites.size();
  map.bond_link.resize(n);
  for (int i = 0; i < n; ++i) {
    int pa = map.sites[i], pb = map.sites[(i + 1) % n];
    int ax = pa % lat.extent, ay = pa / lat.extent;
    int bx = pb % lat.extent, by = pb / lat.extent;
    int shared = (ax == bx) ? lat.x_link(ax, std::max(ay, by))
                            : lat.y_link(std::max(ax, bx), ay);
    map.bond_link[i] = shared;
    map.chain_bond_of_link[shared] = i;
  }
  return map;
}

}  // namespace topo
