#pragma once

// Double-layer PEPS contraction engine for Renyi-2 entropies of deformed
// loop-gas states on the open square-links lattice.
//
// The state is a vertex-sited PEPS: the tensor at vertex (x,y) carries the
// physical spins of its right and up links, virtual legs of dimension 2, and
// a parity core delta(r*u*l*d = +1) (or -1 at marked anyon vertices). Edge
// virtual legs are pinned, which makes the undeformed network exactly the
// unique planar ground state of the stabilizer model. Per-link deformations
// exp(g_Z Z + g_X X) act on the physical legs.
//
// Purities tr(rho_C^2) are evaluated by stacking two bra-ket double layers
// and rerouting the physical contractions on the links of C (a swap test),
// so no open legs are ever materialized. Because bra and ket tensors are
// real, every physical contraction reduces to an entry of a product of the
// 2x2 deformation matrices, and the whole network is real.
//
// Contraction proceeds column by column with a boundary MPS compressed by
// singular-value truncation (relative cutoff + bond cap), or exactly with a
// full boundary vector for narrow lattices.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "topoprobe/lattice.hpp"

namespace topo {

class peps_error : public std::runtime_error {
public:
  explicit peps_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Deformed loop-gas state: per-link deformation angles and the set of
// parity-defect (anyon) vertices.
struct PEPSNet {
  int N = 0;                   // lattice extent (build_square_link_lattice)
  std::vector<double> g_z, g_x;  // one pair per link
  std::vector<char> anyon;       // one flag per vertex

  int n_links() const { return 2 * N * (N + 1); }
  int n_vertices() const { return (N + 1) * (N + 1); }
};

inline PEPSNet make_peps_net(int N, double g_z = 0.0, double g_x = 0.0) {
  if (N < 1) throw peps_error("make_peps_net: extent must be >= 1");
  if (!std::isfinite(g_z) || !std::isfinite(g_x))
    throw peps_error("make_peps_net: deformation must be finite");
  PEPSNet net;
  net.N = N;
  net.g_z.assign(net.n_links(), g_z);
  net.g_x.assign(net.n_links(), g_x);
  net.anyon.assign(net.n_vertices(), 0);
  return net;
}

inline void set_link_deformation(PEPSNet& net, const std::vector<int>& links,
                                 double g_z, double g_x) {
  if (!std::isfinite(g_z) || !std::isfinite(g_x))
    throw peps_error("set_link_deformation: deformation must be finite");
  for (int l : links) {
    if (l < 0 || l >= net.n_links())
      throw peps_error("set_link_deformation: link out of range");
    net.g_z[l] = g_z;
    net.g_x[l] = g_x;
  }
}

inline void add_anyon_pair(PEPSNet& net, int vertex_a, int vertex_b) {
  if (vertex_a < 0 || vertex_a >= net.n_vertices() || vertex_b < 0 ||
      vertex_b >= net.n_vertices() || vertex_a == vertex_b)
    throw peps_error("add_anyon_pair: vertices must be distinct and in range");
  net.anyon[vertex_a] ^= 1;
  net.anyon[vertex_b] ^= 1;
}

// exp(g_z Z + g_x X), real symmetric 2x2.
inline Eigen::Matrix2d deformation_matrix(double g_z, double g_x) {
  double m = std::hypot(g_z, g_x);
  Eigen::Matrix2d out = Eigen::Matrix2d::Identity() * std::cosh(m);
  double s = m < 1e-300 ? 1.0 : std::sinh(m) / m;
  out(0, 0) += s * g_z;
  out(1, 1) -= s * g_z;
  out(0, 1) += s * g_x;
  out(1, 0) += s * g_x;
  return out;
}

struct ContractOptions {
  int chi = 32;            // boundary-MPS bond cap (ignored in exact mode)
  double cutoff = 1e-10;   // relative discarded singular weight per split
  bool exact = false;      // full boundary vector, no compression
};

struct ContractScalar {
  double log_abs = 0.0;  // log of the magnitude of the contraction
  int sign = 1;
  double truncation = 0.0;  // accumulated discarded singular weight
};

namespace detail {

// Pair factors of a physical link for the stacked layers. `layers` is 2 or
// 4; the swap flag reroutes the 4-layer pairing (0,1)(2,3) -> (0,3)(1,2).
// `ma` dresses layers 0,1 and `mb` layers 2,3.
struct LinkFactors {
  int layers;
  bool swap;
  Eigen::Matrix2d gaa, gbb, gab;  // M_a*M_a, M_b*M_b, M_a*M_b
  double value(int bits_a, int bits_b, int bits_c, int bits_d) const {
    // bits: virtual values of layers 0..3 on this leg
    if (layers == 2) return gaa(bits_a, bits_b);
    if (!swap) return gaa(bits_a, bits_b) * gbb(bits_c, bits_d);
    return gab(bits_a, bits_d) * gab(bits_b, bits_c);
  }
};

// Dense transfer block of one vertex: matrix with rows (v_down, leg_left)
// and columns (leg_right, v_up). Legs at the lattice edge have dimension 1.
struct VertexBlock {
  int dl = 1, dr = 1, dd = 1, du = 1;
  Eigen::MatrixXd mat;  // (dd*dl) x (dr*du)
};

inline VertexBlock build_vertex_block(const PEPSNet& a, const PEPSNet* b,
                                      const std::vector<char>& swap_link,
                                      int layers, int x, int y) {
  LinkLattice lat = build_square_link_lattice(a.N);
  (void)lat;
  const int N = a.N;
  const int D = 1 << layers;
  int sigma = 0;
  int v = (N + 1) * y + x;
  if (a.anyon[v]) sigma |= 0b11;
  if (layers == 4 && (b ? b->anyon[v] : a.anyon[v])) sigma |= 0b1100;

  auto factors = [&](int link) {
    LinkFactors f;
    f.layers = layers;
    f.swap = !swap_link.empty() && swap_link[link];
    Eigen::Matrix2d ma = deformation_matrix(a.g_z[link], a.g_x[link]);
    const PEPSNet& nb = b ? *b : a;
    Eigen::Matrix2d mb = deformation_matrix(nb.g_z[link], nb.g_x[link]);
    f.gaa = ma * ma;
    f.gbb = mb * mb;
    f.gab = ma * mb;
    return f;
  };

  VertexBlock blk;
  blk.dl = x == 0 ? 1 : D;
  blk.dr = x == N ? 1 : D;
  blk.dd = y == 0 ? 1 : D;
  blk.du = y == N ? 1 : D;
  bool has_r = x < N, has_u = y < N;
  LinkFactors fr, fu;
  int xl = 0, yl = 0;
  if (has_r) {
    xl = y * (2 * N + 1) + x;  // x-link at (x,y)
    fr = factors(xl);
  }
  if (has_u) {
    yl = y * (2 * N + 1) + N + x;  // y-link at (x,y)
    fu = factors(yl);
  }

  blk.mat = Eigen::MatrixXd::Zero(blk.dd * blk.dl, blk.dr * blk.du);
  for (int d = 0; d < blk.dd; ++d)
    for (int l = 0; l < blk.dl; ++l)
      for (int r = 0; r < blk.dr; ++r)
        for (int u = 0; u < blk.du; ++u) {
          if (((l ^ r ^ d ^ u) & (D - 1)) != sigma) continue;
          double val = 1.0;
          if (has_r)
            val *= fr.value(r & 1, (r >> 1) & 1, (r >> 2) & 1, (r >> 3) & 1);
          if (has_u)
            val *= fu.value(u & 1, (u >> 1) & 1, (u >> 2) & 1, (u >> 3) & 1);
          blk.mat(d * blk.dl + l, r * blk.du + u) = val;
        }
  return blk;
}

// Boundary MPS site: matrix (bond_below * phys) x bond_above.
using MPSSite = Eigen::MatrixXd;

inline double mps_norm(std::vector<MPSSite>& sites) {
  // sites are kept left(bottom)-canonical except the last; its Frobenius
  // norm is the state norm.
  return sites.back().norm();
}

}  // namespace detail

// Contracts the stacked network. `b == nullptr` selects the two-layer norm
// network of `a`; otherwise layers (0,1) are the bra-ket pair of `a` and
// layers (2,3) of `b`, with the physical pairing swapped on `swap_link`.
inline ContractScalar contract_network(const PEPSNet& a, const PEPSNet* b,
                                       const std::vector<char>& swap_link,
                                       const ContractOptions& opts) {
  const int N = a.N;
  const int layers = b ? 4 : 2;
  const int D = 1 << layers;
  if (b && b->N != N) throw peps_error("contract_network: extent mismatch");
  if (!swap_link.empty() && (int)swap_link.size() != a.n_links())
    throw peps_error("contract_network: swap mask size mismatch");
  {
    int par_a = 0, par_b = 0;
    for (char c : a.anyon) par_a ^= c;
    const PEPSNet& nb = b ? *b : a;
    for (char c : nb.anyon) par_b ^= c;
    if (par_a || par_b)
      throw peps_error("contract_network: odd anyon count gives a null state");
  }
  if (opts.chi < 2 && !opts.exact)
    throw peps_error("contract_network: bond cap must be >= 2");

  ContractScalar out;

  if (opts.exact) {
    if (N > 4)
      throw peps_error("contract_network: exact contraction limited to N <= 4");
    // boundary vector over the left legs of the current column, row-major
    // with site 0 fastest; plus a carried vertical bond while sweeping.
    std::vector<double> vec{1.0};
    std::vector<int> dims(N + 1, 1);  // current leg dimension per row
    for (int x = 0; x <= N; ++x) {
      int carried = 1;  // vertical bond below the current site
      for (int y = 0; y <= N; ++y) {
        auto blk = detail::build_vertex_block(a, b, swap_link, layers, x, y);
        // vec indexed by (rows with y' < y already replaced by r-legs,
        // carried v, this row's l leg, rows above) -> flatten as
        // pre (y' < y), l_y, post (y' > y), carried v.
        long pre = 1, post = 1;
        for (int t = 0; t < y; ++t) pre *= dims[t];
        for (int t = y + 1; t <= N; ++t) post *= dims[t];
        long dl = dims[y];
        // gather into matrix (pre*post) x (carried*dl)
        Eigen::MatrixXd X(pre * post, carried * dl);
        for (long p = 0; p < pre; ++p)
          for (long ld = 0; ld < dl; ++ld)
            for (long q = 0; q < post; ++q)
              for (long c = 0; c < carried; ++c) {
                long src = ((c * post + q) * dl + ld) * pre + p;
                X(q * pre + p, c * dl + ld) = vec[src];
              }
        // block matrix is (dd*dl) x (dr*du) with dd == carried
        Eigen::MatrixXd Y = X * blk.mat;  // (pre*post) x (dr*du)
        long dr = blk.dr, du = blk.du;
        vec.assign(pre * post * dr * du, 0.0);
        for (long p = 0; p < pre; ++p)
          for (long r = 0; r < dr; ++r)
            for (long q = 0; q < post; ++q)
              for (long u = 0; u < du; ++u) {
                long dst = ((u * post + q) * dr + r) * pre + p;
                vec[dst] = Y(q * pre + p, r * du + u);
              }
        dims[y] = (int)dr;
        carried = (int)du;
        // rescale to keep magnitudes sane
        double mx = 0;
        for (double t : vec) mx = std::max(mx, std::abs(t));
        if (mx == 0.0) {
          out.log_abs = -std::numeric_limits<double>::infinity();
          out.sign = 0;
          return out;
        }
        for (double& t : vec) t /= mx;
        out.log_abs += std::log(mx);
      }
    }
    if (vec.size() != 1)
      throw peps_error("contract_network: exact closure failed");
    if (vec[0] == 0.0) {
      out.log_abs = -std::numeric_limits<double>::infinity();
      out.sign = 0;
    } else {
      out.log_abs += std::log(std::abs(vec[0]));
      out.sign = vec[0] > 0 ? 1 : -1;
    }
    return out;
  }

  // --- boundary-MPS sweep with zip-up truncation ---------------------------
  std::vector<detail::MPSSite> mps(N + 1, Eigen::MatrixXd::Ones(1, 1));
  std::vector<int> bond(N + 2, 1);  // bond[y] below site y
  std::vector<int> phys(N + 1, 1);

  for (int x = 0; x <= N; ++x) {
    // carried tensor C: (new bond) x (v, old bond)
    Eigen::MatrixXd C = Eigen::MatrixXd::Ones(1, 1);
    int vdim = 1;
    std::vector<detail::MPSSite> fresh(N + 1);
    std::vector<int> nbond(N + 2, 1);
    for (int y = 0; y <= N; ++y) {
      auto blk = detail::build_vertex_block(a, b, swap_link, layers, x, y);
      const int dl = phys[y], dr = blk.dr, du = blk.du;
      const int gb = bond[y], ga = bond[y + 1];  // bonds below/above site y
      const int aa = (int)C.rows();
      if ((int)blk.dd != vdim || (int)C.cols() != vdim * gb)
        throw peps_error("contract_network: internal leg mismatch");
      // X[a, v, p_in, g'] = sum_g C[a,(v,g)] psi[(g,p),g']
      Eigen::MatrixXd X2(aa * ga, vdim * dl);  // rows (g'*aa+a), cols (v*dl+p)
      for (int p = 0; p < dl; ++p) {
        Eigen::MatrixXd psi_p(gb, ga);
        for (int g = 0; g < gb; ++g) psi_p.row(g) = mps[y].row(g * dl + p);
        for (int vv = 0; vv < vdim; ++vv) {
          Eigen::MatrixXd t = C.middleCols(vv * gb, gb) * psi_p;  // aa x ga
          for (int g2 = 0; g2 < ga; ++g2)
            for (int ar = 0; ar < aa; ++ar)
              X2(g2 * aa + ar, vv * dl + p) = t(ar, g2);
        }
      }
      // theta[(g',a),(r,u)] = X2 * blk.mat  (blk rows are (v*dl+p))
      Eigen::MatrixXd theta = X2 * blk.mat;  // (aa*ga) x (dr*du)
      // split: left (a, r) -> new site; right (u, g') -> carried
      Eigen::MatrixXd M2(aa * dr, du * ga);
      for (int g2 = 0; g2 < ga; ++g2)
        for (int ar = 0; ar < aa; ++ar)
          for (int r = 0; r < dr; ++r)
            for (int u = 0; u < du; ++u)
              M2(ar * dr + r, u * ga + g2) = theta(g2 * aa + ar, r * du + u);
      if (y == N) {
        if (du != 1 || ga != 1)
          throw peps_error("contract_network: top edge not pinned");
        fresh[y] = M2;  // (a*dr) x 1
        nbond[y] = aa;
        nbond[y + 1] = 1;
      } else {
        // split through the Gram matrix: robust against the exactly
        // degenerate spectra these parity networks produce, and the carried
        // part C = U^T M2 is a projection, never a reconstruction
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M2 * M2.transpose());
        const auto& ev = eig.eigenvalues();  // ascending
        const int n = (int)ev.size();
        double total = std::max(ev.cwiseMax(0.0).sum(), 0.0);
        int maxk = std::min(n, opts.chi);
        int keep = 0;
        double kept = 0;
        for (; keep < maxk; ++keep) {
          kept += std::max(ev(n - 1 - keep), 0.0);
          if (total - kept <= opts.cutoff * total) {
            ++keep;
            break;
          }
        }
        keep = std::max(keep, 1);
        keep = std::min(keep, maxk);
        if (total > 0) {
          double k2 = 0;
          for (int i = 0; i < keep; ++i) k2 += std::max(ev(n - 1 - i), 0.0);
          out.truncation += std::max(total - k2, 0.0) / total;
        }
        Eigen::MatrixXd U(n, keep);
        for (int i = 0; i < keep; ++i) U.col(i) = eig.eigenvectors().col(n - 1 - i);
        fresh[y] = U;  // (a*dr) x keep
        nbond[y] = aa;
        C = U.transpose() * M2;  // keep x (du*ga)
        vdim = du;
      }
    }
    mps = std::move(fresh);
    bond = nbond;
    for (int y = 0; y <= N; ++y)
      phys[y] = x == N ? 1 : D;
    // fix up bond bookkeeping: bond[y] must match rows/cols of tensors
    for (int y = 0; y <= N; ++y) {
      bond[y] = (int)mps[y].rows() / phys[y];
      bond[y + 1] = (int)mps[y].cols();
    }
    double nrm = detail::mps_norm(mps);
    if (nrm == 0.0) {
      out.log_abs = -std::numeric_limits<double>::infinity();
      out.sign = 0;
      return out;
    }
    mps[N] /= nrm;
    out.log_abs += std::log(nrm);
  }

  // all physical dimensions are 1 now: multiply through
  Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(1, 1);
  for (int y = 0; y <= N; ++y) acc = acc * mps[y];
  if (acc.rows() != 1 || acc.cols() != 1)
    throw peps_error("contract_network: closure failed");
  double val = acc(0, 0);
  if (val == 0.0) {
    out.log_abs = -std::numeric_limits<double>::infinity();
    out.sign = 0;
  } else {
    out.log_abs += std::log(std::abs(val));
    out.sign = val > 0 ? 1 : -1;
  }
  return out;
}

// log tr(rho_A,C rho_B,C) with both density matrices normalized.
inline double log_cross_purity(const PEPSNet& a, const PEPSNet& b,
                               const std::vector<int>& region,
                               const ContractOptions& opts,
                               double* truncation = nullptr) {
  std::vector<char> swap(a.n_links(), 0);
  for (int l : region) {
    if (l < 0 || l >= a.n_links())
      throw peps_error("log_cross_purity: region link out of range");
    swap[l] = 1;
  }
  auto z4 = contract_network(a, &b, swap, opts);
  auto za = contract_network(a, nullptr, {}, opts);
  auto zb = contract_network(&b == &a ? a : b, nullptr, {}, opts);
  if (za.sign <= 0 || zb.sign <= 0)
    throw peps_error("log_cross_purity: non-positive norm");
  if (z4.sign <= 0)
    throw peps_error("log_cross_purity: non-positive purity");
  if (truncation)
    *truncation = z4.truncation + za.truncation + zb.truncation;
  return z4.log_abs - za.log_abs - zb.log_abs;
}

// Renyi-2 entropy of a link region, in nats.
inline double peps_renyi2(const PEPSNet& net, const std::vector<int>& region,
                          const ContractOptions& opts,
                          double* truncation = nullptr) {
  return -log_cross_purity(net, net, region, opts, truncation);
}

inline double peps_renyi2_mutual(const PEPSNet& net,
                                 const std::vector<int>& c1,
                                 const std::vector<int>& c2,
                                 const ContractOptions& opts) {
  std::vector<int> both = c1;
  both.insert(both.end(), c2.begin(), c2.end());
  return peps_renyi2(net, c1, opts) + peps_renyi2(net, c2, opts) -
         peps_renyi2(net, both, opts);
}

// Incoherent mixture sum_i w_i |psi_i><psi_i| (each component normalized):
// Renyi-2 entropy of `region` via the block expansion of tr(rho^2).
struct MixtureComponent {
  const PEPSNet* net;
  double weight;
};

inline double mixture_renyi2(const std::vector<MixtureComponent>& parts,
                             const std::vector<int>& region,
                             const ContractOptions& opts) {
  if (parts.empty()) throw peps_error("mixture_renyi2: empty mixture");
  double wsum = 0;
  for (const auto& p : parts) {
    if (!p.net || p.weight < 0)
      throw peps_error("mixture_renyi2: invalid component");
    wsum += p.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw peps_error("mixture_renyi2: weights must sum to 1");
  double purity = 0;
  for (size_t i = 0; i < parts.size(); ++i)
    for (size_t j = 0; j < parts.size(); ++j) {
      double lp =
          log_cross_purity(*parts[i].net, *parts[j].net, region, opts);
      purity += parts[i].weight * parts[j].weight * std::exp(lp);
    }
  return -std::log(purity);
}

inline double mixture_renyi2_mutual(const std::vector<MixtureComponent>& parts,
                                    const std::vector<int>& c1,
                                    const std::vector<int>& c2,
                                    const ContractOptions& opts) {
  std::vector<int> both = c1;
  both.insert(both.end(), c2.begin(), c2.end());
  return mixture_renyi2(parts, c1, opts) + mixture_renyi2(parts, c2, opts) -
         mixture_renyi2(parts, both, opts);
}

// Reference topological signal from the ring-region combination
// S(B+C1) + S(B+C2) - S(B+C1+C2) - S(B): the boundary law cancels between
// the four terms and the remainder is the same universal log 2 the opening
// protocol extracts (verified against stabilizer analytics at g = 0).
inline double peps_topological_renyi2(const PEPSNet& net,
                                      const RegionSpec& regions,
                                      const ContractOptions& opts) {
  auto join = [](std::vector<int> a, const std::vector<int>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  auto bc1 = join(regions.b_links, regions.c1_links);
  auto bc2 = join(regions.b_links, regions.c2_links);
  auto all = join(bc1, regions.c2_links);
  return peps_renyi2(net, bc1, opts) + peps_renyi2(net, bc2, opts) -
         peps_renyi2(net, all, opts) - peps_renyi2(net, regions.b_links, opts);
}

}  // namespace topo
