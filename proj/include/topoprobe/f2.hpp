#pragma once

// Dense bit-packed linear algebra over F2.

#include <cstdint>
#include <vector>

namespace topo {

struct BitVec {
  std::vector<uint64_t> w;

  explicit BitVec(int nbits = 0) : w((nbits + 63) / 64, 0) {}
  bool get(int i) const { return (w[i >> 6] >> (i & 63)) & 1; }
  void set(int i, bool v = true) {
    if (v) w[i >> 6] |= (uint64_t(1) << (i & 63));
    else   w[i >> 6] &= ~(uint64_t(1) << (i & 63));
  }
  void flip(int i) { w[i >> 6] ^= (uint64_t(1) << (i & 63)); }
  void operator^=(const BitVec& o) {
    for (size_t k = 0; k < w.size(); ++k) w[k] ^= o.w[k];
  }
  bool any() const {
    for (uint64_t x : w) if (x) return true;
    return false;
  }
  int popcount_and(const BitVec& o) const {
    int c = 0;
    for (size_t k = 0; k < w.size(); ++k) c += __builtin_popcountll(w[k] & o.w[k]);
    return c;
  }
  int popcount() const {
    int c = 0;
    for (uint64_t x : w) c += __builtin_popcountll(x);
    return c;
  }
};

// Rank of a list of bit-rows of width nbits. Destroys a local copy only.
inline int f2_rank(std::vector<BitVec> rows, int nbits) {
  int rank = 0;
  for (int col = 0; col < nbits && rank < (int)rows.size(); ++col) {
    int pivot = -1;
    for (int r = rank; r < (int)rows.size(); ++r)
      if (rows[r].get(col)) { pivot = r; break; }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    for (int r = 0; r < (int)rows.size(); ++r)
      if (r != rank && rows[r].get(col)) rows[r] ^= rows[rank];
    ++rank;
  }
  return rank;
}

}  // namespace topo
