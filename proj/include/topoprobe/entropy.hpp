#pragma once

// Entropy and information functionals shared by all engines. Everything is
// reported in nats.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace topo {

class entropy_error : public std::runtime_error {
public:
  explicit entropy_error(const std::string& msg) : std::runtime_error(msg) {}
};

enum class EntropyKind { VonNeumann, Renyi2 };

// -sum lambda log lambda over the clamped eigenvalue spectrum.
inline double von_neumann(const Eigen::MatrixXcd& rho) {
  if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-8)
    throw entropy_error("von_neumann: density matrix is not unit trace");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  double s = 0;
  for (double lam : es.eigenvalues()) {
    if (lam < -1e-10)
      throw entropy_error("von_neumann: eigenvalue " + std::to_string(lam) +
                          " below the PSD floor");
    if (lam > 0) s -= lam * std::log(lam);
  }
  return std::max(s, 0.0);
}

inline double renyi2_from_purity(double purity) {
  if (purity <= 0 || purity > 1 + 1e-9)
    throw entropy_error("renyi2: purity " + std::to_string(purity) +
                        " outside (0, 1]");
  return -std::log(std::min(purity, 1.0));
}

inline double renyi2(const Eigen::MatrixXcd& rho) {
  if (std::abs(rho.trace().real() - 1.0) > 1e-8)
    throw entropy_error("renyi2: density matrix is not unit trace");
  return renyi2_from_purity((rho * rho).trace().real());
}

struct EntropyReport {
  double s_c1 = 0, s_c2 = 0, s_c1c2 = 0;
  double mutual = 0;
  EntropyKind kind = EntropyKind::VonNeumann;
};

// Combines three region entropies of the same kind into I = S1 + S2 - S12.
// The subadditivity bounds are enforced for von Neumann entropies only (they
// can be violated legitimately for Renyi-2).
inline EntropyReport mutual_information(double s_c1, double s_c2, double s_c1c2,
                                        EntropyKind kind = EntropyKind::VonNeumann) {
  EntropyReport r{s_c1, s_c2, s_c1c2, s_c1 + s_c2 - s_c1c2, kind};
  if (kind == EntropyKind::VonNeumann) {
    if (r.mutual < -1e-9)
      throw entropy_error("mutual_information: I = " + std::to_string(r.mutual) +
                          " violates subadditivity");
    if (r.mutual > 2 * std::min(s_c1, s_c2) + 1e-9)
      throw entropy_error("mutual_information: I exceeds 2 min(S1, S2)");
  }
  return r;
}

// Top-k basis-state probabilities of a normalized amplitude vector,
// descending. Configuration rendering is left to the caller (lattice-aware).
struct SnapshotWeight {
  std::uint64_t configuration;
  double probability;
};

inline std::vector<SnapshotWeight> snapshot_weights(
    const std::vector<std::complex<double>>& amplitudes, int top_k) {
  std::vector<SnapshotWeight> all(amplitudes.size());
  for (std::size_t i = 0; i < amplitudes.size(); ++i)
    all[i] = {i, std::norm(amplitudes[i])};
  int k = std::min<int>(top_k, (int)all.size());
  std::partial_sort(all.begin(), all.begin() + k, all.end(),
                    [](const SnapshotWeight& a, const SnapshotWeight& b) {
                      return a.probability > b.probability;
                    });
  all.resize(k);
  return all;
}

}  // namespace topo
