#pragma once

// Matrix product states in Vidal canonical form (site tensors Gamma plus bond
// singular values lambda), with the two primitives a TEBD sweep needs here:
// exact single-site unitaries and diagonal two-site gates with truncated SVD.
// Physical dimension is arbitrary (qubits or N-state clock sites).

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace topo {

class mps_error : public std::runtime_error {
public:
  explicit mps_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MPSState {
  int phys_dim = 2;
  // gamma[i][p] is a chi_i x chi_{i+1} matrix; lambda[i] holds the singular
  // values on bond i, with lambda[0] and lambda[n] the trivial edge bonds.
  std::vector<std::vector<Eigen::MatrixXcd>> gamma;
  std::vector<Eigen::VectorXd> lambda;

  int n_sites() const { return (int)gamma.size(); }
  int bond_dim(int bond) const { return (int)lambda.at(bond).size(); }
  int max_bond_dim() const {
    int m = 1;
    for (const auto& l : lambda) m = std::max(m, (int)l.size());
    return m;
  }

  // Entanglement entropy (nats) of the bipartition across bond `bond`.
  double bond_entropy(int bond) const {
    double s = 0;
    for (double l : lambda.at(bond)) {
      double p = l * l;
      if (p > 1e-300) s -= p * std::log(p);
    }
    return s;
  }
};

inline MPSState product_mps(int n_sites, const Eigen::VectorXcd& site_state) {
  if (n_sites < 2) throw mps_error("product_mps: need at least 2 sites");
  if (std::abs(site_state.norm() - 1.0) > 1e-12)
    throw mps_error("product_mps: site state is not normalized");
  MPSState psi;
  psi.phys_dim = (int)site_state.size();
  psi.gamma.resize(n_sites);
  psi.lambda.assign(n_sites + 1, Eigen::VectorXd::Ones(1));
  for (int i = 0; i < n_sites; ++i) {
    psi.gamma[i].resize(psi.phys_dim);
    for (int p = 0; p < psi.phys_dim; ++p) {
      psi.gamma[i][p] = Eigen::MatrixXcd::Constant(1, 1, site_state(p));
    }
  }
  return psi;
}

inline void apply_site_unitary(MPSState& psi, int site, const Eigen::MatrixXcd& u) {
  const int d = psi.phys_dim;
  if (u.rows() != d || u.cols() != d)
    throw mps_error("apply_site_unitary: operator dimension mismatch");
  std::vector<Eigen::MatrixXcd> out(d);
  for (int p = 0; p < d; ++p) {
    out[p] = u(p, 0) * psi.gamma[site][0];
    for (int q = 1; q < d; ++q) out[p] += u(p, q) * psi.gamma[site][q];
  }
  psi.gamma[site] = std::move(out);
}

namespace detail {

inline Eigen::VectorXd safe_inverse(const Eigen::VectorXd& v) {
  Eigen::VectorXd inv(v.size());
  for (int i = 0; i < v.size(); ++i) inv(i) = v(i) > 1e-13 ? 1.0 / v(i) : 0.0;
  return inv;
}

}  // namespace detail

// Applies a diagonal two-site gate on sites (site, site+1). `phases` has
// length d*d indexed p*d+q and must be a pure phase vector. Singular values
// below rel_cutoff * s_max are discarded, the bond dimension is capped at
// chi_max, and the relative discarded weight is returned.
inline double apply_diagonal_bond_gate(MPSState& psi, int site,
                                       const Eigen::VectorXcd& phases,
                                       int chi_max, double rel_cutoff = 1e-10) {
  const int d = psi.phys_dim;
  if (site < 0 || site + 1 >= psi.n_sites())
    throw mps_error("apply_diagonal_bond_gate: bond out of range");
  if ((int)phases.size() != d * d)
    throw mps_error("apply_diagonal_bond_gate: phase vector has wrong length");

  const int chi_l = (int)psi.lambda[site].size();
  const int chi_r = (int)psi.lambda[site + 2].size();
  const auto& ll = psi.lambda[site];
  const auto& lm = psi.lambda[site + 1];
  const auto& lr = psi.lambda[site + 2];

  Eigen::MatrixXcd theta(d * chi_l, d * chi_r);
  for (int p = 0; p < d; ++p) {
    Eigen::MatrixXcd left = ll.asDiagonal() * psi.gamma[site][p] * lm.asDiagonal();
    for (int q = 0; q < d; ++q) {
      theta.block(p * chi_l, q * chi_r, chi_l, chi_r) =
          phases(p * d + q) * left * psi.gamma[site + 1][q] * lr.asDiagonal();
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  double total = s.squaredNorm();
  if (total <= 0) throw mps_error("apply_diagonal_bond_gate: zero state");
  int keep = 0;
  while (keep < s.size() && keep < chi_max && s(keep) > rel_cutoff * s(0)) ++keep;
  keep = std::max(keep, 1);
  double kept = s.head(keep).squaredNorm();

  Eigen::VectorXd lam = s.head(keep) / std::sqrt(kept);
  Eigen::VectorXd inv_l = detail::safe_inverse(ll);
  Eigen::VectorXd inv_r = detail::safe_inverse(lr);
  for (int p = 0; p < d; ++p) {
    psi.gamma[site][p] =
        inv_l.asDiagonal() * svd.matrixU().block(p * chi_l, 0, chi_l, keep);
    psi.gamma[site + 1][p] =
        svd.matrixV().block(p * chi_r, 0, chi_r, keep).adjoint() * inv_r.asDiagonal();
  }
  psi.lambda[site + 1] = std::move(lam);
  return 1.0 - kept / total;
}

// Expectation value of a product of site-diagonal operators (identity on the
// unlisted sites), normalized by the state norm. The operator entries may be
// complex (clock phases).
inline std::complex<double> diagonal_expectation(
    const MPSState& psi, const std::map<int, Eigen::VectorXcd>& ops) {
  const int d = psi.phys_dim;
  for (const auto& [site, op] : ops) {
    if (site < 0 || site >= psi.n_sites())
      throw mps_error("diagonal_expectation: site out of range");
    if ((int)op.size() != d)
      throw mps_error("diagonal_expectation: operator has wrong dimension");
  }
  Eigen::MatrixXcd num = Eigen::MatrixXcd::Ones(1, 1);
  Eigen::MatrixXcd den = Eigen::MatrixXcd::Ones(1, 1);
  for (int i = 0; i < psi.n_sites(); ++i) {
    auto it = ops.find(i);
    const int chi_r = (int)psi.lambda[i + 1].size();
    Eigen::MatrixXcd num_next = Eigen::MatrixXcd::Zero(chi_r, chi_r);
    Eigen::MatrixXcd den_next = Eigen::MatrixXcd::Zero(chi_r, chi_r);
    for (int p = 0; p < d; ++p) {
      Eigen::MatrixXcd a = psi.lambda[i].asDiagonal() * psi.gamma[i][p];
      std::complex<double> w = it == ops.end() ? 1.0 : it->second(p);
      num_next += w * a.adjoint() * num * a;
      den_next += a.adjoint() * den * a;
    }
    num = std::move(num_next);
    den = std::move(den_next);
  }
  if (std::abs(den(0, 0)) < 1e-300)
    throw mps_error("diagonal_expectation: state has zero norm");
  return num(0, 0) / den(0, 0);
}

}  // namespace topo
