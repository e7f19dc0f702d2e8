#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcoh/linalg.hpp"

namespace qcoh {

/// Weights on pairs (x, y), stored row-major with index x * ny + y.
struct JointDistribution {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> w;

  [[nodiscard]] double at(std::size_t x, std::size_t y) const { return w[x * ny + y]; }
  [[nodiscard]] double total() const;
  [[nodiscard]] std::vector<double> marginal_x() const;
};

struct NSPair {
  JointDistribution P;  // r_x |<v_x|u_y>|^2
  JointDistribution Q;  // s_y |<v_x|u_y>|^2
};

/// Nussbaum-Szkola pair. Eigenvalues at most 1e-12 * max(1, largest) are treated as zero, matching
/// the support convention of rel_entropy.
NSPair ns_pair(const Matrix& rho, const Matrix& sigma);
/// Same from given eigendecompositions (any orthonormal basis inside degenerate eigenspaces).
NSPair ns_pair(const Eigh& rho, const Eigh& sigma);

/// Classical relative entropy and variance in bits. Mass of P above 1e-12 outside supp Q throws
/// InfiniteDivergence.
std::pair<double, double> classical_D_V(const std::vector<double>& p, const std::vector<double>& q);
std::pair<double, double> classical_D_V(const JointDistribution& p, const JointDistribution& q);

struct Eq1Point {
  double eps = 0.0;
  double lhs = 0.0;  // D_s^eps of the (sigma_BR, 1 (x) sigma_R) pair
  double rhs = 0.0;  // -D_s^{1-eps} of the (rho_AB, Delta_B rho_AB) pair
  double residual = 0.0;
  bool continuity = true;  // neither side sits on an atom of its log-ratio distribution
};

struct HminDHCheck {
  double eps = 0.0;
  double delta = 0.0;
  double hmin_smooth = 0.0;
  double dh = 0.0;
  double correction = 0.0;
  bool holds = false;
};

struct RelationsReport {
  std::vector<Eq1Point> eq1;
  double eq2_lhs = 0.0, eq2_rhs = 0.0, eq2_residual = 0.0;
  double eq3_lhs = 0.0, eq3_rhs = 0.0, eq3_residual = 0.0;
  double schmidt_residual = 0.0;  // spectra of sigma_R and rho_AB
  std::optional<HminDHCheck> hmin;
};

struct RelationsOptions {
  std::vector<double> eps_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  bool check_hmin = true;
  double eps = 0.6;
  double delta = 0.02;
};

/// Checks the dephased-tripartite relations on |psi>_RAB (factors labelled R, A, B in any order).
RelationsReport verify_reduction_connections(const PureState& psi_rab, const RelationsOptions& opt = {});

/// sigma_BR = tr_A Delta_B(psi) on (B, R) and rho_AB = tr_R psi on (A, B).
std::pair<DensityMatrix, DensityMatrix> dephased_marginals(const PureState& psi_rab);

}  // namespace qcoh
