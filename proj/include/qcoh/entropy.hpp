#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qcoh/linalg.hpp"

namespace qcoh {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative entropy in bits. Throws InfiniteDivergence if supp(rho) is not inside supp(sigma).
double rel_entropy(const Matrix& rho, const Matrix& sigma);
/// Information variance in bits^2.
double rel_entropy_variance(const Matrix& rho, const Matrix& sigma);

/// Neyman-Pearson optimal test M = {rho - t sigma > 0} + x {rho - t sigma = 0}.
struct NPResult {
  double threshold_t = 0.0;
  double boundary_fraction_x = 0.0;
  double type1 = 0.0;  // tr M rho
  double type2 = 0.0;  // tr M sigma
  double value_bits = 0.0;
  int iterations = 0;
};

/// One block of a block-diagonal pair; `multiplicity` copies of (rho, sigma).
struct NPBlock {
  Matrix rho;
  Matrix sigma;
  double multiplicity = 1.0;
  /// Eigenvalues of sigma at most kernel_rtol * max(1, lambda_max) count as its kernel. Scalar blocks are exact
  /// and only s <= 0 is kernel; 0 suits blocks whose sigma is exactly diagonal.
  double kernel_rtol = 1e-12;
};

NPResult dh(const Matrix& rho, const Matrix& sigma, double eps);
NPResult dh_blocks(std::span<const NPBlock> blocks, double eps);
/// Commuting case: weighted points (p_i, q_i) with multiplicity w_i.
NPResult dh_classical(std::span<const double> p, std::span<const double> q, double eps,
                      std::span<const double> multiplicity = {});

double dmax(const Matrix& rho, const Matrix& sigma);

/// Information spectrum relative entropy of distributions.
/// D_s^eps = sup{x : P{log P/Q <= x} <= eps}; the CDF is right-continuous, so the supremum is the
/// first log-ratio atom whose cumulative mass exceeds eps.
struct DsResult {
  double value = 0.0;
  bool at_atom = false;  // eps coincides with a cumulative mass within 1e-12
  double left = 0.0;     // value for eps slightly below
  double right = 0.0;    // value for eps slightly above
};
DsResult ds_spectrum_detail(std::span<const double> p, std::span<const double> q, double eps);
double ds_spectrum(std::span<const double> p, std::span<const double> q, double eps);

struct Theta {
  int value = 1;
  bool clamped = false;
  double lambda = 0.0;  // log2 lambda_max - log2 lambda_min over the nonzero spectrum
  int nu = 0;           // distinct nonzero eigenvalues
};
Theta theta(const Matrix& sigma);
Theta theta_from_spectrum(std::span<const double> eigenvalues);

double normal_cdf(double x);
/// |Phi(result) - p| <= 1e-12.
double inv_normal_cdf(double p);

/// n D + sqrt(n V) Phi^{-1}(eps^2).
double second_order_estimate(double D, double V, double eps, double n);

/// c(rho, eps, delta, eta) from the unassisted one-shot bound; thetas of rho and of its dephasing.
double correction_c_unassisted(int theta_rho, int theta_dephased, double eps, double delta, double eta);
double correction_c_unassisted(const Matrix& rho, double eps, double delta, double eta);
/// c(rho_AB, eps, delta) from the assisted bound; theta of rho_AB and of Delta_B(rho_AB).
double correction_c_assisted(int theta_rho, int theta_dephased, double eps, double delta);

struct EntropyReport {
  double D_bits = 0.0;
  double V_bits2 = 0.0;
  std::vector<std::pair<double, double>> dh_bits;  // (eps, value)
  double dmax_bits = 0.0;
  Theta theta;
  std::vector<std::pair<double, double>> second_order_bits;  // (n, value) at the report's eps
};

EntropyReport entropy_report(const Matrix& rho, const Matrix& sigma, std::span<const double> eps_list,
                             std::span<const double> n_list = {});

}  // namespace qcoh
