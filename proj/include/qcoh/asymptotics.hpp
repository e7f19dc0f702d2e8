#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qcoh/linalg.hpp"

namespace qcoh {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CurvePoint {
  std::size_t n = 0;
  double eps = 0.0;
  double lower_bits = kNaN;
  double upper_bits = kNaN;
  double exact_bits = kNaN;
  double second_order_bits = kNaN;
  double epsilon_lower_bound = kNaN;
  std::string flags;
};

/// D_H^eps(rho^{(x)n} || sigma^{(x)n}) in bits. Commuting pairs go through type classes, non-commuting qubit
/// pairs through Schur-Weyl blocks; anything else builds the tensor powers under the 4096 dimension guard.
double iid_dh(const Matrix& rho, const Matrix& sigma, std::size_t n, double eps);

/// Sym^m(A) in the normalized Dicke basis |D_0>, ..., |D_m> (number of ones).
Matrix symmetric_power(const Matrix& a, std::size_t m);

/// theta of sigma^{(x)n} from the distinct products of sigma's eigenvalues.
int theta_tensor_power(const Matrix& sigma, std::size_t n);

/// eta = eps / (2 sqrt n), delta = min((eps-eta)^2/3, 1-(eps-eta)^2) / (2 sqrt n).
std::pair<double, double> eta_delta_schedule(double eps, std::size_t n);

/// One-shot bounds on rho^{(x)n} against its dephasing: D_H^{(eps-eta)^2-2delta} - c and D_H^{eps^2}.
/// rho_b is dephased on every factor; throws NumericalError if lower > upper + 1e-9.
CurvePoint sandwich_check_unassisted(const DensityMatrix& rho, double eps, std::size_t n, double eta, double delta);
/// Assisted bounds for rho_AB (factors "A", "B") against Delta_B.
CurvePoint sandwich_check_assisted(const DensityMatrix& rho_ab, double eps, std::size_t n, double eta,
                                   double delta);

/// Per n: exact iid D_H^{eps^2} (when computable), both one-shot bounds with the eta/delta schedule, and
/// nD + sqrt(nV) Phi^{-1}(eps^2).
std::vector<CurvePoint> second_order_curve(const DensityMatrix& rho, double eps, std::span<const std::size_t> n_list,
                                           bool assisted);

/// sqrt(Phi(sqrt(n/V)(R - C))) with g(n) = 0, against (C, V) = (D, V)(rho || Delta(rho)).
std::vector<CurvePoint> strong_converse_curve(const DensityMatrix& rho, double rate,
                                              std::span<const std::size_t> n_list, bool assisted = false);
/// Smallest n with sqrt(Phi(sqrt(n/V)(R - C))) >= level.
std::size_t strong_converse_threshold(double c, double v, double rate, double level = 0.99);

struct LogRemainderFit {
  double kappa = 0.0;   // least-squares slope of |exact - nD| on log2 n
  double kappa0 = 0.0;  // smallest offset making the envelope hold at every point
  double max_residual = 0.0;
};
LogRemainderFit fit_log_remainder(std::span<const double> n, std::span<const double> remainder);

/// Least-squares coefficient a in  y_n = a sqrt(n) + b.
double fit_sqrt_coefficient(std::span<const double> n, std::span<const double> y);

/// "# qcoh-curve v1" header, then n,eps,lower_bits,upper_bits,exact_bits,second_order_bits,eps_lower_bound.
std::string to_csv(std::span<const CurvePoint> points);

}  // namespace qcoh
