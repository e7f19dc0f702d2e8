#pragma once

#include <map>
#include <string>
#include <vector>

#include "qcoh/linalg.hpp"

namespace qcoh {

/// Real symmetric LMI data. The problem is
///   maximize c^T y  subject to  F0_b - sum_i y_i F_ib >= 0 for every block b,
/// paired with the primal  minimize sum_b <F0_b, X_b>  s.t.  sum_b <F_ib, X_b> = c_i, X_b >= 0.
struct SparseEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct SDPBlock {
  int dim = 0;
  Eigen::MatrixXd f0;
  std::vector<std::pair<int, std::vector<SparseEntry>>> terms;  // (variable, entries of F_i)
};

struct SDPProblem {
  Eigen::VectorXd c;
  std::vector<SDPBlock> blocks;
};

enum class SDPStatus { Optimal, MaxIter, Infeasible };
const char* to_string(SDPStatus s);

struct SDPSolution {
  Eigen::VectorXd y;
  double primal_objective = 0.0;  // <F0, X>
  double dual_objective = 0.0;    // c^T y
  double duality_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  SDPStatus status = SDPStatus::MaxIter;
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::MatrixXd> Z;
};

struct SDPOptions {
  int max_iter = 500;
  double tol = 1e-10;
  double big_m_factor = 1e6;
};

SDPSolution solve(const SDPProblem& p, const SDPOptions& opt = {});

/// Hermitian-matrix-valued affine expression in the real scalar variables y.
struct Affine {
  Matrix constant;
  std::map<int, Matrix> terms;

  static Affine constant_of(const Matrix& m);
  [[nodiscard]] Eigen::Index rows() const { return constant.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return constant.cols(); }
  [[nodiscard]] Affine adjoint() const;
  [[nodiscard]] Matrix evaluate(const Eigen::VectorXd& y) const;

  Affine& operator+=(const Affine& o);
  Affine& operator-=(const Affine& o);
  Affine& operator*=(cplx s);
};

Affine operator+(Affine a, const Affine& b);
Affine operator-(Affine a, const Affine& b);
Affine operator*(cplx s, Affine a);
Affine kron(const Matrix& m, const Affine& a);
Affine kron(const Affine& a, const Matrix& m);
Affine block2x2(const Affine& a, const Affine& b, const Affine& c, const Affine& d);
/// Real part of the trace as a 1x1 expression.
Affine re_trace(const Affine& a);
/// Re tr(a w) as a 1x1 expression.
Affine re_trace(const Affine& a, const Matrix& w);

/// Builds an SDPProblem from Hermitian LMIs "expr >= 0". Complex blocks use the real embedding
/// H -> [[Re H, -Im H], [Im H, Re H]], which is PSD exactly when H is; purely real blocks stay real.
class SDPBuilder {
 public:
  int add_var(double objective = 0.0);
  /// Hermitian d x d matrix variable from d^2 real variables in the basis
  /// E_kk, E_kl + E_lk, i(E_kl - E_lk).
  Affine hermitian_var(std::size_t d);
  /// Arbitrary complex r x c matrix variable from 2 r c real variables.
  Affine complex_var(std::size_t r, std::size_t c);
  /// Hermitian variable with trace fixed to 1 (last diagonal entry eliminated).
  Affine unit_trace_var(std::size_t d);
  void set_objective(int var, double coeff);
  /// Adds coeff * Re tr(expr) to the maximized objective (expr must have zero constant).
  void add_objective(const Affine& expr, double coeff);
  void add_psd(const Affine& expr);

  [[nodiscard]] int num_vars() const { return static_cast<int>(c_.size()); }
  [[nodiscard]] SDPProblem build() const;

 private:
  std::vector<double> c_;
  std::vector<Affine> lmis_;
};

// Problems used across the library.

/// max Re tr X s.t. [[rho, X], [X^dag, sigma]] >= 0; optimum is the fidelity.
double fidelity_sdp(const Matrix& rho, const Matrix& sigma, SDPSolution* sol = nullptr);
/// D_H^eps in bits from max -tr M sigma s.t. 0 <= M <= I, tr M rho >= 1 - eps.
double dh_sdp(const Matrix& rho, const Matrix& sigma, double eps, SDPSolution* sol = nullptr);

/// Conditional min-entropy H_min(B|R) in bits: -log2 min{tr s_R : 1_B (x) s_R >= rho_BR}.
double hmin(const DensityMatrix& rho_br, const std::string& b_label, const std::string& r_label);

enum class SmoothingBall {
  Subnormalized,  // tr rho~ <= 1, generalized fidelity
  Normalized,     // tr rho~ = 1
};

/// Smooth conditional min-entropy over the purified-distance ball of radius eps.
double hmin_smooth(const DensityMatrix& rho_br, const std::string& b_label, const std::string& r_label, double eps,
                   SmoothingBall ball = SmoothingBall::Subnormalized);

}  // namespace qcoh
