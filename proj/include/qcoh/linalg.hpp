#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qcoh {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Desk-scale guard on any ambient dimension.
inline constexpr std::size_t kMaxDim = 4096;

struct LayoutError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfiniteDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct WitnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Factor {
  std::string label;
  std::size_t dim = 1;

  friend bool operator==(const Factor&, const Factor&) = default;
};

/// Ordered tensor factors; the first factor is the most significant index.
class SystemLayout {
 public:
  SystemLayout() = default;
  explicit SystemLayout(std::vector<Factor> factors);
  static SystemLayout single(std::string label, std::size_t dim);

  [[nodiscard]] std::size_t dim() const;
  [[nodiscard]] std::size_t dim(std::string_view label) const;
  [[nodiscard]] std::size_t index_of(std::string_view label) const;
  [[nodiscard]] bool contains(std::string_view label) const;
  [[nodiscard]] const std::vector<Factor>& factors() const { return factors_; }
  [[nodiscard]] std::size_t size() const { return factors_.size(); }
  [[nodiscard]] std::vector<std::size_t> dims() const;

  /// Sub-layout with the given labels, in this layout's order.
  [[nodiscard]] SystemLayout keep(std::span<const std::string> labels) const;
  [[nodiscard]] SystemLayout concat(const SystemLayout& other) const;
  [[nodiscard]] SystemLayout relabel(std::string_view from, std::string to) const;

  friend bool operator==(const SystemLayout&, const SystemLayout&) = default;

 private:
  std::vector<Factor> factors_;
};

struct Eigh {
  RealVector values;  // ascending
  Matrix vectors;     // columns are eigenvectors
};

class DensityMatrix {
 public:
  DensityMatrix(Matrix mat, SystemLayout layout, double psd_tol = 1e-10);

  [[nodiscard]] const Matrix& mat() const { return mat_; }
  [[nodiscard]] const SystemLayout& layout() const { return layout_; }
  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(mat_.rows()); }
  [[nodiscard]] double psd_tol() const { return psd_tol_; }

 private:
  Matrix mat_;
  SystemLayout layout_;
  double psd_tol_;
};

class PureState {
 public:
  PureState(Vector vec, SystemLayout layout);

  [[nodiscard]] const Vector& vec() const { return vec_; }
  [[nodiscard]] const SystemLayout& layout() const { return layout_; }
  [[nodiscard]] DensityMatrix density() const;

 private:
  Vector vec_;
  SystemLayout layout_;
};

void check_dim_guard(std::size_t dim, std::size_t max_dim = kMaxDim);

Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);

/// Hermitian eigendecomposition. Throws NumericalError if m is not Hermitian within 1e-9.
Eigh eigh(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol = 1e-9);

/// f applied to the spectrum of a Hermitian matrix.
template <class F>
Matrix spectral_apply(const Eigh& e, F&& f) {
  RealVector fv(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) fv(i) = f(e.values(i));
  return e.vectors * fv.cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

Matrix sqrtm_psd(const Matrix& m);
Matrix project_psd(const Matrix& m);
double trace_norm(const Matrix& m);

Matrix partial_trace(const Matrix& m, const SystemLayout& layout,
                     std::span<const std::string> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep);

/// Reorders tensor factors; `order` lists every label of `layout` exactly once.
Matrix permute_systems(const Matrix& m, const SystemLayout& layout,
                       std::span<const std::string> order);
Vector permute_systems(const Vector& v, const SystemLayout& layout,
                       std::span<const std::string> order);

/// Generalized fidelity ||sqrt(rho) sqrt(sigma)||_1 + sqrt((1 - tr rho)(1 - tr sigma)).
double fidelity(const Matrix& rho, const Matrix& sigma);
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double purified_distance(const Matrix& rho, const Matrix& sigma);
double purified_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
/// sqrt(1 - <psi|rho|psi>) for a normalized pure target; avoids eigendecompositions.
double purified_distance_to_pure(const Matrix& rho, const Vector& psi);

/// F(sum p_i |i><i| (x) rho_i, sum q_i |i><i| (x) sigma_i) = sum sqrt(p_i q_i) F(rho_i, sigma_i).
double cq_fidelity(std::span<const double> p, std::span<const Matrix> rhos,
                   std::span<const double> q, std::span<const Matrix> sigmas);

/// Purification on layout + ref_label; reference dimension equals rank(rho).
PureState purify(const DensityMatrix& rho, const std::string& ref_label);

/// Splits a pure state on (system, ref) as a dim(system) x dim(ref) coefficient matrix.
Matrix coefficient_matrix(const Vector& v, std::size_t rows, std::size_t cols);

// Random test states. Deterministic for a fixed generator state.
PureState haar_random_state(std::size_t dim, std::uint64_t seed);
DensityMatrix haar_random_density(std::size_t dim, std::size_t rank, std::uint64_t seed);

using Rng = std::mt19937_64;
Vector random_pure(Rng& rng, std::size_t dim);
Matrix random_density(Rng& rng, std::size_t dim, std::size_t rank);
Matrix random_unitary(Rng& rng, std::size_t dim);
Matrix random_hermitian(Rng& rng, std::size_t dim);
/// Kraus operators of a random channel din -> dout with `count` operators.
std::vector<Matrix> random_kraus(Rng& rng, std::size_t din, std::size_t dout, std::size_t count);

/// splitmix64 finalizer; per-task seeds derived from a root seed and a counter.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t counter);

}  // namespace qcoh
