#include "qcoh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace qcoh {

SystemLayout::SystemLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::set<std::string> seen;
  for (const auto& f : factors_) {
    if (f.dim == 0) throw LayoutError("factor '" + f.label + "' has zero dimension");
    if (!seen.insert(f.label).second) throw LayoutError("duplicate label '" + f.label + "'");
  }
}

SystemLayout SystemLayout::single(std::string label, std::size_t dim) {
  return SystemLayout({Factor{std::move(label), dim}});
}

std::size_t SystemLayout::dim() const {
  std::size_t d = 1;
  for (const auto& f : factors_) d *= f.dim;
  return d;
}

std::size_t SystemLayout::dim(std::string_view label) const {
  return factors_[index_of(label)].dim;
}

std::size_t SystemLayout::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].label == label) return i;
  throw LayoutError("unknown label '" + std::string(label) + "'");
}

bool SystemLayout::contains(std::string_view label) const {
  return std::any_of(factors_.begin(), factors_.end(),
                     [&](const Factor& f) { return f.label == label; });
}

std::vector<std::size_t> SystemLayout::dims() const {
  std::vector<std::size_t> d;
  d.reserve(factors_.size());
  for (const auto& f : factors_) d.push_back(f.dim);
  return d;
}

SystemLayout SystemLayout::keep(std::span<const std::string> labels) const {
  for (const auto& l : labels) (void)index_of(l);
  std::vector<Factor> out;
  for (const auto& f : factors_)
    if (std::find(labels.begin(), labels.end(), f.label) != labels.end()) out.push_back(f);
  return SystemLayout(std::move(out));
}

SystemLayout SystemLayout::concat(const SystemLayout& other) const {
  auto f = factors_;
  f.insert(f.end(), other.factors_.begin(), other.factors_.end());
  return SystemLayout(std::move(f));
}

SystemLayout SystemLayout::relabel(std::string_view from, std::string to) const {
  auto f = factors_;
  f[index_of(from)].label = std::move(to);
  return SystemLayout(std::move(f));
}

void check_dim_guard(std::size_t dim, std::size_t max_dim) {
  if (dim > max_dim)
    throw DomainError("dimension " + std::to_string(dim) + " exceeds desk-scale guard " +
                      std::to_string(max_dim));
}

DensityMatrix::DensityMatrix(Matrix mat, SystemLayout layout, double psd_tol)
    : mat_(std::move(mat)), layout_(std::move(layout)), psd_tol_(psd_tol) {
  if (mat_.rows() != mat_.cols()) throw LayoutError("density matrix must be square");
  if (layout_.size() == 0) layout_ = SystemLayout::single("B", static_cast<std::size_t>(mat_.rows()));
  if (layout_.dim() != static_cast<std::size_t>(mat_.rows()))
    throw LayoutError("layout dimension does not match matrix");
  check_dim_guard(dim());
  if (!mat_.allFinite()) throw NumericalError("non-finite entries");
  if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > psd_tol_)
    throw NumericalError("density matrix is not Hermitian");
  if (std::abs(mat_.trace().real() - 1.0) > psd_tol_)
    throw NumericalError("density matrix trace differs from 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -psd_tol_)
    throw NumericalError("density matrix has a negative eigenvalue");
}

PureState::PureState(Vector vec, SystemLayout layout) : vec_(std::move(vec)), layout_(std::move(layout)) {
  if (layout_.size() == 0) layout_ = SystemLayout::single("B", static_cast<std::size_t>(vec_.size()));
  if (layout_.dim() != static_cast<std::size_t>(vec_.size()))
    throw LayoutError("layout dimension does not match vector");
  check_dim_guard(layout_.dim());
  if (std::abs(vec_.norm() - 1.0) > 1e-12) throw NumericalError("pure state is not normalized");
}

DensityMatrix PureState::density() const {
  Matrix m = vec_ * vec_.adjoint();
  return DensityMatrix(std::move(m), layout_);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).norm() <= tol * scale;
}

Eigh eigh(const Matrix& m) {
  if (!is_hermitian(m)) throw NumericalError("eigh: input is not Hermitian");
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("eigh: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Matrix sqrtm_psd(const Matrix& m) {
  return spectral_apply(eigh(m), [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

Matrix project_psd(const Matrix& m) {
  return spectral_apply(eigh(m), [](double x) { return std::max(x, 0.0); });
}

double trace_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

namespace {

struct Split {
  std::vector<std::size_t> keep_index;
  std::vector<std::size_t> trace_index;
  std::size_t keep_dim = 1;
};

Split split_indices(const SystemLayout& layout, std::span<const std::string> keep) {
  for (const auto& l : keep) (void)layout.index_of(l);
  const auto dims = layout.dims();
  std::vector<bool> kept(dims.size());
  Split s;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    kept[k] = std::find(keep.begin(), keep.end(), layout.factors()[k].label) != keep.end();
    if (kept[k]) s.keep_dim *= dims[k];
  }
  const std::size_t n = layout.dim();
  s.keep_index.resize(n);
  s.trace_index.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rem = i, ki = 0, ti = 0, kstride = 1, tstride = 1;
    for (std::size_t k = dims.size(); k-- > 0;) {
      const std::size_t digit = rem % dims[k];
      rem /= dims[k];
      if (kept[k]) {
        ki += digit * kstride;
        kstride *= dims[k];
      } else {
        ti += digit * tstride;
        tstride *= dims[k];
      }
    }
    s.keep_index[i] = ki;
    s.trace_index[i] = ti;
  }
  return s;
}

std::vector<std::size_t> permutation_map(const SystemLayout& layout,
                                         std::span<const std::string> order) {
  if (order.size() != layout.size()) throw LayoutError("permutation must list every factor");
  std::vector<std::size_t> perm;
  for (const auto& l : order) perm.push_back(layout.index_of(l));
  std::vector<std::size_t> sorted = perm;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw LayoutError("permutation repeats a factor");
  const auto dims = layout.dims();
  const std::size_t n = layout.dim();
  // new_index[old] for each old flat index
  std::vector<std::size_t> map(n);
  std::vector<std::size_t> digits(dims.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rem = i;
    for (std::size_t k = dims.size(); k-- > 0;) {
      digits[k] = rem % dims[k];
      rem /= dims[k];
    }
    std::size_t j = 0;
    for (std::size_t p : perm) j = j * dims[p] + digits[p];
    map[i] = j;
  }
  return map;
}

}  // namespace

Matrix partial_trace(const Matrix& m, const SystemLayout& layout, std::span<const std::string> keep) {
  if (static_cast<std::size_t>(m.rows()) != layout.dim() || m.rows() != m.cols())
    throw LayoutError("partial_trace: layout does not match matrix");
  const Split s = split_indices(layout, keep);
  Matrix out = Matrix::Zero(s.keep_dim, s.keep_dim);
  const std::size_t n = layout.dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (s.trace_index[i] == s.trace_index[j]) out(s.keep_index[i], s.keep_index[j]) += m(i, j);
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::string> keep) {
  Matrix m = partial_trace(rho.mat(), rho.layout(), keep);
  m = 0.5 * (m + m.adjoint());
  return DensityMatrix(std::move(m), rho.layout().keep(keep), rho.psd_tol());
}

Matrix permute_systems(const Matrix& m, const SystemLayout& layout, std::span<const std::string> order) {
  const auto map = permutation_map(layout, order);
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < map.size(); ++i)
    for (std::size_t j = 0; j < map.size(); ++j) out(map[i], map[j]) = m(i, j);
  return out;
}

Vector permute_systems(const Vector& v, const SystemLayout& layout, std::span<const std::string> order) {
  const auto map = permutation_map(layout, order);
  Vector out(v.size());
  for (std::size_t i = 0; i < map.size(); ++i) out(map[i]) = v(i);
  return out;
}

namespace {

// Columns v_k sqrt(l_k) over eigenvalues above 1e-14 * l_max, so rho = A A^dag up to round-off.
// Dropping the noise floor keeps sqrt(1e-17)-sized artifacts out of the fidelity.
Matrix psd_factor(const Matrix& m) {
  const Eigh e = eigh(m);
  const double cut = 1e-14 * std::max(e.values.maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < e.values.size(); ++k)
    if (e.values(k) > cut) keep.push_back(k);
  Matrix a(m.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    a.col(static_cast<Eigen::Index>(j)) = e.vectors.col(keep[j]) * std::sqrt(e.values(keep[j]));
  return a;
}

}  // namespace

double fidelity(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw LayoutError("fidelity: dimension mismatch");
  // ||sqrt(rho) sqrt(sigma)||_1 = ||A^dag B||_1 for any factorizations rho = A A^dag, sigma = B B^dag.
  const Matrix a = psd_factor(rho);
  const Matrix b = psd_factor(sigma);
  const double overlap = (a.cols() == 0 || b.cols() == 0) ? 0.0 : trace_norm(a.adjoint() * b);
  const double tr_r = rho.trace().real();
  const double tr_s = sigma.trace().real();
  const double deficit = std::max(0.0, 1.0 - tr_r) * std::max(0.0, 1.0 - tr_s);
  return overlap + std::sqrt(deficit);
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return fidelity(rho.mat(), sigma.mat());
}

double purified_distance(const Matrix& rho, const Matrix& sigma) {
  const double f = std::min(1.0, fidelity(rho, sigma));
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

double purified_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return purified_distance(rho.mat(), sigma.mat());
}

double purified_distance_to_pure(const Matrix& rho, const Vector& psi) {
  if (rho.rows() != psi.size()) throw LayoutError("purified_distance_to_pure: dimension mismatch");
  // 1 - F^2 with F^2 = <psi|rho|psi> + (1 - tr rho) * 0 for normalized psi.
  const double overlap = psi.dot(rho * psi).real();
  return std::sqrt(std::max(0.0, 1.0 - overlap));
}

double cq_fidelity(std::span<const double> p, std::span<const Matrix> rhos, std::span<const double> q,
                   std::span<const Matrix> sigmas) {
  if (p.size() != q.size() || p.size() != rhos.size() || q.size() != sigmas.size())
    throw LayoutError("cq_fidelity: block counts differ");
  double f = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw DomainError("cq_fidelity: negative weight");
    if (p[i] == 0.0 || q[i] == 0.0) continue;
    f += std::sqrt(p[i] * q[i]) * fidelity(rhos[i], sigmas[i]);
  }
  return f;
}

PureState purify(const DensityMatrix& rho, const std::string& ref_label) {
  const Eigh e = eigh(rho.mat());
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = e.values.size(); i-- > 0;)
    if (e.values(i) > 1e-12) kept.push_back(i);
  const auto d = static_cast<Eigen::Index>(rho.dim());
  const auto r = static_cast<Eigen::Index>(kept.size());
  Vector psi = Vector::Zero(d * r);
  for (Eigen::Index k = 0; k < r; ++k) {
    Vector v = e.vectors.col(kept[static_cast<std::size_t>(k)]);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs(v(i)) > 1e-14) {
        v *= std::conj(v(i)) / std::abs(v(i));
        break;
      }
    }
    const double w = std::sqrt(e.values(kept[static_cast<std::size_t>(k)]));
    for (Eigen::Index i = 0; i < d; ++i) psi(i * r + k) = w * v(i);
  }
  psi.normalize();
  return PureState(std::move(psi), rho.layout().concat(SystemLayout::single(ref_label, static_cast<std::size_t>(r))));
}

Matrix coefficient_matrix(const Vector& v, std::size_t rows, std::size_t cols) {
  if (static_cast<std::size_t>(v.size()) != rows * cols) throw LayoutError("coefficient_matrix: size mismatch");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = v(i * cols + j);
  return m;
}

namespace {

Matrix ginibre(Rng& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix g(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double re = n01(rng);
      const double im = n01(rng);
      g(i, j) = cplx(re, im);
    }
  return g;
}

}  // namespace

Vector random_pure(Rng& rng, std::size_t dim) {
  Vector v = ginibre(rng, dim, 1).col(0);
  v.normalize();
  return v;
}

Matrix random_density(Rng& rng, std::size_t dim, std::size_t rank) {
  if (rank == 0 || rank > dim) throw DomainError("random_density: rank must be in [1, dim]");
  Matrix g = ginibre(rng, dim, rank);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

Matrix random_unitary(Rng& rng, std::size_t dim) {
  Matrix g = ginibre(rng, dim, dim);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t i = 0; i < dim; ++i) {
    const cplx d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

Matrix random_hermitian(Rng& rng, std::size_t dim) {
  Matrix g = ginibre(rng, dim, dim);
  return 0.5 * (g + g.adjoint());
}

std::vector<Matrix> random_kraus(Rng& rng, std::size_t din, std::size_t dout, std::size_t count) {
  // Columns of a random isometry din -> dout*count, cut into Kraus blocks.
  if (dout * count < din) throw DomainError("random_kraus: dout * count must be >= din");
  Matrix u = random_unitary(rng, dout * count);
  Matrix iso = u.leftCols(din);
  std::vector<Matrix> ks;
  for (std::size_t k = 0; k < count; ++k) ks.emplace_back(iso.middleRows(k * dout, dout));
  return ks;
}

PureState haar_random_state(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  return PureState(random_pure(rng, dim), SystemLayout::single("B", dim));
}

DensityMatrix haar_random_density(std::size_t dim, std::size_t rank, std::uint64_t seed) {
  if (rank > dim) throw DomainError("haar_random_density: rank exceeds dim");
  Rng rng(seed);
  return DensityMatrix(random_density(rng, dim, rank), SystemLayout::single("B", dim));
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t counter) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace qcoh
