#include "qcoh/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "qcoh/coherence.hpp"
#include "qcoh/entropy.hpp"

namespace qcoh {

namespace {

constexpr double kCommuteTol = 1e-12;
constexpr std::size_t kMaxTypes = 5'000'000;
constexpr std::size_t kMaxSchurWeyl = 128;
// Eigenvalues of rho - t sigma on unit-norm blocks carry absolute error ~1e-16 t; beyond this threshold the
// sign pattern near the crossing is no longer resolved.
constexpr double kMaxResolvedThreshold = 1e9;

double log_binom(double n, double k) {
  if (k < 0 || k > n) return -kInf;
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

double types_count(std::size_t n, std::size_t d) {
  return std::exp(log_binom(static_cast<double>(n + d - 1), static_cast<double>(d - 1)));
}

struct UnresolvedThreshold : NumericalError {
  using NumericalError::NumericalError;
};

double resolved(const NPResult& r) {
  if (r.threshold_t > kMaxResolvedThreshold && std::isfinite(r.threshold_t))
    throw UnresolvedThreshold("iid_dh: Neyman-Pearson threshold beyond double-precision resolution");
  return r.value_bits;
}

// Calls visit(k) for every composition k of n into d nonnegative parts.
void for_each_type(std::size_t n, std::size_t d, const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> k(d, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == d) {
      k[i] = left;
      visit(k);
      return;
    }
    for (std::size_t j = 0; j <= left; ++j) {
      k[i] = j;
      rec(i + 1, left - j);
    }
  };
  rec(0, n);
}

double type_power(std::span<const double> p, const std::vector<std::size_t>& k) {
  double lg = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] == 0) continue;
    if (p[i] <= 0.0) return 0.0;
    lg += static_cast<double>(k[i]) * std::log(p[i]);
  }
  return std::exp(lg);
}

double log_multinomial(std::size_t n, const std::vector<std::size_t>& k) {
  double lg = std::lgamma(static_cast<double>(n) + 1);
  for (std::size_t x : k) lg -= std::lgamma(static_cast<double>(x) + 1);
  return lg;
}

bool commute(const Matrix& a, const Matrix& b) { return (a * b - b * a).cwiseAbs().maxCoeff() <= kCommuteTol; }

// Joint eigenvalues of commuting Hermitian a, b: diagonalize b, then a inside each eigenspace of b.
std::pair<std::vector<double>, std::vector<double>> joint_spectrum(const Matrix& a, const Matrix& b) {
  const Eigh eb = eigh(b);
  const Eigen::Index d = b.rows();
  const double scale = std::max(1.0, eb.values.cwiseAbs().maxCoeff());
  std::vector<double> pa, pb;
  Eigen::Index i = 0;
  while (i < d) {
    Eigen::Index j = i + 1;
    while (j < d && eb.values(j) - eb.values(j - 1) <= 1e-10 * scale) ++j;
    const Matrix v = eb.vectors.middleCols(i, j - i);
    const Eigh ea = eigh(Matrix(v.adjoint() * a * v));
    for (Eigen::Index t = 0; t < j - i; ++t) {
      pa.push_back(std::max(0.0, ea.values(t)));
      pb.push_back(std::max(0.0, eb.values(i + t)));
    }
    i = j;
  }
  return {pa, pb};
}

double iid_dh_classical(std::span<const double> p, std::span<const double> q, std::size_t n, double eps) {
  std::vector<double> tp, tq, mult;
  for_each_type(n, p.size(), [&](const std::vector<std::size_t>& k) {
    const double a = type_power(p, k), b = type_power(q, k);
    if (a == 0.0 && b == 0.0) return;
    tp.push_back(a);
    tq.push_back(b);
    mult.push_back(std::exp(log_multinomial(n, k)));
  });
  return dh_classical(tp, tq, eps, mult).value_bits;
}

// Sym^m(u) of a 2x2 unitary as e^{i m alpha} exp(-i theta n.J) in the spin-m/2 representation.
Matrix symmetric_power_unitary(const Matrix& u, std::size_t m) {
  const cplx det = u.determinant();
  const double alpha = 0.5 * std::arg(det);
  const Matrix r = u * std::exp(cplx(0.0, -alpha));
  const double c = 0.5 * r.trace().real();
  const Matrix h = cplx(0.0, 1.0) * (r - c * Matrix::Identity(2, 2));
  const double nx = h(0, 1).real(), ny = -h(0, 1).imag(), nz = 0.5 * (h(0, 0) - h(1, 1)).real();
  const double s = std::sqrt(nx * nx + ny * ny + nz * nz);
  const double theta = 2.0 * std::atan2(s, c);
  const auto mi = static_cast<Eigen::Index>(m);
  Matrix gen = Matrix::Zero(mi + 1, mi + 1);
  if (s > 0.0) {
    for (Eigen::Index a = 0; a <= mi; ++a) {
      gen(a, a) = nz / s * (0.5 * static_cast<double>(mi) - static_cast<double>(a));
      if (a > 0) {
        // <D_{a-1}| J_+ |D_a>
        const double jp = std::sqrt(static_cast<double>(a) * static_cast<double>(mi - a + 1));
        gen(a - 1, a) = 0.5 * jp * cplx(nx / s, -ny / s);
        gen(a, a - 1) = std::conj(gen(a - 1, a));
      }
    }
  }
  const Eigh e = eigh(gen);
  Vector ph(mi + 1);
  for (Eigen::Index i = 0; i <= mi; ++i) ph(i) = std::exp(cplx(0.0, -theta * e.values(i)));
  const Matrix rot = e.vectors * ph.asDiagonal() * e.vectors.adjoint();
  return rot * std::exp(cplx(0.0, alpha * static_cast<double>(m)));
}

RealVector schur_weyl_spectrum(const RealVector& lam, std::size_t n, std::size_t k) {
  const std::size_t m = n - 2 * k;
  const double l0 = std::max(0.0, lam(0)), l1 = std::max(0.0, lam(1));
  RealVector out(static_cast<Eigen::Index>(m + 1));
  for (std::size_t a = 0; a <= m; ++a) {
    const double e0 = static_cast<double>(m - a + k), e1 = static_cast<double>(a + k);
    out(static_cast<Eigen::Index>(a)) = (e0 == 0 ? 1.0 : std::pow(l0, e0)) * (e1 == 0 ? 1.0 : std::pow(l1, e1));
  }
  return out;
}

// Blocks det^k Sym^{n-2k} of (rho, sigma), written in sigma's eigenbasis so that sigma's blocks are exactly
// diagonal, and rescaled to unit norm with the scale moved into the multiplicity.
double iid_dh_schur_weyl(const Matrix& rho, const Matrix& sigma, std::size_t n, double eps) {
  const Eigh er = eigh(rho), es = eigh(sigma);
  const Matrix rel = es.vectors.adjoint() * er.vectors;
  std::vector<NPBlock> blocks;
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; 2 * k <= n; ++k) {
    const std::size_t m = n - 2 * k;
    const RealVector dr = schur_weyl_spectrum(er.values, n, k), ds = schur_weyl_spectrum(es.values, n, k);
    const double scale = std::max(dr.maxCoeff(), ds.maxCoeff());
    if (scale <= 0.0) continue;
    const Matrix w = symmetric_power_unitary(rel, m);
    const double unit_res = (w * w.adjoint() - Matrix::Identity(w.rows(), w.cols())).cwiseAbs().maxCoeff();
    if (unit_res > 1e-9) throw NumericalError("iid_dh: symmetric power lost unitarity");
    const double mult = std::exp(log_binom(nd, k)) - (k == 0 ? 0.0 : std::exp(log_binom(nd, k - 1)));
    NPBlock blk{w * (dr / scale).cast<cplx>().asDiagonal() * w.adjoint(), Matrix((ds / scale).cast<cplx>().asDiagonal()),
                std::round(mult) * scale};
    blk.kernel_rtol = 0.0;
    blocks.push_back(std::move(blk));
  }
  return resolved(dh_blocks(blocks, eps));
}

bool tensor_fits(std::size_t d, std::size_t n) {
  std::size_t dim = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (dim > kMaxDim / d) return false;
    dim *= d;
  }
  return true;
}

Matrix tensor_power(const Matrix& a, std::size_t n) {
  Matrix out = a;
  for (std::size_t i = 1; i < n; ++i) out = kron(out, a);
  return out;
}

enum class IidPath { Identical, Classical, SchurWeyl, Tensor, TooLarge };

IidPath choose_path(const Matrix& rho, const Matrix& sigma, std::size_t n) {
  const auto d = static_cast<std::size_t>(rho.rows());
  if ((rho - sigma).cwiseAbs().maxCoeff() <= kCommuteTol) return IidPath::Identical;
  if (commute(rho, sigma)) return types_count(n, d) <= kMaxTypes ? IidPath::Classical : IidPath::TooLarge;
  if (d == 2) return n <= kMaxSchurWeyl ? IidPath::SchurWeyl : IidPath::TooLarge;
  return tensor_fits(d, n) ? IidPath::Tensor : IidPath::TooLarge;
}

void check_curve_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
}

struct IidPair {
  Matrix rho;
  Matrix sigma;
  std::size_t n;
};

CurvePoint sandwich(const IidPair& p, double eps, double eta, double delta) {
  check_curve_eps(eps);
  const int th_rho = theta_tensor_power(p.rho, p.n), th_sig = theta_tensor_power(p.sigma, p.n);
  const double c = correction_c_unassisted(th_rho, th_sig, eps, delta, eta);
  const double e_low = (eps - eta) * (eps - eta) - 2.0 * delta;
  CurvePoint pt;
  pt.n = p.n;
  pt.eps = eps;
  pt.upper_bits = iid_dh(p.rho, p.sigma, p.n, eps * eps);
  pt.exact_bits = pt.upper_bits;
  pt.lower_bits = iid_dh(p.rho, p.sigma, p.n, e_low) - c;
  const double D = rel_entropy(p.rho, p.sigma), V = rel_entropy_variance(p.rho, p.sigma);
  pt.second_order_bits = second_order_estimate(D, V, eps, static_cast<double>(p.n));
  if (pt.lower_bits > pt.upper_bits + 1e-9)
    throw NumericalError("sandwich: lower bound " + std::to_string(pt.lower_bits) + " exceeds upper bound " +
                         std::to_string(pt.upper_bits));
  return pt;
}

Matrix dephased_target(const DensityMatrix& rho, bool assisted) {
  if (!assisted) return dephase_all(rho.mat());
  if (!rho.layout().contains("A") || !rho.layout().contains("B") || rho.layout().size() != 2)
    throw LayoutError("assisted curves need factors A and B");
  return dephase(rho.mat(), rho.layout(), "B");
}

}  // namespace

Matrix symmetric_power(const Matrix& a, std::size_t m) {
  if (a.rows() != 2 || a.cols() != 2) throw LayoutError("symmetric_power: 2x2 input expected");
  const auto mi = static_cast<Eigen::Index>(m);
  Matrix s = Matrix::Zero(mi + 1, mi + 1);
  const double md = static_cast<double>(m);
  for (std::size_t b = 0; b <= m; ++b)
    for (std::size_t a_ = 0; a_ <= m; ++a_) {
      cplx acc = 0.0;
      const std::size_t jlo = a_ > b ? a_ - b : 0, jhi = std::min(a_, m - b);
      for (std::size_t j = jlo; j <= jhi; ++j) {
        const std::size_t i = a_ - j;
        acc += std::exp(log_binom(md - b, j) + log_binom(b, i)) * std::pow(a(0, 0), static_cast<int>(m - b - j)) *
               std::pow(a(1, 0), static_cast<int>(j)) * std::pow(a(0, 1), static_cast<int>(b - i)) *
               std::pow(a(1, 1), static_cast<int>(i));
      }
      s(static_cast<Eigen::Index>(a_), static_cast<Eigen::Index>(b)) =
          acc * std::exp(0.5 * (log_binom(md, b) - log_binom(md, a_)));
    }
  return s;
}

double iid_dh(const Matrix& rho, const Matrix& sigma, std::size_t n, double eps) {
  if (rho.rows() != sigma.rows() || rho.rows() != rho.cols()) throw LayoutError("iid_dh: dimension mismatch");
  if (n == 0) throw DomainError("iid_dh: n must be positive");
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("iid_dh: eps must lie in [0, 1)");
  switch (choose_path(rho, sigma, n)) {
    case IidPath::Identical:
      return -std::log2(1.0 - eps);
    case IidPath::Classical: {
      const auto [p, q] = joint_spectrum(rho, sigma);
      return iid_dh_classical(p, q, n, eps);
    }
    case IidPath::SchurWeyl:
      return iid_dh_schur_weyl(rho, sigma, n, eps);
    case IidPath::Tensor:
      return resolved(dh(tensor_power(rho, n), tensor_power(sigma, n), eps));
    case IidPath::TooLarge:
      break;
  }
  throw DomainError("iid_dh: n = " + std::to_string(n) + " exceeds the desk-scale guard");
}

int theta_tensor_power(const Matrix& sigma, std::size_t n) {
  const Eigh e = eigh(sigma);
  std::vector<double> lam;
  for (Eigen::Index i = 0; i < e.values.size(); ++i)
    if (e.values(i) > 1e-12) lam.push_back(e.values(i));
  if (types_count(n, lam.size()) > kMaxTypes) throw DomainError("theta_tensor_power: too many types");
  std::vector<double> spec;
  for_each_type(n, lam.size(), [&](const std::vector<std::size_t>& k) { spec.push_back(type_power(lam, k)); });
  return theta_from_spectrum(spec).value;
}

std::pair<double, double> eta_delta_schedule(double eps, std::size_t n) {
  check_curve_eps(eps);
  const double s = 2.0 * std::sqrt(static_cast<double>(n));
  const double eta = eps / s;
  const double e2 = (eps - eta) * (eps - eta);
  return {eta, std::min(e2 / 3.0, 1.0 - e2) / s};
}

CurvePoint sandwich_check_unassisted(const DensityMatrix& rho, double eps, std::size_t n, double eta, double delta) {
  return sandwich({rho.mat(), dephased_target(rho, false), n}, eps, eta, delta);
}

CurvePoint sandwich_check_assisted(const DensityMatrix& rho_ab, double eps, std::size_t n, double eta,
                                   double delta) {
  return sandwich({rho_ab.mat(), dephased_target(rho_ab, true), n}, eps, eta, delta);
}

std::vector<CurvePoint> second_order_curve(const DensityMatrix& rho, double eps, std::span<const std::size_t> n_list,
                                           bool assisted) {
  check_curve_eps(eps);
  const Matrix sigma = dephased_target(rho, assisted);
  const double D = rel_entropy(rho.mat(), sigma), V = rel_entropy_variance(rho.mat(), sigma);
  std::vector<CurvePoint> out;
  for (std::size_t n : n_list) {
    if (n == 0) throw DomainError("second_order_curve: n must be positive");
    CurvePoint pt;
    pt.n = n;
    pt.eps = eps;
    if (choose_path(rho.mat(), sigma, n) == IidPath::TooLarge) {
      pt.flags = "exact-unavailable";
    } else {
      const auto [eta, delta] = eta_delta_schedule(eps, n);
      try {
        pt = sandwich({rho.mat(), sigma, n}, eps, eta, delta);
      } catch (const UnresolvedThreshold&) {
        pt.flags = "exact-unresolved";
      }
    }
    pt.second_order_bits = second_order_estimate(D, V, eps, static_cast<double>(n));
    out.push_back(pt);
  }
  return out;
}

std::vector<CurvePoint> strong_converse_curve(const DensityMatrix& rho, double rate,
                                              std::span<const std::size_t> n_list, bool assisted) {
  const Matrix sigma = dephased_target(rho, assisted);
  const double C = rel_entropy(rho.mat(), sigma), V = rel_entropy_variance(rho.mat(), sigma);
  std::vector<CurvePoint> out;
  for (std::size_t n : n_list) {
    CurvePoint pt;
    pt.n = n;
    pt.second_order_bits = static_cast<double>(n) * C;
    if (V <= 1e-12) {
      const double gap = rate - C;
      pt.epsilon_lower_bound = gap > 1e-12 ? 1.0 : (gap < -1e-12 ? 0.0 : std::sqrt(0.5));
      pt.flags = "g-neglected;V=0-step";
    } else {
      pt.epsilon_lower_bound = std::sqrt(normal_cdf(std::sqrt(static_cast<double>(n) / V) * (rate - C)));
      pt.flags = "g-neglected";
    }
    out.push_back(pt);
  }
  return out;
}

std::size_t strong_converse_threshold(double c, double v, double rate, double level) {
  if (!(level > std::sqrt(0.5) && level < 1.0)) throw DomainError("strong_converse_threshold: level outside (1/sqrt2, 1)");
  if (!(rate > c)) throw DomainError("strong_converse_threshold: the bound never reaches the level when R <= C");
  if (v <= 1e-12) return 1;
  const double x = inv_normal_cdf(level * level) / (rate - c);
  return static_cast<std::size_t>(std::max(1.0, std::ceil(v * x * x)));
}

LogRemainderFit fit_log_remainder(std::span<const double> n, std::span<const double> remainder) {
  if (n.size() != remainder.size() || n.size() < 2) throw DomainError("fit_log_remainder: need two or more points");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) {
    a(static_cast<Eigen::Index>(i), 0) = std::log2(n[i]);
    a(static_cast<Eigen::Index>(i), 1) = 1.0;
    y(static_cast<Eigen::Index>(i)) = std::abs(remainder[i]);
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
  LogRemainderFit fit;
  fit.kappa = coef(0);
  fit.kappa0 = -kInf;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double r = std::abs(remainder[i]) - fit.kappa * std::log2(n[i]);
    fit.kappa0 = std::max(fit.kappa0, r);
    fit.max_residual = std::max(fit.max_residual, std::abs(r - coef(1)));
  }
  return fit;
}

double fit_sqrt_coefficient(std::span<const double> n, std::span<const double> y) {
  if (n.size() != y.size() || n.size() < 2) throw DomainError("fit_sqrt_coefficient: need two or more points");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) {
    a(static_cast<Eigen::Index>(i), 0) = std::sqrt(n[i]);
    a(static_cast<Eigen::Index>(i), 1) = 1.0;
    b(static_cast<Eigen::Index>(i)) = y[i];
  }
  return a.colPivHouseholderQr().solve(b)(0);
}

std::string to_csv(std::span<const CurvePoint> points) {
  std::string out = "# qcoh-curve v1\nn,eps,lower_bits,upper_bits,exact_bits,second_order_bits,eps_lower_bound\n";
  auto num = [](double x) {
    if (std::isnan(x)) return std::string("nan");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::string(buf);
  };
  for (const auto& p : points) {
    out += std::to_string(p.n) + "," + num(p.eps) + "," + num(p.lower_bits) + "," + num(p.upper_bits) + "," +
           num(p.exact_bits) + "," + num(p.second_order_bits) + "," + num(p.epsilon_lower_bound) + "\n";
  }
  return out;
}

}  // namespace qcoh
