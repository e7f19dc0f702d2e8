#include "qcoh/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace qcoh {

namespace {

constexpr double kLn2 = std::numbers::ln2;

struct LogPair {
  Eigh rho;
  Eigh sigma;
  Matrix diff;  // log rho - log sigma on supports, natural log
};

LogPair log_difference(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows()) throw LayoutError("rel_entropy: dimension mismatch");
  LogPair lp{eigh(rho), eigh(sigma), {}};
  const double smax = std::max(lp.sigma.values.maxCoeff(), 0.0);
  const double rmax = std::max(lp.rho.values.maxCoeff(), 0.0);
  const double s_tol = 1e-12 * std::max(1.0, smax);
  const double r_tol = 1e-12 * std::max(1.0, rmax);

  double outside = 0.0;
  for (Eigen::Index k = 0; k < lp.sigma.values.size(); ++k) {
    if (lp.sigma.values(k) > s_tol) continue;
    const Vector u = lp.sigma.vectors.col(k);
    outside += u.dot(rho * u).real();
  }
  if (outside > 1e-10) throw InfiniteDivergence("supp(rho) is not contained in supp(sigma)");

  const Matrix log_rho = spectral_apply(lp.rho, [&](double r) { return r > r_tol ? std::log(r) : 0.0; });
  const Matrix log_sigma = spectral_apply(lp.sigma, [&](double s) { return s > s_tol ? std::log(s) : 0.0; });
  lp.diff = log_rho - log_sigma;
  return lp;
}

}  // namespace

double rel_entropy(const Matrix& rho, const Matrix& sigma) {
  const LogPair lp = log_difference(rho, sigma);
  return (rho * lp.diff).trace().real() / kLn2;
}

double rel_entropy_variance(const Matrix& rho, const Matrix& sigma) {
  const LogPair lp = log_difference(rho, sigma);
  const double d = (rho * lp.diff).trace().real();
  const double second = (rho * lp.diff * lp.diff).trace().real();
  return std::max(0.0, second - d * d) / (kLn2 * kLn2);
}

namespace {

struct Tally {
  double rho_pos = 0.0, rho_zero = 0.0;
  double sigma_pos = 0.0, sigma_zero = 0.0;
};

Tally np_tally(std::span<const NPBlock> blocks, double t) {
  Tally acc;
  for (const auto& b : blocks) {
    if (b.rho.rows() == 1) {
      const double r = b.rho(0, 0).real();
      const double s = b.sigma(0, 0).real();
      const double lam = r - t * s;
      const double tol = 1e-12 * (std::abs(r) + t * std::abs(s)) + 1e-300;
      if (lam > tol) {
        acc.rho_pos += b.multiplicity * r;
        acc.sigma_pos += b.multiplicity * s;
      } else if (lam >= -tol) {
        acc.rho_zero += b.multiplicity * r;
        acc.sigma_zero += b.multiplicity * s;
      }
      continue;
    }
    const Matrix h = b.rho - t * b.sigma;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
    const double scale = b.rho.cwiseAbs().maxCoeff() + t * b.sigma.cwiseAbs().maxCoeff();
    const double tol = 1e-12 * scale + 1e-300;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const double lam = es.eigenvalues()(k);
      if (lam < -tol) continue;
      const Vector v = es.eigenvectors().col(k);
      const double r = v.dot(b.rho * v).real();
      const double s = v.dot(b.sigma * v).real();
      if (lam > tol) {
        acc.rho_pos += b.multiplicity * r;
        acc.sigma_pos += b.multiplicity * s;
      } else {
        acc.rho_zero += b.multiplicity * r;
        acc.sigma_zero += b.multiplicity * s;
      }
    }
  }
  return acc;
}

void fill_result(NPResult& out, const Tally& tl, double target, double t) {
  double x = tl.rho_zero > 0.0 ? (target - tl.rho_pos) / tl.rho_zero : 0.0;
  x = std::clamp(x, 0.0, 1.0);
  out.threshold_t = t;
  out.boundary_fraction_x = x;
  out.type1 = tl.rho_pos + x * tl.rho_zero;
  out.type2 = std::max(0.0, tl.sigma_pos + x * tl.sigma_zero);
  out.value_bits = out.type2 > 0.0 ? -std::log2(out.type2) : kInf;
}

// Mass of rho on the kernel of sigma, and on the support of rho.
struct SupportMass {
  double rho_outside_sigma = 0.0;
  double sigma_on_supp_rho = 0.0;
};

SupportMass support_mass(std::span<const NPBlock> blocks) {
  SupportMass m;
  for (const auto& b : blocks) {
    if (b.rho.rows() == 1) {
      if (b.sigma(0, 0).real() <= 0.0) m.rho_outside_sigma += b.multiplicity * b.rho(0, 0).real();
      if (b.rho(0, 0).real() > 0.0) m.sigma_on_supp_rho += b.multiplicity * b.sigma(0, 0).real();
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es_s(b.sigma);
    const double s_tol = b.kernel_rtol * std::max(1.0, es_s.eigenvalues().cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < es_s.eigenvalues().size(); ++k) {
      if (es_s.eigenvalues()(k) > s_tol) continue;
      const Vector u = es_s.eigenvectors().col(k);
      m.rho_outside_sigma += b.multiplicity * u.dot(b.rho * u).real();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es_r(b.rho);
    const double r_tol = 1e-12 * std::max(1.0, es_r.eigenvalues().cwiseAbs().maxCoeff());
    for (Eigen::Index k = 0; k < es_r.eigenvalues().size(); ++k) {
      if (es_r.eigenvalues()(k) <= r_tol) continue;
      const Vector v = es_r.eigenvectors().col(k);
      m.sigma_on_supp_rho += b.multiplicity * v.dot(b.sigma * v).real();
    }
  }
  return m;
}

}  // namespace

NPResult dh_blocks(std::span<const NPBlock> blocks, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("dh: eps must lie in [0, 1)");
  for (const auto& b : blocks) {
    if (b.rho.rows() != b.rho.cols() || b.rho.rows() != b.sigma.rows() || b.sigma.rows() != b.sigma.cols())
      throw LayoutError("dh: block dimension mismatch");
  }
  const double target = 1.0 - eps;
  NPResult out;

  const SupportMass sm = support_mass(blocks);
  if (sm.rho_outside_sigma >= target - 1e-12) {
    out.threshold_t = kInf;
    out.boundary_fraction_x = 1.0;
    out.type1 = sm.rho_outside_sigma;
    out.type2 = 0.0;
    out.value_bits = kInf;
    return out;
  }
  if (eps == 0.0) {
    out.threshold_t = 0.0;
    out.boundary_fraction_x = 1.0;
    out.type1 = 1.0;
    out.type2 = sm.sigma_on_supp_rho;
    out.value_bits = out.type2 > 0.0 ? -std::log2(out.type2) : kInf;
    return out;
  }

  // -1: t too small, +1: t too large, 0: boundary bracket found.
  auto classify = [&](const Tally& tl) {
    if (tl.rho_pos > target) return -1;
    if (tl.rho_pos + tl.rho_zero < target) return 1;
    return 0;
  };

  double t = 1.0;
  Tally tl = np_tally(blocks, t);
  int c = classify(tl);
  int iters = 0;
  double lo = 0.0, hi = 0.0;
  if (c == -1) {
    lo = t;
    hi = t;
    while (c == -1 && hi < 1e300) {
      lo = hi;
      hi *= 2.0;
      tl = np_tally(blocks, hi);
      c = classify(tl);
      ++iters;
    }
    t = hi;
  } else if (c == 1) {
    lo = t;
    hi = t;
    while (c == 1 && lo > 1e-300) {
      hi = lo;
      lo *= 0.5;
      tl = np_tally(blocks, lo);
      c = classify(tl);
      ++iters;
    }
    t = lo;
  }
  for (int it = 0; c != 0 && it < 200; ++it) {
    t = std::sqrt(lo) * std::sqrt(hi);
    if (!(t > lo && t < hi)) break;
    tl = np_tally(blocks, t);
    c = classify(tl);
    ++iters;
    if (c == -1) lo = t;
    if (c == 1) hi = t;
  }
  if (c != 0) {
    t = hi;
    tl = np_tally(blocks, t);
  }
  fill_result(out, tl, target, t);
  out.iterations = iters;
  if (std::abs(out.type1 - target) > 1e-9)
    throw NumericalError("dh: Neyman-Pearson bisection did not reach the type-I target");
  return out;
}

NPResult dh(const Matrix& rho, const Matrix& sigma, double eps) {
  if (rho.rows() != sigma.rows()) throw LayoutError("dh: dimension mismatch");
  const NPBlock b{rho, sigma, 1.0};
  return dh_blocks(std::span<const NPBlock>(&b, 1), eps);
}

NPResult dh_classical(std::span<const double> p, std::span<const double> q, double eps,
                      std::span<const double> multiplicity) {
  if (p.size() != q.size() || (!multiplicity.empty() && multiplicity.size() != p.size()))
    throw LayoutError("dh_classical: length mismatch");
  std::vector<NPBlock> blocks;
  blocks.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    Matrix r(1, 1), s(1, 1);
    r(0, 0) = p[i];
    s(0, 0) = q[i];
    blocks.push_back({r, s, multiplicity.empty() ? 1.0 : multiplicity[i]});
  }
  return dh_blocks(blocks, eps);
}

double dmax(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows()) throw LayoutError("dmax: dimension mismatch");
  const Eigh es = eigh(sigma);
  const double s_tol = 1e-12 * std::max(1.0, es.values.maxCoeff());
  double outside = 0.0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    if (es.values(k) > s_tol) continue;
    const Vector u = es.vectors.col(k);
    outside += u.dot(rho * u).real();
  }
  if (outside > 1e-10) throw InfiniteDivergence("dmax: supp(rho) is not contained in supp(sigma)");
  const Matrix inv_sqrt = spectral_apply(es, [&](double s) { return s > s_tol ? 1.0 / std::sqrt(s) : 0.0; });
  const Matrix g = inv_sqrt * rho * inv_sqrt;
  Eigen::SelfAdjointEigenSolver<Matrix> eg(0.5 * (g + g.adjoint()), Eigen::EigenvaluesOnly);
  return std::log2(eg.eigenvalues().maxCoeff());
}

DsResult ds_spectrum_detail(std::span<const double> p, std::span<const double> q, double eps) {
  if (p.size() != q.size()) throw LayoutError("ds_spectrum: length mismatch");
  std::vector<std::pair<double, double>> pts;  // (log ratio, mass)
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    pts.emplace_back(q[i] > 0.0 ? std::log2(p[i] / q[i]) : kInf, p[i]);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> atoms;  // (value, cumulative mass)
  double cum = 0.0;
  for (const auto& [l, m] : pts) {
    cum += m;
    if (!atoms.empty() && (atoms.back().first == l || std::abs(atoms.back().first - l) <= 1e-10))
      atoms.back().second = cum;
    else
      atoms.emplace_back(l, cum);
  }
  auto first_above = [&](double e) {
    for (const auto& [l, c] : atoms)
      if (c > e) return l;
    return kInf;
  };
  DsResult r;
  r.value = first_above(eps);
  r.left = r.value;
  r.right = r.value;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    if (std::abs(atoms[k].second - eps) <= 1e-12) {
      r.at_atom = true;
      r.left = atoms[k].first;
      r.right = k + 1 < atoms.size() ? atoms[k + 1].first : kInf;
    }
  }
  return r;
}

double ds_spectrum(std::span<const double> p, std::span<const double> q, double eps) {
  return ds_spectrum_detail(p, q, eps).value;
}

Theta theta_from_spectrum(std::span<const double> eigenvalues) {
  std::vector<double> nz;
  double vmax = 0.0;
  for (double v : eigenvalues) vmax = std::max(vmax, v);
  if (vmax <= 0.0) throw DomainError("theta: zero matrix");
  for (double v : eigenvalues)
    if (v > 1e-12 * vmax) nz.push_back(v);
  std::sort(nz.begin(), nz.end());
  Theta th;
  th.lambda = std::log2(nz.back()) - std::log2(nz.front());
  th.nu = 1;
  for (std::size_t i = 1; i < nz.size(); ++i)
    if (nz[i] - nz[i - 1] > 1e-9 * nz[i]) ++th.nu;
  const int raw = std::min(2 * static_cast<int>(std::ceil(th.lambda - 1e-12)), th.nu);
  th.value = std::max(raw, 1);
  th.clamped = raw < 1;
  return th;
}

Theta theta(const Matrix& sigma) {
  const Eigh e = eigh(sigma);
  return theta_from_spectrum(std::span<const double>(e.values.data(), static_cast<std::size_t>(e.values.size())));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double inv_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("inv_normal_cdf: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double r = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double r = p - 0.5;
    const double s = r * r;
    x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
        (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
  } else {
    const double r = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  // Newton refinement; the residual is evaluated through erfc to keep tail accuracy.
  const double err = x < 0.0 ? 0.5 * std::erfc(-x / std::numbers::sqrt2) - p
                             : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (pdf > 0.0) x -= err / pdf;
  return x;
}

double second_order_estimate(double D, double V, double eps, double n) {
  if (V < 0.0) throw DomainError("second_order_estimate: V must be nonnegative");
  if (n < 1.0) throw DomainError("second_order_estimate: n must be at least 1");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("second_order_estimate: eps must lie in (0, 1)");
  if (V == 0.0) return n * D;
  return n * D + std::sqrt(n * V) * inv_normal_cdf(eps * eps);
}

double correction_c_unassisted(int theta_rho, int theta_dephased, double eps, double delta, double eta) {
  if (!(eta > 0.0 && eta < eps && eps < 1.0)) throw DomainError("correction_c: eta must lie in (0, eps)");
  const double e2 = (eps - eta) * (eps - eta);
  if (!(delta > 0.0 && delta < std::min(e2 / 3.0, 1.0 - e2)))
    throw DomainError("correction_c: delta outside (0, min{(eps-eta)^2/3, 1-(eps-eta)^2})");
  return std::log2(std::max(theta_rho, 1)) + std::log2(std::max(theta_dephased, 1)) + std::log2(e2 - delta) -
         std::log2(std::pow(delta, 5) * std::pow(eta, 4) * e2 * (1.0 - e2 + delta)) + 11.0;
}

double correction_c_unassisted(const Matrix& rho, double eps, double delta, double eta) {
  const Matrix dephased = Matrix(rho.diagonal().asDiagonal());
  return correction_c_unassisted(theta(rho).value, theta(dephased).value, eps, delta, eta);
}

double correction_c_assisted(int theta_rho, int theta_dephased, double eps, double delta) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("correction_c: eps must lie in (0, 1)");
  const double e2 = eps * eps;
  if (!(delta > 0.0 && delta < std::min(e2 / 3.0, 1.0 - e2)))
    throw DomainError("correction_c: delta outside (0, min{eps^2/3, 1-eps^2})");
  return std::log2(std::max(theta_rho, 1)) + std::log2(std::max(theta_dephased, 1)) + std::log2(e2 - delta) -
         std::log2(std::pow(delta, 5) * e2 * (1.0 - e2 + delta)) + 8.0;
}

EntropyReport entropy_report(const Matrix& rho, const Matrix& sigma, std::span<const double> eps_list,
                             std::span<const double> n_list) {
  EntropyReport r;
  r.D_bits = rel_entropy(rho, sigma);
  r.V_bits2 = rel_entropy_variance(rho, sigma);
  for (double e : eps_list) r.dh_bits.emplace_back(e, dh(rho, sigma, e).value_bits);
  r.dmax_bits = dmax(rho, sigma);
  r.theta = theta(sigma);
  if (!eps_list.empty())
    for (double n : n_list)
      r.second_order_bits.emplace_back(n, second_order_estimate(r.D_bits, r.V_bits2, eps_list.front(), n));
  return r;
}

}  // namespace qcoh
