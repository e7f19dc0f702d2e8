#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qcoh/linalg.hpp"

namespace oracle {

using qcoh::cplx;
using qcoh::Matrix;
using qcoh::Vector;

inline Matrix diag(std::initializer_list<double> v) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(i, i) = x, ++i;
  return m;
}

inline Matrix ket_bra(const Vector& a, const Vector& b) { return a * b.adjoint(); }

inline Vector plus() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

inline Vector basis(Eigen::Index d, Eigen::Index i) {
  Vector v = Vector::Zero(d);
  v(i) = 1.0;
  return v;
}

inline Vector bell() {
  Vector v = Vector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return v;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// Trace over the middle factor of a (dA, dB, dC) tripartite operator, explicit 6-index loop.
inline Matrix trace_bc(const Matrix& m, int da, int db, int dc) {
  Matrix out = Matrix::Zero(da, da);
  for (int a = 0; a < da; ++a)
    for (int a2 = 0; a2 < da; ++a2)
      for (int b = 0; b < db; ++b)
        for (int c = 0; c < dc; ++c) out(a, a2) += m((a * db + b) * dc + c, (a2 * db + b) * dc + c);
  return out;
}

/// Classical D_H by sorting likelihood ratios and greedily filling mass 1 - eps.
inline double classical_dh_bits(std::vector<double> p, std::vector<double> q, double eps) {
  std::vector<std::size_t> idx(p.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    // ratio p/q descending; q == 0 first
    return p[a] * q[b] > p[b] * q[a];
  });
  double need = 1.0 - eps, beta = 0.0;
  for (std::size_t i : idx) {
    if (need <= 0.0) break;
    if (p[i] <= 0.0) continue;
    const double take = std::min(1.0, need / p[i]);
    need -= take * p[i];
    beta += take * q[i];
  }
  return beta > 0.0 ? -std::log2(beta) : INFINITY;
}

inline double classical_D_bits(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) d += p[i] * std::log2(p[i] / q[i]);
  return d;
}

inline double classical_V_bits(const std::vector<double>& p, const std::vector<double>& q) {
  const double d = classical_D_bits(p, q);
  double v = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) v += p[i] * std::pow(std::log2(p[i] / q[i]) - d, 2);
  return v;
}

inline std::vector<double> random_simplex(qcoh::Rng& rng, std::size_t n) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) s += (x = ex(rng));
  for (auto& x : v) x /= s;
  return v;
}

inline Matrix diag_of(const std::vector<double>& v) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

/// Standard normal CDF by composite Simpson integration of the density from 0.
inline double phi_integrated(double x) {
  const int n = 20000;
  const double h = x / n;
  auto f = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
  double s = f(0.0) + f(x);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return 0.5 + s * h / 3.0;
}

}  // namespace oracle
