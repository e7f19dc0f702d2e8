#include <doctest.h>

#include <array>

#include "oracles.hpp"
#include "qcoh/entropy.hpp"
#include "qcoh/sdp.hpp"

using namespace qcoh;

namespace {

DensityMatrix br_state(const Matrix& m, std::size_t db, std::size_t dr) {
  return DensityMatrix(m, SystemLayout({{"B", db}, {"R", dr}}));
}

// max c.y s.t. a_k . y <= b_k by enumerating vertices of the 2-variable polygon.
double lp2_vertex_oracle(const std::array<double, 2>& c, const std::vector<std::array<double, 3>>& rows) {
  double best = -INFINITY;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const double det = rows[i][0] * rows[j][1] - rows[i][1] * rows[j][0];
      if (std::abs(det) < 1e-12) continue;
      const double y0 = (rows[i][2] * rows[j][1] - rows[i][1] * rows[j][2]) / det;
      const double y1 = (rows[i][0] * rows[j][2] - rows[i][2] * rows[j][0]) / det;
      bool ok = true;
      for (const auto& r : rows) ok = ok && r[0] * y0 + r[1] * y1 <= r[2] + 1e-9;
      if (ok) best = std::max(best, c[0] * y0 + c[1] * y1);
    }
  return best;
}

// Smooth min-entropy of a classical 2x2 distribution p(b, r), index 2b + r. With column caps
// q(b, r) <= m_r the guessing value is m_0 + m_1; the largest overlap sum sqrt(p q) under the caps and
// sum q <= 1 is a water-filling q = min(cap, lambda p). Minimal m_1 by bisection, m_0 by golden section.
double classical_smooth_hmin_search(const std::array<double, 4>& p, double eps) {
  const double f = std::sqrt(1.0 - eps * eps);
  auto overlap = [&](double m0, double m1) {
    const std::array<double, 4> cap{m0, m1, m0, m1};
    auto fill = [&](double lam) {
      std::array<double, 4> q{};
      for (int i = 0; i < 4; ++i) q[i] = std::min(cap[i], lam * p[i]);
      return q;
    };
    auto total = [](const std::array<double, 4>& q) { return q[0] + q[1] + q[2] + q[3]; };
    std::array<double, 4> q = cap;
    if (total(q) > 1.0) {
      double lo = 0.0, hi = 1e6;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(fill(mid)) > 1.0 ? hi : lo) = mid;
      }
      q = fill(lo);
    }
    double o = 0.0;
    for (int i = 0; i < 4; ++i) o += std::sqrt(p[i] * q[i]);
    return o;
  };
  auto min_m1 = [&](double m0) {
    if (overlap(m0, 1.0) < f) return std::numeric_limits<double>::infinity();
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (overlap(m0, mid) >= f ? hi : lo) = mid;
    }
    return m0 + hi;
  };
  double a = 0.0, b = 1.0;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double x1 = b - g * (b - a), x2 = a + g * (b - a);
    if (min_m1(x1) < min_m1(x2))
      b = x2;
    else
      a = x1;
  }
  return -std::log2(min_m1(0.5 * (a + b)));
}

}  // namespace

TEST_CASE("largest eigenvalue by SDP") {
  Rng rng(1);
  for (int k = 0; k < 5; ++k) {
    const Matrix a = random_hermitian(rng, 3 + k % 2);
    SDPBuilder b;
    const int t = b.add_var(-1.0);
    Affine lmi{-a, {}};
    lmi.terms[t] = Matrix::Identity(a.rows(), a.rows());
    b.add_psd(lmi);
    const SDPSolution s = solve(b.build());
    CHECK(s.status == SDPStatus::Optimal);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    CHECK(std::abs(-s.dual_objective - es.eigenvalues().maxCoeff()) < 1e-7);
    CHECK(s.duality_gap <= 1e-7 * (1.0 + std::abs(s.dual_objective)));
  }
}

TEST_CASE("diagonal blocks reproduce a linear program") {
  Rng rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const std::array<double, 2> c{u(rng), u(rng)};
    std::vector<std::array<double, 3>> rows{{1, 0, 2}, {-1, 0, 2}, {0, 1, 2}, {0, -1, 2}};
    for (int extra = 0; extra < 3; ++extra) rows.push_back({u(rng), u(rng), 0.5 + 0.5 * (u(rng) + 1.0)});
    SDPBuilder b;
    const int y0 = b.add_var(c[0]), y1 = b.add_var(c[1]);
    for (const auto& r : rows) {
      Affine s{Matrix::Constant(1, 1, r[2]), {}};
      s.terms[y0] = Matrix::Constant(1, 1, -r[0]);
      s.terms[y1] = Matrix::Constant(1, 1, -r[1]);
      b.add_psd(s);
    }
    const SDPSolution s = solve(b.build());
    CHECK(s.status == SDPStatus::Optimal);
    CHECK(std::abs(s.dual_objective - lp2_vertex_oracle(c, rows)) < 1e-7);
  }
}

TEST_CASE("infeasible problem is reported") {
  // y <= -1 and y >= 1
  SDPBuilder b;
  const int y = b.add_var(1.0);
  Affine a{Matrix::Constant(1, 1, -1.0), {}};
  a.terms[y] = Matrix::Constant(1, 1, -1.0);
  Affine c{Matrix::Constant(1, 1, -1.0), {}};
  c.terms[y] = Matrix::Constant(1, 1, 1.0);
  b.add_psd(a);
  b.add_psd(c);
  CHECK(solve(b.build()).status != SDPStatus::Optimal);
}

TEST_CASE("fidelity SDP") {
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    const std::size_t d = 2 + k % 3;
    const Matrix r = random_density(rng, d, 1 + k % d), s = random_density(rng, d, d);
    SDPSolution sol;
    CHECK(std::abs(fidelity_sdp(r, s, &sol) - fidelity(r, s)) < 1e-6);
    CHECK(sol.primal_objective >= sol.dual_objective - 1e-9);
  }
}

TEST_CASE("hypothesis testing SDP agrees with Neyman-Pearson") {
  Rng rng(4);
  for (int k = 0; k < 20; ++k) {
    const std::size_t d = 2 + k % 4;
    const Matrix r = random_density(rng, d, d), s = random_density(rng, d, d);
    const double eps = 0.05 + 0.04 * k;
    CHECK(std::abs(dh_sdp(r, s, eps) - dh(r, s, eps).value_bits) < 1e-6);
  }
  const Matrix plus = oracle::ket_bra(oracle::plus(), oracle::plus());
  CHECK(std::abs(dh_sdp(plus, 0.5 * Matrix::Identity(2, 2), 0.3) - (1.0 - std::log2(0.7))) < 1e-6);
}

TEST_CASE("conditional min-entropy") {
  Rng rng(5);
  const Matrix sr = random_density(rng, 2, 2);
  CHECK(std::abs(hmin(br_state(kron(Matrix(0.5 * Matrix::Identity(2, 2)), sr), 2, 2), "B", "R") - 1.0) < 1e-7);

  const Matrix mes = oracle::ket_bra(oracle::bell(), oracle::bell());
  CHECK(std::abs(hmin(br_state(mes, 2, 2), "B", "R") + 1.0) < 1e-7);

  const Matrix corr = oracle::diag({0.5, 0, 0, 0.5});
  CHECK(std::abs(hmin(br_state(corr, 2, 2), "B", "R")) < 1e-7);

  // the R-first layout is permuted internally
  const DensityMatrix rb(kron(sr, Matrix(0.5 * Matrix::Identity(2, 2))), SystemLayout({{"R", 2}, {"B", 2}}));
  CHECK(std::abs(hmin(rb, "B", "R") - 1.0) < 1e-7);

  for (int k = 0; k < 5; ++k) {
    const DensityMatrix rho = br_state(random_density(rng, 4, 4), 2, 2);
    CHECK(hmin(rho, "B", "R") <= 1.0 + 1e-9);
  }
}

TEST_CASE("smooth conditional min-entropy") {
  Rng rng(6);
  const DensityMatrix rho = br_state(random_density(rng, 4, 3), 2, 2);
  const double h0 = hmin(rho, "B", "R");
  CHECK(std::abs(hmin_smooth(rho, "B", "R", 0.0) - h0) < 1e-7);
  double prev = h0;
  for (double eps : {0.05, 0.1, 0.2, 0.4}) {
    const double h = hmin_smooth(rho, "B", "R", eps);
    CHECK(h >= prev - 1e-7);
    prev = h;
  }

  SUBCASE("normalized ball tends to log|B|") {
    const DensityMatrix mes = br_state(oracle::ket_bra(oracle::bell(), oracle::bell()), 2, 2);
    CHECK(std::abs(hmin_smooth(mes, "B", "R", 0.999, SmoothingBall::Normalized) - 1.0) < 1e-3);
    CHECK(std::abs(hmin_smooth(rho, "B", "R", 0.999, SmoothingBall::Normalized) - 1.0) < 1e-3);
  }

  SUBCASE("classical state against direct search") {
    for (int k = 0; k < 3; ++k) {
      const auto pv = oracle::random_simplex(rng, 4);
      const std::array<double, 4> p{pv[0], pv[1], pv[2], pv[3]};
      const DensityMatrix cq = br_state(oracle::diag_of(pv), 2, 2);
      CHECK(std::abs(hmin_smooth(cq, "B", "R", 0.2) - classical_smooth_hmin_search(p, 0.2)) < 1e-4);
    }
  }

  CHECK_THROWS_AS(hmin_smooth(br_state(random_density(rng, 32, 2), 4, 8), "B", "R", 0.1), DomainError);
}
