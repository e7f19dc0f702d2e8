#include <doctest.h>

#include "oracles.hpp"
#include "qcoh/linalg.hpp"

using namespace qcoh;

TEST_CASE("kron") {
  CHECK(kron(Matrix(Matrix::Identity(2, 2)), Matrix(Matrix::Identity(2, 2))).isApprox(Matrix::Identity(4, 4)));
  CHECK(oracle::max_abs(kron(oracle::diag({1, 0}), oracle::diag({0, 1})) - oracle::diag({0, 1, 0, 0})) == 0.0);

  Rng rng(7);
  const Matrix a = random_hermitian(rng, 2) + cplx(0, 1) * random_hermitian(rng, 2);
  const Matrix b = random_hermitian(rng, 2);
  const Matrix k = kron(a, b);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) CHECK(std::abs(k(i * 2 + r, j * 2 + s) - a(i, j) * b(r, s)) < 1e-15);
}

TEST_CASE("partial trace") {
  Rng rng(11);
  const Matrix ra = random_density(rng, 2, 2);
  const Matrix rb = random_density(rng, 3, 3);
  const SystemLayout ab({{"A", 2}, {"B", 3}});
  const std::vector<std::string> keep_a{"A"};
  CHECK(oracle::max_abs(partial_trace(kron(ra, rb), ab, keep_a) - ra) < 1e-14);

  const DensityMatrix bell(oracle::ket_bra(oracle::bell(), oracle::bell()), SystemLayout({{"A", 2}, {"B", 2}}));
  const DensityMatrix marg = partial_trace(bell, keep_a);
  CHECK(oracle::max_abs(marg.mat() - 0.5 * Matrix::Identity(2, 2)) < 1e-15);
  CHECK(marg.layout() == SystemLayout::single("A", 2));

  SUBCASE("tripartite against index contraction") {
    const Matrix rho = random_density(rng, 12, 12);
    const SystemLayout abc({{"A", 2}, {"B", 3}, {"C", 2}});
    const Matrix got = partial_trace(rho, abc, keep_a);
    CHECK(oracle::max_abs(got - oracle::trace_bc(rho, 2, 3, 2)) < 1e-14);
    CHECK(std::abs(got.trace().real() - 1.0) < 1e-12);
  }

  const std::vector<std::string> bad{"Z"};
  CHECK_THROWS_AS(partial_trace(bell, bad), LayoutError);
}

TEST_CASE("permute systems") {
  Rng rng(3);
  const Matrix ra = random_density(rng, 2, 2);
  const Matrix rb = random_density(rng, 3, 2);
  const SystemLayout ab({{"A", 2}, {"B", 3}});
  const std::vector<std::string> order{"B", "A"};
  CHECK(oracle::max_abs(permute_systems(kron(ra, rb), ab, order) - kron(rb, ra)) < 1e-15);
}

TEST_CASE("eigh") {
  const Eigh e = eigh(oracle::diag({3, 1, 2}));
  CHECK(e.values(0) == doctest::Approx(1.0));
  CHECK(e.values(1) == doctest::Approx(2.0));
  CHECK(e.values(2) == doctest::Approx(3.0));

  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  const Eigh ex = eigh(x);
  CHECK(ex.values(0) == doctest::Approx(-1.0));
  CHECK(ex.values(1) == doctest::Approx(1.0));

  Rng rng(5);
  const Matrix h = random_hermitian(rng, 8);
  const Eigh eh = eigh(h);
  const Matrix rec = eh.vectors * eh.values.cast<cplx>().asDiagonal() * eh.vectors.adjoint();
  CHECK((h - rec).norm() <= 1e-9 * h.norm());
  CHECK(oracle::max_abs(eh.vectors.adjoint() * eh.vectors - Matrix::Identity(8, 8)) < 1e-10);

  Matrix nh(2, 2);
  nh << 0, 1, 0, 0;
  CHECK_THROWS_AS(eigh(nh), NumericalError);
}

TEST_CASE("fidelity and purified distance") {
  Rng rng(13);
  const Matrix rho = random_density(rng, 3, 3);
  CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(purified_distance(rho, rho) < 1e-5);

  const Matrix p0 = oracle::diag({1, 0});
  const Matrix p1 = oracle::diag({0, 1});
  CHECK(fidelity(p0, p1) == doctest::Approx(0.0));
  CHECK(purified_distance(p0, p1) == doctest::Approx(1.0));

  const Matrix plus = oracle::ket_bra(oracle::plus(), oracle::plus());
  const Matrix mixed = 0.5 * Matrix::Identity(2, 2);
  const double closed = std::sqrt(oracle::plus().dot(mixed * oracle::plus()).real());
  CHECK(std::abs(fidelity(plus, mixed) - closed) < 1e-12);
  CHECK(std::abs(purified_distance(plus, mixed) - std::sqrt(1.0 - closed * closed)) < 1e-12);
  CHECK(std::abs(purified_distance_to_pure(mixed, oracle::plus()) - 1.0 / std::sqrt(2.0)) < 1e-15);

  CHECK_THROWS_AS(fidelity(p0, Matrix::Identity(3, 3)), LayoutError);

  SUBCASE("symmetry and unitary invariance") {
    for (int k = 0; k < 20; ++k) {
      const Matrix r = random_density(rng, 4, 1 + k % 4);
      const Matrix s = random_density(rng, 4, 1 + (k + 1) % 4);
      const Matrix u = random_unitary(rng, 4);
      const double f = fidelity(r, s);
      CHECK(f <= 1.0 + 1e-10);
      CHECK(std::abs(f - fidelity(s, r)) < 1e-10);
      CHECK(std::abs(f - fidelity(u * r * u.adjoint(), u * s * u.adjoint())) < 1e-9);
    }
  }

  SUBCASE("data processing under partial trace") {
    const SystemLayout ab({{"A", 2}, {"B", 2}});
    const std::vector<std::string> keep{"A"};
    for (int k = 0; k < 50; ++k) {
      const Matrix r = random_density(rng, 4, 4);
      const Matrix s = random_density(rng, 4, 2);
      CHECK(purified_distance(partial_trace(r, ab, keep), partial_trace(s, ab, keep)) <=
            purified_distance(r, s) + 1e-9);
    }
  }

  SUBCASE("generalized fidelity for subnormalized inputs") {
    const Matrix half = 0.5 * p0;
    CHECK(fidelity(half, p0) == doctest::Approx(std::sqrt(0.5)));
    CHECK(fidelity(half, half) == doctest::Approx(1.0));
  }
}

TEST_CASE("uhlmann attainability") {
  Rng rng(17);
  for (int k = 0; k < 10; ++k) {
    const std::size_t d = 2 + k % 3;
    const DensityMatrix r(random_density(rng, d, d), SystemLayout::single("B", d));
    const DensityMatrix s(random_density(rng, d, d), SystemLayout::single("B", d));
    const PureState pr = purify(r, "R");
    const PureState ps = purify(s, "R");
    const Matrix a = coefficient_matrix(pr.vec(), d, d);
    const Matrix b = coefficient_matrix(ps.vec(), d, d);
    // <u|(1 (x) U)|v> = tr(a^dag b U^T); the maximum is the trace norm of a^dag b
    const Matrix overlap = a.adjoint() * b;
    Eigen::JacobiSVD<Matrix> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix u = (svd.matrixV() * svd.matrixU().adjoint()).transpose();
    const Vector rotated = kron(Matrix(Matrix::Identity(d, d)), u) * ps.vec();
    CHECK(std::abs(std::abs(pr.vec().dot(rotated)) - fidelity(r, s)) < 1e-8);
  }
}

TEST_CASE("cq fidelity") {
  Rng rng(19);
  const std::vector<double> one{1.0};
  const Matrix r = random_density(rng, 2, 2), s = random_density(rng, 2, 2);
  const std::vector<Matrix> rs{r}, ss{s};
  CHECK(std::abs(cq_fidelity(one, rs, one, ss) - fidelity(r, s)) < 1e-14);

  const std::vector<double> half{0.5, 0.5};
  const std::vector<Matrix> same{r, s};
  CHECK(cq_fidelity(half, same, half, same) == doctest::Approx(1.0));

  const std::vector<double> p{0.3, 0.7}, q{0.6, 0.4};
  const std::vector<Matrix> rho{random_density(rng, 2, 2), random_density(rng, 2, 1)};
  const std::vector<Matrix> sig{random_density(rng, 2, 2), random_density(rng, 2, 2)};
  Matrix big_r = Matrix::Zero(4, 4), big_s = Matrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i) {
    big_r.block(2 * i, 2 * i, 2, 2) = p[i] * rho[i];
    big_s.block(2 * i, 2 * i, 2, 2) = q[i] * sig[i];
  }
  CHECK(std::abs(cq_fidelity(p, rho, q, sig) - fidelity(big_r, big_s)) < 1e-10);

  const std::vector<double> neg{-0.1, 1.1};
  CHECK_THROWS_AS(cq_fidelity(neg, rho, q, sig), DomainError);
}

TEST_CASE("purify") {
  const DensityMatrix p0(oracle::diag({1, 0}), SystemLayout::single("B", 2));
  const PureState a = purify(p0, "R");
  CHECK(a.layout().dim("R") == 1);
  CHECK(std::abs(a.vec()(0) - 1.0) < 1e-14);

  const DensityMatrix mixed(0.5 * Matrix::Identity(2, 2), SystemLayout::single("B", 2));
  const PureState b = purify(mixed, "R");
  CHECK(b.layout().dim("R") == 2);
  const std::vector<std::string> keep{"B"};
  CHECK(oracle::max_abs(partial_trace(b.density(), keep).mat() - mixed.mat()) < 1e-14);

  Rng rng(23);
  const DensityMatrix r3(random_density(rng, 3, 3), SystemLayout::single("B", 3));
  const PureState c = purify(r3, "R");
  CHECK(c.layout().dim("R") == 3);
  CHECK(oracle::max_abs(partial_trace(c.density(), keep).mat() - r3.mat()) <= 1e-10);

  const DensityMatrix r2(random_density(rng, 3, 2), SystemLayout::single("B", 3));
  CHECK(purify(r2, "R").layout().dim("R") == 2);
}

TEST_CASE("state invariants and random generation") {
  CHECK_THROWS_AS(DensityMatrix(oracle::diag({0.6, 0.6}), SystemLayout::single("B", 2)), NumericalError);
  CHECK_THROWS_AS(DensityMatrix(oracle::diag({1.2, -0.2}), SystemLayout::single("B", 2)), NumericalError);
  CHECK_THROWS_AS(DensityMatrix(oracle::diag({1, 0}), SystemLayout::single("B", 3)), LayoutError);
  CHECK_THROWS_AS(SystemLayout({{"A", 2}, {"A", 2}}), LayoutError);
  CHECK_THROWS_AS(check_dim_guard(5000), DomainError);

  const PureState s1 = haar_random_state(4, 99), s2 = haar_random_state(4, 99);
  CHECK(s1.vec() == s2.vec());
  CHECK(std::abs(s1.vec().norm() - 1.0) < 1e-12);
  CHECK_THROWS_AS(haar_random_density(2, 3, 1), DomainError);

  // Monte Carlo first moment: E <0|rho|0> = 1/d.
  const int samples = 10000;
  const std::size_t d = 3;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double x = haar_random_density(d, 2, derive_seed(42, k)).mat()(0, 0).real();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / samples;
  const double sd = std::sqrt((sum2 / samples - mean * mean) / samples);
  CHECK(std::abs(mean - 1.0 / d) <= 5.0 * sd);

  Rng rng(29);
  const auto ks = random_kraus(rng, 2, 3, 2);
  Matrix acc = Matrix::Zero(2, 2);
  for (const auto& k : ks) acc += k.adjoint() * k;
  CHECK(oracle::max_abs(acc - Matrix::Identity(2, 2)) < 1e-12);
}
