#include <doctest.h>

#include "oracles.hpp"
#include "qcoh/coherence.hpp"

using namespace qcoh;

namespace {

Matrix hadamard() {
  Matrix h(2, 2);
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

KrausChannel replacer_to_uniform(std::size_t d) {
  std::vector<Matrix> ks;
  const auto n = static_cast<Eigen::Index>(d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      Matrix k = Matrix::Zero(n, n);
      k(i, j) = 1.0 / std::sqrt(static_cast<double>(d));
      ks.push_back(k);
    }
  const auto l = SystemLayout::single("B", d);
  return {ks, l, l};
}

KrausChannel random_channel(Rng& rng, std::size_t din, std::size_t dout, std::size_t count) {
  return {random_kraus(rng, din, dout, count), SystemLayout::single("B", din), SystemLayout::single("C", dout), 1e-9};
}

std::vector<std::size_t> random_perm(Rng& rng, std::size_t d) {
  std::vector<std::size_t> p(d);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace

TEST_CASE("dephasing") {
  const Matrix d = oracle::diag({0.2, 0.8});
  CHECK(oracle::max_abs(dephase_all(d) - d) == 0.0);
  const Matrix plus = oracle::ket_bra(oracle::plus(), oracle::plus());
  CHECK(oracle::max_abs(dephase_all(plus) - 0.5 * Matrix::Identity(2, 2)) < 1e-15);

  // Delta_B on a Bell pair zeroes every entry whose B indices differ
  const SystemLayout ab({{"A", 2}, {"B", 2}});
  const Matrix bell = oracle::ket_bra(oracle::bell(), oracle::bell());
  Matrix expect = bell;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i % 2 != j % 2) expect(i, j) = 0.0;
  CHECK(oracle::max_abs(dephase(bell, ab, "B") - expect) < 1e-15);
  CHECK(oracle::max_abs(dephase(bell, ab, "B") - oracle::diag({0.5, 0, 0, 0.5})) < 1e-15);

  Rng rng(11);
  const SystemLayout abc({{"A", 2}, {"B", 3}, {"C", 2}});
  const DensityMatrix rho(random_density(rng, 12, 12), abc);
  const DensityMatrix once = dephase(rho, "B");
  CHECK(oracle::max_abs(dephase(once, "B").mat() - once.mat()) < 1e-15);
  CHECK(std::abs(once.mat().trace().real() - 1.0) < 1e-12);
  CHECK_THROWS_AS(dephase(rho, "Q"), LayoutError);
}

TEST_CASE("maximally coherent state") {
  CHECK(std::abs(mcs(1).vec()(0) - 1.0) < 1e-15);
  CHECK((mcs(2).vec() - oracle::plus()).norm() < 1e-15);
  for (std::size_t d = 1; d <= 6; ++d) {
    const Vector psi = mcs(d).vec();
    const Matrix p = psi * psi.adjoint();
    CHECK(std::abs(psi.dot(dephase_all(p) * psi).real() - 1.0 / static_cast<double>(d)) < 1e-14);
  }
}

TEST_CASE("incoherent Kraus operators") {
  Matrix perm = Matrix::Zero(3, 3);
  perm(1, 0) = perm(2, 1) = perm(0, 2) = 1.0;
  CHECK(is_incoherent_kraus_op(perm));
  CHECK_FALSE(is_incoherent_kraus_op(hadamard()));
  Matrix zero_col = Matrix::Zero(2, 2);
  zero_col(0, 0) = 0.5;
  CHECK(is_incoherent_kraus_op(zero_col));
}

TEST_CASE("MIO, DIO, IO and DIIO certificates") {
  const auto q = SystemLayout::single("B", 2);
  const KrausChannel delta = dephasing_channel(q);
  const KrausChannel had = unitary_channel(hadamard(), q);
  CHECK(check_MIO(delta).verdict);
  CHECK_FALSE(check_MIO(had).verdict);
  CHECK(check_DIO(delta).verdict);
  CHECK(check_DIO(replacer_to_uniform(3)).verdict);
  CHECK(check_MIO(replacer_to_uniform(3)).verdict);

  Rng rng(12);
  CHECK_FALSE(check_DIO(random_channel(rng, 2, 2, 2)).verdict);

  const KrausChannel id = identity_channel(q);
  CHECK(check_IO_given_kraus(id).verdict);
  CHECK(check_IO_given_kraus(id).given_decomposition);
  CHECK(check_DIIO(id).verdict);
  CHECK_FALSE(check_DIIO(had).verdict);
  CHECK_FALSE(check_IO_given_kraus(had).verdict);
}

TEST_CASE("class inclusions hold on certificates") {
  Rng rng(13);
  std::vector<KrausChannel> family;
  for (std::size_t d = 2; d <= 4; ++d) {
    std::uniform_real_distribution<double> ph(0.0, 6.28);
    std::vector<double> phases(d);
    for (auto& p : phases) p = ph(rng);
    family.push_back(incoherent_unitary(random_perm(rng, d), phases));
    family.push_back(dephasing_channel(SystemLayout::single("B", d)));
    family.push_back(replacer_to_uniform(d));
    family.push_back(random_channel(rng, d, d, 2));
    family.push_back(compose(dephasing_channel(SystemLayout::single("B", d)), family[family.size() - 4]));
  }
  for (const auto& ch : family) {
    const bool diio = check_DIIO(ch).verdict, dio = check_DIO(ch).verdict, io = check_IO_given_kraus(ch).verdict;
    const bool mio = check_MIO(ch).verdict;
    if (diio) CHECK((dio && io));
    if (dio || io) CHECK(mio);
  }
}

TEST_CASE("Choi matrix") {
  Rng rng(14);
  const KrausChannel ch = random_channel(rng, 3, 2, 3);
  const Matrix j = choi(ch);
  CHECK(eigh(j).values.minCoeff() > -1e-9);
  const std::vector<std::string> in{"I"};
  const Matrix red = partial_trace(j, SystemLayout({{"I", 3}, {"O", 2}}), in);
  CHECK(oracle::max_abs(red - Matrix::Identity(3, 3)) < 1e-9);
}

TEST_CASE("quantum-incoherent preservation") {
  const SystemLayout ab({{"A", 2}, {"B", 2}});
  CHECK(check_QIP(partial_dephasing_channel(ab, "B"), "B", "B").verdict);
  Matrix swap = Matrix::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1.0;
  CHECK_FALSE(check_QIP(unitary_channel(swap, ab), "B", "B").verdict);
  // any unitary on A alone preserves QI states
  Rng rng(15);
  CHECK(check_QIP(unitary_channel(kron(random_unitary(rng, 2), Matrix(Matrix::Identity(2, 2))), ab), "B", "B").verdict);
}

TEST_CASE("separable incoherent witnesses") {
  const Matrix i2 = Matrix::Identity(2, 2);
  CHECK(check_SI_kraus({{{i2, i2}}}).verdict);
  CHECK(check_SQI_kraus({{{i2, i2}}}).verdict);
  CHECK_FALSE(check_SI_kraus({{{i2, hadamard()}}}).verdict);
  CHECK_FALSE(check_SQI_kraus({{{i2, hadamard()}}}).verdict);
  CHECK(check_SQI_kraus({{{hadamard(), i2}}}).verdict);
  CHECK_FALSE(check_SI_kraus({{{hadamard(), i2}}}).verdict);
  CHECK_FALSE(check_SI_kraus({{{0.5 * i2, i2}}}).verdict);
  CHECK_THROWS_AS(check_SI_kraus({}), WitnessError);

  // {A_i (x) K_l B_i} stays separable incoherent when every factor is incoherent
  Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2), x = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  x(0, 1) = x(1, 0) = 1.0;
  const ProductWitness lambda{{{p0, i2}, {p1, x}}};
  REQUIRE(check_SI_kraus(lambda).verdict);
  const std::vector<Matrix> gamma{p0, p1};
  ProductWitness composite;
  for (const auto& [a, b] : lambda.terms)
    for (const auto& k : gamma) composite.terms.emplace_back(a, k * b);
  CHECK(check_SI_kraus(composite).verdict);
}

TEST_CASE("incoherent unitaries") {
  const KrausChannel id = incoherent_unitary({0, 1}, {0.0, 0.0});
  CHECK(oracle::max_abs(id.kraus()[0] - Matrix::Identity(2, 2)) == 0.0);
  const KrausChannel x = incoherent_unitary({1, 0}, {0.0, 0.0});
  Matrix pauli_x = Matrix::Zero(2, 2);
  pauli_x(0, 1) = pauli_x(1, 0) = 1.0;
  CHECK(oracle::max_abs(x.kraus()[0] - pauli_x) == 0.0);

  Rng rng(16);
  std::uniform_real_distribution<double> ph(-3.0, 3.0);
  const KrausChannel u = incoherent_unitary(random_perm(rng, 4), {ph(rng), ph(rng), ph(rng), ph(rng)});
  const Matrix& m = u.kraus()[0];
  CHECK(oracle::max_abs(m.adjoint() * m - Matrix::Identity(4, 4)) <= 1e-12);
  CHECK(is_incoherent_kraus_op(m));
  CHECK_THROWS_AS(incoherent_unitary({0, 0}, {0.0, 0.0}), DomainError);
}

TEST_CASE("incoherent states have bounded overlap with the maximally coherent state") {
  Rng rng(17);
  for (int k = 0; k < 100; ++k)
    for (std::size_t d = 2; d <= 6; ++d) {
      const Matrix sigma = oracle::diag_of(oracle::random_simplex(rng, d));
      const Vector psi = mcs(d).vec();
      CHECK(psi.dot(sigma * psi).real() <= 1.0 / static_cast<double>(d) + 1e-12);
    }
}

TEST_CASE("Kraus channel validation") {
  const auto q = SystemLayout::single("B", 2);
  CHECK_THROWS_AS(KrausChannel({Matrix::Identity(2, 2) * 0.5}, q, q), NumericalError);
  CHECK_THROWS_AS(KrausChannel({Matrix::Identity(3, 3)}, q, q), LayoutError);
}
