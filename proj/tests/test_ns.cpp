#include <doctest.h>

#include "oracles.hpp"
#include "qcoh/entropy.hpp"
#include "qcoh/ns.hpp"

using namespace qcoh;

namespace {

PureState random_rab(Rng& rng, std::size_t dr, std::size_t da, std::size_t db) {
  return {random_pure(rng, dr * da * db), SystemLayout({{"R", dr}, {"A", da}, {"B", db}})};
}

double shannon_bits(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log2(x);
  return h;
}

}  // namespace

TEST_CASE("Nussbaum-Szkola pair of commuting states") {
  const Matrix rho = oracle::diag({0.5, 0.3, 0.2}), sigma = oracle::diag({0.1, 0.6, 0.3});
  const Eigh ident{RealVector::Zero(3), Matrix::Identity(3, 3)};
  Eigh er = ident, es = ident;
  er.values << 0.5, 0.3, 0.2;
  es.values << 0.1, 0.6, 0.3;
  const NSPair ns = ns_pair(er, es);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y) {
      CHECK(ns.P.at(x, y) == doctest::Approx(x == y ? rho(x, x).real() : 0.0));
      CHECK(ns.Q.at(x, y) == doctest::Approx(x == y ? sigma(x, x).real() : 0.0));
    }
}

TEST_CASE("Nussbaum-Szkola pair of |+> against the maximally mixed state") {
  const Matrix plus = oracle::ket_bra(oracle::plus(), oracle::plus());
  const Eigh er = eigh(plus);
  const Eigh es{RealVector::Constant(2, 0.5), Matrix::Identity(2, 2)};
  const NSPair ns = ns_pair(er, es);
  // er is ascending, so x = 1 is |+>
  CHECK(ns.P.at(1, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ns.P.at(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(ns.P.at(0, 0)) < 1e-15);
  CHECK(std::abs(ns.P.at(0, 1)) < 1e-15);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) CHECK(ns.Q.at(x, y) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("NS distributions reproduce D and V") {
  Rng rng(21);
  for (int k = 0; k < 100; ++k) {
    const std::size_t d = 2 + k % 3;
    const Matrix rho = random_density(rng, d, d), sigma = random_density(rng, d, d);
    const NSPair ns = ns_pair(rho, sigma);
    const auto [D, V] = classical_D_V(ns.P, ns.Q);
    CHECK(std::abs(D - rel_entropy(rho, sigma)) <= 1e-8);
    CHECK(std::abs(V - rel_entropy_variance(rho, sigma)) <= 1e-8);
    const auto m = ns.P.marginal_x();
    const Eigh e = eigh(rho);
    for (std::size_t x = 0; x < d; ++x) CHECK(std::abs(m[x] - e.values(static_cast<Eigen::Index>(x))) < 1e-12);
    CHECK(std::abs(ns.Q.total() - 1.0) < 1e-10);
  }
}

TEST_CASE("NS identities do not depend on the basis inside degenerate eigenspaces") {
  Rng rng(22);
  const Matrix rho = random_density(rng, 3, 3);
  const Matrix sigma = oracle::diag({0.5, 0.25, 0.25});
  Eigh es{RealVector(3), Matrix::Identity(3, 3)};
  es.values << 0.5, 0.25, 0.25;
  const auto base = classical_D_V(ns_pair(eigh(rho), es).P, ns_pair(eigh(rho), es).Q);
  for (int k = 0; k < 5; ++k) {
    Eigh rotated = es;
    rotated.vectors.block(0, 1, 3, 2) = es.vectors.block(0, 1, 3, 2) * random_unitary(rng, 2);
    const NSPair ns = ns_pair(eigh(rho), rotated);
    const auto dv = classical_D_V(ns.P, ns.Q);
    CHECK(std::abs(dv.first - base.first) < 1e-12);
    CHECK(std::abs(dv.second - base.second) < 1e-12);
  }
  CHECK(std::abs(base.first - rel_entropy(rho, sigma)) < 1e-10);
}

TEST_CASE("classical D and V") {
  const std::vector<double> p{0.2, 0.3, 0.5};
  const auto same = classical_D_V(p, p);
  CHECK(std::abs(same.first) < 1e-15);
  CHECK(std::abs(same.second) < 1e-15);
  const auto two = classical_D_V(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5});
  CHECK(two.first == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(two.second) < 1e-15);

  Rng rng(23);
  for (int k = 0; k < 10; ++k) {
    const auto a = oracle::random_simplex(rng, 4), b = oracle::random_simplex(rng, 4);
    const auto dv = classical_D_V(a, b);
    CHECK(std::abs(dv.first - rel_entropy(oracle::diag_of(a), oracle::diag_of(b))) < 1e-10);
    CHECK(std::abs(dv.second - rel_entropy_variance(oracle::diag_of(a), oracle::diag_of(b))) < 1e-10);
  }
  CHECK_THROWS_AS(classical_D_V(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0}), InfiniteDivergence);
}

TEST_CASE("relations on a product purification") {
  Rng rng(24);
  const Vector r = random_pure(rng, 2), ab = random_pure(rng, 4);
  const PureState psi(kron(r, ab), SystemLayout({{"R", 2}, {"A", 2}, {"B", 2}}));
  RelationsOptions opt;
  opt.check_hmin = false;
  const RelationsReport rep = verify_reduction_connections(psi, opt);

  // psi_B dephased: Shannon entropy of the B marginal's diagonal
  const Matrix rho_ab = ab * ab.adjoint();
  std::vector<double> pb(2, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) pb[b] += rho_ab(a * 2 + b, a * 2 + b).real();
  const double expect = -shannon_bits(pb);
  CHECK(std::abs(rep.eq2_lhs - expect) < 1e-9);
  CHECK(std::abs(rep.eq2_rhs - expect) < 1e-9);
}

TEST_CASE("relations on random tripartite pure states") {
  Rng rng(25);
  for (int k = 0; k < 10; ++k) {
    const PureState psi = random_rab(rng, 2, 2, 2);
    RelationsOptions opt;
    opt.check_hmin = k < 3;
    const RelationsReport rep = verify_reduction_connections(psi, opt);
    CHECK(rep.eq2_residual <= 1e-8);
    CHECK(rep.eq3_residual <= 1e-8);
    CHECK(rep.schmidt_residual <= 1e-10);
    for (const auto& pt : rep.eq1)
      if (pt.continuity) CHECK(pt.residual <= 1e-8);
    if (rep.hmin) CHECK(rep.hmin->holds);
  }
}

TEST_CASE("relations accept any factor order") {
  Rng rng(26);
  const PureState rab = random_rab(rng, 2, 2, 2);
  const std::vector<std::string> order{"B", "R", "A"};
  const PureState bra(permute_systems(rab.vec(), rab.layout(), order), SystemLayout({{"B", 2}, {"R", 2}, {"A", 2}}));
  RelationsOptions opt;
  opt.check_hmin = false;
  CHECK(std::abs(verify_reduction_connections(rab, opt).eq2_lhs - verify_reduction_connections(bra, opt).eq2_lhs) <
        1e-12);
  const PureState bad(random_pure(rng, 8), SystemLayout({{"X", 2}, {"A", 2}, {"B", 2}}));
  CHECK_THROWS_AS(verify_reduction_connections(bad, opt), LayoutError);
}
