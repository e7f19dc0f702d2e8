#include "qcoh/validation.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "qcoh/asymptotics.hpp"
#include "qcoh/coherence.hpp"
#include "qcoh/entropy.hpp"
#include "qcoh/linalg.hpp"
#include "qcoh/ns.hpp"
#include "qcoh/protocols.hpp"
#include "qcoh/sdp.hpp"

namespace qcoh {

namespace {

constexpr double kCorruptBias = 1e-3;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Uniform in [lo, hi) from the top 53 bits; identical across standard libraries.
double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng() % (hi - lo + 1); }

Rng stream(const SelftestOptions& o, std::uint64_t id) { return Rng(derive_seed(o.seed, id)); }

std::size_t scaled(const SelftestOptions& o, std::size_t full, std::size_t quick) { return o.quick ? quick : full; }

const SystemLayout& layout_ab() {
  static const SystemLayout l({{"A", 2}, {"B", 2}});
  return l;
}

// Every total map {0..c-1} -> {0..l-1}.
std::vector<HashFunction> all_tables(std::size_t c, std::size_t l) {
  std::vector<HashFunction> out;
  std::vector<std::size_t> t(c, 0);
  while (true) {
    out.emplace_back(t, l);
    std::size_t i = c;
    while (i > 0 && ++t[i - 1] == l) t[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

Matrix plus_projector() { return Matrix::Constant(2, 2, 0.5); }

}  // namespace

CheckResult criterion_np_sdp(const SelftestOptions& o) {
  CheckResult r{1, "NP-SDP agreement", true, ""};
  Rng rng = stream(o, 1);
  const std::size_t count = scaled(o, 200, 40);
  double worst = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t d = 2 + k % 4;
    const Matrix rho = random_density(rng, d, pick(rng, 1, d)), sigma = random_density(rng, d, d);
    const double eps = uniform(rng, 0.05, 0.95);
    const double np = dh(rho, sigma, eps).value_bits + (o.corrupt ? kCorruptBias : 0.0);
    worst = std::max(worst, std::abs(np - dh_sdp(rho, sigma, eps)));
  }
  r.pass = worst <= 1e-6;
  r.detail = fmt("%zu triples, max |NP - SDP| = %.3e (tol 1e-6)", count, worst);
  return r;
}

CheckResult criterion_closed_forms(const SelftestOptions& o) {
  CheckResult r{2, "closed forms", true, ""};
  double worst_plus = 0.0, worst_same = 0.0;
  const Matrix half = 0.5 * Matrix::Identity(2, 2);
  for (int i = 1; i <= 9; ++i) {
    const double eps = 0.1 * i;
    const double v = dh(plus_projector(), half, eps).value_bits + (o.corrupt ? kCorruptBias : 0.0);
    worst_plus = std::max(worst_plus, std::abs(v - (1.0 - std::log2(1.0 - eps))));
  }
  Rng rng = stream(o, 2);
  for (int k = 0; k < 10; ++k) {
    const std::size_t d = 2 + k % 3;
    const Matrix rho = random_density(rng, d, pick(rng, 1, d));
    const double eps = uniform(rng, 0.05, 0.95);
    worst_same = std::max(worst_same, std::abs(dh(rho, rho, eps).value_bits + std::log2(1.0 - eps)));
  }
  r.pass = worst_plus <= 1e-9 && worst_same <= 1e-9;
  r.detail = fmt("|+> vs I/2 max err %.3e, rho vs rho max err %.3e (tol 1e-9)", worst_plus, worst_same);
  return r;
}

CheckResult criterion_distill_extract(const SelftestOptions& o) {
  CheckResult r{3, "distillation <-> extraction", true, ""};
  Rng rng = stream(o, 3);
  const std::size_t count = scaled(o, 50, 8);
  std::size_t tables = 0, failures = 0, converse = 0;
  double worst_gap = -kInf, worst_conv = -kInf;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t d = 2 + k % 2;
    const DensityMatrix rho(random_density(rng, d, pick(rng, 1, d)), SystemLayout::single("B", d));
    for (std::size_t l = 1; l <= d; ++l)
      for (const HashFunction& f : all_tables(d, l)) {
        ++tables;
        const double achieved = run_extraction(rho, identity_channel(rho.layout()), f).d_sec;
        const DistillerReport rep = build_distiller_from_extraction(rho, f, achieved);
        bool certified = true;
        for (const auto& c : rep.certificates) certified = certified && c.verdict;
        worst_gap = std::max(worst_gap, rep.error_P - achieved);
        if (!certified || rep.error_P > achieved + 1e-9) ++failures;

        // converse: the distiller used as an extraction channel with the identity hash
        const Vector psi = mcs(l).vec();
        const double err = purified_distance_to_pure(rep.channel.apply(rho.mat()), psi);
        const double induced = run_extraction(rho, rep.channel, HashFunction::identity(l)).d_sec;
        ++converse;
        worst_conv = std::max(worst_conv, induced - err);
        if (induced > err + 1e-9) ++failures;
      }
    // a random candidate distiller B -> L
    const KrausChannel cand(random_kraus(rng, d, 2, 2 * d), rho.layout(), SystemLayout::single("L", 2));
    const double err = purified_distance_to_pure(cand.apply(rho.mat()), mcs(2).vec());
    const double induced = run_extraction(rho, cand, HashFunction::identity(2)).d_sec;
    ++converse;
    worst_conv = std::max(worst_conv, induced - err);
    if (induced > err + 1e-9) ++failures;
  }
  r.pass = failures == 0;
  r.detail = fmt("%zu states, %zu tables, %zu converse checks; max(error - d_sec) = %.3e, "
                 "max(d_sec - error) = %.3e, failures %zu",
                 count, tables, converse, worst_gap, worst_conv, failures);
  return r;
}

CheckResult criterion_assisted(const SelftestOptions& o) {
  CheckResult r{4, "assisted distiller (QIP)", true, ""};
  Rng rng = stream(o, 4);
  const std::size_t count = scaled(o, 20, 5);
  std::size_t failures = 0;
  double worst = -kInf;
  const KrausChannel id = identity_channel(layout_ab());
  for (std::size_t k = 0; k < count; ++k) {
    const DensityMatrix rho(random_density(rng, 4, pick(rng, 1, 4)), layout_ab());
    for (const HashFunction& f : all_tables(2, 2)) {
      const double achieved = run_assisted_extraction(rho, id, f).d_sec;
      const DistillerReport rep = build_assisted_distiller(rho, f, achieved);
      bool certified = !rep.certificates.empty() && rep.certificates[0].class_name == "QIP";
      for (const auto& c : rep.certificates) certified = certified && c.verdict;
      worst = std::max(worst, rep.error_P - achieved);
      if (!certified || rep.error_P > achieved + 1e-9) ++failures;
    }
  }
  r.pass = failures == 0;
  r.detail = fmt("%zu states x 4 tables, max(error - d_sec) = %.3e, failures %zu", count, worst, failures);
  return r;
}

CheckResult criterion_relations(const SelftestOptions& o) {
  CheckResult r{5, "dephased tripartite relations", true, ""};
  Rng rng = stream(o, 5);
  const std::size_t count = scaled(o, 100, 20), with_hmin = scaled(o, 100, 3);
  const SystemLayout rab({{"R", 2}, {"A", 2}, {"B", 2}});
  double e1 = 0.0, e2 = 0.0, e3 = 0.0;
  std::size_t hmin_fail = 0, hmin_runs = 0, skipped_eq1 = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const PureState psi(random_pure(rng, 8), rab);
    RelationsOptions opt;
    opt.check_hmin = k < with_hmin;
    const RelationsReport rep = verify_reduction_connections(psi, opt);
    e2 = std::max(e2, rep.eq2_residual);
    e3 = std::max(e3, rep.eq3_residual);
    for (const auto& p : rep.eq1) {
      if (p.continuity)
        e1 = std::max(e1, p.residual);
      else
        ++skipped_eq1;
    }
    if (rep.hmin) {
      ++hmin_runs;
      if (!rep.hmin->holds) ++hmin_fail;
    }
  }
  r.pass = e1 <= 1e-8 && e2 <= 1e-8 && e3 <= 1e-8 && hmin_fail == 0;
  r.detail = fmt("%zu states; residuals eq1 %.3e (%zu atoms skipped), eq2 %.3e, eq3 %.3e; "
                 "Hmin-DH at (0.6, 0.02) holds %zu/%zu",
                 count, e1, skipped_eq1, e2, e3, hmin_runs - hmin_fail, hmin_runs);
  return r;
}

CheckResult criterion_ns(const SelftestOptions& o) {
  CheckResult r{6, "Nussbaum-Szkola D and V", true, ""};
  Rng rng = stream(o, 6);
  const std::size_t count = scaled(o, 100, 30);
  double wd = 0.0, wv = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t d = 2 + k % 3;
    const Matrix rho = random_density(rng, d, pick(rng, 1, d)), sigma = random_density(rng, d, d);
    const NSPair ns = ns_pair(rho, sigma);
    const auto [D, V] = classical_D_V(ns.P, ns.Q);
    wd = std::max(wd, std::abs(D - rel_entropy(rho, sigma)));
    wv = std::max(wv, std::abs(V - rel_entropy_variance(rho, sigma)));
  }
  r.pass = wd <= 1e-8 && wv <= 1e-8;
  r.detail = fmt("%zu pairs, max |dD| = %.3e, max |dV| = %.3e (tol 1e-8)", count, wd, wv);
  return r;
}

CheckResult criterion_second_order(const SelftestOptions&) {
  CheckResult r{7, "second-order trend", true, ""};
  Matrix rho(2, 2);
  rho << 0.7, cplx(0.3, 0.1), cplx(0.3, -0.1), 0.3;
  const Matrix sigma = dephase_all(rho);
  const double D = rel_entropy(rho, sigma), V = rel_entropy_variance(rho, sigma);
  std::vector<double> ns, rem, anti, lo, hi;
  for (std::size_t n = 2; n <= 10; ++n) {
    const double nd = static_cast<double>(n);
    ns.push_back(nd);
    rem.push_back(iid_dh(rho, sigma, n, 0.5) - nd * D);
    const double h = iid_dh(rho, sigma, n, 0.75) - nd * D, l = iid_dh(rho, sigma, n, 0.25) - nd * D;
    hi.push_back(h);
    lo.push_back(l);
    anti.push_back(0.5 * (h - l));
  }
  const LogRemainderFit fit = fit_log_remainder(ns, rem);
  bool envelope = true;
  for (std::size_t i = 0; i < ns.size(); ++i)
    envelope = envelope && std::abs(rem[i]) <= fit.kappa * std::log2(ns[i]) + fit.kappa0 + 1e-12;
  const double target = std::sqrt(V) * inv_normal_cdf(0.75);
  const double ratio = fit_sqrt_coefficient(ns, anti) / target;
  const double naive_lo = fit_sqrt_coefficient(ns, lo) / -target, naive_hi = fit_sqrt_coefficient(ns, hi) / target;
  r.pass = envelope && std::abs(ratio - 1.0) <= 0.25;
  r.detail = fmt("kappa = %.4f, kappa0 = %.4f; sqrt(n) coefficient / (sqrt(V) Phi^-1(0.75)) = %.4f "
                 "(antisymmetric fit, tol 25%%); per-eps fits: %.4f at 0.25, %.4f at 0.75",
                 fit.kappa, fit.kappa0, ratio, naive_lo, naive_hi);
  return r;
}

CheckResult criterion_hashing(const SelftestOptions& o) {
  CheckResult r{8, "hashing-bound sandwich", true, ""};
  Rng rng = stream(o, 8);
  const std::size_t count = scaled(o, 10, 3);
  const SystemLayout b2 = SystemLayout::single("B", 2);
  std::size_t failures = 0, runs = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const DensityMatrix rho(random_density(rng, 2, pick(rng, 1, 2)), b2);
    const DensityMatrix dephased = dephase(purify(rho, "R").density(), "B");
    for (double eps : {0.3, 0.5}) {
      const double eta = eps / 2.0;
      const double ell = extractable_randomness_exhaustive(rho, identity_channel(b2), eps).log_L;
      const double upper = hmin_smooth(dephased, "B", "R", eps);
      const double lower = hmin_smooth(dephased, "B", "R", eps - eta) + 4.0 * std::log2(eta) - 3.0;
      ++runs;
      if (ell > std::ceil(upper) + 1e-9 || ell < std::floor(lower) - 1e-9) ++failures;
    }
  }
  r.pass = failures == 0;
  r.detail = fmt("%zu qubit states x eps in {0.3, 0.5}: %zu/%zu within [floor(lower), ceil(upper)]", count,
                 runs - failures, runs);
  return r;
}

CheckResult criterion_incoherent_bound(const SelftestOptions& o) {
  CheckResult r{9, "incoherent overlap bound", true, ""};
  Rng rng = stream(o, 9);
  std::size_t violations = 0;
  double worst = -kInf;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t d = 2 + static_cast<std::size_t>(k) % 5;
    RealVector p(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = -std::log(1.0 - uniform(rng, 0.0, 1.0));
    p /= p.sum();
    const Matrix delta = p.cast<cplx>().asDiagonal();
    const Vector psi = mcs(d).vec();
    const double excess = psi.dot(delta * psi).real() - 1.0 / static_cast<double>(d);
    worst = std::max(worst, excess);
    if (excess > 1e-12) ++violations;
  }
  r.pass = violations == 0;
  r.detail = fmt("1000 states, d in 2..6, max(overlap - 1/d) = %.3e, violations %zu", worst, violations);
  return r;
}

CheckResult criterion_strong_converse(const SelftestOptions& o) {
  CheckResult r{10, "strong converse", true, ""};
  Rng rng = stream(o, 10);
  const DensityMatrix rho(random_density(rng, 2, 2), SystemLayout::single("B", 2));
  const Matrix sigma = dephase_all(rho.mat());
  const double C = rel_entropy(rho.mat(), sigma), V = rel_entropy_variance(rho.mat(), sigma);
  const std::size_t nstar = strong_converse_threshold(C, V, C + 0.1);
  const std::size_t step = std::max<std::size_t>(1, nstar / 20);
  std::vector<std::size_t> grid;
  for (std::size_t n = step; n <= 2 * nstar + step; n += step) grid.push_back(n);
  const auto curve = strong_converse_curve(rho, C + 0.1, grid);
  bool increasing = true;
  for (std::size_t i = 1; i < curve.size(); ++i)
    increasing = increasing && curve[i].epsilon_lower_bound > curve[i - 1].epsilon_lower_bound;
  std::size_t first = 0;
  for (const auto& p : curve)
    if (p.epsilon_lower_bound >= 0.99) {
      first = p.n;
      break;
    }
  const double off = std::abs(static_cast<double>(first) - static_cast<double>(nstar));
  r.pass = increasing && first != 0 && off <= static_cast<double>(step);
  r.detail = fmt("C = %.4f, V = %.4f, R = C + 0.1; predicted n* = %zu, first grid n with bound >= 0.99 is %zu "
                 "(step %zu), strictly increasing: %s",
                 C, V, nstar, first, step, increasing ? "yes" : "no");
  return r;
}

CheckResult criterion_framework_order(const SelftestOptions& o) {
  CheckResult r{11, "alternative vs original framework", true, ""};
  Rng rng = stream(o, 11);
  const auto fam = two_qubit_family();
  const std::size_t count = scaled(o, 3, 1);
  std::string rates;
  for (std::size_t k = 0; k < count; ++k) {
    const DensityMatrix rho(random_density(rng, 4, 1 + k % 4), layout_ab());
    for (double eps : {0.1, 0.3}) {
      double best_orig = 0.0, best_alt = 0.0;
      for (const auto& nc : fam) {
        best_orig = std::max(best_orig, assisted_extractable_randomness(rho, nc.channel, eps).log_L);
        best_alt = std::max(best_alt, alternative_extractable_randomness(rho, trace_out_alice(nc.channel), eps).log_L);
      }
      if (best_alt > best_orig + 1e-12) r.pass = false;
      rates += fmt("%s(%.1f: %.3f <= %.3f)", rates.empty() ? "" : " ", eps, best_alt, best_orig);
    }
  }
  r.detail = fmt("%zu states, 10 channels; best alt <= best orig: ", count) + rates;
  return r;
}

std::vector<CheckResult> run_selftest(const SelftestOptions& o) {
  using Fn = CheckResult (*)(const SelftestOptions&);
  const Fn criteria[] = {criterion_np_sdp,         criterion_closed_forms,     criterion_distill_extract,
                         criterion_assisted,       criterion_relations,        criterion_ns,
                         criterion_second_order,   criterion_hashing,          criterion_incoherent_bound,
                         criterion_strong_converse, criterion_framework_order};
  std::vector<CheckResult> out;
  for (Fn f : criteria) out.push_back(f(o));

  Rng rng = stream(o, 100);
  {
    CheckResult c{0, "fidelity SDP vs closed form", true, ""};
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      const Matrix a = random_density(rng, 3, 3), b = random_density(rng, 3, 2);
      worst = std::max(worst, std::abs(fidelity_sdp(a, b) - fidelity(a, b)));
    }
    c.pass = worst <= 1e-6;
    c.detail = fmt("max |F_sdp - F| = %.3e", worst);
    out.push_back(c);
  }
  {
    CheckResult c{0, "Schur-Weyl iid D_H vs tensor power", true, ""};
    const Matrix rho = random_density(rng, 2, 2), sigma = dephase_all(rho);
    Matrix rt = rho, st = sigma;
    for (int n = 2; n <= 5; ++n) {
      rt = kron(rt, rho);
      st = kron(st, sigma);
    }
    const double diff = std::abs(iid_dh(rho, sigma, 5, 0.3) - dh(rt, st, 0.3).value_bits);
    c.pass = diff <= 1e-9;
    c.detail = fmt("n = 5, |diff| = %.3e", diff);
    out.push_back(c);
  }
  {
    CheckResult c{0, "dephasing is DIIO", true, ""};
    const KrausChannel deph = dephasing_channel(SystemLayout::single("B", 3));
    c.pass = check_DIIO(deph).verdict && !check_DIO(unitary_channel(random_unitary(rng, 3), SystemLayout::single("B", 3))).verdict;
    c.detail = "Delta_3 certified DIIO; a random unitary is not DIO";
    out.push_back(c);
  }
  {
    CheckResult c{0, "d_sec ascent vs SDP", true, ""};
    const DensityMatrix rho(random_density(rng, 4, 2), SystemLayout({{"X", 2}, {"R", 2}}));
    DSecOptions opt;
    opt.sdp_cross_check = true;
    const DSecResult a = d_sec(rho, "X"), b = d_sec(rho, "X", opt);
    c.pass = std::abs(a.value - b.value) <= 1e-6;
    c.detail = fmt("|ascent - cross-checked| = %.3e", std::abs(a.value - b.value));
    out.push_back(c);
  }
  return out;
}

std::string format_report(const SelftestOptions& o, const std::vector<CheckResult>& results) {
  std::string s = fmt("qcoh selftest v1 seed=%llu mode=%s%s\n", static_cast<unsigned long long>(o.seed),
                      o.quick ? "quick" : "full", o.corrupt ? " corrupt" : "");
  std::size_t passed = 0;
  for (const auto& r : results) {
    passed += r.pass ? 1 : 0;
    const std::string tag = r.id > 0 ? fmt("C%02d", r.id) : std::string("INV");
    s += fmt("[%s] %s %s: ", r.pass ? "PASS" : "FAIL", tag.c_str(), r.name.c_str()) + r.detail + "\n";
  }
  s += fmt("%zu/%zu passed\n", passed, results.size());
  return s;
}

std::string selftest_report(const SelftestOptions& o) { return format_report(o, run_selftest(o)); }

bool all_pass(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

CheckResult criterion_determinism(const SelftestOptions& o) {
  SelftestOptions q = o;
  q.quick = true;
  const std::string a = selftest_report(q), b = selftest_report(q);
  CheckResult r{12, "determinism", a == b, ""};
  r.detail = fmt("two quick selftest reports (%zu bytes) %s", a.size(), a == b ? "byte-identical" : "differ");
  return r;
}

}  // namespace qcoh
