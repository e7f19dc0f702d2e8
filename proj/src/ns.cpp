#include "qcoh/ns.hpp"

#include <cmath>
#include <numbers>

#include "qcoh/coherence.hpp"
#include "qcoh/entropy.hpp"
#include "qcoh/sdp.hpp"

namespace qcoh {

double JointDistribution::total() const {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

std::vector<double> JointDistribution::marginal_x() const {
  std::vector<double> m(nx, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) m[x] += at(x, y);
  return m;
}

NSPair ns_pair(const Eigh& er, const Eigh& es) {
  const auto nx = static_cast<std::size_t>(er.values.size()), ny = static_cast<std::size_t>(es.values.size());
  if (er.vectors.rows() != es.vectors.rows()) throw LayoutError("ns_pair: dimension mismatch");
  auto cleaned = [](const RealVector& v) {
    const double tol = 1e-12 * std::max(1.0, v.maxCoeff());
    std::vector<double> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i) > tol ? v(i) : 0.0;
    return out;
  };
  const std::vector<double> r = cleaned(er.values), s = cleaned(es.values);
  const Matrix overlap = er.vectors.adjoint() * es.vectors;
  NSPair out{{nx, ny, std::vector<double>(nx * ny)}, {nx, ny, std::vector<double>(nx * ny)}};
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      const double o = std::norm(overlap(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)));
      out.P.w[x * ny + y] = r[x] * o;
      out.Q.w[x * ny + y] = s[y] * o;
    }
  return out;
}

NSPair ns_pair(const Matrix& rho, const Matrix& sigma) { return ns_pair(eigh(rho), eigh(sigma)); }

std::pair<double, double> classical_D_V(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw LayoutError("classical_D_V: length mismatch");
  double d = 0.0, second = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) {
      outside += p[i];
      continue;
    }
    const double l = std::log2(p[i] / q[i]);
    d += p[i] * l;
    second += p[i] * l * l;
  }
  if (outside > 1e-12) throw InfiniteDivergence("classical_D_V: supp(P) is not contained in supp(Q)");
  return {d, std::max(0.0, second - d * d)};
}

std::pair<double, double> classical_D_V(const JointDistribution& p, const JointDistribution& q) {
  return classical_D_V(p.w, q.w);
}

namespace {

PureState to_rab(const PureState& psi) {
  const auto& l = psi.layout();
  if (l.size() != 3 || !l.contains("R") || !l.contains("A") || !l.contains("B"))
    throw LayoutError("verify_reduction_connections: layout must consist of R, A and B");
  const std::vector<std::string> order{"R", "A", "B"};
  return {permute_systems(psi.vec(), l, order), SystemLayout({{"R", l.dim("R")}, {"A", l.dim("A")}, {"B", l.dim("B")}})};
}

}  // namespace

std::pair<DensityMatrix, DensityMatrix> dephased_marginals(const PureState& psi_rab) {
  const PureState psi = to_rab(psi_rab);
  const Matrix full = psi.vec() * psi.vec().adjoint();
  const Matrix deph = dephase(full, psi.layout(), "B");
  const std::vector<std::string> br{"B", "R"}, ab{"A", "B"}, keep_rb{"R", "B"};
  const Matrix rb = partial_trace(deph, psi.layout(), keep_rb);
  const SystemLayout rb_layout = psi.layout().keep(keep_rb);
  DensityMatrix sigma_br(permute_systems(rb, rb_layout, br), SystemLayout({{"B", psi.layout().dim("B")}, {"R", psi.layout().dim("R")}}));
  DensityMatrix rho_ab(partial_trace(full, psi.layout(), ab), psi.layout().keep(ab));
  return {sigma_br, rho_ab};
}

RelationsReport verify_reduction_connections(const PureState& psi_rab, const RelationsOptions& opt) {
  const auto [sigma_br, rho_ab] = dephased_marginals(psi_rab);
  const auto db = static_cast<Eigen::Index>(sigma_br.layout().dim("B"));
  const std::vector<std::string> r_only{"R"};
  const Matrix sigma_r = partial_trace(sigma_br.mat(), sigma_br.layout(), r_only);
  const Matrix one_sigma = kron(Matrix(Matrix::Identity(db, db)), sigma_r);
  const Matrix delta_rho = dephase(rho_ab.mat(), rho_ab.layout(), "B");

  RelationsReport rep;
  rep.eq2_lhs = rel_entropy(sigma_br.mat(), one_sigma);
  rep.eq2_rhs = -rel_entropy(rho_ab.mat(), delta_rho);
  rep.eq2_residual = std::abs(rep.eq2_lhs - rep.eq2_rhs);
  rep.eq3_lhs = rel_entropy_variance(sigma_br.mat(), one_sigma);
  rep.eq3_rhs = rel_entropy_variance(rho_ab.mat(), delta_rho);
  rep.eq3_residual = std::abs(rep.eq3_lhs - rep.eq3_rhs);

  // nonzero spectra of two marginals of a pure state coincide
  std::vector<double> a(static_cast<std::size_t>(sigma_r.rows())), b(static_cast<std::size_t>(rho_ab.dim()));
  const Eigh er = eigh(sigma_r), ea = eigh(rho_ab.mat());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = er.values(static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = ea.values(static_cast<Eigen::Index>(i));
  std::sort(a.rbegin(), a.rend());
  std::sort(b.rbegin(), b.rend());
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i)
    rep.schmidt_residual =
        std::max(rep.schmidt_residual, std::abs((i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0)));

  const NSPair left = ns_pair(sigma_br.mat(), one_sigma), right = ns_pair(rho_ab.mat(), delta_rho);
  for (double e : opt.eps_grid) {
    const DsResult l = ds_spectrum_detail(left.P.w, left.Q.w, e);
    const DsResult r = ds_spectrum_detail(right.P.w, right.Q.w, 1.0 - e);
    Eq1Point pt{e, l.value, -r.value, 0.0, !l.at_atom && !r.at_atom};
    pt.residual = std::abs(pt.lhs - pt.rhs);
    rep.eq1.push_back(pt);
  }

  if (opt.check_hmin) {
    HminDHCheck h{opt.eps, opt.delta};
    h.hmin_smooth = hmin_smooth(sigma_br, "B", "R", opt.eps);
    h.dh = dh(rho_ab.mat(), delta_rho, opt.eps * opt.eps - 2.0 * opt.delta).value_bits;
    h.correction = correction_c_assisted(theta(rho_ab.mat()).value, theta(delta_rho).value, opt.eps, opt.delta);
    h.holds = h.hmin_smooth >= h.dh - h.correction - 1e-9;
    rep.hmin = h;
  }
  return rep;
}

}  // namespace qcoh
