#include "qcoh/coherence.hpp"

#include <sstream>

namespace qcoh {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double max_offdiag(const Matrix& m) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j) r = std::max(r, std::abs(m(i, j)));
  return r;
}

ClassCertificate verdict(std::string name, std::vector<std::pair<std::string, double>> res, double tol) {
  ClassCertificate c{std::move(name), true, std::move(res), {}, false};
  for (const auto& [k, v] : c.residuals) c.verdict = c.verdict && v <= tol;
  return c;
}

}  // namespace

KrausChannel::KrausChannel(std::vector<Matrix> kraus, SystemLayout in_layout, SystemLayout out_layout, double tol)
    : kraus_(std::move(kraus)), in_(std::move(in_layout)), out_(std::move(out_layout)) {
  if (kraus_.empty()) throw LayoutError("KrausChannel: no Kraus operators");
  for (const auto& k : kraus_)
    if (static_cast<std::size_t>(k.rows()) != out_.dim() || static_cast<std::size_t>(k.cols()) != in_.dim())
      throw LayoutError("KrausChannel: operator shape does not match the layouts");
  if (completeness_residual() > tol) throw NumericalError("KrausChannel: completeness violated");
}

double KrausChannel::completeness_residual() const {
  Matrix s = Matrix::Zero(static_cast<Eigen::Index>(din()), static_cast<Eigen::Index>(din()));
  for (const auto& k : kraus_) s += k.adjoint() * k;
  return max_abs(s - Matrix::Identity(s.rows(), s.cols()));
}

Matrix KrausChannel::apply(const Matrix& rho) const {
  if (static_cast<std::size_t>(rho.rows()) != din()) throw LayoutError("KrausChannel::apply: dimension mismatch");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dout()), static_cast<Eigen::Index>(dout()));
  for (const auto& k : kraus_) out += k * rho * k.adjoint();
  return out;
}

Matrix choi(const SuperOp& map, std::size_t din) {
  const auto n = static_cast<Eigen::Index>(din);
  Matrix e = Matrix::Zero(n, n);
  e(0, 0) = 1.0;
  const Eigen::Index dout = map(e).rows();
  Matrix j = Matrix::Zero(n * dout, n * dout);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      Matrix eab = Matrix::Zero(n, n);
      eab(a, b) = 1.0;
      j.block(a * dout, b * dout, dout, dout) = map(eab);
    }
  return j;
}

Matrix choi(const KrausChannel& ch) {
  return choi([&](const Matrix& x) { return ch.apply(x); }, ch.din());
}

Matrix dephase(const Matrix& m, const SystemLayout& layout, const std::string& label) {
  if (static_cast<std::size_t>(m.rows()) != layout.dim()) throw LayoutError("dephase: dimension mismatch");
  const std::size_t k = layout.index_of(label);
  std::size_t stride = 1;
  for (std::size_t i = k + 1; i < layout.size(); ++i) stride *= layout.factors()[i].dim;
  const std::size_t d = layout.factors()[k].dim;
  Matrix out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if ((static_cast<std::size_t>(i) / stride) % d != (static_cast<std::size_t>(j) / stride) % d) out(i, j) = 0.0;
  return out;
}

DensityMatrix dephase(const DensityMatrix& rho, const std::string& label) {
  return {dephase(rho.mat(), rho.layout(), label), rho.layout(), rho.psd_tol()};
}

Matrix dephase_all(const Matrix& m) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  out.diagonal() = m.diagonal();
  return out;
}

PureState mcs(std::size_t d, const std::string& label) {
  if (d == 0) throw DomainError("mcs: dimension must be positive");
  return {Vector::Constant(static_cast<Eigen::Index>(d), 1.0 / std::sqrt(static_cast<double>(d))),
          SystemLayout::single(label, d)};
}

bool is_incoherent_kraus_op(const Matrix& k, double tol) {
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    int nz = 0;
    for (Eigen::Index r = 0; r < k.rows(); ++r) nz += std::abs(k(r, c)) > tol;
    if (nz > 1) return false;
  }
  return true;
}

ClassCertificate check_MIO(const KrausChannel& ch) {
  double worst = 0.0;
  std::size_t arg = 0;
  const auto n = static_cast<Eigen::Index>(ch.din());
  for (Eigen::Index b = 0; b < n; ++b) {
    Matrix e = Matrix::Zero(n, n);
    e(b, b) = 1.0;
    const double r = max_offdiag(ch.apply(e));
    if (r > worst) worst = r, arg = static_cast<std::size_t>(b);
  }
  ClassCertificate c = verdict("MIO", {{"max_offdiag", worst}}, 1e-9);
  if (!c.verdict) c.witness = "basis element " + std::to_string(arg);
  return c;
}

ClassCertificate check_DIO(const KrausChannel& ch) {
  const Matrix lhs = choi([&](const Matrix& x) { return dephase_all(ch.apply(x)); }, ch.din());
  const Matrix rhs = choi([&](const Matrix& x) { return ch.apply(dephase_all(x)); }, ch.din());
  return verdict("DIO", {{"choi_commutator_fro", (lhs - rhs).norm()}}, 1e-9);
}

ClassCertificate check_IO_given_kraus(const KrausChannel& ch) {
  ClassCertificate c{"IO", true, {}, {}, true};
  for (std::size_t i = 0; i < ch.kraus().size(); ++i)
    if (!is_incoherent_kraus_op(ch.kraus()[i])) {
      c.verdict = false;
      c.witness = "Kraus operator " + std::to_string(i) + " has a column with two nonzero entries";
      break;
    }
  c.residuals.emplace_back("completeness", ch.completeness_residual());
  return c;
}

ClassCertificate check_DIIO(const KrausChannel& ch) {
  const ClassCertificate dio = check_DIO(ch), io = check_IO_given_kraus(ch);
  ClassCertificate c{"DIIO", dio.verdict && io.verdict, dio.residuals, {}, true};
  c.residuals.insert(c.residuals.end(), io.residuals.begin(), io.residuals.end());
  c.witness = !dio.verdict ? "not DIO" : io.witness;
  return c;
}

ClassCertificate check_QIP(const KrausChannel& ch, const std::string& b_in, const std::string& b_out) {
  auto in_qi = [&](const Matrix& x) { return ch.apply(dephase(x, ch.in_layout(), b_in)); };
  const Matrix lhs = choi(in_qi, ch.din());
  const Matrix rhs = choi([&](const Matrix& x) { return dephase(in_qi(x), ch.out_layout(), b_out); }, ch.din());
  return verdict("QIP", {{"choi_fro", (lhs - rhs).norm()}}, 1e-9);
}

namespace {

ClassCertificate check_product(const ProductWitness& w, bool alice_incoherent, std::string name) {
  if (w.terms.empty()) throw WitnessError(name + ": empty product witness");
  const auto din = w.terms[0].first.cols() * w.terms[0].second.cols();
  Matrix s = Matrix::Zero(din, din);
  ClassCertificate c{std::move(name), true, {}, {}, true};
  for (std::size_t i = 0; i < w.terms.size(); ++i) {
    const auto& [a, b] = w.terms[i];
    const Matrix k = kron(a, b);
    if (k.cols() != din) throw WitnessError(c.class_name + ": inconsistent operator shapes");
    s += k.adjoint() * k;
    if (c.verdict && !is_incoherent_kraus_op(b)) c.verdict = false, c.witness = "B_" + std::to_string(i) + " not incoherent";
    if (c.verdict && alice_incoherent && !is_incoherent_kraus_op(a))
      c.verdict = false, c.witness = "A_" + std::to_string(i) + " not incoherent";
  }
  const double comp = max_abs(s - Matrix::Identity(din, din));
  c.residuals.emplace_back("completeness", comp);
  if (comp > 1e-10) c.verdict = false, c.witness = "completeness violated";
  return c;
}

}  // namespace

ClassCertificate check_SI_kraus(const ProductWitness& w) { return check_product(w, true, "SI_kraus"); }
ClassCertificate check_SQI_kraus(const ProductWitness& w) { return check_product(w, false, "SQI_kraus"); }

KrausChannel incoherent_unitary(const std::vector<std::size_t>& perm, const std::vector<double>& phases,
                                const std::string& label) {
  const std::size_t d = perm.size();
  if (phases.size() != d) throw LayoutError("incoherent_unitary: phase count mismatch");
  std::vector<bool> seen(d, false);
  Matrix u = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t b = 0; b < d; ++b) {
    if (perm[b] >= d || seen[perm[b]]) throw DomainError("incoherent_unitary: not a permutation");
    seen[perm[b]] = true;
    u(static_cast<Eigen::Index>(perm[b]), static_cast<Eigen::Index>(b)) = std::polar(1.0, phases[b]);
  }
  const auto l = SystemLayout::single(label, d);
  return {{u}, l, l};
}

KrausChannel identity_channel(const SystemLayout& layout) {
  const auto n = static_cast<Eigen::Index>(layout.dim());
  return {{Matrix::Identity(n, n)}, layout, layout};
}

KrausChannel unitary_channel(const Matrix& u, const SystemLayout& layout) { return {{u}, layout, layout}; }

KrausChannel dephasing_channel(const SystemLayout& layout) {
  const auto n = static_cast<Eigen::Index>(layout.dim());
  std::vector<Matrix> ks;
  for (Eigen::Index b = 0; b < n; ++b) {
    Matrix k = Matrix::Zero(n, n);
    k(b, b) = 1.0;
    ks.push_back(k);
  }
  return {ks, layout, layout};
}

KrausChannel partial_dephasing_channel(const SystemLayout& layout, const std::string& label) {
  std::vector<Matrix> ks;
  const std::size_t k = layout.index_of(label);
  const std::size_t d = layout.factors()[k].dim;
  for (std::size_t b = 0; b < d; ++b) {
    Matrix op = Matrix::Ones(1, 1);
    for (std::size_t f = 0; f < layout.size(); ++f) {
      const auto df = static_cast<Eigen::Index>(layout.factors()[f].dim);
      Matrix piece = Matrix::Identity(df, df);
      if (f == k) {
        piece.setZero();
        piece(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) = 1.0;
      }
      op = kron(op, piece);
    }
    ks.push_back(op);
  }
  return {ks, layout, layout};
}

KrausChannel compose(const KrausChannel& second, const KrausChannel& first) {
  if (second.din() != first.dout()) throw LayoutError("compose: dimension mismatch");
  std::vector<Matrix> ks;
  for (const auto& a : second.kraus())
    for (const auto& b : first.kraus()) ks.push_back(a * b);
  return {ks, first.in_layout(), second.out_layout(), 1e-9};
}

}  // namespace qcoh
