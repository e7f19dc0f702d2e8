#include "qcoh/sdp.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <cmath>
#include <limits>

namespace qcoh {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(SDPStatus s) {
  switch (s) {
    case SDPStatus::Optimal: return "Optimal";
    case SDPStatus::MaxIter: return "MaxIter";
    case SDPStatus::Infeasible: return "Infeasible";
  }
  return "?";
}

namespace {

struct BlockState {
  MatrixXd X, Z, Zinv;
};

double inner(const std::vector<SparseEntry>& f, const MatrixXd& w) {
  double s = 0.0;
  for (const auto& e : f) s += e.value * w(e.row, e.col);
  return s;
}

void add_scaled(MatrixXd& m, const std::vector<SparseEntry>& f, double a) {
  for (const auto& e : f) m(e.row, e.col) += a * e.value;
}

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha with M + alpha dM >= 0, for M positive definite.
double max_step(const MatrixXd& m, const MatrixXd& dm) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const MatrixXd l_inv_dm = llt.matrixL().solve(dm);
  const MatrixXd s = llt.matrixL().solve(l_inv_dm.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(s), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

struct Direction {
  VectorXd dy;
  std::vector<MatrixXd> dX, dZ;
};

class Solver {
 public:
  Solver(const SDPProblem& p, const SDPOptions& o) : p_(p), o_(o), m_(static_cast<int>(p.c.size())) {
    for (const auto& b : p_.blocks) {
      if (b.f0.rows() != b.dim || b.f0.cols() != b.dim) throw LayoutError("sdp: block constant has wrong size");
      for (const auto& [var, entries] : b.terms) {
        if (var < 0 || var >= m_) throw LayoutError("sdp: variable index out of range");
        for (const auto& e : entries)
          if (e.row < 0 || e.col < 0 || e.row >= b.dim || e.col >= b.dim)
            throw LayoutError("sdp: entry outside its block");
      }
    }
    double mx = 1.0;
    for (const auto& b : p_.blocks) {
      mx = std::max(mx, b.f0.cwiseAbs().maxCoeff());
      for (const auto& [var, entries] : b.terms)
        for (const auto& e : entries) mx = std::max(mx, std::abs(e.value));
    }
    if (m_ > 0) mx = std::max(mx, p_.c.cwiseAbs().maxCoeff());
    big_m_ = o_.big_m_factor * mx;
  }

  SDPSolution run() {
    init();
    SDPSolution best;
    double best_score = std::numeric_limits<double>::infinity();
    SDPSolution sol;
    for (int it = 0; it <= o_.max_iter; ++it) {
      residuals();
      sol = snapshot(it);
      const double scale = 1.0 + std::abs(sol.primal_objective) + std::abs(sol.dual_objective);
      const double score = std::max({sol.duality_gap / scale, sol.primal_infeasibility, sol.dual_infeasibility});
      if (score < best_score) {
        best_score = score;
        best = sol;
      }
      if (score <= o_.tol) {
        sol.status = SDPStatus::Optimal;
        return sol;
      }
      if (y_.size() > 0 && y_.cwiseAbs().maxCoeff() > big_m_) return infeasible(sol);
      for (const auto& s : st_)
        if (s.X.trace() > big_m_) return infeasible(sol);
      if (it == o_.max_iter) break;
      if (!step()) break;
    }
    const double scale = 1.0 + std::abs(best.primal_objective) + std::abs(best.dual_objective);
    const bool ok = best.duality_gap <= 1e-7 * scale && best.primal_infeasibility <= 1e-7 &&
                    best.dual_infeasibility <= 1e-7;
    best.status = ok ? SDPStatus::Optimal : SDPStatus::MaxIter;
    return best;
  }

 private:
  const SDPProblem& p_;
  SDPOptions o_;
  int m_;
  double big_m_ = 0.0;
  VectorXd y_;
  std::vector<BlockState> st_;
  VectorXd rp_;
  std::vector<MatrixXd> rd_;
  double total_dim_ = 0.0;
  double norm_c_ = 0.0, norm_f0_ = 0.0;

  void init() {
    y_ = VectorXd::Zero(m_);
    norm_c_ = m_ > 0 ? p_.c.norm() : 0.0;
    double max_f = 0.0;
    norm_f0_ = 0.0;
    for (const auto& b : p_.blocks) {
      norm_f0_ = std::max(norm_f0_, b.f0.norm());
      for (const auto& [var, entries] : b.terms) {
        double s = 0.0;
        for (const auto& e : entries) s += e.value * e.value;
        max_f = std::max(max_f, std::sqrt(s));
      }
    }
    st_.clear();
    total_dim_ = 0.0;
    for (const auto& b : p_.blocks) {
      const double n = b.dim;
      total_dim_ += n;
      double xi = std::max(10.0, std::sqrt(n));
      for (const auto& [var, entries] : b.terms) {
        double s = 0.0;
        for (const auto& e : entries) s += e.value * e.value;
        xi = std::max(xi, n * (1.0 + std::abs(p_.c(var))) / (1.0 + std::sqrt(s)));
      }
      const double eta = std::max({10.0, std::sqrt(n), norm_f0_, max_f});
      BlockState s;
      s.X = xi * MatrixXd::Identity(b.dim, b.dim);
      s.Z = eta * MatrixXd::Identity(b.dim, b.dim);
      st_.push_back(std::move(s));
    }
  }

  void residuals() {
    rp_ = m_ > 0 ? VectorXd(p_.c) : VectorXd();
    rd_.assign(p_.blocks.size(), MatrixXd());
    for (std::size_t k = 0; k < p_.blocks.size(); ++k) {
      const auto& b = p_.blocks[k];
      MatrixXd r = b.f0 - st_[k].Z;
      for (const auto& [var, entries] : b.terms) {
        rp_(var) -= inner(entries, st_[k].X);
        add_scaled(r, entries, -y_(var));
      }
      rd_[k] = std::move(r);
    }
  }

  SDPSolution snapshot(int it) const {
    SDPSolution s;
    s.y = y_;
    s.iterations = it;
    double pobj = 0.0, xz = 0.0, dinf = 0.0;
    for (std::size_t k = 0; k < p_.blocks.size(); ++k) {
      pobj += (p_.blocks[k].f0.array() * st_[k].X.array()).sum();
      xz += (st_[k].X.array() * st_[k].Z.array()).sum();
      dinf += rd_[k].squaredNorm();
    }
    s.primal_objective = pobj;
    s.dual_objective = m_ > 0 ? p_.c.dot(y_) : 0.0;
    s.duality_gap = std::max(std::abs(pobj - s.dual_objective), std::abs(xz));
    s.primal_infeasibility = m_ > 0 ? rp_.norm() / (1.0 + norm_c_) : 0.0;
    s.dual_infeasibility = std::sqrt(dinf) / (1.0 + norm_f0_);
    for (const auto& b : st_) {
      s.X.push_back(b.X);
      s.Z.push_back(b.Z);
    }
    return s;
  }

  SDPSolution infeasible(SDPSolution s) const {
    s.status = SDPStatus::Infeasible;
    return s;
  }

  Direction direction(const Eigen::LLT<MatrixXd>& schur, const std::vector<MatrixXd>& rc) const {
    Direction d;
    VectorXd rhs = m_ > 0 ? VectorXd(rp_) : VectorXd();
    std::vector<MatrixXd> w(p_.blocks.size());
    for (std::size_t k = 0; k < p_.blocks.size(); ++k) {
      w[k] = (rc[k] - st_[k].X * rd_[k]) * st_[k].Zinv;
      for (const auto& [var, entries] : p_.blocks[k].terms) rhs(var) -= inner(entries, w[k]);
    }
    d.dy = m_ > 0 ? VectorXd(schur.solve(rhs)) : VectorXd();
    for (std::size_t k = 0; k < p_.blocks.size(); ++k) {
      MatrixXd dz = rd_[k];
      for (const auto& [var, entries] : p_.blocks[k].terms) add_scaled(dz, entries, -d.dy(var));
      d.dX.push_back(sym((rc[k] - st_[k].X * dz) * st_[k].Zinv));
      d.dZ.push_back(sym(dz));
    }
    return d;
  }

  std::pair<double, double> steps(const Direction& d) const {
    double ap = std::numeric_limits<double>::infinity(), ad = ap;
    for (std::size_t k = 0; k < st_.size(); ++k) {
      ap = std::min(ap, max_step(st_[k].X, d.dX[k]));
      ad = std::min(ad, max_step(st_[k].Z, d.dZ[k]));
    }
    return {ap, ad};
  }

  bool step() {
    for (auto& s : st_) {
      Eigen::LLT<MatrixXd> llt(s.Z);
      if (llt.info() != Eigen::Success) return false;
      s.Zinv = llt.solve(MatrixXd::Identity(s.Z.rows(), s.Z.cols()));
      s.Zinv = sym(s.Zinv);
    }
    // Schur complement M_ij = tr(F_i X F_j Z^-1).
    MatrixXd schur = MatrixXd::Zero(m_, m_);
    for (std::size_t k = 0; k < p_.blocks.size(); ++k) {
      const auto& b = p_.blocks[k];
      const auto& s = st_[k];
      for (const auto& [vj, fj] : b.terms) {
        MatrixXd fz = MatrixXd::Zero(b.dim, b.dim);
        std::vector<int> rows;
        for (const auto& e : fj) {
          fz.row(e.row) += e.value * s.Zinv.row(e.col);
          rows.push_back(e.row);
        }
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        MatrixXd g = MatrixXd::Zero(b.dim, b.dim);
        for (int a : rows) g.noalias() += s.X.col(a) * fz.row(a);
        for (const auto& [vi, fi] : b.terms) schur(vi, vj) += inner(fi, g);
      }
    }
    schur = sym(schur);
    Eigen::LLT<MatrixXd> chol(schur);
    if (m_ > 0 && chol.info() != Eigen::Success) {
      const double reg = 1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      chol.compute(schur + reg * MatrixXd::Identity(m_, m_));
      if (chol.info() != Eigen::Success) return false;
    }

    double xz = 0.0;
    for (const auto& s : st_) xz += (s.X.array() * s.Z.array()).sum();
    const double mu = xz / total_dim_;

    std::vector<MatrixXd> rc(st_.size());
    for (std::size_t k = 0; k < st_.size(); ++k) rc[k] = -st_[k].X * st_[k].Z;
    const Direction aff = direction(chol, rc);
    auto [ap, ad] = steps(aff);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xz_aff = 0.0;
    for (std::size_t k = 0; k < st_.size(); ++k)
      xz_aff += ((st_[k].X + ap * aff.dX[k]).array() * (st_[k].Z + ad * aff.dZ[k]).array()).sum();
    const double mu_aff = xz_aff / total_dim_;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    for (std::size_t k = 0; k < st_.size(); ++k) {
      const auto n = st_[k].X.rows();
      rc[k] = sigma * mu * MatrixXd::Identity(n, n) - st_[k].X * st_[k].Z - aff.dX[k] * aff.dZ[k];
    }
    const Direction d = direction(chol, rc);
    auto [bp, bd] = steps(d);
    const double gamma = 0.95;
    bp = std::min(1.0, gamma * bp);
    bd = std::min(1.0, gamma * bd);
    if (bp < 1e-12 && bd < 1e-12) return false;
    for (std::size_t k = 0; k < st_.size(); ++k) {
      st_[k].X = sym(st_[k].X + bp * d.dX[k]);
      st_[k].Z = sym(st_[k].Z + bd * d.dZ[k]);
    }
    if (m_ > 0) y_ += bd * d.dy;
    return true;
  }
};

}  // namespace

SDPSolution solve(const SDPProblem& p, const SDPOptions& opt) {
  Solver s(p, opt);
  return s.run();
}

// ---- modeling layer ----

Affine Affine::constant_of(const Matrix& m) { return Affine{m, {}}; }

Affine Affine::adjoint() const {
  Affine out{constant.adjoint(), {}};
  for (const auto& [v, m] : terms) out.terms[v] = m.adjoint();
  return out;
}

Matrix Affine::evaluate(const Eigen::VectorXd& y) const {
  Matrix out = constant;
  for (const auto& [v, m] : terms) out += y(v) * m;
  return out;
}

Affine& Affine::operator+=(const Affine& o) {
  if (o.rows() != rows() || o.cols() != cols()) throw LayoutError("affine: shape mismatch");
  constant += o.constant;
  for (const auto& [v, m] : o.terms) {
    auto it = terms.find(v);
    if (it == terms.end()) terms.emplace(v, m);
    else it->second += m;
  }
  return *this;
}

Affine& Affine::operator-=(const Affine& o) {
  Affine neg = o;
  neg *= -1.0;
  return *this += neg;
}

Affine& Affine::operator*=(cplx s) {
  constant *= s;
  for (auto& [v, m] : terms) m *= s;
  return *this;
}

Affine operator+(Affine a, const Affine& b) { return a += b; }
Affine operator-(Affine a, const Affine& b) { return a -= b; }
Affine operator*(cplx s, Affine a) { return a *= s; }

Affine kron(const Matrix& m, const Affine& a) {
  Affine out{kron(m, a.constant), {}};
  for (const auto& [v, t] : a.terms) out.terms[v] = kron(m, t);
  return out;
}

Affine kron(const Affine& a, const Matrix& m) {
  Affine out{kron(a.constant, m), {}};
  for (const auto& [v, t] : a.terms) out.terms[v] = kron(t, m);
  return out;
}

Affine block2x2(const Affine& a, const Affine& b, const Affine& c, const Affine& d) {
  if (a.rows() != b.rows() || c.rows() != d.rows() || a.cols() != c.cols() || b.cols() != d.cols())
    throw LayoutError("block2x2: shape mismatch");
  const auto r = a.rows() + c.rows(), cc = a.cols() + b.cols();
  auto place = [&](Matrix& dst, const Matrix* m, Eigen::Index i, Eigen::Index j) {
    if (m) dst.block(i, j, m->rows(), m->cols()) = *m;
  };
  Affine out{Matrix::Zero(r, cc), {}};
  place(out.constant, &a.constant, 0, 0);
  place(out.constant, &b.constant, 0, a.cols());
  place(out.constant, &c.constant, a.rows(), 0);
  place(out.constant, &d.constant, a.rows(), a.cols());
  const std::array<std::tuple<const Affine*, Eigen::Index, Eigen::Index>, 4> parts{
      {{&a, 0, 0}, {&b, 0, a.cols()}, {&c, a.rows(), 0}, {&d, a.rows(), a.cols()}}};
  for (const auto& [src, i, j] : parts) {
    for (const auto& [v, t] : src->terms) {
      auto it = out.terms.find(v);
      if (it == out.terms.end()) it = out.terms.emplace(v, Matrix::Zero(r, cc)).first;
      place(it->second, &t, i, j);
    }
  }
  return out;
}

Affine re_trace(const Affine& a) {
  Affine out{Matrix::Constant(1, 1, a.constant.trace().real()), {}};
  for (const auto& [v, t] : a.terms) out.terms[v] = Matrix::Constant(1, 1, t.trace().real());
  return out;
}

Affine re_trace(const Affine& a, const Matrix& w) {
  Affine out{Matrix::Constant(1, 1, (a.constant * w).trace().real()), {}};
  for (const auto& [v, t] : a.terms) out.terms[v] = Matrix::Constant(1, 1, (t * w).trace().real());
  return out;
}

int SDPBuilder::add_var(double objective) {
  c_.push_back(objective);
  return static_cast<int>(c_.size()) - 1;
}

Affine SDPBuilder::hermitian_var(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  Affine out{Matrix::Zero(n, n), {}};
  for (Eigen::Index k = 0; k < n; ++k) {
    Matrix e = Matrix::Zero(n, n);
    e(k, k) = 1.0;
    out.terms[add_var()] = e;
  }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = k + 1; l < n; ++l) {
      Matrix re = Matrix::Zero(n, n), im = Matrix::Zero(n, n);
      re(k, l) = re(l, k) = 1.0;
      im(k, l) = cplx(0, 1);
      im(l, k) = cplx(0, -1);
      out.terms[add_var()] = re;
      out.terms[add_var()] = im;
    }
  return out;
}

Affine SDPBuilder::unit_trace_var(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  Affine out{Matrix::Zero(n, n), {}};
  out.constant(n - 1, n - 1) = 1.0;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    Matrix e = Matrix::Zero(n, n);
    e(k, k) = 1.0;
    e(n - 1, n - 1) = -1.0;
    out.terms[add_var()] = e;
  }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = k + 1; l < n; ++l) {
      Matrix re = Matrix::Zero(n, n), im = Matrix::Zero(n, n);
      re(k, l) = re(l, k) = 1.0;
      im(k, l) = cplx(0, 1);
      im(l, k) = cplx(0, -1);
      out.terms[add_var()] = re;
      out.terms[add_var()] = im;
    }
  return out;
}

Affine SDPBuilder::complex_var(std::size_t r, std::size_t c) {
  const auto nr = static_cast<Eigen::Index>(r), nc = static_cast<Eigen::Index>(c);
  Affine out{Matrix::Zero(nr, nc), {}};
  for (Eigen::Index i = 0; i < nr; ++i)
    for (Eigen::Index j = 0; j < nc; ++j) {
      Matrix re = Matrix::Zero(nr, nc), im = Matrix::Zero(nr, nc);
      re(i, j) = 1.0;
      im(i, j) = cplx(0, 1);
      out.terms[add_var()] = re;
      out.terms[add_var()] = im;
    }
  return out;
}

void SDPBuilder::set_objective(int var, double coeff) { c_.at(static_cast<std::size_t>(var)) = coeff; }

void SDPBuilder::add_objective(const Affine& expr, double coeff) {
  for (const auto& [v, t] : expr.terms) c_.at(static_cast<std::size_t>(v)) += coeff * t.trace().real();
}

void SDPBuilder::add_psd(const Affine& expr) {
  if (expr.rows() != expr.cols()) throw LayoutError("add_psd: expression must be square");
  lmis_.push_back(expr);
}

namespace {

bool has_imag(const Matrix& m) { return m.imag().cwiseAbs().maxCoeff() > 0.0; }

MatrixXd embed(const Matrix& h, bool complex) {
  if (!complex) return h.real();
  const auto n = h.rows();
  MatrixXd e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = h.real();
  e.topRightCorner(n, n) = -h.imag();
  e.bottomLeftCorner(n, n) = h.imag();
  e.bottomRightCorner(n, n) = h.real();
  return e;
}

}  // namespace

SDPProblem SDPBuilder::build() const {
  SDPProblem p;
  p.c = Eigen::Map<const VectorXd>(c_.data(), static_cast<Eigen::Index>(c_.size()));
  for (const auto& a : lmis_) {
    if (!is_hermitian(a.constant, 1e-10)) throw NumericalError("add_psd: constant is not Hermitian");
    bool complex = has_imag(a.constant);
    for (const auto& [v, t] : a.terms) {
      if (!is_hermitian(t, 1e-10)) throw NumericalError("add_psd: coefficient is not Hermitian");
      complex = complex || has_imag(t);
    }
    SDPBlock b;
    b.f0 = embed(a.constant, complex);
    b.dim = static_cast<int>(b.f0.rows());
    if (b.dim > 128) throw DomainError("sdp: block dimension exceeds 128");
    for (const auto& [v, t] : a.terms) {
      // F_i = -G_i so that C0 + sum y_i G_i >= 0 reads F0 - sum y_i F_i >= 0.
      const MatrixXd g = embed(t, complex);
      std::vector<SparseEntry> entries;
      for (int i = 0; i < b.dim; ++i)
        for (int j = 0; j < b.dim; ++j)
          if (g(i, j) != 0.0) entries.push_back({i, j, -g(i, j)});
      if (!entries.empty()) b.terms.emplace_back(v, std::move(entries));
    }
    p.blocks.push_back(std::move(b));
  }
  return p;
}

// ---- problems ----

namespace {

void require_optimal(const SDPSolution& s, const char* what) {
  if (s.status != SDPStatus::Optimal)
    throw NumericalError(std::string(what) + ": SDP solver returned " + to_string(s.status));
}

}  // namespace

namespace {

// Orthonormal basis V of the support of a PSD matrix and the compressed block V^dag m V.
// The block [[a, X], [X^dag, m]] is PSD only if X vanishes off supp m, so compressing keeps the
// feasible set while restoring a strictly feasible LMI when m is rank-deficient.
struct Support {
  Matrix v;
  Matrix block;
};

Support compress(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(0.5 * (m + m.adjoint())));
  const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (es.eigenvalues()(i) > 1e-12 * top) keep.push_back(i);
  Support out{Matrix(m.rows(), static_cast<Eigen::Index>(keep.size())), {}};
  for (std::size_t k = 0; k < keep.size(); ++k) out.v.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]);
  out.block = out.v.adjoint() * m * out.v;
  return out;
}

}  // namespace

double fidelity_sdp(const Matrix& rho, const Matrix& sigma, SDPSolution* out) {
  if (rho.rows() != sigma.rows()) throw LayoutError("fidelity_sdp: dimension mismatch");
  const Support r = compress(rho), t = compress(sigma);
  if (r.v.cols() == 0 || t.v.cols() == 0) return 0.0;
  // X = V_r Y V_t^dag, so Re tr X = Re tr(Y V_t^dag V_r)
  SDPBuilder b;
  const Affine y = b.complex_var(static_cast<std::size_t>(r.v.cols()), static_cast<std::size_t>(t.v.cols()));
  b.add_objective(re_trace(y, Matrix(t.v.adjoint() * r.v)), 1.0);
  b.add_psd(block2x2(Affine::constant_of(r.block), y, y.adjoint(), Affine::constant_of(t.block)));
  const SDPSolution s = solve(b.build());
  require_optimal(s, "fidelity_sdp");
  if (out) *out = s;
  return s.dual_objective;
}

double dh_sdp(const Matrix& rho, const Matrix& sigma, double eps, SDPSolution* out) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("dh_sdp: eps must lie in [0, 1)");
  const auto d = static_cast<std::size_t>(rho.rows());
  SDPBuilder b;
  const Affine m = b.hermitian_var(d);
  const Matrix id = Matrix::Identity(rho.rows(), rho.rows());
  b.add_psd(m);
  b.add_psd(Affine::constant_of(id) - m);
  Affine type1 = re_trace(m, rho);
  type1.constant(0, 0) = -(1.0 - eps);
  b.add_psd(type1);
  b.add_objective(re_trace(m, sigma), -1.0);
  const SDPSolution s = solve(b.build());
  require_optimal(s, "dh_sdp");
  if (out) *out = s;
  const double beta = -s.dual_objective;
  return beta > 0.0 ? -std::log2(beta) : std::numeric_limits<double>::infinity();
}

namespace {

Matrix ordered_br(const DensityMatrix& rho, const std::string& b_label, const std::string& r_label) {
  if (rho.layout().size() != 2 || !rho.layout().contains(b_label) || !rho.layout().contains(r_label))
    throw LayoutError("hmin: layout must consist of exactly the two given labels");
  const std::vector<std::string> order{b_label, r_label};
  return permute_systems(rho.mat(), rho.layout(), order);
}

}  // namespace

double hmin(const DensityMatrix& rho_br, const std::string& b_label, const std::string& r_label) {
  const Matrix rho = ordered_br(rho_br, b_label, r_label);
  const auto db = rho_br.layout().dim(b_label), dr = rho_br.layout().dim(r_label);
  SDPBuilder b;
  const Affine s = b.hermitian_var(dr);
  b.add_objective(s, -1.0);
  b.add_psd(kron(Matrix(Matrix::Identity(static_cast<Eigen::Index>(db), static_cast<Eigen::Index>(db))), s) -
            Affine::constant_of(rho));
  const SDPSolution sol = solve(b.build());
  require_optimal(sol, "hmin");
  return -std::log2(-sol.dual_objective);
}

double hmin_smooth(const DensityMatrix& rho_br, const std::string& b_label, const std::string& r_label, double eps,
                   SmoothingBall ball) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("hmin_smooth: eps must lie in [0, 1)");
  if (rho_br.dim() > 16) throw DomainError("hmin_smooth: dim(BR) exceeds the desk-scale guard of 16");
  if (eps == 0.0) return hmin(rho_br, b_label, r_label);
  const Matrix rho = ordered_br(rho_br, b_label, r_label);
  const auto db = static_cast<Eigen::Index>(rho_br.layout().dim(b_label));
  const auto dr = rho_br.layout().dim(r_label);
  const auto d = rho.rows();

  SDPBuilder b;
  const Affine s = b.hermitian_var(dr);
  b.add_objective(s, -1.0);
  const Affine rt = ball == SmoothingBall::Normalized ? b.unit_trace_var(static_cast<std::size_t>(d))
                                                       : b.hermitian_var(static_cast<std::size_t>(d));
  const Support sup = compress(rho);
  const Affine x = b.complex_var(static_cast<std::size_t>(d), static_cast<std::size_t>(sup.v.cols()));
  b.add_psd(kron(Matrix(Matrix::Identity(db, db)), s) - rt);
  b.add_psd(rt);
  b.add_psd(block2x2(rt, x, x.adjoint(), Affine::constant_of(sup.block)));
  Affine fid = re_trace(x, sup.v.adjoint());
  fid.constant(0, 0) = -std::sqrt(1.0 - eps * eps);
  b.add_psd(fid);
  if (ball == SmoothingBall::Subnormalized) {
    Affine tr = -1.0 * re_trace(rt);
    tr.constant(0, 0) = 1.0;
    b.add_psd(tr);
  }
  const SDPSolution sol = solve(b.build());
  require_optimal(sol, "hmin_smooth");
  return -std::log2(-sol.dual_objective);
}

}  // namespace qcoh
