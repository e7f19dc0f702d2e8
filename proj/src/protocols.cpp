#include "qcoh/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "qcoh/sdp.hpp"

namespace qcoh {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// rho = A A^dag with A of full column rank.
Matrix factor(const Matrix& rho, double rel = 1e-14) {
  const Eigh e = eigh(0.5 * (rho + rho.adjoint()));
  const double cut = rel * std::max(e.values.maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < e.values.size(); ++k)
    if (e.values(k) > cut) keep.push_back(k);
  Matrix a(rho.rows(), idx(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    a.col(idx(j)) = e.vectors.col(keep[j]) * std::sqrt(e.values(keep[j]));
  return a;
}

// Orthonormal basis of the support (eigenvalues above rel * max).
Matrix support(const Matrix& m, double rel = 1e-12) {
  const Eigh e = eigh(0.5 * (m + m.adjoint()));
  const double cut = rel * std::max(e.values.maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = e.values.size(); k-- > 0;)
    if (e.values(k) > cut) keep.push_back(k);
  Matrix v(m.rows(), idx(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) v.col(idx(j)) = e.vectors.col(keep[j]);
  return v;
}

Matrix trace_k(const Matrix& z, std::size_t k, std::size_t r) {
  Matrix out = Matrix::Zero(idx(r), idx(r));
  for (std::size_t a = 0; a < k; ++a) out += z.block(idx(a * r), idx(a * r), idx(r), idx(r));
  return out;
}

Matrix kron_id(std::size_t k, const Matrix& m) {
  return kron(Matrix(Matrix::Identity(idx(k), idx(k))), m);
}

// Unitary closest to the identity mapping span(vp) onto span(wp); both are orthonormal bases of equal size.
Matrix complement_map(const Matrix& vp, const Matrix& wp) {
  if (vp.cols() == 0) return Matrix::Zero(vp.rows(), vp.rows());
  Eigen::JacobiSVD<Matrix> svd(wp.adjoint() * vp, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return wp * svd.matrixU() * svd.matrixV().adjoint() * vp.adjoint();
}

Matrix null_basis(const Matrix& v, Eigen::Index n) {
  const Matrix q = Matrix::Identity(n, n) - v * v.adjoint();
  return support(q, 1e-8);
}

// Uhlmann unitary maximizing Re tr(U M), with the orthogonal complement completed by the polar part
// of the projected identity.
Matrix uhlmann_unitary(const Matrix& m) {
  const Eigen::Index n = m.rows();
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = 1e-12 * std::max(s.size() ? s(0) : 0.0, 1e-300);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cut) ++rank;
  const Matrix v = svd.matrixU().leftCols(rank), w = svd.matrixV().leftCols(rank);
  Matrix u = w * v.adjoint();
  if (rank < n) u += complement_map(null_basis(v, n), null_basis(w, n));
  return u;
}

struct Blocks {
  std::vector<Matrix> rho;  // on K (x) R
  std::size_t k = 1;        // multiplicity of X inside each block
  std::size_t x = 1;        // |X|
  std::size_t r = 1;        // dim R
};

struct AscentState {
  double f = 0.0;
  Matrix sigma;
  double gap = 0.0;
  int iterations = 0;
};

// Evaluates F(sigma) = sum_j ||A_j^dag (I (x) sqrt(sigma))||_1 / sqrt|X| and optionally the concave upper gap.
struct Eval {
  double f = 0.0;
  Matrix t;        // sum_j tr_K(U_j A_j^dag) / sqrt|X|
  double gap = 0.0;
};

Eval evaluate(const std::vector<Matrix>& factors, const Blocks& b, const Matrix& s, bool with_gap) {
  Eval out;
  out.t = Matrix::Zero(idx(b.r), idx(b.r));
  Matrix grad = Matrix::Zero(idx(b.r), idx(b.r));
  const double nx = static_cast<double>(b.x);
  const Matrix is = kron_id(b.k, s);
  for (const auto& a : factors) {
    if (a.cols() == 0) continue;
    const Matrix bm = a.adjoint() * is / std::sqrt(nx);
    Eigen::JacobiSVD<Matrix> svd(bm, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    out.f += sv.sum();
    const Matrix u = svd.matrixV() * svd.matrixU().adjoint();
    out.t += trace_k(u * a.adjoint(), b.k, b.r) / std::sqrt(nx);
    if (with_gap) {
      const double cut = 1e-12 * std::max(sv.size() ? sv(0) : 0.0, 1e-300);
      RealVector inv = RealVector::Zero(sv.size());
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) inv(i) = 1.0 / sv(i);
      const Matrix ninv = svd.matrixU() * inv.cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
      grad += trace_k(0.5 * a * ninv * a.adjoint(), b.k, b.r) / nx;
    }
  }
  if (with_gap) {
    const Matrix h = 0.5 * (grad + grad.adjoint());
    out.gap = std::max(0.0, eigh(h).values.maxCoeff() - 0.5 * out.f);
  }
  return out;
}

AscentState ascent(const Blocks& b, const Matrix& rho_r, const DSecOptions& opt) {
  std::vector<Matrix> factors;
  for (const auto& m : b.rho) factors.push_back(m.trace().real() > 0.0 ? factor(m) : Matrix(m.rows(), 0));
  Matrix s = sqrtm_psd(rho_r);
  s /= s.norm();
  AscentState st;
  double last = -1.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    const bool check = it % 25 == 0;
    Eval e = evaluate(factors, b, s, check);
    st.iterations = it + 1;
    if (e.f >= st.f || it == 0) {
      st.f = e.f;
      st.sigma = s * s;
    }
    if (check) {
      st.gap = e.gap;
      if (e.gap <= 1e-3 * opt.gap_tol) break;
    }
    if (std::abs(e.f - last) <= 1e-16 && !check) {
      // stalled: take a final certificate at the current point
      st.gap = evaluate(factors, b, s, true).gap;
      break;
    }
    last = e.f;
    const Matrix h = 0.5 * (e.t + e.t.adjoint());
    const Eigh eh = eigh(h);
    Matrix hp = spectral_apply(eh, [](double x) { return std::max(x, 0.0); });
    const double nrm = hp.norm();
    if (nrm <= 0.0) break;
    s = hp / nrm;
  }
  const Matrix sq = sqrtm_psd(st.sigma);
  const Eval fin = evaluate(factors, b, sq, true);
  st.f = fin.f;
  st.gap = fin.gap;
  return st;
}

// max sum_j Re tr X_j s.t. [[rho_j, X_j], [X_j^dag, (I/|X|) (x) sigma]] >= 0, tr sigma = 1.
std::pair<double, Matrix> sdp_optimum(const Blocks& b) {
  SDPBuilder sb;
  const Affine sigma = sb.unit_trace_var(b.r);
  const Matrix ik = Matrix::Identity(idx(b.k), idx(b.k)) / static_cast<double>(b.x);
  for (const auto& m : b.rho) {
    const Matrix v = support(m);
    if (v.cols() == 0) continue;
    const Matrix d = v.adjoint() * m * v;
    const Affine y = sb.complex_var(static_cast<std::size_t>(v.cols()), static_cast<std::size_t>(m.rows()));
    sb.add_objective(re_trace(y, v), 1.0);
    sb.add_psd(block2x2(Affine::constant_of(d), y, y.adjoint(), kron(ik, sigma)));
  }
  sb.add_psd(sigma);
  const SDPSolution sol = solve(sb.build());
  if (sol.status != SDPStatus::Optimal) throw NumericalError("d_sec: SDP did not converge");
  Matrix s = sigma.evaluate(sol.y);
  s = project_psd(0.5 * (s + s.adjoint()));
  s /= s.trace().real();
  return {sol.dual_objective, s};
}

DSecResult solve_dsec(Blocks b, const DSecOptions& opt) {
  Matrix rho_r = Matrix::Zero(idx(b.r), idx(b.r));
  for (const auto& m : b.rho) rho_r += trace_k(m, b.k, b.r);
  const double tr = rho_r.trace().real();
  if (!(tr > 0.0)) throw DomainError("d_sec: zero state");
  const Matrix p = support(rho_r);
  const std::size_t r = static_cast<std::size_t>(p.cols());
  const Matrix ip = kron_id(b.k, p);
  Blocks c{{}, b.k, b.x, r};
  for (const auto& m : b.rho) c.rho.push_back(ip.adjoint() * m * ip / tr);
  const Matrix rho_c = p.adjoint() * rho_r * p / tr;

  AscentState st = ascent(c, rho_c, opt);
  DSecResult out;
  out.method = "ascent";
  Matrix sig = st.sigma;
  double f = st.f;
  out.gap = st.gap;
  out.iterations = st.iterations;
  out.certified = st.gap <= opt.gap_tol;
  if ((opt.sdp_cross_check || !out.certified) && b.x * r <= opt.sdp_max_dim) {
    const auto [fs, ss] = sdp_optimum(c);
    std::vector<Matrix> factors;
    for (const auto& m : c.rho) factors.push_back(factor(m));
    const Eval at = evaluate(factors, c, sqrtm_psd(ss), true);
    if (std::abs(pd_from_fidelity(fs) - pd_from_fidelity(f)) > 1e-6 && at.f > f) {
      sig = ss;
      f = at.f;
      out.method = "sdp";
      out.gap = std::max(0.0, fs - at.f);
      out.certified = true;
    } else if (!out.certified) {
      out.gap = std::max(0.0, fs - f);
      out.certified = out.gap <= opt.gap_tol;
    }
  }
  out.fidelity = f;
  out.value = pd_from_fidelity(f);
  out.sigma_star = p * sig * p.adjoint();
  return out;
}

}  // namespace

double pd_from_fidelity(double f) {
  const double d = 1.0 - std::min(1.0, f) * std::min(1.0, f);
  return d <= kPdFloor ? 0.0 : std::sqrt(d);
}

HashFunction::HashFunction(std::vector<std::size_t> table, std::size_t out_size)
    : table_(std::move(table)), out_(out_size) {
  if (out_ == 0 || table_.empty()) throw DomainError("HashFunction: empty alphabet");
  for (std::size_t v : table_)
    if (v >= out_) throw DomainError("HashFunction: value outside the output alphabet");
  if (out_ > table_.size()) throw DomainError("HashFunction: |L| exceeds |C|");
}

HashFunction HashFunction::identity(std::size_t n) {
  std::vector<std::size_t> t(n);
  std::iota(t.begin(), t.end(), 0);
  return {t, n};
}

HashFunction HashFunction::after(const std::vector<std::size_t>& g) const {
  std::vector<std::size_t> t(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) t[i] = table_.at(g[i]);
  return {t, out_};
}

DSecResult d_sec(const DensityMatrix& rho_xr, const std::string& x_label, const DSecOptions& opt) {
  const auto& lay = rho_xr.layout();
  std::vector<std::string> order{x_label};
  for (const auto& f : lay.factors())
    if (f.label != x_label) order.push_back(f.label);
  if (!lay.contains(x_label)) throw LayoutError("d_sec: unknown label '" + x_label + "'");
  const std::size_t dx = lay.dim(x_label), dr = lay.dim() / dx;
  Blocks b{{permute_systems(rho_xr.mat(), lay, order)}, dx, dx, dr};
  return solve_dsec(std::move(b), opt);
}

DSecResult d_sec_cq(std::span<const Matrix> blocks, const DSecOptions& opt) {
  if (blocks.empty()) throw DomainError("d_sec_cq: no blocks");
  Blocks b{{blocks.begin(), blocks.end()}, 1, blocks.size(), static_cast<std::size_t>(blocks[0].rows())};
  return solve_dsec(std::move(b), opt);
}

Isometry stinespring(const KrausChannel& ch, const std::string& env_label) {
  const auto& ks = ch.kraus();
  const std::size_t nk = ks.size(), dout = ch.dout(), din = ch.din();
  Matrix v = Matrix::Zero(idx(dout * nk), idx(din));
  for (std::size_t c = 0; c < dout; ++c)
    for (std::size_t k = 0; k < nk; ++k) v.row(idx(c * nk + k)) = ks[k].row(idx(c));
  return {v, ch.in_layout(), ch.out_layout().concat(SystemLayout::single(env_label, nk))};
}

namespace {

struct Dilated {
  Matrix coeff;  // rows (alice', bob'), cols Eve = (E, R)
  std::size_t da = 1, dc = 1, de = 1, dr = 1;
};

// Purifies rho, applies the isometry of lambda and arranges the coefficients as
// (Alice's output, Bob's register) x (E, R).
Dilated dilate(const DensityMatrix& rho, const std::vector<std::string>& in_order, const KrausChannel& lambda,
               const std::string& bob_out) {
  const Matrix m = permute_systems(rho.mat(), rho.layout(), in_order);
  std::vector<Factor> fs;
  for (const auto& l : in_order) fs.push_back({l, rho.layout().dim(l)});
  const SystemLayout lay(fs);
  if (lambda.din() != lay.dim()) throw LayoutError("extraction: channel input does not match the state");
  for (std::size_t i = 0; i < lay.size(); ++i)
    if (lambda.in_layout().size() == lay.size() && lambda.in_layout().factors()[i].dim != lay.factors()[i].dim)
      throw LayoutError("extraction: channel input layout does not match the state");
  const PureState psi = purify(DensityMatrix(m, lay, rho.psd_tol()), "R");
  const std::size_t dr = psi.layout().dim("R");
  const Isometry iso = stinespring(lambda);
  const std::size_t de = lambda.kraus().size();
  const Matrix out = iso.v * coefficient_matrix(psi.vec(), lay.dim(), dr);  // (channel out, E) x R
  const SystemLayout& ol = lambda.out_layout();
  const std::size_t dc = bob_out.empty() ? ol.dim() : ol.dim(bob_out);
  const std::size_t da = ol.dim() / dc;
  // channel-out factors reordered to (Alice's, Bob's), then E, R
  std::vector<std::string> order;
  for (const auto& f : ol.factors())
    if (f.label != bob_out) order.push_back(f.label);
  if (!bob_out.empty()) order.push_back(bob_out);
  order.push_back("E");
  order.push_back("R");
  const SystemLayout full = ol.concat(SystemLayout::single("E", de)).concat(SystemLayout::single("R", dr));
  Vector vec(out.size());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) vec(i * out.cols() + j) = out(i, j);
  return {coefficient_matrix(permute_systems(vec, full, order), da * dc, de * dr), da, dc, de, dr};
}

std::vector<Matrix> eve_blocks(const Dilated& d) {
  std::vector<Matrix> blocks;
  const std::size_t ne = d.de * d.dr;
  for (std::size_t c = 0; c < d.dc; ++c) {
    Matrix b = Matrix::Zero(idx(ne), idx(ne));
    for (std::size_t a = 0; a < d.da; ++a) {
      const Vector v = d.coeff.row(idx(a * d.dc + c)).transpose();
      b += v * v.adjoint();
    }
    blocks.push_back(b);
  }
  return blocks;
}

std::vector<Matrix> hashed_blocks(const std::vector<Matrix>& cb, const HashFunction& f) {
  if (f.in_size() != cb.size()) throw LayoutError("hash function domain does not match Bob's register");
  std::vector<Matrix> out(f.out_size(), Matrix::Zero(cb[0].rows(), cb[0].cols()));
  for (std::size_t c = 0; c < cb.size(); ++c) out[f(c)] += cb[c];
  return out;
}

ExtractionOutcome finish(const Dilated& d, const HashFunction& f, bool keep_alice, const DSecOptions& opt) {
  const std::vector<Matrix> hb = hashed_blocks(eve_blocks(d), f);
  const DSecResult ds = d_sec_cq(hb, opt);
  const std::size_t ne = d.de * d.dr, dl = f.out_size();
  const std::size_t da = keep_alice ? d.da : 1;
  Matrix st = Matrix::Zero(idx(da * dl * ne), idx(da * dl * ne));
  for (std::size_t c = 0; c < d.dc; ++c) {
    const std::size_t l = f(c);
    if (keep_alice) {
      Vector v = Vector::Zero(idx(da * ne));
      for (std::size_t a = 0; a < d.da; ++a) v.segment(idx(a * ne), idx(ne)) = d.coeff.row(idx(a * d.dc + c)).transpose();
      // |v> lives on (A', Eve); place it at L = l
      for (std::size_t a1 = 0; a1 < da; ++a1)
        for (std::size_t a2 = 0; a2 < da; ++a2)
          st.block(idx((a1 * dl + l) * ne), idx((a2 * dl + l) * ne), idx(ne), idx(ne)) +=
              v.segment(idx(a1 * ne), idx(ne)) * v.segment(idx(a2 * ne), idx(ne)).adjoint();
    }
  }
  if (!keep_alice)
    for (std::size_t l = 0; l < dl; ++l) st.block(idx(l * ne), idx(l * ne), idx(ne), idx(ne)) = hb[l];
  std::vector<Factor> fs;
  if (keep_alice) fs.push_back({"A'", d.da});
  fs.push_back({"L", dl});
  fs.push_back({"E", d.de});
  fs.push_back({"R", d.dr});
  return {DensityMatrix(st, SystemLayout(fs), 1e-9), ds.value, std::log2(static_cast<double>(dl)), ds.sigma_star,
          ds.gap, f};
}

std::vector<std::string> ab_order(const DensityMatrix& rho) {
  if (rho.layout().size() != 2 || !rho.layout().contains("A") || !rho.layout().contains("B"))
    throw LayoutError("assisted framework: state must have factors A and B");
  return {"A", "B"};
}

std::vector<std::string> labels_of(const DensityMatrix& rho) {
  std::vector<std::string> l;
  for (const auto& f : rho.layout().factors()) l.push_back(f.label);
  return l;
}

}  // namespace

std::vector<Matrix> extraction_blocks(const DensityMatrix& rho_b, const KrausChannel& lambda) {
  return eve_blocks(dilate(rho_b, labels_of(rho_b), lambda, ""));
}

std::vector<Matrix> assisted_extraction_blocks(const DensityMatrix& rho_ab, const KrausChannel& lambda,
                                               const std::string& b_out) {
  return eve_blocks(dilate(rho_ab, ab_order(rho_ab), lambda, b_out));
}

ExtractionOutcome run_extraction(const DensityMatrix& rho_b, const KrausChannel& lambda, const HashFunction& f,
                                 const DSecOptions& opt) {
  return finish(dilate(rho_b, labels_of(rho_b), lambda, ""), f, false, opt);
}

ExtractionOutcome run_assisted_extraction(const DensityMatrix& rho_ab, const KrausChannel& lambda,
                                          const HashFunction& f, const std::string& b_out, const DSecOptions& opt) {
  if (!lambda.out_layout().contains(b_out)) throw LayoutError("assisted extraction: channel has no output " + b_out);
  return finish(dilate(rho_ab, ab_order(rho_ab), lambda, b_out), f, true, opt);
}

ExtractionOutcome run_alternative_assisted_extraction(const DensityMatrix& rho_ab, const KrausChannel& lambda,
                                                      const HashFunction& f, const DSecOptions& opt) {
  return finish(dilate(rho_ab, ab_order(rho_ab), lambda, ""), f, false, opt);
}

namespace {

// Restricted-growth strings of length n with at most m blocks, in lexicographic order; stops when visit
// returns true.
template <class F>
bool for_each_rgs(std::size_t n, std::size_t m, F&& visit) {
  std::vector<std::size_t> a(n, 0), mx(n, 0);
  while (true) {
    if (visit(a)) return true;
    std::size_t i = n;
    while (--i >= 1)
      if (a[i] <= mx[i - 1] && a[i] + 1 < m) break;
    if (i == 0 || n == 1) return false;
    ++a[i];
    mx[i] = std::max(mx[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) a[j] = 0, mx[j] = mx[i];
  }
}

std::uint64_t next_prime(std::uint64_t n) {
  auto prime = [](std::uint64_t x) {
    if (x < 2) return false;
    for (std::uint64_t d = 2; d * d <= x; ++d)
      if (x % d == 0) return false;
    return true;
  };
  while (!prime(n)) ++n;
  return n;
}

// Canonical relabeling (first-occurrence order) of a table.
std::vector<std::size_t> canonical(const std::vector<std::size_t>& t) {
  std::map<std::size_t, std::size_t> rel;
  std::vector<std::size_t> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto [it, fresh] = rel.emplace(t[i], rel.size());
    out[i] = it->second;
  }
  return out;
}

}  // namespace

HashSearchResult search_hash(std::span<const Matrix> c_blocks, double eps, const HashSearchOptions& opt) {
  const std::size_t nc = c_blocks.size();
  if (nc == 0) throw DomainError("search_hash: empty register");
  const std::vector<Matrix> cb(c_blocks.begin(), c_blocks.end());
  HashSearchResult res;
  res.sampled = nc > opt.max_exhaustive;
  if (res.sampled && !opt.sampled)
    throw PreconditionError("exhaustive hash search limited to |C| <= " + std::to_string(opt.max_exhaustive) +
                            "; enable the sampled family");
  auto achieves = [&](const std::vector<std::size_t>& t, std::size_t m) -> std::optional<double> {
    ++res.evaluated;
    const double v = d_sec_cq(hashed_blocks(cb, HashFunction(t, m)), opt.dsec).value;
    if (v <= eps + opt.accept_tol) return v;
    return std::nullopt;
  };
  auto accept = [&](const std::vector<std::size_t>& t, std::size_t m, double v) {
    res.best_f = HashFunction(t, m);
    res.d_sec = v;
    res.log_L = std::log2(static_cast<double>(m));
  };
  for (std::size_t m = nc; m >= 1; --m) {
    if (!res.sampled) {
      const bool found = for_each_rgs(nc, m, [&](const std::vector<std::size_t>& t) {
        const auto v = achieves(t, m);
        if (v) accept(t, m, *v);
        return v.has_value();
      });
      if (found) return res;
      continue;
    }
    // multiply-shift family over the prime field Z_p: x -> ((a x + b) mod p) mod m
    const std::uint64_t p = next_prime(nc);
    Rng rng(derive_seed(opt.seed, m));
    std::uniform_int_distribution<std::uint64_t> da(1, p - 1), db(0, p - 1);
    std::set<std::vector<std::size_t>> tables;
    for (std::size_t s = 0; s < opt.samples; ++s) {
      const std::uint64_t a = da(rng), b = db(rng);
      std::vector<std::size_t> t(nc);
      for (std::size_t x = 0; x < nc; ++x) t[x] = static_cast<std::size_t>(((a * x + b) % p) % m);
      tables.insert(std::move(t));
    }
    // d_sec depends on a table only up to relabeling of L; each class is evaluated once and represented
    // by its lexicographically first sampled table
    std::map<std::vector<std::size_t>, std::vector<std::size_t>> first_of_class;
    for (const auto& t : tables) first_of_class.emplace(canonical(t), t);
    std::optional<std::pair<std::vector<std::size_t>, double>> best;
    for (const auto& [cls, t] : first_of_class)
      if (const auto v = achieves(cls, m); v && (!best || t < best->first)) best.emplace(t, *v);
    if (best) {
      accept(best->first, m, best->second);
      return res;
    }
    if (m == 1) break;
  }
  return res;
}

HashSearchResult extractable_randomness_exhaustive(const DensityMatrix& rho_b, const KrausChannel& lambda,
                                                   double eps, const HashSearchOptions& opt) {
  return search_hash(extraction_blocks(rho_b, lambda), eps, opt);
}

HashSearchResult assisted_extractable_randomness(const DensityMatrix& rho_ab, const KrausChannel& lambda,
                                                 double eps, const std::string& b_out,
                                                 const HashSearchOptions& opt) {
  return search_hash(assisted_extraction_blocks(rho_ab, lambda, b_out), eps, opt);
}

HashSearchResult alternative_extractable_randomness(const DensityMatrix& rho_ab, const KrausChannel& lambda,
                                                    double eps, const HashSearchOptions& opt) {
  return search_hash(eve_blocks(dilate(rho_ab, ab_order(rho_ab), lambda, "")), eps, opt);
}

namespace {

// Shared construction: input (A, B) with dA = 1 in the unassisted case; f acts on B.
DistillerReport build_distiller(const DensityMatrix& rho, const std::vector<std::string>& order, std::size_t da,
                                const HashFunction& f, double eps, const DSecOptions& opt) {
  const Matrix m = permute_systems(rho.mat(), rho.layout(), order);
  std::vector<Factor> fs;
  for (const auto& l : order) fs.push_back({l, rho.layout().dim(l)});
  const SystemLayout in(fs);
  const std::size_t din = in.dim(), db = din / da;
  if (f.in_size() != db) throw LayoutError("distiller: hash domain does not match B");
  const DensityMatrix ordered(m, in, rho.psd_tol());
  const PureState psi = purify(ordered, "R");
  const std::size_t dr = psi.layout().dim("R");
  const Matrix big_psi = coefficient_matrix(psi.vec(), din, dr);

  const KrausChannel id = identity_channel(in);
  const Dilated d = dilate(ordered, order, id, order.back());
  const std::vector<Matrix> hb = hashed_blocks(eve_blocks(d), f);
  const DSecResult ds = d_sec_cq(hb, opt);
  if (ds.value > eps + 1e-9)
    throw PreconditionError("distiller: protocol (id, Delta, f) has d_sec " + std::to_string(ds.value) +
                            " above eps");
  const Matrix sigma = ds.sigma_star;  // on (E, R) with trivial E
  Matrix phi = Matrix::Zero(idx(din), idx(dr));
  phi.topRows(idx(dr)) = sqrtm_psd(sigma).conjugate();

  const std::size_t dl = f.out_size();
  std::vector<Matrix> us(dl, Matrix::Identity(idx(din), idx(din)));
  for (std::size_t l = 0; l < dl; ++l) {
    Matrix al = big_psi;
    for (std::size_t i = 0; i < din; ++i)
      if (f(i % db) != l) al.row(idx(i)).setZero();
    if (al.squaredNorm() <= 1e-14) continue;
    us[l] = uhlmann_unitary(al * phi.adjoint());
  }
  std::vector<Matrix> kraus;
  for (std::size_t j = 0; j < din; ++j) {
    Matrix k = Matrix::Zero(idx(dl), idx(din));
    for (std::size_t col = 0; col < din; ++col) {
      const std::size_t l = f(col % db);
      k(idx(l), idx(col)) = us[l](idx(j), idx(col));
    }
    kraus.push_back(k);
  }
  DistillerReport rep{KrausChannel(kraus, in, SystemLayout::single("L", dl)), {}, 0.0, dl, ds.value, sigma,
                      ds.fidelity};
  const Matrix out = rep.channel.apply(m);
  const double overlap = mcs(dl).vec().dot(out * mcs(dl).vec()).real();
  rep.error_P = pd_from_fidelity(std::sqrt(std::max(0.0, overlap)));
  ClassCertificate comp{"completeness", rep.channel.completeness_residual() <= 1e-10,
                        {{"completeness", rep.channel.completeness_residual()}}, {}, true};
  rep.certificates.push_back(da == 1 ? check_DIIO(rep.channel) : check_QIP(rep.channel, "B", "L"));
  rep.certificates.push_back(comp);
  return rep;
}

}  // namespace

DistillerReport build_distiller_from_extraction(const DensityMatrix& rho_b, const HashFunction& f, double eps,
                                                const DSecOptions& opt) {
  if (rho_b.layout().size() != 1) throw LayoutError("distiller: state must have a single factor");
  return build_distiller(rho_b, labels_of(rho_b), 1, f, eps, opt);
}

DistillerReport build_assisted_distiller(const DensityMatrix& rho_ab, const HashFunction& f, double eps,
                                         const DSecOptions& opt) {
  return build_distiller(rho_ab, ab_order(rho_ab), rho_ab.layout().dim("A"), f, eps, opt);
}

KrausChannel OneWayRounds::to_channel() const {
  if (alice.empty() || alice.size() != bob.size()) throw WitnessError("OneWayRounds: one Bob map per outcome");
  std::vector<Matrix> ks;
  for (std::size_t x = 0; x < alice.size(); ++x)
    for (const auto& a : alice[x])
      for (const auto& b : bob[x].kraus()) ks.push_back(kron(a, b));
  const auto& a0 = alice[0].at(0);
  const SystemLayout in({{"A", static_cast<std::size_t>(a0.cols())}, {"B", bob[0].din()}});
  const SystemLayout out({{"A", static_cast<std::size_t>(a0.rows())},
                          {bob[0].out_layout().factors()[0].label, bob[0].dout()}});
  return {ks, in, out, 1e-9};
}

ClassCertificate validate_rounds(const OneWayRounds& r) {
  if (r.alice.empty() || r.alice.size() != r.bob.size()) throw WitnessError("OneWayRounds: malformed round");
  ClassCertificate c{r.alice_incoherent ? "LICC" : "LQICC", true, {}, {}, true};
  Matrix s;
  for (std::size_t x = 0; x < r.alice.size(); ++x) {
    for (const auto& a : r.alice[x]) {
      s = s.size() ? Matrix(s + a.adjoint() * a) : Matrix(a.adjoint() * a);
      if (r.alice_incoherent && c.verdict && !is_incoherent_kraus_op(a))
        c.verdict = false, c.witness = "Alice's operation for outcome " + std::to_string(x) + " is not incoherent";
    }
    const ClassCertificate mio = check_MIO(r.bob[x]);
    c.residuals.emplace_back("bob_" + std::to_string(x) + "_max_offdiag", mio.residuals[0].second);
    if (c.verdict && !mio.verdict) c.verdict = false, c.witness = "Bob's map for outcome " + std::to_string(x) + " is not MIO";
  }
  const double comp = (s - Matrix::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();
  c.residuals.emplace_back("alice_completeness", comp);
  if (comp > 1e-10) c.verdict = false, c.witness = "Alice's instrument is not trace preserving";
  return c;
}

namespace {

void require_diio(const KrausChannel& gamma) {
  if (!check_DIIO(gamma).verdict) throw PreconditionError("compose_and_certify: Gamma is not certified DIIO");
}

}  // namespace

Composite compose_and_certify(const KrausChannel& lambda, FreeClass cls, const KrausChannel& gamma,
                              const std::string& b_out) {
  require_diio(gamma);
  const SystemLayout& ol = lambda.out_layout();
  if (!ol.contains(b_out)) throw LayoutError("compose_and_certify: no output factor " + b_out);
  if (ol.dim(b_out) != gamma.din()) throw LayoutError("compose_and_certify: Gamma input mismatch");
  const std::string l_label = gamma.out_layout().factors()[0].label;
  std::vector<Factor> fs;
  for (const auto& f : ol.factors()) fs.push_back(f.label == b_out ? Factor{l_label, gamma.dout()} : f);
  const SystemLayout new_out(fs);

  if (cls == FreeClass::QIP) {
    std::vector<Matrix> ks;
    for (const auto& g : gamma.kraus()) {
      Matrix emb = Matrix::Ones(1, 1);
      for (const auto& f : ol.factors())
        emb = kron(emb, f.label == b_out ? g : Matrix(Matrix::Identity(idx(f.dim), idx(f.dim))));
      for (const auto& k : lambda.kraus()) ks.push_back(emb * k);
    }
    KrausChannel comp(ks, lambda.in_layout(), new_out, 1e-9);
    const std::string b_in = lambda.in_layout().factors().back().label;
    return {comp, check_QIP(comp, b_in, l_label)};
  }
  if (!lambda.witness || lambda.witness->terms.empty())
    throw WitnessError("compose_and_certify: Lambda carries no product witness");
  ProductWitness w;
  for (const auto& [a, b] : lambda.witness->terms)
    for (const auto& k : gamma.kraus()) w.terms.emplace_back(a, k * b);
  std::vector<Matrix> ks;
  for (const auto& [a, b] : w.terms) ks.push_back(kron(a, b));
  KrausChannel comp(ks, lambda.in_layout(), new_out, 1e-9);
  comp.witness = w;
  return {comp, cls == FreeClass::SI ? check_SI_kraus(w) : check_SQI_kraus(w)};
}

Composite compose_and_certify(const OneWayRounds& lambda, const KrausChannel& gamma) {
  require_diio(gamma);
  if (lambda.alice.empty() || lambda.bob.empty()) throw WitnessError("compose_and_certify: empty round structure");
  OneWayRounds r = lambda;
  for (auto& d : r.bob) d = compose(gamma, d);
  return {r.to_channel(), validate_rounds(r)};
}

std::vector<NamedChannel> two_qubit_family() {
  const SystemLayout ab({{"A", 2}, {"B", 2}});
  const Matrix i2 = Matrix::Identity(2, 2);
  Matrix x(2, 2), z(2, 2), y(2, 2), h(2, 2), p0(2, 2), p1(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  p0 << 1, 0, 0, 0;
  p1 << 0, 0, 0, 1;
  auto ch = [&](std::vector<Matrix> ks) { return KrausChannel(std::move(ks), ab, ab); };
  std::vector<NamedChannel> fam;
  fam.push_back({"identity", identity_channel(ab)});
  fam.push_back({"dephase_B", partial_dephasing_channel(ab, "B")});
  Matrix swap = Matrix::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = swap(1, 2) = swap(2, 1) = 1.0;
  fam.push_back({"swap", ch({swap})});
  fam.push_back({"cnot", ch({Matrix(kron(p0, i2) + kron(p1, x))})});
  // outcome |x> kept on A'; Bob applies Z^x
  Vector plus(2), minus(2);
  plus << 1, 1;
  minus << 1, -1;
  plus /= std::sqrt(2.0);
  minus /= std::sqrt(2.0);
  Matrix m0 = Matrix::Zero(2, 2), m1 = Matrix::Zero(2, 2);
  m0.row(0) = plus.adjoint();
  m1.row(1) = minus.adjoint();
  fam.push_back({"measure_x_correct_z", ch({kron(m0, i2), kron(m1, z)})});
  fam.push_back({"measure_z_flip_b", ch({kron(p0, i2), kron(p1, x)})});
  fam.push_back({"hadamard_A", ch({kron(h, i2)})});
  const double g = 0.3;
  Matrix a0(2, 2), a1(2, 2);
  a0 << 1, 0, 0, std::sqrt(1 - g);
  a1 << 0, std::sqrt(g), 0, 0;
  fam.push_back({"amplitude_damping_B", ch({kron(i2, a0), kron(i2, a1)})});
  Matrix r0 = Matrix::Zero(2, 2), r1 = Matrix::Zero(2, 2);
  r0(0, 0) = r1(0, 1) = 1.0;
  fam.push_back({"replace_A", ch({kron(r0, i2), kron(r1, i2)})});
  const double p = 0.5;
  fam.push_back({"depolarize_A", ch({std::sqrt(1 - 3 * p / 4) * kron(i2, i2), std::sqrt(p / 4) * kron(x, i2),
                                     std::sqrt(p / 4) * kron(y, i2), std::sqrt(p / 4) * kron(z, i2)})});
  return fam;
}

KrausChannel trace_out_alice(const KrausChannel& lambda, const std::string& b_out) {
  const SystemLayout& ol = lambda.out_layout();
  const std::size_t db = ol.dim(b_out), da = ol.dim() / db;
  std::vector<std::string> order;
  for (const auto& f : ol.factors())
    if (f.label != b_out) order.push_back(f.label);
  order.push_back(b_out);
  std::vector<Matrix> ks;
  for (const auto& k : lambda.kraus()) {
    Matrix pk(k.rows(), k.cols());
    for (Eigen::Index c = 0; c < k.cols(); ++c) {
      const Vector col = k.col(c);
      pk.col(c) = permute_systems(col, ol, order);
    }
    for (std::size_t a = 0; a < da; ++a) ks.push_back(pk.middleRows(idx(a * db), idx(db)));
  }
  return {ks, lambda.in_layout(), SystemLayout::single("C", db), 1e-9};
}

}  // namespace qcoh
