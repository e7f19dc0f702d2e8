#include "qcoh/serialize.hpp"

#include <cmath>

namespace qcoh {

namespace {

json num(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

std::size_t count_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ParseError(std::string("field \"") + key + "\" must be a nonnegative integer");
  return v.get<std::size_t>();
}

cplx entry(const json& e) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw ParseError("matrix entries must be numbers or [re, im] pairs");
}

json residuals_json(const std::vector<std::pair<std::string, double>>& r) {
  json out = json::object();
  for (const auto& [k, v] : r) out[k] = num(v);
  return out;
}

}  // namespace

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

json to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back({m(i, k).real(), m(i, k).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
  const std::size_t r = count_field(j, "rows"), c = count_field(j, "cols");
  const json& data = field(j, "data");
  if (!data.is_array() || data.size() != r * c) throw ParseError("matrix data length must equal rows * cols");
  Matrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < r * c; ++i)
    m(static_cast<Eigen::Index>(i / c), static_cast<Eigen::Index>(i % c)) = entry(data[i]);
  return m;
}

json to_json(const SystemLayout& l) {
  json f = json::array();
  for (const auto& x : l.factors()) f.push_back({x.label, x.dim});
  return {{"factors", f}};
}

SystemLayout layout_from_json(const json& j) {
  const json& f = field(j, "factors");
  if (!f.is_array() || f.empty()) throw ParseError("layout needs a nonempty factor list");
  std::vector<Factor> out;
  for (const auto& x : f) {
    if (!x.is_array() || x.size() != 2 || !x[0].is_string() || !x[1].is_number_integer() || x[1].get<long long>() < 1)
      throw ParseError("layout factors are [label, dim] pairs with dim >= 1");
    out.push_back({x[0].get<std::string>(), x[1].get<std::size_t>()});
  }
  return SystemLayout(std::move(out));
}

json to_json(const DensityMatrix& rho) { return {{"layout", to_json(rho.layout())}, {"matrix", to_json(rho.mat())}}; }

PureState pure_state_from_json(const json& j) {
  const json& k = field(j, "ket");
  if (!k.is_array() || k.empty()) throw ParseError("ket must be a nonempty array");
  Vector v(static_cast<Eigen::Index>(k.size()));
  for (std::size_t i = 0; i < k.size(); ++i) v(static_cast<Eigen::Index>(i)) = entry(k[i]);
  // tolerate kets typed with a few decimals
  if (std::abs(v.norm() - 1.0) <= 1e-6) v.normalize();
  return PureState(v, j.contains("layout") ? layout_from_json(j.at("layout")) : SystemLayout());
}

DensityMatrix state_from_json(const json& j) {
  if (j.is_object() && j.contains("ket")) return pure_state_from_json(j).density();
  const Matrix m = matrix_from_json(field(j, "matrix"));
  return DensityMatrix(m, j.contains("layout") ? layout_from_json(j.at("layout")) : SystemLayout());
}

json to_json(const KrausChannel& ch) {
  json k = json::array();
  for (const auto& m : ch.kraus()) k.push_back(to_json(m));
  return {{"in", to_json(ch.in_layout())}, {"out", to_json(ch.out_layout())}, {"kraus", k}};
}

KrausChannel channel_from_json(const json& j) {
  const json& k = field(j, "kraus");
  if (!k.is_array() || k.empty()) throw ParseError("channel needs a nonempty kraus list");
  std::vector<Matrix> ops;
  for (const auto& m : k) ops.push_back(matrix_from_json(m));
  return KrausChannel(std::move(ops), layout_from_json(field(j, "in")), layout_from_json(field(j, "out")));
}

json to_json(const HashFunction& f) { return {{"table", f.table()}, {"out", f.out_size()}}; }

HashFunction hash_from_json(const json& j) {
  const json& t = field(j, "table");
  if (!t.is_array()) throw ParseError("hash table must be an array");
  std::vector<std::size_t> table;
  for (const auto& x : t) {
    if (!x.is_number_integer() || x.get<long long>() < 0) throw ParseError("hash table entries are nonnegative integers");
    table.push_back(x.get<std::size_t>());
  }
  return HashFunction(std::move(table), count_field(j, "out"));
}

json to_json(const JointDistribution& p) {
  json e = json::array();
  for (std::size_t x = 0; x < p.nx; ++x)
    for (std::size_t y = 0; y < p.ny; ++y)
      if (p.at(x, y) != 0.0) e.push_back({x, y, p.at(x, y)});
  return {{"nx", p.nx}, {"ny", p.ny}, {"entries", e}};
}

JointDistribution joint_from_json(const json& j) {
  JointDistribution p;
  p.nx = count_field(j, "nx");
  p.ny = count_field(j, "ny");
  p.w.assign(p.nx * p.ny, 0.0);
  for (const auto& e : field(j, "entries")) {
    if (!e.is_array() || e.size() != 3) throw ParseError("joint entries are [x, y, w] triples");
    const auto x = e[0].get<std::size_t>(), y = e[1].get<std::size_t>();
    if (x >= p.nx || y >= p.ny) throw ParseError("joint entry index out of range");
    p.w[x * p.ny + y] = e[2].get<double>();
  }
  return p;
}

json to_json(const ClassCertificate& c) {
  return {{"class", c.class_name},
          {"verdict", c.verdict},
          {"residuals", residuals_json(c.residuals)},
          {"witness", c.witness},
          {"given_decomposition", c.given_decomposition}};
}

json to_json(const NPResult& r) {
  return {{"value_bits", num(r.value_bits)}, {"threshold_t", num(r.threshold_t)},
          {"boundary_fraction_x", num(r.boundary_fraction_x)}, {"type1", num(r.type1)},
          {"type2", num(r.type2)}, {"iterations", r.iterations}};
}

json to_json(const Theta& t) {
  return {{"value", t.value}, {"clamped", t.clamped}, {"lambda", num(t.lambda)}, {"nu", t.nu}};
}

json to_json(const EntropyReport& r) {
  json dh = json::array(), so = json::array();
  for (const auto& [e, v] : r.dh_bits) dh.push_back({{"eps", e}, {"value_bits", num(v)}});
  for (const auto& [n, v] : r.second_order_bits) so.push_back({{"n", n}, {"value_bits", num(v)}});
  return {{"D_bits", num(r.D_bits)}, {"V_bits2", num(r.V_bits2)}, {"dh", dh},
          {"dmax_bits", num(r.dmax_bits)}, {"theta", to_json(r.theta)}, {"second_order", so}};
}

json to_json(const DSecResult& r) {
  return {{"value", num(r.value)}, {"fidelity", num(r.fidelity)}, {"sigma_star", to_json(r.sigma_star)},
          {"gap", num(r.gap)}, {"iterations", r.iterations}, {"certified", r.certified}, {"method", r.method}};
}

json to_json(const ExtractionOutcome& r) {
  return {{"d_sec", num(r.d_sec)}, {"log_L", num(r.log_L)}, {"gap", num(r.gap)}, {"hash", to_json(r.f)},
          {"sigma_star", to_json(r.sigma_star)}, {"output_state", to_json(r.output_state)}};
}

json to_json(const HashSearchResult& r) {
  return {{"log_L", num(r.log_L)}, {"hash", to_json(r.best_f)}, {"d_sec", num(r.d_sec)},
          {"sampled", r.sampled}, {"evaluated", r.evaluated}};
}

json to_json(const DistillerReport& r) {
  json certs = json::array();
  for (const auto& c : r.certificates) certs.push_back(to_json(c));
  return {{"channel", to_json(r.channel)}, {"certificates", certs}, {"error_P", num(r.error_P)},
          {"target_dim", r.target_dim}, {"achieved_d_sec", num(r.achieved_d_sec)},
          {"sigma_star", to_json(r.sigma_star)}, {"fidelity_lower", num(r.fidelity_lower)}};
}

json to_json(const RelationsReport& r) {
  json eq1 = json::array();
  for (const auto& p : r.eq1)
    eq1.push_back({{"eps", p.eps}, {"lhs", num(p.lhs)}, {"rhs", num(p.rhs)}, {"residual", num(p.residual)},
                   {"continuity", p.continuity}});
  json out = {{"eq1", eq1},
              {"eq2", {{"lhs", num(r.eq2_lhs)}, {"rhs", num(r.eq2_rhs)}, {"residual", num(r.eq2_residual)}}},
              {"eq3", {{"lhs", num(r.eq3_lhs)}, {"rhs", num(r.eq3_rhs)}, {"residual", num(r.eq3_residual)}}},
              {"schmidt_residual", num(r.schmidt_residual)}};
  if (r.hmin)
    out["hmin_dh"] = {{"eps", r.hmin->eps},           {"delta", r.hmin->delta},
                      {"hmin_smooth", num(r.hmin->hmin_smooth)}, {"dh", num(r.hmin->dh)},
                      {"correction", num(r.hmin->correction)},   {"holds", r.hmin->holds}};
  return out;
}

json to_json(const CurvePoint& p) {
  return {{"n", p.n},
          {"eps", num(p.eps)},
          {"lower_bits", num(p.lower_bits)},
          {"upper_bits", num(p.upper_bits)},
          {"exact_bits", num(p.exact_bits)},
          {"second_order_bits", num(p.second_order_bits)},
          {"eps_lower_bound", num(p.epsilon_lower_bound)},
          {"flags", p.flags}};
}

}  // namespace qcoh
