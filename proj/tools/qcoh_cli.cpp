#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qcoh/asymptotics.hpp"
#include "qcoh/coherence.hpp"
#include "qcoh/entropy.hpp"
#include "qcoh/ns.hpp"
#include "qcoh/protocols.hpp"
#include "qcoh/serialize.hpp"
#include "qcoh/validation.hpp"

using namespace qcoh;

namespace {

enum Exit { kOk = 0, kFail = 1, kParse = 2, kNumerical = 3, kPrecondition = 4 };

struct RunConfig {
  std::string input;
  std::optional<double> eps, eta, delta, rate;
  std::vector<std::size_t> n_list;
  std::uint64_t seed = 20240101;
  std::string format = "json";
  std::size_t max_dim = kMaxDim;
  bool sampled_hash = false;
  bool assisted = false;
  bool quick = false;
  bool corrupt = false;
  bool no_hmin = false;
  std::string b_out = "B";
};

json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

const json& state_node(const json& j) { return j.is_object() && j.contains("state") ? j.at("state") : j; }

DensityMatrix load_state(const json& j, const RunConfig& c) {
  DensityMatrix rho = state_from_json(state_node(j));
  if (rho.dim() > c.max_dim)
    throw PreconditionError("state dimension " + std::to_string(rho.dim()) + " exceeds --max-dim");
  return rho;
}

double require_eps(const RunConfig& c) {
  if (!c.eps) throw PreconditionError("--eps is required");
  return *c.eps;
}

void validate(const RunConfig& c) {
  if (c.eps && !(*c.eps >= 0.0 && *c.eps < 1.0)) throw PreconditionError("--eps must lie in [0, 1)");
  if (c.eta && !(*c.eta > 0.0)) throw PreconditionError("--eta must be positive");
  if (c.delta && !(*c.delta > 0.0)) throw PreconditionError("--delta must be positive");
  if (c.eta.has_value() != c.delta.has_value()) throw PreconditionError("--eta and --delta go together");
  if (c.format != "json" && c.format != "csv") throw PreconditionError("--format is json or csv");
  for (std::size_t n : c.n_list)
    if (n == 0) throw PreconditionError("--n entries must be positive");
}

HashSearchOptions search_options(const RunConfig& c) {
  HashSearchOptions o;
  o.sampled = c.sampled_hash;
  o.seed = c.seed;
  return o;
}

KrausChannel channel_or_identity(const json& j, const DensityMatrix& rho) {
  return j.is_object() && j.contains("channel") ? channel_from_json(j.at("channel")) : identity_channel(rho.layout());
}

void emit(const json& out) { std::cout << out.dump(2) << "\n"; }

int cmd_entropy(const RunConfig& c, bool dh_only) {
  const json j = load(c.input);
  const DensityMatrix rho = load_state(j.contains("rho") ? j.at("rho") : j, c);
  const Matrix sigma = j.contains("sigma") ? load_state(j.at("sigma"), c).mat() : dephase_all(rho.mat());
  if (sigma.rows() != rho.mat().rows()) throw LayoutError("rho and sigma dimensions differ");
  const double eps = require_eps(c);
  if (dh_only) {
    emit(to_json(dh(rho.mat(), sigma, eps)));
    return kOk;
  }
  std::vector<double> ns(c.n_list.begin(), c.n_list.end());
  const std::vector<double> eps_list{eps};
  emit(to_json(entropy_report(rho.mat(), sigma, eps_list, ns)));
  return kOk;
}

int cmd_protocol(const RunConfig& c) {
  const json j = load(c.input);
  const DensityMatrix rho = load_state(j, c);
  const KrausChannel lambda = channel_or_identity(j, rho);
  json out;
  if (j.contains("hash")) {
    out = to_json(run_extraction(rho, lambda, hash_from_json(j.at("hash"))));
  } else {
    out = to_json(extractable_randomness_exhaustive(rho, lambda, require_eps(c), search_options(c)));
  }
  out["certificates"] = json::array({to_json(check_MIO(lambda))});
  emit(out);
  return kOk;
}

int cmd_distill(const RunConfig& c, bool assisted) {
  const json j = load(c.input);
  const DensityMatrix rho = load_state(j, c);
  if (!j.contains("hash")) throw ParseError("distill input needs a \"hash\"");
  const HashFunction f = hash_from_json(j.at("hash"));
  double eps = 0.0;
  if (c.eps) {
    eps = *c.eps;
  } else {
    eps = assisted ? run_assisted_extraction(rho, identity_channel(rho.layout()), f).d_sec
                   : run_extraction(rho, identity_channel(rho.layout()), f).d_sec;
  }
  emit(to_json(assisted ? build_assisted_distiller(rho, f, eps) : build_distiller_from_extraction(rho, f, eps)));
  return kOk;
}

int cmd_assisted_extract(const RunConfig& c, bool alternative) {
  const json j = load(c.input);
  const DensityMatrix rho = load_state(j, c);
  const std::string b_out = j.value("b_out", c.b_out);
  if (alternative && !j.contains("channel")) throw ParseError("alt-extract input needs a \"channel\" AB -> C");
  const KrausChannel lambda = channel_or_identity(j, rho);
  json out;
  if (j.contains("hash")) {
    const HashFunction f = hash_from_json(j.at("hash"));
    out = to_json(alternative ? run_alternative_assisted_extraction(rho, lambda, f)
                              : run_assisted_extraction(rho, lambda, f, b_out));
  } else {
    const double eps = require_eps(c);
    out = to_json(alternative ? alternative_extractable_randomness(rho, lambda, eps, search_options(c))
                              : assisted_extractable_randomness(rho, lambda, eps, b_out, search_options(c)));
  }
  if (!alternative) out["certificates"] = json::array({to_json(check_QIP(lambda, "B", b_out))});
  emit(out);
  return kOk;
}

void emit_curve(const RunConfig& c, const std::vector<CurvePoint>& pts) {
  if (c.format == "csv") {
    std::cout << to_csv(pts);
    return;
  }
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(to_json(p));
  emit({{"format", "qcoh-curve v1"}, {"points", arr}});
}

int cmd_sweep(const RunConfig& c) {
  const DensityMatrix rho = load_state(load(c.input), c);
  const double eps = require_eps(c);
  if (c.n_list.empty()) throw PreconditionError("--n is required");
  std::vector<CurvePoint> pts;
  if (c.eta) {
    for (std::size_t n : c.n_list)
      pts.push_back(c.assisted ? sandwich_check_assisted(rho, eps, n, *c.eta, *c.delta)
                               : sandwich_check_unassisted(rho, eps, n, *c.eta, *c.delta));
  } else {
    pts = second_order_curve(rho, eps, c.n_list, c.assisted);
  }
  emit_curve(c, pts);
  return kOk;
}

int cmd_strong_converse(const RunConfig& c) {
  const DensityMatrix rho = load_state(load(c.input), c);
  if (!c.rate) throw PreconditionError("--rate is required");
  if (c.n_list.empty()) throw PreconditionError("--n is required");
  emit_curve(c, strong_converse_curve(rho, *c.rate, c.n_list, c.assisted));
  return kOk;
}

int cmd_verify_relations(const RunConfig& c) {
  const PureState psi = pure_state_from_json(state_node(load(c.input)));
  if (psi.layout().dim() > c.max_dim) throw PreconditionError("state dimension exceeds --max-dim");
  RelationsOptions opt;
  opt.check_hmin = !c.no_hmin;
  if (c.eps) opt.eps = *c.eps;
  if (c.delta) opt.delta = *c.delta;
  emit(to_json(verify_reduction_connections(psi, opt)));
  return kOk;
}

int cmd_selftest(const RunConfig& c) {
  SelftestOptions o;
  o.seed = c.seed;
  o.quick = c.quick;
  o.corrupt = c.corrupt;
  const auto results = run_selftest(o);
  std::cout << format_report(o, results);
  return all_pass(results) ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcoh: one-shot coherence distillation and randomness extraction"};
  app.require_subcommand(1);
  RunConfig c;

  auto common = [&](CLI::App* s, bool needs_input) {
    if (needs_input) s->add_option("input", c.input, "input JSON file")->required();
    s->add_option("--eps", c.eps, "smoothing / error parameter");
    s->add_option("--n", c.n_list, "block lengths, comma separated")->delimiter(',');
    s->add_option("--seed", c.seed, "root seed");
    s->add_option("--format", c.format, "json or csv");
    s->add_option("--max-dim", c.max_dim, "dimension guard");
  };

  auto* entropy = app.add_subcommand("entropy", "D, V, D_H, D_max and theta of a state pair");
  auto* dhc = app.add_subcommand("dh", "hypothesis-testing relative entropy with its optimal test");
  auto* protocol = app.add_subcommand("protocol", "extraction pipeline (Lambda, Delta, f), or search when no hash is given");
  auto* distill = app.add_subcommand("distill", "DIIO distiller from an extraction protocol");
  auto* aext = app.add_subcommand("assisted-extract", "assisted extraction pipeline or search");
  auto* adist = app.add_subcommand("assisted-distill", "QIP distiller from an assisted protocol");
  auto* alt = app.add_subcommand("alt-extract", "alternative assisted framework (Lambda: AB -> C)");
  auto* sweep = app.add_subcommand("sweep", "second-order curve with one-shot bounds");
  auto* sc = app.add_subcommand("strong-converse", "strong-converse lower envelope on the error");
  auto* rel = app.add_subcommand("verify-relations", "dephased tripartite relations on a pure R,A,B state");
  auto* self = app.add_subcommand("selftest", "acceptance and invariant suite");

  for (auto* s : {entropy, dhc, protocol, distill, aext, adist, alt, sweep, sc, rel}) common(s, true);
  common(self, false);
  for (auto* s : {protocol, aext, alt}) s->add_flag("--sampled-hash", c.sampled_hash, "sampled hash family above 6 letters");
  for (auto* s : {sweep, rel}) {
    s->add_option("--delta", c.delta, "smoothing slack");
  }
  sweep->add_option("--eta", c.eta, "one-shot eta (with --delta); default is the 1/sqrt(n) schedule");
  for (auto* s : {sweep, sc}) s->add_flag("--assisted", c.assisted, "dephase B of an (A, B) state only");
  sc->add_option("--rate", c.rate, "rate R in bits per copy");
  aext->add_option("--b-out", c.b_out, "Bob's output factor label");
  rel->add_flag("--no-hmin", c.no_hmin, "skip the smooth min-entropy check");
  self->add_flag("--quick", c.quick, "reduced instance counts");
  self->add_flag("--corrupt", c.corrupt, "bias the NP values to exercise the failure path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  try {
    validate(c);
    if (*entropy) return cmd_entropy(c, false);
    if (*dhc) return cmd_entropy(c, true);
    if (*protocol) return cmd_protocol(c);
    if (*distill) return cmd_distill(c, false);
    if (*adist) return cmd_distill(c, true);
    if (*aext) return cmd_assisted_extract(c, false);
    if (*alt) return cmd_assisted_extract(c, true);
    if (*sweep) return cmd_sweep(c);
    if (*sc) return cmd_strong_converse(c);
    if (*rel) return cmd_verify_relations(c);
    if (*self) return cmd_selftest(c);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const json::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const LayoutError& e) {
    std::cerr << "layout error: " << e.what() << "\n";
    return kParse;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const InfiniteDivergence& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return kPrecondition;
  } catch (const DomainError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return kPrecondition;
  } catch (const WitnessError& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return kPrecondition;
  }
  return kFail;
}
