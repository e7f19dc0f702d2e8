#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qcoh/asymptotics.hpp"
#include "qcoh/coherence.hpp"
#include "qcoh/entropy.hpp"
#include "qcoh/protocols.hpp"
#include "qcoh/serialize.hpp"
#include "qcoh/validation.hpp"

namespace py = pybind11;
using namespace qcoh;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_py(const py::object& o) {
  return parse_json(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

using Factors = std::vector<std::pair<std::string, std::size_t>>;

DensityMatrix density(const Matrix& m, const Factors& factors) {
  if (factors.empty()) return DensityMatrix(m, SystemLayout({{"A", static_cast<std::size_t>(m.rows())}}));
  std::vector<Factor> f;
  for (const auto& [label, d] : factors) f.push_back({label, d});
  return DensityMatrix(m, SystemLayout(std::move(f)));
}

py::object curve(const std::vector<CurvePoint>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(to_json(p));
  return to_py(arr);
}

}  // namespace

PYBIND11_MODULE(_qcoh, m) {
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<LayoutError>(m, "LayoutError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<InfiniteDivergence>(m, "InfiniteDivergence", PyExc_ArithmeticError);

  m.def("rel_entropy", &rel_entropy, py::arg("rho"), py::arg("sigma"));
  m.def("rel_entropy_variance", &rel_entropy_variance, py::arg("rho"), py::arg("sigma"));
  m.def("dmax", &dmax, py::arg("rho"), py::arg("sigma"));
  m.def("dephase_all", &dephase_all, py::arg("m"));
  m.def("fidelity", py::overload_cast<const Matrix&, const Matrix&>(&fidelity), py::arg("rho"), py::arg("sigma"));
  m.def(
      "dh", [](const Matrix& r, const Matrix& s, double eps) { return to_py(to_json(dh(r, s, eps))); },
      py::arg("rho"), py::arg("sigma"), py::arg("eps"));
  m.def(
      "theta", [](const Matrix& s) { return to_py(to_json(theta(s))); }, py::arg("sigma"));
  m.def("iid_dh", &iid_dh, py::arg("rho"), py::arg("sigma"), py::arg("n"), py::arg("eps"));
  m.def(
      "second_order_curve",
      [](const Matrix& r, double eps, const std::vector<std::size_t>& ns, bool assisted, const Factors& f) {
        return curve(second_order_curve(density(r, f), eps, ns, assisted));
      },
      py::arg("rho"), py::arg("eps"), py::arg("n_list"), py::arg("assisted") = false, py::arg("factors") = Factors{});
  m.def(
      "strong_converse_curve",
      [](const Matrix& r, double rate, const std::vector<std::size_t>& ns, bool assisted, const Factors& f) {
        return curve(strong_converse_curve(density(r, f), rate, ns, assisted));
      },
      py::arg("rho"), py::arg("rate"), py::arg("n_list"), py::arg("assisted") = false, py::arg("factors") = Factors{});
  m.def(
      "run_extraction",
      [](const py::object& state, const py::object& hash) {
        const DensityMatrix rho = state_from_json(from_py(state));
        return to_py(to_json(run_extraction(rho, identity_channel(rho.layout()), hash_from_json(from_py(hash)))));
      },
      py::arg("state"), py::arg("hash"));
  m.def(
      "distill",
      [](const py::object& state, const py::object& hash, double eps) {
        const DensityMatrix rho = state_from_json(from_py(state));
        return to_py(to_json(build_distiller_from_extraction(rho, hash_from_json(from_py(hash)), eps)));
      },
      py::arg("state"), py::arg("hash"), py::arg("eps"));
  m.def(
      "selftest",
      [](std::uint64_t seed, bool quick) {
        SelftestOptions o;
        o.seed = seed;
        o.quick = quick;
        const auto results = run_selftest(o);
        return py::make_tuple(all_pass(results), format_report(o, results));
      },
      py::arg("seed") = 20240101, py::arg("quick") = true);
}
