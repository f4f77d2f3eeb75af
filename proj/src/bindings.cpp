#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wcc/cli.hpp"
#include "wcc/coding.hpp"
#include "wcc/error.hpp"
#include "wcc/estimators.hpp"
#include "wcc/maps.hpp"
#include "wcc/renewal.hpp"
#include "wcc/spec_parser.hpp"
#include "wcc/symbolic.hpp"

namespace py = pybind11;
using namespace wcc;

namespace {

Partition partition_for(const MapSpec& spec, const std::string& text) {
  return text.empty() || text == "default" ? default_partition(spec) : parse_partition(text);
}

py::dict fit_dict(const ChaosIndexEstimate& e) {
  py::dict d;
  d["q_hat"] = e.q_hat;
  d["slope"] = e.slope;
  d["ci_low"] = e.ci_low;
  d["ci_high"] = e.ci_high;
  d["prefactor"] = e.prefactor;
  d["r_squared"] = e.r_squared;
  d["points"] = e.points;
  d["interval"] = e.interval_method;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Intermittent maps, run-length coding and information growth";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
  py::register_exception<MalformedStream>(m, "MalformedStream", PyExc_ValueError);
  py::register_exception<DegenerateFit>(m, "DegenerateFit", PyExc_RuntimeError);
  py::register_exception<Unsupported>(m, "Unsupported", PyExc_RuntimeError);
  py::register_exception<Inconclusive>(m, "Inconclusive", PyExc_RuntimeError);
  py::register_exception<InsufficientTail>(m, "InsufficientTail", PyExc_RuntimeError);

  py::class_<MapSpec>(m, "MapSpec")
      .def(py::init([](const std::string& text) { return parse_map_spec(text); }), py::arg("spec"))
      .def_property_readonly("is_mp", &MapSpec::is_mp)
      .def_property_readonly("branch_point", &MapSpec::branch_point)
      .def("__repr__", [](const MapSpec& s) { return "MapSpec('" + s.describe() + "')"; })
      .def("__str__", &MapSpec::describe);

  m.def("apply", &apply, py::arg("x"), py::arg("spec"));
  m.def("first_passage_time", &first_passage_time, py::arg("x"), py::arg("spec"));
  m.def(
      "induced_apply",
      [](double x, const MapSpec& s) {
        const InducedStep st = induced_apply(x, s);
        return py::make_tuple(st.x, st.tau);
      },
      py::arg("x"), py::arg("spec"));
  m.def("induced_log_derivative", &induced_log_derivative, py::arg("x"), py::arg("spec"));
  m.def(
      "level_sets", [](const MapSpec& s, std::uint64_t k) { return level_sets(s, k).boundaries; }, py::arg("spec"),
      py::arg("max_index"));

  m.def(
      "symbolize",
      [](double x0, std::size_t n, const MapSpec& s, const std::string& partition) {
        return symbolize(x0, n, s, partition_for(s, partition)).to_string();
      },
      py::arg("x0"), py::arg("n"), py::arg("spec"), py::arg("partition") = "default");
  m.def(
      "count_passages", [](const std::string& w) { const auto s = SymbolString::parse(w); return count_passages(s, s.size()); },
      py::arg("symbols"));

  m.def(
      "run_length", [](const std::string& w, std::uint32_t a) { return run_length(SymbolString::parse(w, a)).digits(); },
      py::arg("symbols"), py::arg("alphabet") = 0);
  m.def(
      "prefix_code", [](std::uint64_t v) { return prefix_encode_nat(v).to_string(); }, py::arg("value"));
  m.def(
      "encode",
      [](const std::string& w, std::uint32_t a) {
        const auto bytes = serialize(encode(SymbolString::parse(w, a)));
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("symbols"), py::arg("alphabet") = 0);
  m.def(
      "decode",
      [](const py::bytes& data) {
        const std::string raw = data;
        return decode(deserialize(std::vector<std::uint8_t>(raw.begin(), raw.end()))).to_string();
      },
      py::arg("data"));
  m.def(
      "information_length",
      [](const std::string& w, std::uint32_t a) { return information_length(SymbolString::parse(w, a)); },
      py::arg("symbols"), py::arg("alphabet") = 0);
  m.def(
      "verify_bounds",
      [](const std::string& w) {
        const BoundsCheck b = verify_bounds(SymbolString::parse(w, 2));
        py::dict d;
        d["lower"] = b.lower;
        d["information"] = b.information;
        d["upper"] = b.upper;
        d["slack"] = b.slack;
        d["ok"] = b.ok;
        return d;
      },
      py::arg("symbols"));
  m.def(
      "truncated_complexity",
      [](const std::string& w, std::uint64_t k) { return truncated_complexity(SymbolString::parse(w), k); },
      py::arg("symbols"), py::arg("k"));

  m.def(
      "mean_recurrence_time", [](const MapSpec& s) { return mean_recurrence_time(s.eps()).value; }, py::arg("spec"));
  m.def(
      "induced_entropy", [](const MapSpec& s) { return induced_entropy_pl(s.eps()).value; }, py::arg("spec"));
  m.def(
      "classify",
      [](const MapSpec& s) {
        const RegimePrediction p = classify(s.eps());
        py::dict d;
        d["regime"] = to_string(p.regime);
        d["law"] = p.law();
        d["t0"] = p.t0;
        d["alpha"] = p.alpha;
        d["amplitude"] = p.amplitude;
        d["prefactor"] = p.coefficient;
        return d;
      },
      py::arg("spec"));

  m.def(
      "scaling",
      [](const MapSpec& s, const std::vector<std::uint64_t>& grid, std::uint64_t samples, std::uint64_t seed,
         const std::string& partition, unsigned threads) {
        ScalingTable t;
        {
          py::gil_scoped_release release;
          EnsembleOptions o;
          o.threads = threads;
          t = run_ensemble(s, partition_for(s, partition), grid, samples, seed, o);
        }
        py::dict d;
        py::list rows;
        for (const ScalingRow& r : t.rows) {
          py::dict row;
          row["n"] = r.n;
          row["mean_N"] = r.mean_N;
          row["var_N"] = r.var_N;
          row["mean_I"] = r.mean_I;
          row["var_I"] = r.var_I;
          rows.append(row);
        }
        d["rows"] = rows;
        d["csv"] = t.to_csv();
        try {
          d["fit_N"] = fit_dict(fit_power(t, Column::N));
        } catch (const std::exception&) {
          d["fit_N"] = py::none();
        }
        return d;
      },
      py::arg("spec"), py::arg("grid"), py::arg("samples"), py::arg("seed"), py::arg("partition") = "default",
      py::arg("threads") = 0);
  m.def(
      "fit_points",
      [](const std::vector<double>& n, const std::vector<double>& v, std::uint64_t min_n) {
        FitOptions o;
        o.min_n = min_n;
        return fit_dict(fit_points(n, v, o));
      },
      py::arg("n"), py::arg("values"), py::arg("min_n") = 1000);
  m.def(
      "birkhoff_entropy",
      [](const MapSpec& s, std::uint64_t passages, std::uint64_t samples, std::uint64_t seed) {
        py::gil_scoped_release release;
        const BirkhoffEstimate b = birkhoff_induced_entropy(s, passages, samples, seed);
        return std::make_pair(b.mean, b.standard_error);
      },
      py::arg("spec"), py::arg("passages"), py::arg("samples"), py::arg("seed"));
  m.def(
      "tail_exponent",
      [](const MapSpec& s, std::uint64_t samples, std::uint64_t seed, std::uint64_t cutoff) {
        py::gil_scoped_release release;
        TailOptions o;
        o.cutoff = cutoff;
        const TailEstimate t = passage_tail_exponent(s, samples, seed, o);
        return std::make_pair(t.exponent, t.standard_error);
      },
      py::arg("spec"), py::arg("samples"), py::arg("seed"), py::arg("cutoff") = 50);
  m.def("dyadic_grid", &dyadic_grid, py::arg("n_min"), py::arg("n_max"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
