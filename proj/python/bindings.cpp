#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "troquad/cli.hpp"
#include "troquad/errors.hpp"
#include "troquad/estimator.hpp"
#include "troquad/feynman.hpp"
#include "troquad/permutahedron.hpp"
#include "troquad/polynomial.hpp"

namespace py = pybind11;
using namespace troquad;

namespace {

FeynmanGraph parse_graph(const std::string& text) {
  return FeynmanGraph::from_json(nlohmann::json::parse(text));
}

std::string integrate(const std::string& graph_json, std::uint64_t samples, std::uint64_t seed,
                      unsigned workers, int eps_order) {
  const auto g = parse_graph(graph_json);
  const auto t = build_feynman_tables(g);
  EstimateOptions opt;
  opt.n_samples = samples;
  opt.seed = seed;
  opt.workers = workers;
  opt.scale = std::exp(t.log_I_tr());
  opt.orders = static_cast<std::size_t>(eps_order) + 1;
  EstimateReport r;
  {
    py::gil_scoped_release release;
    r = estimate(feynman_kernel(g, t, eps_order), opt);
  }
  return r.to_json().dump();
}

py::list sample(const std::string& graph_json, std::size_t count, std::uint64_t seed) {
  const auto g = parse_graph(graph_json);
  const auto t = build_feynman_tables(g);
  RandomStream rng(seed);
  TropicalSample s(g.num_edges());
  py::list out;
  for (std::size_t i = 0; i < count; ++i) {
    sample_gp(t, rng, s);
    out.append(s.log_x);
  }
  return out;
}

double log_j(std::size_t n, const std::vector<double>& r) {
  return build_subset_table(BooleanTable(n, r)).log_I_tr();
}

double trop_eval(const std::string& poly, const std::vector<double>& y) {
  std::istringstream in(poly);
  return trop_eval_log(parse_polynomial(in), y);
}

py::tuple run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_cli(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", error.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", error.ptr());
  py::register_exception<MemoryCapError>(m, "MemoryCapError", error.ptr());
  py::register_exception<RejectionBudgetError>(m, "RejectionBudgetError", error.ptr());

  m.def("integrate", &integrate, py::arg("graph_json"), py::arg("samples"), py::arg("seed"),
        py::arg("workers"), py::arg("eps_order"));
  m.def("sample", &sample, py::arg("graph_json"), py::arg("count"), py::arg("seed"));
  m.def("log_j", &log_j, py::arg("n"), py::arg("r"));
  m.def("trop_eval_log", &trop_eval, py::arg("poly"), py::arg("y"));
  m.def("run", &run, py::arg("args"));
}
