#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "biopatch/attn.hpp"
#include "biopatch/cli.hpp"
#include "biopatch/evalkit.hpp"
#include "biopatch/oracles.hpp"
#include "biopatch/similarity.hpp"

namespace py = pybind11;
namespace bp = biopatch;

namespace {

py::tuple run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = bp::cli::run(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

// rows: one list of floats per layer.
void write_attdump(const std::string& dir, int n_layers, const py::list& instances) {
  bp::AttentionDump dump;
  dump.n_layers = n_layers;
  for (const auto& item : instances) {
    const auto d = item.cast<py::dict>();
    const auto span = d["name_span"].cast<std::pair<int, int>>();
    const auto rows = d["rows"].cast<std::vector<std::vector<float>>>();
    if (static_cast<int>(rows.size()) != n_layers)
      throw bp::Error(bp::ErrorCode::kInvalidArgument, "rows must have one entry per layer");
    std::vector<float> flat;
    for (const auto& r : rows) {
      if (r.size() != rows.front().size())
        throw bp::Error(bp::ErrorCode::kInvalidArgument, "rows differ in length");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    bp::append_instance(dump, d["sample_id"].cast<std::string>(), span.first, span.second, flat);
  }
  bp::OutputTransaction tx;
  bp::write_attdump(dir, dump, tx);
  tx.commit();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the biopatch toolkit";
  m.attr("__version__") = std::string(bp::kToolkitVersion);

  py::register_exception<bp::Error>(m, "BiopatchError", PyExc_ValueError);

  m.def("run", &run, py::arg("args"),
        "Run a CLI subcommand; returns (exit_code, stdout, stderr).");

  m.def("mscore", &bp::oracles::mscore);
  m.def("ascore", &bp::oracles::ascore);
  m.def("parity", &bp::oracles::parity);
  m.def("anniversary", &bp::oracles::anniversary);
  m.def("year_diff", &bp::oracles::year_diff);
  m.def("odd_letters", &bp::oracles::odd_letters);
  m.def("first_last", &bp::oracles::first_last);
  m.def("field_of", &bp::oracles::field_of);
  m.def("country_of", &bp::oracles::country_of);

  m.def("parse_final_answer", [](const std::string& output, const std::string& kind) {
    return bp::parse_final_answer(output, bp::task_kind_from_string(kind));
  });
  m.def("exact_match", [](const std::string& a, const std::string& b) {
    return bp::exact_match(a, b);
  });
  m.def("tokenize", &bp::tokenize);
  m.def("context_similarity", [](const std::string& a, const std::string& b) {
    return bp::context_similarity(a, b);
  });

  m.def("write_attdump", &write_attdump, py::arg("dir"), py::arg("n_layers"),
        py::arg("instances"),
        "Write an .attdump directory from dicts with sample_id, name_span and rows.");
  m.def("validate_attdump", [](const std::string& dir) { bp::read_attdump(dir); });
}
