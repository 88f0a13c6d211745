#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "egp/analysis.hpp"
#include "egp/corpus.hpp"
#include "egp/dsl.hpp"
#include "egp/error.hpp"
#include "egp/identification.hpp"
#include "egp/implications.hpp"
#include "egp/sem.hpp"
#include "egp/separation.hpp"

namespace py = pybind11;
using namespace egp;

namespace {

py::object to_python(const Report& r) {
    return py::module_::import("json").attr("loads")(r.dump());
}

nlohmann::json from_python(const py::handle& obj) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::dict path_dict(const PathReport& p) { return to_python(path_json(p)); }

NodeSet to_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Causal DAG identification workbench";

    // Leaked on purpose: the types must outlive interpreter teardown.
    static auto* error_type = new py::exception<Error>(m, "Error", PyExc_ValueError);
    static auto* parse_error_type = new py::exception<ParseError>(m, "ParseError", error_type->ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ParseError& e) {
            py::object exc = py::handle(parse_error_type->ptr())(e.what());
            const auto& s = e.span();
            exc.attr("code") = std::string(error_code_name(e.code()));
            exc.attr("kind") = std::string(parse_error_kind_name(e.kind()));
            exc.attr("line") = s.line;
            exc.attr("column") = s.column;
            exc.attr("length") = s.length;
            exc.attr("cycle") = e.cycle();
            PyErr_SetObject(parse_error_type->ptr(), exc.ptr());
        } catch (const Error& e) {
            py::object exc = py::handle(error_type->ptr())(e.what());
            exc.attr("code") = std::string(error_code_name(e.code()));
            PyErr_SetObject(error_type->ptr(), exc.ptr());
        }
    });

    py::class_<CausalGraph>(m, "Graph")
        .def_property_readonly("name", &CausalGraph::name)
        .def_property_readonly("nodes", [](const CausalGraph& g) {
            std::vector<std::string> out;
            for (const auto& n : g.nodes()) out.push_back(n.name);
            return out;
        })
        .def_property_readonly("edges", [](const CausalGraph& g) {
            std::vector<std::tuple<std::string, std::string, std::string>> out;
            for (const auto& e : g.edges())
                out.emplace_back(e.from, e.to, e.kind == EdgeKind::directed ? "->" : "<->");
            return out;
        })
        .def("roles", [](const CausalGraph& g, const std::string& v) {
            const auto& r = g.role(v);
            std::vector<std::string> out;
            if (r.latent) out.push_back("latent");
            if (r.exposure) out.push_back("exposure");
            if (r.outcome) out.push_back("outcome");
            if (r.adjusted) out.push_back("adjusted");
            return out;
        })
        .def("parents", &CausalGraph::parents)
        .def("children", &CausalGraph::children)
        .def("ancestors", &CausalGraph::ancestors)
        .def("descendants", &CausalGraph::descendants)
        .def("mutilate_incoming", &CausalGraph::mutilate_incoming)
        .def("mutilate_outgoing", &CausalGraph::mutilate_outgoing)
        .def("__eq__", &CausalGraph::structurally_equal)
        .def("__repr__", [](const CausalGraph& g) { return "<egp.Graph " + g.name() + ">"; });

    m.def("parse", [](const std::string& text) { return parse(text); }, py::arg("text"));
    m.def("serialize", &serialize, py::arg("graph"));

    m.def("d_separated",
          [](const CausalGraph& g, const std::vector<std::string>& a, const std::vector<std::string>& b,
             const std::vector<std::string>& given) { return d_separated(g, to_set(a), to_set(b), to_set(given)); },
          py::arg("graph"), py::arg("a"), py::arg("b"), py::arg("given") = std::vector<std::string>{});

    m.def("enumerate_paths",
          [](const CausalGraph& g, const std::string& a, const std::string& b, const std::vector<std::string>& given,
             std::size_t limit) {
              auto e = enumerate_paths(g, a, b, to_set(given), limit);
              py::list paths;
              for (const auto& p : e.paths) paths.append(path_dict(p));
              return py::make_tuple(paths, e.truncated);
          },
          py::arg("graph"), py::arg("a"), py::arg("b"), py::arg("given") = std::vector<std::string>{},
          py::arg("limit") = kDefaultPathLimit);

    m.def("minimal_adjustment_sets",
          [](const CausalGraph& g, const std::string& d, const std::string& y, std::size_t max_size,
             std::size_t max_count) { return minimal_adjustment_sets(g, d, y, max_size, max_count).sets; },
          py::arg("graph"), py::arg("exposure"), py::arg("outcome"), py::arg("max_size") = kDefaultMaxAdjustmentSize,
          py::arg("max_count") = kDefaultMaxAdjustmentCount);

    m.def("backdoor_admissible",
          [](const CausalGraph& g, const std::string& d, const std::string& y, const std::vector<std::string>& z) {
              return to_python(verdict_json(backdoor_admissible(g, d, y, to_set(z))));
          },
          py::arg("graph"), py::arg("exposure"), py::arg("outcome"), py::arg("z"));

    m.def("iv_check",
          [](const CausalGraph& g, const std::string& z, const std::string& d, const std::string& y,
             const std::vector<std::string>& given) {
              const auto v = iv_check(g, z, d, y, to_set(given));
              py::dict out;
              out["valid"] = v.valid;
              out["relevant"] = v.relevant;
              out["excluded_and_exogenous"] = v.excluded_and_exogenous;
              out["witness"] = v.witness ? py::object(path_dict(*v.witness)) : py::object(py::none());
              return out;
          },
          py::arg("graph"), py::arg("instrument"), py::arg("exposure"), py::arg("outcome"),
          py::arg("given") = std::vector<std::string>{});

    m.def("implied_independencies",
          [](const CausalGraph& g, std::size_t max_cond) {
              std::vector<std::string> out;
              for (const auto& s : implied_independencies(g, max_cond)) out.push_back(s.to_string());
              return out;
          },
          py::arg("graph"), py::arg("max_cond") = kDefaultMaxConditioning);

    m.def("factorize",
          [](const CausalGraph& g, const std::map<std::string, std::string>& do_values) {
              return truncated_factorization(g, do_values).rendered;
          },
          py::arg("graph"), py::arg("do") = std::map<std::string, std::string>{});

    m.def("sample",
          [](const CausalGraph& g, std::size_t n, std::uint64_t seed, const std::map<EdgeKey, double>& coefficients,
             std::optional<std::pair<std::string, double>> intervention) {
              const auto model = instantiate_sem(g, coefficients, seed);
              const auto regime = intervention ? Regime::intervention(intervention->first, intervention->second)
                                               : Regime::observational();
              const auto data = sample(model, n, regime);
              return py::make_tuple(data.columns, data.values);
          },
          py::arg("graph"), py::arg("n"), py::arg("seed") = 0,
          py::arg("coefficients") = std::map<EdgeKey, double>{}, py::arg("do") = py::none());

    m.def("true_effect",
          [](const CausalGraph& g, const std::string& d, const std::string& y,
             const std::map<EdgeKey, double>& coefficients, std::uint64_t seed) {
              return true_effect(instantiate_sem(g, coefficients, seed), d, y);
          },
          py::arg("graph"), py::arg("exposure"), py::arg("outcome"),
          py::arg("coefficients") = std::map<EdgeKey, double>{}, py::arg("seed") = 0);

    m.def("analyze",
          [](const std::string& kind, const py::dict& body) {
              const auto k = query_kind_from_name(kind);
              if (!k) throw Error(ErrorCode::invalid_argument, "unknown query kind '" + kind + "'");
              return to_python(analyze(*k, from_python(body)));
          },
          py::arg("kind"), py::arg("body"));

    m.def("replay_corpus",
          [](const std::optional<std::string>& dir) {
              const auto entries = load_corpus(dir ? std::filesystem::path(*dir) : default_corpus_dir());
              std::vector<ReplayReport> reports;
              for (const auto& e : entries) reports.push_back(replay(e));
              return to_python(replay_json(reports));
          },
          py::arg("dir") = py::none());

    m.def("default_corpus_dir", [] { return default_corpus_dir().string(); });
}
