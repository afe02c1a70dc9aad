#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cim/fixtures.hpp"
#include "cim/parser.hpp"
#include "cim/query.hpp"
#include "cim/service.hpp"
#include "cim/workspace.hpp"

namespace py = pybind11;
using namespace cim;
using nlohmann::json;

namespace {

json violations_json(const std::vector<Violation>& vs) {
    json out = json::array();
    for (const auto& v : vs)
        out.push_back({{"kind", v.kind}, {"subject", v.subject}, {"message", v.message}, {"witness", v.witness}});
    return out;
}

CqlQuery query_from(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw QueryError("invalid-query", std::string("malformed JSON: ") + e.what());
        }
        return CqlQuery::from_json(j);
    }
    return parse_cql(text);
}

const Session& compiled(const Session& s) {
    if (!s.compiled.ok()) throw CompileError(s.compiled.diagnostics);
    return s;
}

}  // namespace

PYBIND11_MODULE(_cim, m) {
    m.doc() = "Conceptual model run-time: models, views, queries, and checks.";

    py::register_exception<Error>(m, "Error");
    py::register_exception<ParseError>(m, "ParseError", m.attr("Error"));
    py::register_exception<IoError>(m, "IoError", m.attr("Error"));
    py::register_exception<LoadError>(m, "LoadError", m.attr("Error"));
    py::register_exception<CompileError>(m, "CompileError", m.attr("Error"));
    py::register_exception<QueryError>(m, "QueryError", m.attr("Error"));
    py::register_exception<PlanError>(m, "PlanError", m.attr("Error"));

    m.attr("API_VERSION") = kApiVersion;

    py::class_<Session, std::shared_ptr<Session>>(m, "Session")
        .def_static(
            "open",
            [](const std::filesystem::path& location, bool materialize) {
                return std::const_pointer_cast<Session>(Session::open(location, materialize));
            },
            py::arg("location"), py::arg("materialize") = false)
        .def("diagnostics_json",
             [](const Session& s) { return to_json(s.compiled.diagnostics).dump(); })
        .def("ok", [](const Session& s) { return s.compiled.ok(); })
        .def("views_json", [](const Session& s) { return compiled(s).compiled.views.to_json().dump(); })
        .def("model_json",
             [](const Session& s) {
                 return export_graph_json(s.workspace.cdl, s.workspace.sdl, s.workspace.mdl).dump();
             })
        .def(
            "query_json",
            [](const Session& s, const std::string& text, bool oracle) {
                const CqlQuery q = query_from(text);
                const Workspace& w = s.workspace;
                const Relation r = oracle ? oracle_execute(q, w.cdl, w.sdl, w.mdl, s.store)
                                          : execute(q, compiled(s).compiled.views, w.cdl, s.store);
                return result_to_json(r).dump();
            },
            py::arg("query"), py::arg("oracle") = false)
        .def("plan_json",
             [](const Session& s, const std::string& text) {
                 return rewrite(query_from(text), compiled(s).compiled.views, s.workspace.cdl).to_json().dump();
             })
        .def("check_json", [](const Session& s) {
            const Workspace& w = s.workspace;
            const ViewSet& views = compiled(s).compiled.views;
            json out{{"foreignKeys", violations_json(s.store.check_foreign_keys(w.sdl))},
                     {"exclusivity", violations_json(check_exclusivity(w.cdl, views, s.store))},
                     {"cardinality", violations_json(check_cardinalities(w.cdl, views, s.store))},
                     {"hierarchies", json::array()}};
            for (const auto& h : check_summarizability(w.cdl, views, s.store).hierarchies)
                out["hierarchies"].push_back(
                    {{"hierarchy", h.hierarchy}, {"summarizable", h.summarizable}, {"witnesses", violations_json(h.witnesses)}});
            return out.dump();
        });

    py::class_<Service>(m, "Service")
        .def(py::init<>())
        .def("load", &Service::load, py::arg("workspace"), py::arg("materialize") = false)
        .def("ready", &Service::ready)
        .def("handle", [](const Service& s, const std::string& method, const std::string& target, const std::string& body) {
            const HttpResponse r = s.handle(method, target, body);
            return py::make_tuple(r.status, r.body);
        }, py::arg("method"), py::arg("target"), py::arg("body") = "");

    m.def(
        "validate_json",
        [](const std::string& cdl, const std::string& sdl, const std::string& mdl) {
            return to_json(validate_all(parse_cdl(cdl), parse_sdl(sdl), parse_mdl(mdl))).dump();
        },
        py::arg("cdl"), py::arg("sdl"), py::arg("mdl"));
    m.def(
        "compile_json",
        [](const std::string& cdl, const std::string& sdl, const std::string& mdl) {
            const CompileResult r = compile(parse_cdl(cdl), parse_sdl(sdl), parse_mdl(mdl));
            json j = r.views.to_json();
            j["diagnostics"] = to_json(r.diagnostics);
            return j.dump();
        },
        py::arg("cdl"), py::arg("sdl"), py::arg("mdl"));
    m.def("parse_query_json", [](const std::string& text) { return query_from(text).to_json().dump(); });
    m.def("query_text", [](const std::string& text) { return query_from(text).to_text(); });
    m.def("generate_olympic_data", &fixtures::generate_olympic_data, py::arg("seed") = 2010,
          py::arg("scale") = 10000);
}
