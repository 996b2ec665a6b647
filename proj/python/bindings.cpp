#include <pybind11/pybind11.h>

#include "dflow/compile.hpp"
#include "dflow/engine.hpp"
#include "dflow/invokers.hpp"
#include "dflow/parser.hpp"
#include "dflow/printer.hpp"
#include "dflow/testbed.hpp"

namespace py = pybind11;

namespace {

// The module speaks JSON strings at the boundary; the `dflow` package wraps
// them in dict-friendly helpers.

dflow::CatalogSet catalogs_from_json(const std::string& catalogs_json) {
    dflow::CatalogSet set;
    if (catalogs_json.empty()) return set;
    auto doc = nlohmann::json::parse(catalogs_json);
    const nlohmann::json catalogs = doc.value("catalogs", nlohmann::json::object());
    for (const auto& [url, body] : catalogs.items())
        set.catalogs.emplace(url, dflow::load_catalog(body, url));
    const nlohmann::json schemas = doc.value("schemas", nlohmann::json::object());
    for (const auto& [url, body] : schemas.items())
        set.schemas.emplace(url, dflow::load_schema(body, url));
    return set;
}

std::string compile_to_json(const std::string& source, const std::string& catalogs_json) {
    dflow::CompileResult result =
        dflow::compile_collect(source, catalogs_from_json(catalogs_json));
    nlohmann::json diags = nlohmann::json::array();
    for (const auto& d : result.diagnostics) diags.push_back(dflow::to_json(d));
    nlohmann::json out{{"ok", result.ok()}, {"diagnostics", diags}};
    if (result.ok()) out["graph"] = dflow::graph_to_json(result.out->graph);
    return out.dump();
}

std::string graph_dot(const std::string& source, const std::string& catalogs_json) {
    return dflow::to_dot(
        dflow::compile_workflow(source, catalogs_from_json(catalogs_json)).graph);
}

std::string run_local(const std::string& source, const std::string& catalogs_json,
                      const std::string& inputs_json, int workers) {
    auto compiled = dflow::compile_workflow(source, catalogs_from_json(catalogs_json));
    std::map<std::string, dflow::Value> inputs;
    const nlohmann::json jin = nlohmann::json::parse(inputs_json);
    for (const auto& [name, jv] : jin.items()) inputs[name] = dflow::value_from_json(jv);
    dflow::MockInvoker invoker;
    dflow::EngineOptions options;
    options.workers = workers;
    dflow::Engine engine(compiled.graph, invoker, options);
    return dflow::outputs_to_json(engine.run_to_completion(inputs));
}

std::string partition_workflow(const std::string& source, const std::string& catalogs_json,
                               const std::string& placement_json) {
    auto compiled = dflow::compile_workflow(source, catalogs_from_json(catalogs_json));
    auto placement = dflow::placement_from_json(nlohmann::json::parse(placement_json));
    nlohmann::json out = nlohmann::json::array();
    for (const auto& f : dflow::partition(compiled.graph, placement))
        out.push_back(dflow::fragment_to_json(f));
    return out.dump();
}

std::string run_experiment_json(const std::string& params_json) {
    auto params = dflow::experiment_params_from_json(nlohmann::json::parse(params_json));
    return dflow::report_to_json(dflow::run_experiment(params)).dump();
}

std::string canonical_render(const std::string& source) {
    return dflow::render(dflow::parse_source(source));
}

}  // namespace

PYBIND11_MODULE(_dflow, m) {
    m.doc() = "dataflow workflow compiler and orchestration core";

    py::register_exception<dflow::CompileError>(m, "CompileError");
    py::register_exception<dflow::RuntimeFailure>(m, "RuntimeFailure");

    m.def("compile", &compile_to_json, py::arg("source"), py::arg("catalogs_json") = "",
          "Compile source; returns {ok, diagnostics, graph} as JSON text.");
    m.def("graph_dot", &graph_dot, py::arg("source"), py::arg("catalogs_json") = "",
          "DOT rendering of the compiled dataflow graph.");
    m.def("run_local", &run_local, py::arg("source"), py::arg("catalogs_json") = "",
          py::arg("inputs_json") = "{}", py::arg("workers") = 1,
          "Execute with the in-process engine and mock services; returns outputs JSON.");
    m.def("partition", &partition_workflow, py::arg("source"), py::arg("catalogs_json"),
          py::arg("placement_json"), "Site fragments for a placement, as JSON text.");
    m.def("run_experiment", &run_experiment_json, py::arg("params_json") = "{}",
          "Virtual-clock benchmark; returns the metrics report as JSON text.");
    m.def("pattern_source", &dflow::pattern_source, py::arg("pattern"),
          "Benchmark workflow source for pipeline|distribution|aggregation.");
    m.def("canonical_render", &canonical_render, py::arg("source"),
          "Parse and pretty-print back to canonical form.");
}
