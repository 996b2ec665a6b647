#include "dflow/compile.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dflow/engine.hpp"
#include "dflow/parser.hpp"

namespace dflow {

CompileResult compile_collect(const std::string& source, const CatalogSet& catalogs) {
    CompileResult result;
    WorkflowSpec spec;
    try {
        spec = parse_source(source);
    } catch (const CompileError& e) {
        result.diagnostics.push_back(e.diagnostic());
        return result;
    }

    AnalysisResult analysis = resolve(spec, catalogs);
    result.diagnostics = analysis.diagnostics;
    if (!analysis.ok()) return result;

    auto type_diags = check_types(*analysis.workflow);
    result.diagnostics.insert(result.diagnostics.end(), type_diags.begin(), type_diags.end());
    if (has_errors(result.diagnostics)) return result;

    CompileOutput out;
    out.workflow = std::move(*analysis.workflow);
    try {
        out.graph = build_graph(out.workflow);
    } catch (const CompileError& e) {
        result.diagnostics.push_back(e.diagnostic());
        return result;
    }
    out.warnings = result.diagnostics;
    result.out = std::move(out);
    return result;
}

CompileOutput compile_workflow(const std::string& source, const CatalogSet& catalogs) {
    CompileResult result = compile_collect(source, catalogs);
    if (!result.ok()) {
        for (const auto& d : result.diagnostics)
            if (d.severity == Severity::Error) throw CompileError(d);
        throw CompileError("ParseError", {}, "compilation failed without diagnostics");
    }
    return std::move(*result.out);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFailure("IoError", "cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("IoError", "cannot write '" + path + "'");
    out << content;
}

CatalogSet load_catalog_table(const std::string& path) {
    nlohmann::json table;
    try {
        table = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw CompileError("FormatError", {}, "catalog table " + path + ": " + e.what());
    }
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve_path = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    CatalogSet set;
    const nlohmann::json catalogs = table.value("catalogs", nlohmann::json::object());
    for (const auto& [url, file] : catalogs.items()) {
        std::string full = resolve_path(file.get<std::string>());
        set.catalogs.emplace(url, load_catalog_text(read_file(full), full));
    }
    const nlohmann::json schemas = table.value("schemas", nlohmann::json::object());
    for (const auto& [url, file] : schemas.items()) {
        std::string full = resolve_path(file.get<std::string>());
        set.schemas.emplace(url, load_schema_text(read_file(full), full));
    }
    return set;
}

}  // namespace dflow
