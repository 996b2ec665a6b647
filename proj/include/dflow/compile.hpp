#pragma once

#include "dflow/analyzer.hpp"
#include "dflow/catalog.hpp"
#include "dflow/graph.hpp"

namespace dflow {

struct CompileOutput {
    ResolvedWorkflow workflow;
    DataflowGraph graph;
    std::vector<Diagnostic> warnings;
};

struct CompileResult {
    std::optional<CompileOutput> out;
    std::vector<Diagnostic> diagnostics;  // every finding, errors and warnings

    bool ok() const { return out.has_value() && !has_errors(diagnostics); }
};

// Full pipeline: parse -> resolve -> type-check -> graph build, collecting
// every diagnostic instead of stopping at the first.
CompileResult compile_collect(const std::string& source, const CatalogSet& catalogs);

// Same pipeline for callers that only handle success; throws CompileError
// carrying the first error.
CompileOutput compile_workflow(const std::string& source, const CatalogSet& catalogs);

// Loads a resolution table `{"catalogs": {url: path}, "schemas": {url: path}}`;
// relative paths resolve against the table file's directory. Keeps workflow
// URLs stable while tests read local fixtures.
CatalogSet load_catalog_table(const std::string& path);

std::string read_file(const std::string& path);  // throws RuntimeFailure("IoError")
void write_file(const std::string& path, const std::string& content);

}  // namespace dflow
