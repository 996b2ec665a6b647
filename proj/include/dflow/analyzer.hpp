#pragma once

#include <map>
#include <string>
#include <vector>

#include "dflow/catalog.hpp"

namespace dflow {

// One invocation node per distinct `port.Op` pair; all statements naming the
// pair refer to the same node.
struct ResolvedInvocation {
    std::string port;
    std::string op;
    std::string endpoint;
    OperationSig sig;
    SourcePos first_pos;

    std::string key() const { return port + "." + op; }
};

struct VarInfo {
    enum class Def { Input, Retrieve, AssignScalar, AssignVar, AssignTuple };
    std::string name;
    TypeExpr type;                     // type at the (first) definition site
    Def def = Def::Input;
    int def_stmt = -1;                 // statement index; -1 for interface inputs
    std::vector<SourcePos> def_sites;  // >1 means double assignment
};

// A checked parameter feed: statement `stmt` fills parameter `param_index` of
// invocation `inv_key`. When the source variable is a tuple fed positionally,
// `tuple_elem` selects the element, otherwise -1 (whole value).
struct ParamBinding {
    int stmt = -1;
    std::string inv_key;
    int param_index = -1;
    bool src_is_scalar = false;
    std::string src_var;
    ScalarLit scalar;
    int tuple_elem = -1;
};

struct ResolvedWorkflow {
    WorkflowSpec spec;  // statements post-desugar
    std::vector<std::pair<std::string, TypeExpr>> inputs;   // interface order
    std::vector<std::pair<std::string, TypeExpr>> outputs;
    std::map<std::string, ResolvedInvocation> invocations;  // by "port.Op"
    std::map<std::string, VarInfo> variables;
    std::vector<ParamBinding> bindings;  // populated by check_types

    // Follows `w = v` aliases to the defining variable.
    const VarInfo& canonical_def(const std::string& var) const;
};

struct AnalysisResult {
    std::optional<ResolvedWorkflow> workflow;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return workflow.has_value() && !has_errors(diagnostics); }
};

// Binds every name against the catalogs/schemas: descriptions, services,
// ports, operations, schema types, and variable uses (definition must precede
// use in program order). Infers variable types. Collects diagnostics instead
// of throwing; `workflow` is absent when resolution failed structurally.
AnalysisResult resolve(const WorkflowSpec& spec, const CatalogSet& catalogs);

// Arity/type validation: every parameter slot filled exactly once with a
// compatible value, single assignment holds, declared outputs are bound and
// compatible. On success fills `resolved.bindings` for the graph builder.
std::vector<Diagnostic> check_types(ResolvedWorkflow& resolved);

}  // namespace dflow
