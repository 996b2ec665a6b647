#pragma once

#include <string>

#include "dflow/ast.hpp"

namespace dflow {

// Canonical pretty-printer. parse(render(spec)) reproduces the same AST
// (positions aside); consecutive interface variables of one type collapse
// onto a single declaration line.
std::string render(const WorkflowSpec& spec);

std::string render_type(const TypeRef& t);

}  // namespace dflow
