#pragma once

#include <string_view>

#include "dflow/ast.hpp"
#include "dflow/lexer.hpp"

namespace dflow {

// Builds a WorkflowSpec from tokens. Stops at the first violation with
// CompileError("ParseError") carrying the expected-token set and position.
//
// `invocation -> invocation[, ...]` composition lines have no statement
// variant of their own: they desugar into Retrieve(inv, tmpN) followed by
// FeedVariable(tmpN, targets), where tmpN is chosen to not collide with any
// identifier in the source. Rendering such a spec prints the two statements.
WorkflowSpec parse(const std::vector<Token>& tokens);

inline WorkflowSpec parse_source(std::string_view source) { return parse(tokenize(source)); }

}  // namespace dflow
