#pragma once

#include <string_view>
#include <vector>

#include "dflow/token.hpp"

namespace dflow {

// Tokenizes a whole workflow source. Line-oriented: every physical line break
// yields a Newline token and a trailing Eof is always appended. `#` starts a
// comment running to end of line. On a `description`/`schema` definition line
// the text after `is` is captured verbatim (trimmed) as one ScalarLiteral so
// URLs need no quoting. Throws CompileError("LexError") at the first
// offending character.
std::vector<Token> tokenize(std::string_view source);

}  // namespace dflow
