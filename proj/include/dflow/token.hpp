#pragma once

#include <array>
#include <string>
#include <string_view>

#include "dflow/diagnostics.hpp"

namespace dflow {

enum class TokenKind {
    Keyword,
    Identifier,
    ScalarLiteral,  // numbers, true/false, quoted strings, raw URL remainders
    Arrow,          // ->
    Dot,
    Comma,
    Colon,
    Equals,
    LParen,
    RParen,
    Newline,
    Eof,
};

struct Token {
    TokenKind kind = TokenKind::Eof;
    std::string lexeme;  // for strings: the decoded text; for URLs: the trimmed remainder
    SourcePos pos;
};

// The reserved words of the language. `true`/`false` are scalar literals, not
// keywords, so they remain usable wherever a scalar is expected.
inline constexpr std::array<std::string_view, 17> kKeywords = {
    "description", "service", "port",    "schema", "is",   "input", "output", "any", "int",
    "double",      "float",   "decimal", "byte",   "boolean", "string", "long", "short",
};

inline bool is_keyword(std::string_view s) {
    for (auto k : kKeywords)
        if (k == s) return true;
    return false;
}

const char* token_kind_name(TokenKind k);

}  // namespace dflow
