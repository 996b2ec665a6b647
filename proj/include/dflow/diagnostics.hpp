#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace dflow {

struct SourcePos {
    int line = 0;    // 1-based; 0 means "no position"
    int column = 0;  // 1-based byte column

    bool operator==(const SourcePos&) const = default;
};

enum class Severity { Error, Warning };

// One compiler/runtime finding. `code` is a stable machine-readable name
// ("ParseError", "TypeMismatch", ...); `message` is for humans.
struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;
    SourcePos pos;
    std::string message;
};

inline nlohmann::json to_json(const Diagnostic& d) {
    return nlohmann::json{{"severity", d.severity == Severity::Error ? "error" : "warning"},
                          {"code", d.code},
                          {"line", d.pos.line},
                          {"col", d.pos.column},
                          {"msg", d.message}};
}

// One diagnostic per line, machine-parseable.
inline std::string to_json_lines(const std::vector<Diagnostic>& ds) {
    std::string out;
    for (const auto& d : ds) {
        out += to_json(d).dump();
        out += '\n';
    }
    return out;
}

// Thrown by phases that stop at the first violation (lexing, parsing, graph
// construction). Analysis phases collect Diagnostic lists instead.
class CompileError : public std::runtime_error {
  public:
    explicit CompileError(Diagnostic d)
        : std::runtime_error(d.code + ": " + d.message), diag_(std::move(d)) {}

    CompileError(std::string code, SourcePos pos, std::string message)
        : CompileError(Diagnostic{Severity::Error, std::move(code), pos, std::move(message)}) {}

    const Diagnostic& diagnostic() const { return diag_; }

  private:
    Diagnostic diag_;
};

inline bool has_errors(const std::vector<Diagnostic>& ds) {
    for (const auto& d : ds)
        if (d.severity == Severity::Error) return true;
    return false;
}

}  // namespace dflow
