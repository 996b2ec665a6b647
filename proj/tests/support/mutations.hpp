#pragma once

// A battery of single-defect workflow sources. Every case must be rejected
// with the given diagnostic code at the given position (line 0 = skip the
// position check; column 0 = check the line only). Shared by the frontend
// unit tests and the acceptance gate.

#include <string>
#include <vector>

#include "dflow/compile.hpp"

namespace dflow::testing {

struct MutationCase {
    std::string name;
    std::string source;
    std::string code;  // expected diagnostic code
    int line = 0;      // expected position (1-based); 0 disables the check
    int column = 0;    // 0 checks the line only
};

// Lines 1-7 of most cases; statements start on line 8, column 1.
inline const char* kPrelude =
    "description desc is http://services.example/catalog.json\n"
    "service s1 is desc.Service1\n"
    "port p1 is s1.Port1\n"
    "input:\n"
    "    int a\n"
    "output:\n"
    "    any x\n";

inline std::vector<MutationCase> mutation_battery() {
    auto with = [](const char* tail) { return std::string(kPrelude) + tail; };
    std::vector<MutationCase> cases;

    // --- lexical defects ---
    cases.push_back({"lex-stray-char", with("a -> p1.Op1 @\n"), "LexError", 8, 13});
    cases.push_back({"lex-stray-minus", with("a - p1.Op1\n"), "LexError", 8, 3});
    cases.push_back(
        {"lex-unterminated-string", with("\"abc -> p1.Mix.s\n"), "LexError", 8, 1});
    cases.push_back({"lex-int-overflow",
                     with("99999999999999999999 -> p1.Op1.a\np1.Op1 -> x\n"), "LexError", 8,
                     1});

    // --- syntactic defects ---
    cases.push_back({"parse-missing-arrow", with("a p1.Op1\n"), "ParseError", 8, 3});
    cases.push_back({"parse-bare-with-param", with("p1.Op1.a\n"), "ParseError", 8, 1});
    cases.push_back(
        {"parse-param-on-source", with("p1.Op1.a -> x\n"), "ParseError", 8, 1});
    cases.push_back({"parse-feed-to-variable", with("a -> p1\n"), "ParseError", 8, 6});
    cases.push_back(
        {"parse-assign-from-invocation", with("x = p1.Op1\n"), "ParseError", 8, 7});
    cases.push_back({"parse-empty-tuple", with("x = ()\n"), "ParseError", 8, 6});
    cases.push_back({"parse-decl-missing-is",
                     "description desc is http://services.example/catalog.json\n"
                     "service s1 desc.Service1\n",
                     "ParseError", 2, 12});
    cases.push_back({"parse-bad-interface-type",
                     "description desc is http://services.example/catalog.json\n"
                     "service s1 is desc.Service1\n"
                     "port p1 is s1.Port1\n"
                     "input:\n"
                     "    bogus b\n"
                     "output:\n"
                     "    any x\n"
                     "b -> p1.Op1\np1.Op1 -> x\n",
                     "ParseError", 5, 5});
    cases.push_back(
        {"parse-trailing-tokens", with("a -> p1.Op1 extra\n"), "ParseError", 8, 13});

    // --- resolution defects ---
    cases.push_back({"unknown-description-url",
                     "description desc is http://nope.example/catalog.json\n"
                     "service s1 is desc.Service1\n"
                     "port p1 is s1.Port1\n"
                     "input:\n    int a\noutput:\n    any x\n"
                     "a -> p1.Op1\np1.Op1 -> x\n",
                     "UnknownDescription", 1, 13});
    cases.push_back({"unknown-description-ref",
                     "description desc is http://services.example/catalog.json\n"
                     "service s1 is nosuch.Service1\n"
                     "port p1 is s1.Port1\n"
                     "input:\n    int a\noutput:\n    any x\n"
                     "a -> p1.Op1\np1.Op1 -> x\n",
                     "UnknownDescription", 2, 9});
    cases.push_back({"unknown-service-in-catalog",
                     "description desc is http://services.example/catalog.json\n"
                     "service s1 is desc.NoService\n"
                     "port p1 is s1.Port1\n"
                     "input:\n    int a\noutput:\n    any x\n"
                     "a -> p1.Op1\np1.Op1 -> x\n",
                     "UnknownService", 2, 9});
    cases.push_back({"unknown-service-ref",
                     "description desc is http://services.example/catalog.json\n"
                     "service s1 is desc.Service1\n"
                     "port p1 is ghost.Port1\n"
                     "input:\n    int a\noutput:\n    any x\n"
                     "a -> p1.Op1\np1.Op1 -> x\n",
                     "UnknownService", 3, 6});
    cases.push_back({"unknown-port-in-catalog",
                     "description desc is http://services.example/catalog.json\n"
                     "service s1 is desc.Service1\n"
                     "port p1 is s1.NoPort\n"
                     "input:\n    int a\noutput:\n    any x\n"
                     "a -> p1.Op1\np1.Op1 -> x\n",
                     "UnknownPort", 3, 6});
    cases.push_back(
        {"unknown-port-invocation", with("a -> p9.Op1\np1.Op1 -> x\n"), "UnknownPort", 8, 6});
    cases.push_back(
        {"unknown-operation", with("a -> p1.NoOp\np1.Op1 -> x\n"), "UnknownOperation", 8, 6});
    cases.push_back({"unknown-schema-alias",
                     "description desc is http://services.example/catalog.json\n"
                     "service s1 is desc.Service1\n"
                     "port p1 is s1.Port1\n"
                     "input:\n"
                     "    ghost:newType b\n"
                     "output:\n"
                     "    any x\n"
                     "b -> p1.Describe\np1.Describe -> x\n",
                     "UnknownSchema", 5, 5});
    cases.push_back({"unknown-schema-url",
                     "description desc is http://services.example/catalog.json\n"
                     "service s1 is desc.Service1\n"
                     "port p1 is s1.Port1\n"
                     "schema schm is http://nope.example/types.json\n"
                     "input:\n    schm:newType b\noutput:\n    any x\n"
                     "b -> p1.Describe\np1.Describe -> x\n",
                     "UnknownSchema", 4, 8});
    cases.push_back({"unknown-type-in-schema",
                     "description desc is http://services.example/catalog.json\n"
                     "service s1 is desc.Service1\n"
                     "port p1 is s1.Port1\n"
                     "schema schm is http://types.example/types.json\n"
                     "input:\n"
                     "    schm:noType b\n"
                     "output:\n    any x\n"
                     "b -> p1.Describe\np1.Describe -> x\n",
                     "UnknownType", 6, 5});
    cases.push_back({"undefined-variable-feed",
                     with("b -> p1.Op1.a\np1.Op1 -> x\n"), "UndefinedVariable", 8, 1});
    cases.push_back({"undefined-variable-assign",
                     with("c = b\na -> p1.Op1\np1.Op1 -> x\n"), "UndefinedVariable", 8, 1});

    // --- type and structure defects ---
    cases.push_back({"double-assign-var",
                     with("b = 5\nb = 6\nb -> p1.Op1\np1.Op1 -> x\n"), "DoubleAssignment", 9,
                     1});
    cases.push_back({"double-assign-retrieve",
                     with("a -> p1.Op1\np1.Op1 -> b\np1.Op1 -> b\nb -> p1.Mix.s\n"
                          "5 -> p1.Mix.i\np1.Mix -> x\n"),
                     "DoubleAssignment", 10, 1});
    cases.push_back({"double-assign-output-decl",
                     "description desc is http://services.example/catalog.json\n"
                     "service s1 is desc.Service1\n"
                     "port p1 is s1.Port1\n"
                     "input:\n    int a\noutput:\n"
                     "    any x, x\n"
                     "a -> p1.Op1\np1.Op1 -> x\n",
                     "DoubleAssignment", 7, 12});
    cases.push_back({"double-feed-param",
                     with("a -> p1.Op1\n5 -> p1.Op1.a\np1.Op1 -> x\n"), "DoubleAssignment", 9,
                     1});
    cases.push_back({"type-mismatch-feed",
                     with("a -> p1.Mix.s\n5 -> p1.Mix.i\np1.Mix -> x\n"), "TypeMismatch", 8,
                     1});
    cases.push_back({"type-mismatch-scalar",
                     with("\"hi\" -> p1.Op1\np1.Op1 -> x\n"), "TypeMismatch", 8, 1});
    cases.push_back({"type-mismatch-output",
                     "description desc is http://services.example/catalog.json\n"
                     "service s1 is desc.Service1\n"
                     "port p1 is s1.Port1\n"
                     "input:\n    int a\noutput:\n"
                     "    int x\n"
                     "a -> p1.Op1\np1.Op1 -> x\n",
                     "TypeMismatch", 9, 1});
    cases.push_back({"unknown-parameter",
                     with("a -> p1.Op1.z\np1.Op1 -> x\n"), "UnknownParameter", 8, 6});
    cases.push_back({"arity-multi-param-unqualified",
                     with("a -> p1.Mix\np1.Mix -> x\n"), "ArityMismatch", 8, 1});
    cases.push_back({"arity-tuple-width",
                     with("b = 5\nt = (a, b)\nt -> p1.Op1\np1.Op1 -> x\n"), "ArityMismatch",
                     10, 1});
    cases.push_back({"arity-tuple-to-complex-param",
                     with("b = 5\nt = (a, b)\nt -> p1.Describe\np1.Describe -> x\n"),
                     "ArityMismatch", 10, 1});
    cases.push_back({"arity-unbound-param",
                     with("5 -> p1.Mix.i\np1.Mix -> x\n"), "ArityMismatch", 8, 6});
    cases.push_back({"unbound-output",
                     with("a -> p1.Op1\np1.Op1 -> b\nb -> p1.Mix.s\n5 -> p1.Mix.i\n"
                          "p1.Mix -> c\n"),
                     "UnboundOutput", 7, 9});
    cases.push_back({"dataflow-cycle",
                     with("a -> p1.Mix.i\np1.Mix -> b\nb -> p1.Mix.s\np1.Mix -> x\n"),
                     "CycleError", 0, 0});
    return cases;
}

// Empty string = pass; otherwise a description of how the case missed.
inline std::string check_mutation(const MutationCase& c, const CatalogSet& catalogs) {
    CompileResult r = compile_collect(c.source, catalogs);
    if (r.ok()) return c.name + ": accepted a defective workflow";
    for (const auto& d : r.diagnostics) {
        if (d.severity != Severity::Error || d.code != c.code) continue;
        if (c.line == 0) return "";
        if (d.pos.line != c.line) continue;
        if (c.column != 0 && d.pos.column != c.column) continue;
        return "";
    }
    std::string got;
    for (const auto& d : r.diagnostics)
        got += " [" + d.code + " @" + std::to_string(d.pos.line) + ":" +
               std::to_string(d.pos.column) + "]";
    return c.name + ": wanted " + c.code + " @" + std::to_string(c.line) + ":" +
           std::to_string(c.column) + ", got" + got;
}

}  // namespace dflow::testing
