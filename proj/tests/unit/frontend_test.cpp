#include <string>
#include <vector>

#include "doctest.h"

#include "dflow/lexer.hpp"
#include "dflow/parser.hpp"
#include "dflow/printer.hpp"
#include "mutations.hpp"
#include "test_util.hpp"

using namespace dflow;
using testutil::fixture_catalogs;
using testutil::read_fixture;

TEST_CASE("tokenizer classifies the statement forms") {
    auto toks = tokenize("a -> p1.Op1, p2.Op2.x\n");
    std::vector<TokenKind> kinds;
    for (const auto& t : toks) kinds.push_back(t.kind);
    CHECK(kinds == std::vector<TokenKind>{
                       TokenKind::Identifier, TokenKind::Arrow, TokenKind::Identifier,
                       TokenKind::Dot, TokenKind::Identifier, TokenKind::Comma,
                       TokenKind::Identifier, TokenKind::Dot, TokenKind::Identifier,
                       TokenKind::Dot, TokenKind::Identifier, TokenKind::Newline,
                       TokenKind::Eof});
    CHECK(toks[0].pos.line == 1);
    CHECK(toks[0].pos.column == 1);
    CHECK(toks[2].pos.column == 6);
}

TEST_CASE("tokenizer: keywords, literals, comments") {
    auto toks = tokenize("input output true false 5 5.25 \"hi \\\"x\\\"\" # trailing\n");
    CHECK(toks[0].kind == TokenKind::Keyword);
    CHECK(toks[1].kind == TokenKind::Keyword);
    CHECK(toks[2].kind == TokenKind::ScalarLiteral);  // true/false stay usable as values
    CHECK(toks[2].lexeme == "true");
    CHECK(toks[3].lexeme == "false");
    CHECK(toks[4].lexeme == "5");
    CHECK(toks[5].lexeme == "5.25");
    CHECK(toks[6].kind == TokenKind::ScalarLiteral);
    CHECK(toks[6].lexeme == "\"hi \"x\"");  // leading quote marks a decoded string
    CHECK(toks[7].kind == TokenKind::Newline);
    CHECK(toks[8].kind == TokenKind::Eof);
}

TEST_CASE("tokenizer captures description URLs verbatim") {
    auto toks = tokenize("description d is http://x.example/a:b/c.json#frag\n");
    REQUIRE(toks.size() >= 4);
    CHECK(toks[0].lexeme == "description");
    CHECK(toks[2].lexeme == "is");
    CHECK(toks[3].kind == TokenKind::ScalarLiteral);
    CHECK(toks[3].lexeme == "http://x.example/a:b/c.json#frag");
}

TEST_CASE("tokenizer: dot binds into numbers only between digits") {
    auto toks = tokenize("1.x\n");
    CHECK(toks[0].lexeme == "1");
    CHECK(toks[1].kind == TokenKind::Dot);
    CHECK(toks[2].lexeme == "x");
    CHECK_THROWS_AS(parse(toks), CompileError);  // scalar must be followed by '->'
}

TEST_CASE("parser: combined workflow shape") {
    WorkflowSpec spec = parse_source(read_fixture("combined.dfl"));
    CHECK(spec.descriptions.size() == 1);
    CHECK(spec.services.size() == 6);
    CHECK(spec.ports.size() == 6);
    CHECK(spec.schemas.empty());
    CHECK(spec.inputs.size() == 1);
    CHECK(spec.inputs[0].name == "a");
    CHECK(spec.inputs[0].type.base == BaseType::Int);
    REQUIRE(spec.outputs.size() == 3);
    CHECK(spec.outputs[2].name == "z");

    // 10 surface statements; the one composition desugars into two.
    REQUIRE(spec.statements.size() == 11);
    std::vector<StatementKind> kinds;
    for (const auto& s : spec.statements) kinds.push_back(s.kind);
    CHECK(kinds == std::vector<StatementKind>{
                       StatementKind::FeedVariable,  // a -> p1.Op1
                       StatementKind::Retrieve,      // p1.Op1 -> tmp1   (desugared)
                       StatementKind::FeedVariable,  // tmp1 -> p2.Op2   (desugared)
                       StatementKind::Retrieve,      // p2.Op2 -> x
                       StatementKind::FeedVariable,  // x -> p3.Op3, p4.Op4, p5.Op5
                       StatementKind::Retrieve, StatementKind::Retrieve, StatementKind::Retrieve,
                       StatementKind::AssignTuple,   // y = (b, c, d)
                       StatementKind::FeedVariable,  // y -> p6.Op6
                       StatementKind::Retrieve});    // p6.Op6 -> z
    CHECK(spec.statements[1].synthesized);
    CHECK(spec.statements[2].synthesized);
    CHECK(spec.statements[1].var == "tmp1");
    CHECK(spec.statements[2].var == "tmp1");
    CHECK_FALSE(spec.statements[3].synthesized);
    CHECK(spec.statements[4].targets.size() == 3);
    CHECK(spec.statements[8].tuple.size() == 3);
}

TEST_CASE("parser: composition avoids colliding synthetic names") {
    WorkflowSpec spec = parse_source(
        "description d is http://services.example/catalog.json\n"
        "service s1 is d.Service1\n"
        "service s2 is d.Service2\n"
        "port p1 is s1.Port1\n"
        "port p2 is s2.Port2\n"
        "input:\n    int tmp1\noutput:\n    any x\n"
        "tmp1 -> p1.Op1\n"
        "p1.Op1 -> p2.Op2\n"
        "p2.Op2 -> x\n");
    CHECK(spec.statements[1].kind == StatementKind::Retrieve);
    CHECK(spec.statements[1].var == "tmp2");  // tmp1 is taken by the input
}

TEST_CASE("parser: composition with routing suffix on the target") {
    WorkflowSpec spec = parse_source(
        "description d is http://services.example/catalog.json\n"
        "service s1 is d.Service1\n"
        "port p1 is s1.Port1\n"
        "input:\n    int a\noutput:\n    any x\n"
        "a -> p1.Op1\n"
        "p1.Op1 -> p1.Mix.s\n"
        "5 -> p1.Mix.i\n"
        "p1.Mix -> x\n");
    const Statement& feed = spec.statements[2];  // desugared feed
    CHECK(feed.kind == StatementKind::FeedVariable);
    REQUIRE(feed.targets.size() == 1);
    CHECK(feed.targets[0].param == "s");
}

TEST_CASE("parser: scalar feeds and assignments") {
    WorkflowSpec spec = parse_source(
        "description d is http://services.example/catalog.json\n"
        "service s1 is d.Service1\n"
        "port p1 is s1.Port1\n"
        "input:\n    string s\noutput:\n    any x\n"
        "5 -> p1.Mix.i\n"
        "s -> p1.Mix.s\n"
        "v = 2.5\n"
        "w = \"5\"\n"
        "t = (v, w, 7)\n"
        "p1.Mix -> x\n");
    const Statement& feed = spec.statements[0];
    CHECK(feed.kind == StatementKind::FeedScalar);
    CHECK(feed.scalar.type == BaseType::Int);
    CHECK(std::get<std::int64_t>(feed.scalar.value) == 5);
    CHECK(spec.statements[2].kind == StatementKind::AssignScalar);
    CHECK(spec.statements[2].scalar.type == BaseType::Double);
    // "5" stays a string: quoting decides the literal's type.
    CHECK(spec.statements[3].scalar.type == BaseType::String);
    CHECK(std::get<std::string>(spec.statements[3].scalar.value) == "5");
    const Statement& tup = spec.statements[4];
    CHECK(tup.kind == StatementKind::AssignTuple);
    REQUIRE(tup.tuple.size() == 3);
    CHECK(tup.tuple[0].is_var);
    CHECK_FALSE(tup.tuple[2].is_var);
}

TEST_CASE("parser: bare invocation statement") {
    WorkflowSpec spec = parse_source(read_fixture("bare_invocation.dfl"));
    bool found = false;
    for (const auto& s : spec.statements)
        if (s.kind == StatementKind::BareInvocation) {
            found = true;
            CHECK(s.invocation.op == "Ping");
        }
    CHECK(found);
}

TEST_CASE("renderer round-trips every fixture workflow") {
    for (const char* name :
         {"combined.dfl", "invocation.dfl", "pipeline.dfl", "distribution.dfl",
          "aggregation_tuple.dfl", "aggregation_routing.dfl", "schema_types.dfl",
          "bare_invocation.dfl", "scalar_feed.dfl", "var_alias.dfl"}) {
        CAPTURE(name);
        WorkflowSpec first = parse_source(read_fixture(name));
        std::string printed = render(first);
        WorkflowSpec second = parse_source(printed);
        CHECK(first.same(second));
        CHECK(render(second) == printed);  // rendering is a fixed point
    }
}

TEST_CASE("renderer collapses runs of equally-typed interface variables") {
    WorkflowSpec spec = parse_source(read_fixture("combined.dfl"));
    std::string printed = render(spec);
    CHECK(printed.find("any x, y, z") != std::string::npos);
}

TEST_CASE("mutation battery: lexical and syntactic defects") {
    for (const auto& c : dflow::testing::mutation_battery()) {
        if (c.code != "LexError" && c.code != "ParseError") continue;
        CAPTURE(c.name);
        CHECK(dflow::testing::check_mutation(c, fixture_catalogs()) == "");
    }
}
