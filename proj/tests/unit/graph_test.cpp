#include <set>
#include <tuple>

#include "doctest.h"

#include "dflow/compile.hpp"
#include "test_util.hpp"

using namespace dflow;
using testutil::compile_fixture;
using testutil::fixture_catalogs;

namespace {

// (src, src_slot, dst, dst_slot, param) — enough to pin the whole topology.
using EdgeKey = std::tuple<int, int, int, int, std::string>;

std::multiset<EdgeKey> edge_keys(const DataflowGraph& g) {
    std::multiset<EdgeKey> keys;
    for (const auto& e : g.edges) keys.insert({e.src, e.src_slot, e.dst, e.dst_slot, e.dst_param});
    return keys;
}

}  // namespace

TEST_CASE("combined workflow graph: nodes, edges, adjacency") {
    DataflowGraph g = compile_fixture("combined.dfl").graph;
    REQUIRE(g.nodes.size() == 11);
    REQUIRE(g.edges.size() == 14);

    auto kind_of = [&](int id) { return g.nodes[id].kind; };
    CHECK(kind_of(0) == NodeKind::Input);
    CHECK(g.nodes[0].var == "a");
    for (int id : {1, 2, 3, 4, 5, 7}) CHECK(kind_of(id) == NodeKind::Invocation);
    CHECK(g.nodes[1].op == "Op1");
    CHECK(g.nodes[2].op == "Op2");
    CHECK(g.nodes[7].op == "Op6");
    CHECK(kind_of(6) == NodeKind::TupleAssembly);
    CHECK(g.nodes[6].var == "y");
    CHECK(g.nodes[6].arity == 3);
    CHECK(kind_of(8) == NodeKind::Output);
    CHECK(g.nodes[8].var == "x");
    CHECK(g.nodes[9].var == "y");
    CHECK(g.nodes[10].var == "z");

    CHECK(edge_keys(g) == std::multiset<EdgeKey>{
                              {0, -1, 1, 0, "a"},   // a feeds Op1
                              {1, -1, 2, 0, "s"},   // composition Op1 -> Op2
                              {2, -1, 3, 0, "s"},   // fan-out to Op3/Op4/Op5
                              {2, -1, 4, 0, "s"},
                              {2, -1, 5, 0, "s"},
                              {3, -1, 6, 0, ""},    // tuple assembly of (b, c, d)
                              {4, -1, 6, 1, ""},
                              {5, -1, 6, 2, ""},
                              {6, 0, 7, 0, "a"},    // tuple elements into Op6 positionally
                              {6, 1, 7, 1, "b"},
                              {6, 2, 7, 2, "c"},
                              {2, -1, 8, 0, ""},    // outputs x, y, z
                              {6, -1, 9, 0, ""},
                              {7, -1, 10, 0, ""}});

    g.rebuild_adjacency();
    CHECK(g.out_edges[2].size() == 4);  // Op2 feeds three invocations and output x
    CHECK(g.in_edges[6].size() == 3);
    CHECK(g.in_edges[7].size() == 3);
    CHECK(g.in_edges[1].size() == 1);

    const Node* op6 = g.find_invocation("p6", "Op6");
    REQUIRE(op6 != nullptr);
    CHECK(op6->id == 7);
    CHECK(g.find_invocation("p6", "Nope") == nullptr);

    // Interface order is preserved.
    REQUIRE(g.inputs.size() == 1);
    CHECK(g.inputs[0].first == "a");
    REQUIRE(g.outputs.size() == 3);
    CHECK(g.outputs[0].first == "x");
    CHECK(g.outputs[2].first == "z");
}

TEST_CASE("parallel schedule levels invocations by longest path") {
    DataflowGraph g = compile_fixture("combined.dfl").graph;
    ParallelSchedule sched = parallel_sets(g);
    CHECK(sched.invocation_levels(g) ==
          std::vector<std::vector<int>>{{1}, {2}, {3, 4, 5}, {7}});
}

TEST_CASE("tuple feed and routing suffixes wire the aggregator identically") {
    DataflowGraph tup = compile_fixture("aggregation_tuple.dfl").graph;
    DataflowGraph routed = compile_fixture("aggregation_routing.dfl").graph;

    auto op6_params = [](const DataflowGraph& g) {
        const Node* n = g.find_invocation("p6", "Op6");
        REQUIRE(n != nullptr);
        std::map<int, std::string> by_slot;
        for (const auto& e : g.edges)
            if (e.dst == n->id) by_slot[e.dst_slot] = e.dst_param;
        return by_slot;
    };
    auto a = op6_params(tup);
    auto b = op6_params(routed);
    CHECK(a == b);
    CHECK(a == std::map<int, std::string>{{0, "a"}, {1, "b"}, {2, "c"}});
    // The tuple encoding adds an assembly node; the routed one wires directly.
    auto count_kind = [](const DataflowGraph& g, NodeKind k) {
        int n = 0;
        for (const auto& node : g.nodes) n += node.kind == k;
        return n;
    };
    CHECK(count_kind(tup, NodeKind::TupleAssembly) == 1);
    CHECK(count_kind(routed, NodeKind::TupleAssembly) == 0);
}

TEST_CASE("scalar feeds become const source nodes") {
    DataflowGraph g = compile_fixture("scalar_feed.dfl").graph;
    int consts = 0;
    for (const auto& n : g.nodes)
        if (n.kind == NodeKind::Const) {
            ++consts;
            CHECK(std::get<std::int64_t>(n.scalar.value) == 5);
        }
    CHECK(consts == 1);
}

TEST_CASE("bare invocations have no in-edges and fire from the start") {
    DataflowGraph g = compile_fixture("bare_invocation.dfl").graph;
    const Node* ping = g.find_invocation("p1", "Ping");
    REQUIRE(ping != nullptr);
    for (const auto& e : g.edges) CHECK(e.dst != ping->id);
    ParallelSchedule sched = parallel_sets(g);
    auto levels = sched.invocation_levels(g);
    REQUIRE_FALSE(levels.empty());
    bool ping_first = false;
    for (int id : levels[0]) ping_first |= (id == ping->id);
    CHECK(ping_first);
}

TEST_CASE("cycles are rejected naming the nodes involved") {
    std::string source =
        "description desc is http://services.example/catalog.json\n"
        "service sv is desc.Service1\n"
        "port p1 is sv.Port1\n"
        "input:\n    int a\noutput:\n    any x\n"
        "a -> p1.Mix.i\n"
        "p1.Mix -> b\n"
        "b -> p1.Mix.s\n"
        "p1.Mix -> x\n";
    CompileResult r = compile_collect(source, fixture_catalogs());
    REQUIRE_FALSE(r.ok());
    bool cycle = false;
    for (const auto& d : r.diagnostics)
        if (d.code == "CycleError") {
            cycle = true;
            CHECK(d.message.find("Mix") != std::string::npos);
        }
    CHECK(cycle);
}

TEST_CASE("DOT rendering labels nodes and parameter edges") {
    DataflowGraph g = compile_fixture("combined.dfl").graph;
    std::string dot = to_dot(g);
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("p1.Op1") != std::string::npos);
    CHECK(dot.find("p6.Op6") != std::string::npos);
    for (const char* label : {"[0] a", "[1] b", "[2] c"})  // tuple slots into Op6
        CHECK(dot.find(label) != std::string::npos);
}

TEST_CASE("graph JSON round-trips structurally") {
    for (const char* name : {"combined.dfl", "scalar_feed.dfl", "bare_invocation.dfl"}) {
        CAPTURE(name);
        DataflowGraph g = compile_fixture(name).graph;
        DataflowGraph again = graph_from_json(graph_to_json(g));
        CHECK(again.nodes.size() == g.nodes.size());
        CHECK(edge_keys(again) == edge_keys(g));
        CHECK(to_dot(again) == to_dot(g));
        CHECK(again.inputs == g.inputs);
        CHECK(again.outputs == g.outputs);
    }
}

TEST_CASE("graph JSON rejects unknown node kinds") {
    DataflowGraph g = compile_fixture("invocation.dfl").graph;
    nlohmann::json j = graph_to_json(g);
    j["nodes"][0]["kind"] = "warp";
    CHECK_THROWS_WITH_AS(graph_from_json(j), doctest::Contains("FormatError"), CompileError);
}
