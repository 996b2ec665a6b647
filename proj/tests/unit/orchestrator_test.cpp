#include "doctest.h"

#include "core_harness.hpp"
#include "dflow/compile.hpp"
#include "dflow/invokers.hpp"
#include "dflow/partition.hpp"
#include "test_util.hpp"

using namespace dflow;
using testutil::compile_fixture;
using testutil::data_path;
using testutil::run_on_cores;

namespace {

Placement abc_placement() {
    return placement_from_json(nlohmann::json::parse(read_file(data_path("placement_abc.json"))));
}

std::vector<Fragment> combined_fragments() {
    return partition(compile_fixture("combined.dfl").graph, abc_placement());
}

std::map<std::string, Value> combined_inputs() {
    return {{"a", Value::of_int(5)}};
}

std::string engine_reference() {
    DataflowGraph g = compile_fixture("combined.dfl").graph;
    MockInvoker mock;
    Engine engine(g, mock);
    return outputs_to_json(engine.run_to_completion(combined_inputs()));
}

struct FailOn : Invoker {
    std::string op;
    MockInvoker inner;
    Value invoke(const Node& node,
                 const std::vector<std::pair<std::string, Value>>& args) override {
        if (node.op == op) throw RuntimeFailure("ServiceError", "injected outage");
        return inner.invoke(node, args);
    }
};

}  // namespace

TEST_CASE("hand-routed cores reproduce the engine result") {
    MockInvoker mock;
    auto result = run_on_cores(combined_fragments(), combined_inputs(), mock);
    CHECK(result.view.status == RunStatus::Done);
    CHECK(outputs_to_json(result.view.outputs) == engine_reference());
    CHECK(result.tokens_routed == 6);  // cut transfers after fan-out dedupe

    // Every invocation executed at the site owning its port.
    CHECK(result.invoked_nodes.at("A") == std::vector<int>{1, 7});
    CHECK(result.invoked_nodes.at("B") == std::vector<int>{2, 3});
    CHECK(result.invoked_nodes.at("C") == std::vector<int>{4, 5});
}

TEST_CASE("duplicated tokens do not change the result") {
    MockInvoker mock;
    auto result = run_on_cores(combined_fragments(), combined_inputs(), mock, true);
    CHECK(result.view.status == RunStatus::Done);
    CHECK(outputs_to_json(result.view.outputs) == engine_reference());
}

TEST_CASE("tokens arriving before their fragment wait in the grace buffer") {
    auto fragments = combined_fragments();
    std::map<std::string, std::unique_ptr<OrchestratorCore>> cores;
    for (const auto& f : fragments) {
        OrchestratorOptions opt;
        opt.site_id = f.site;
        cores.emplace(f.site, std::make_unique<OrchestratorCore>(opt));
    }
    MockInvoker mock;
    std::int64_t now = 0;

    // Deploy A and C only; B's fragment is late.
    const Fragment* frag_b = nullptr;
    for (const auto& f : fragments) {
        if (f.site == "B") frag_b = &f;
        else cores.at(f.site)->deploy_fragment("r1", f, now);
    }
    REQUIRE(frag_b != nullptr);
    cores.at("A")->bind_inputs("r1", combined_inputs(), now);

    // Pump: the A -> B token must come back buffered, not fail.
    bool buffered = false;
    auto pump = [&] {
        bool progressed = true;
        while (progressed) {
            progressed = false;
            ++now;
            for (auto& [site, core] : cores) {
                for (Action& a : core->drain_actions()) {
                    progressed = true;
                    if (a.kind == Action::Kind::Invoke) {
                        core->invocation_done(a.run, a.node.id, mock.invoke(a.node, a.args), now);
                    } else {
                        auto ack = cores.at(a.to_site)->deliver_token(a.token, now);
                        buffered |= ack.buffered;
                    }
                }
            }
        }
    };
    pump();
    CHECK(buffered);
    CHECK(cores.at("A")->run_status("r1") == RunStatus::Running);

    // The late deploy replays the buffer and the run completes.
    cores.at("B")->deploy_fragment("r1", *frag_b, now);
    pump();
    auto view = cores.at("A")->collect_outputs("r1");
    CHECK(view.status == RunStatus::Done);
    CHECK(outputs_to_json(view.outputs) == engine_reference());
}

TEST_CASE("a zero grace window rejects early tokens outright") {
    OrchestratorOptions opt;
    opt.site_id = "B";
    opt.grace_ms = 0;
    OrchestratorCore core(opt);
    TokenMsg msg;
    msg.run = "r1";
    msg.edge = 1;
    msg.value = Value::of_string("x");
    CHECK_THROWS_WITH_AS(core.deliver_token(msg, 0), doctest::Contains("UnknownRun"),
                         RuntimeFailure);
}

TEST_CASE("redelivered fragments and tokens ack as duplicates") {
    auto fragments = combined_fragments();
    OrchestratorOptions opt;
    opt.site_id = "B";
    OrchestratorCore core(opt);
    const Fragment* frag_b = nullptr;
    for (const auto& f : fragments)
        if (f.site == "B") frag_b = &f;

    auto first = core.deploy_fragment("r1", *frag_b, 0);
    CHECK_FALSE(first.duplicate);
    auto again = core.deploy_fragment("r1", *frag_b, 0);
    CHECK(again.duplicate);

    TokenMsg msg;
    msg.run = "r1";
    msg.edge = 1;  // Op1 -> Op2 cut edge
    msg.value = Value::of_string("Op1(5)");
    auto ack1 = core.deliver_token(msg, 1);
    CHECK_FALSE(ack1.duplicate);
    auto ack2 = core.deliver_token(msg, 1);
    CHECK(ack2.duplicate);
}

TEST_CASE("fragments for another site are refused") {
    auto fragments = combined_fragments();
    OrchestratorOptions opt;
    opt.site_id = "A";
    OrchestratorCore core(opt);
    for (const auto& f : fragments)
        if (f.site == "B")
            CHECK_THROWS_WITH_AS(core.deploy_fragment("r1", f, 0),
                                 doctest::Contains("WrongSite"), RuntimeFailure);
}

TEST_CASE("invocation failures propagate to the root with their origin") {
    FailOn invoker;
    invoker.op = "Op3";  // runs at site B
    auto result = run_on_cores(combined_fragments(), combined_inputs(), invoker);
    CHECK(result.view.status == RunStatus::Failed);
    CHECK(result.view.failure_code == "InvocationFailed");
    CHECK(result.view.failure_origin == "B");
    CHECK(result.view.failure_message.find("injected outage") != std::string::npos);
    CHECK(result.view.outputs.empty());
}

TEST_CASE("progress is visible while a run is pending") {
    auto fragments = combined_fragments();
    OrchestratorOptions opt;
    opt.site_id = "A";
    OrchestratorCore core(opt);
    for (const auto& f : fragments)
        if (f.site == "A") core.deploy_fragment("r1", f, 0);
    CHECK(core.run_status("r1") == RunStatus::Pending);

    auto view = core.collect_outputs("r1");
    CHECK(view.status == RunStatus::Pending);
    CHECK(view.nodes_total == 7);
    CHECK(view.nodes_done == 0);
    CHECK(view.outputs.empty());

    CHECK_THROWS_WITH_AS(core.collect_outputs("never"), doctest::Contains("UnknownRun"),
                         RuntimeFailure);
}

TEST_CASE("finished runs are garbage-collected into tombstones") {
    OrchestratorOptions opt;
    opt.site_id = "A";
    opt.gc_ms = 100;
    std::map<std::string, std::unique_ptr<OrchestratorCore>> cores;
    auto fragments = combined_fragments();
    for (const auto& f : fragments) {
        OrchestratorOptions o;
        o.site_id = f.site;
        o.gc_ms = 100;
        cores.emplace(f.site, std::make_unique<OrchestratorCore>(o));
    }
    MockInvoker mock;
    std::int64_t now = 0;
    for (const auto& f : fragments) cores.at(f.site)->deploy_fragment("r1", f, now);
    cores.at("A")->bind_inputs("r1", combined_inputs(), now);
    bool progressed = true;
    while (progressed) {
        progressed = false;
        ++now;
        for (auto& [site, core] : cores)
            for (Action& a : core->drain_actions()) {
                progressed = true;
                if (a.kind == Action::Kind::Invoke)
                    core->invocation_done(a.run, a.node.id, mock.invoke(a.node, a.args), now);
                else
                    cores.at(a.to_site)->deliver_token(a.token, now);
            }
    }
    REQUIRE(cores.at("A")->run_status("r1") == RunStatus::Done);

    cores.at("A")->tick(now + 1000);  // past the retention window
    CHECK_FALSE(cores.at("A")->knows_run("r1"));
    auto view = cores.at("A")->collect_outputs("r1");
    CHECK(view.status == RunStatus::Failed);
    CHECK(view.failure_code == "Gone");

    // Late duplicates against a tombstone ack silently.
    TokenMsg msg;
    msg.run = "r1";
    msg.edge = 11;
    auto ack = cores.at("A")->deliver_token(msg, now + 1001);
    CHECK(ack.duplicate);
}

TEST_CASE("metrics expose token and byte counters") {
    MockInvoker mock;
    auto fragments = combined_fragments();
    std::map<std::string, std::unique_ptr<OrchestratorCore>> cores;
    for (const auto& f : fragments) {
        OrchestratorOptions opt;
        opt.site_id = f.site;
        cores.emplace(f.site, std::make_unique<OrchestratorCore>(opt));
    }
    std::int64_t now = 0;
    for (const auto& f : fragments) cores.at(f.site)->deploy_fragment("r1", f, now);
    cores.at("A")->bind_inputs("r1", combined_inputs(), now);
    bool progressed = true;
    while (progressed) {
        progressed = false;
        ++now;
        for (auto& [site, core] : cores)
            for (Action& a : core->drain_actions()) {
                progressed = true;
                if (a.kind == Action::Kind::Invoke)
                    core->invocation_done(a.run, a.node.id, mock.invoke(a.node, a.args), now);
                else
                    cores.at(a.to_site)->deliver_token(a.token, now);
            }
    }
    nlohmann::json m = cores.at("B")->metrics("r1");
    CHECK(m.contains("tokens_in"));
    CHECK(m.contains("tokens_out"));
    CHECK(m["tokens_in"].get<int>() >= 1);
    CHECK(m["tokens_out"].get<int>() >= 2);
    nlohmann::json root = cores.at("A")->metrics("r1");
    CHECK(root["status"] == "done");
}

TEST_CASE("mistyped token payloads are rejected") {
    auto fragments = combined_fragments();
    OrchestratorOptions opt;
    opt.site_id = "B";
    OrchestratorCore core(opt);
    for (const auto& f : fragments)
        if (f.site == "B") core.deploy_fragment("r1", f, 0);
    TokenMsg msg;
    msg.run = "r1";
    msg.edge = 1;           // Op2's string parameter
    msg.value = Value::of_int(7);
    CHECK_THROWS_WITH_AS(core.deliver_token(msg, 1), doctest::Contains("PayloadTypeMismatch"),
                         RuntimeFailure);
}

TEST_CASE("token JSON round-trips including failure notices") {
    TokenMsg msg;
    msg.run = "r9";
    msg.edge = 4;
    msg.value = Value::of_tuple({Value::of_int(1), Value::of_string("x")});
    msg.origin = "C";
    msg.seq = 17;
    TokenMsg back = token_from_json(token_to_json(msg));
    CHECK(back.run == msg.run);
    CHECK(back.edge == msg.edge);
    CHECK(back.value == msg.value);
    CHECK(back.origin == msg.origin);
    CHECK(back.seq == msg.seq);
    CHECK_FALSE(back.fail);

    TokenMsg fail;
    fail.run = "r9";
    fail.fail = true;
    fail.fail_code = "InvocationFailed";
    fail.fail_message = "boom";
    fail.origin = "B";
    TokenMsg fback = token_from_json(token_to_json(fail));
    CHECK(fback.fail);
    CHECK(fback.fail_code == "InvocationFailed");
    CHECK(fback.fail_message == "boom");
}
