#pragma once

// Drives a set of fragments to completion on one orchestration core per
// site, routing every emitted action by hand with a manual clock. The
// hand-routed result must match the local engine bit-for-bit, which is what
// the orchestrator unit/property tests assert.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dflow/orchestrator.hpp"

namespace dflow::testutil {

struct CoreRunResult {
    OutputsView view;
    std::map<std::string, std::vector<int>> invoked_nodes;  // site -> node ids, in order
    int tokens_routed = 0;
};

// `duplicate_tokens` re-delivers every token once (idempotency drill).
inline CoreRunResult run_on_cores(const std::vector<Fragment>& fragments,
                                  const std::map<std::string, Value>& inputs, Invoker& invoker,
                                  bool duplicate_tokens = false, const std::string& run_id = "r1") {
    std::map<std::string, std::unique_ptr<OrchestratorCore>> cores;
    for (const auto& f : fragments) {
        OrchestratorOptions opt;
        opt.site_id = f.site;
        cores.emplace(f.site, std::make_unique<OrchestratorCore>(opt));
    }
    const std::string root = fragments.front().root_site;

    std::int64_t now = 0;
    for (const auto& f : fragments) cores.at(f.site)->deploy_fragment(run_id, f, now);
    cores.at(root)->bind_inputs(run_id, inputs, now);

    CoreRunResult result;
    bool progressed = true;
    while (progressed) {
        progressed = false;
        ++now;
        for (auto& [site, core] : cores) {
            for (Action& a : core->drain_actions()) {
                progressed = true;
                if (a.kind == Action::Kind::Invoke) {
                    result.invoked_nodes[site].push_back(a.node.id);
                    try {
                        Value out = invoker.invoke(a.node, a.args);
                        core->invocation_done(a.run, a.node.id, std::move(out), now);
                    } catch (const std::exception& e) {
                        core->invocation_failed(a.run, a.node.id, e.what(), now);
                    }
                } else {
                    ++result.tokens_routed;
                    cores.at(a.to_site)->deliver_token(a.token, now);
                    if (duplicate_tokens) cores.at(a.to_site)->deliver_token(a.token, now);
                }
            }
        }
    }
    result.view = cores.at(root)->collect_outputs(run_id);
    return result;
}

}  // namespace dflow::testutil
