#pragma once

#include <cstdint>
#include <deque>
#include <set>

#include "dflow/partition.hpp"

namespace dflow {

// One dataflow token crossing sites. `edge` is the representative edge id of
// its transfer group; the receiver re-fans the value to every local consumer
// of (src, src_slot). A token with `fail` set carries a failure notice to the
// root instead of data.
struct TokenMsg {
    std::string run;
    int edge = -1;
    Value value;
    std::string origin;
    std::int64_t seq = 0;
    bool fail = false;
    std::string fail_code, fail_message;
};

nlohmann::json token_to_json(const TokenMsg& t);
TokenMsg token_from_json(const nlohmann::json& j);

// Side effects the core asks its host to perform. The host executes them and
// reports invocation results back via invocation_done/invocation_failed;
// token sends are fire-and-forget from the core's view.
struct Action {
    enum class Kind { Invoke, SendToken };
    Kind kind = Kind::Invoke;
    std::string run;
    Node node;  // Invoke: copy of the invocation node
    std::vector<std::pair<std::string, Value>> args;
    std::string to_site, to_url;  // SendToken
    TokenMsg token;
};

enum class RunStatus { Pending, Running, Done, Failed };

const char* run_status_name(RunStatus s);

struct OrchestratorOptions {
    std::string site_id;
    int64_t grace_ms = 10'000;   // buffer window for tokens beating their deploy
    int64_t gc_ms = 300'000;     // ledger retention after done/failed
};

// The per-run result view the root exposes to clients.
struct OutputsView {
    RunStatus status = RunStatus::Pending;
    std::map<std::string, Value> outputs;  // complete iff status == Done
    int nodes_done = 0;
    int nodes_total = 0;
    std::string failure_code, failure_message, failure_origin;
};

// Executes deployed fragments under the same data-driven firing rule as the
// local engine, but token-at-a-time and without doing any I/O itself: hosts
// (HTTP daemon, virtual-clock harness) feed it fragments/tokens/results and
// drain the actions it emits. Not thread-safe; hosts serialize access.
class OrchestratorCore {
  public:
    explicit OrchestratorCore(OrchestratorOptions options);

    struct Ack {
        bool duplicate = false;
        bool buffered = false;
    };

    // Throws RuntimeFailure("WrongSite") when the fragment names another
    // site. Redelivery acks as duplicate without state changes.
    Ack deploy_fragment(const std::string& run, Fragment fragment, int64_t now_ms);

    // Root-side: feeds workflow inputs to the Input nodes.
    void bind_inputs(const std::string& run, const std::map<std::string, Value>& inputs,
                     int64_t now_ms);

    // Stores + re-fans one token. Unknown runs buffer within the grace
    // window (or throw RuntimeFailure("UnknownRun") when grace_ms == 0);
    // duplicates ack without effect; type violations throw
    // RuntimeFailure("PayloadTypeMismatch").
    Ack deliver_token(const TokenMsg& msg, int64_t now_ms);

    void invocation_done(const std::string& run, int node, Value result, int64_t now_ms);
    void invocation_failed(const std::string& run, int node, const std::string& message,
                           int64_t now_ms);

    // Pending side effects, in emission order. Caller takes ownership.
    std::vector<Action> drain_actions();

    // Root-side client view. Throws RuntimeFailure("UnknownRun") for never-
    // deployed runs; a garbage-collected run reports Failed/gone.
    OutputsView collect_outputs(const std::string& run) const;

    bool knows_run(const std::string& run) const;
    RunStatus run_status(const std::string& run) const;
    nlohmann::json metrics(const std::string& run) const;

    // Expires stale buffered tokens and garbage-collects finished runs.
    void tick(int64_t now_ms);

    const std::string& site() const { return options_.site_id; }

  private:
    struct NodeState {
        std::vector<std::optional<Value>> slots;
        NodeStatus status = NodeStatus::Blocked;
    };

    struct RunEntry {
        Fragment frag;
        RunStatus status = RunStatus::Pending;
        std::map<int, NodeState> nodes;          // node id -> firing state
        std::map<int, Value> store;              // representative edge id -> value (write-once)
        std::vector<std::vector<int>> local_out;  // index into frag.edges per local node index
        std::map<int, int> node_index;           // node id -> index in frag.nodes
        std::map<std::string, Value> outputs;
        bool inputs_bound = false;
        int fired = 0;
        int firable = 0;
        int outstanding = 0;
        std::int64_t next_seq = 0;
        int64_t created_ms = 0, finished_ms = 0;
        std::uint64_t tokens_in = 0, tokens_out = 0;
        std::uint64_t bytes_in = 0, bytes_out = 0;
        std::uint64_t svc_bytes_in = 0, svc_bytes_out = 0;
        std::string failure_code, failure_message, failure_origin;
        std::vector<std::pair<std::string, std::string>> invoked;  // endpoint, op
    };

    RunEntry& entry(const std::string& run);
    const RunEntry& entry(const std::string& run) const;
    const Node& node_of(RunEntry& e, int id) const;
    void deliver_local(const std::string& run, RunEntry& e, int node_id, int slot,
                       const Value& v, int64_t now_ms);
    void propagate(const std::string& run, RunEntry& e, int node_id, const Value& v,
                   int64_t now_ms);
    void schedule(const std::string& run, RunEntry& e, int node_id, int64_t now_ms);
    void finish_if_complete(RunEntry& e, int64_t now_ms);
    void fail_run(const std::string& run, RunEntry& e, const std::string& code,
                  const std::string& message, const std::string& origin, int64_t now_ms);
    void send_token(const std::string& run, RunEntry& e, const OutboundEntry& out,
                    const Value& v);

    OrchestratorOptions options_;
    std::map<std::string, RunEntry> runs_;
    std::set<std::string> tombstones_;  // garbage-collected run ids
    std::map<std::string, std::vector<std::pair<int64_t, TokenMsg>>> buffered_;
    std::deque<Action> actions_;
};

}  // namespace dflow
