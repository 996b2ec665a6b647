#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>

#include "dflow/graph.hpp"
#include "dflow/value.hpp"

namespace dflow {

// Thrown by execution phases. `code` is stable and machine-readable
// (MissingInput, InputTypeMismatch, InvocationFailed, RunFailed, Timeout,
// ServiceError, UnknownRun, PayloadTypeMismatch, WrongSite, ...).
class RuntimeFailure : public std::runtime_error {
  public:
    RuntimeFailure(std::string code, std::string message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)),
          message_(std::move(message)) {}

    const std::string& code() const { return code_; }
    const std::string& message() const { return message_; }

  private:
    std::string code_;
    std::string message_;
};

// Performs one service invocation: endpoint/operation/signature come from the
// node, arguments arrive named and in declared order. Throws RuntimeFailure
// on failure. Implementations must be safe to call concurrently.
class Invoker {
  public:
    virtual ~Invoker() = default;
    virtual Value invoke(const Node& node,
                         const std::vector<std::pair<std::string, Value>>& args) = 0;
};

enum class NodeStatus { Blocked, Enabled, Running, Done, Failed, Cancelled };

const char* node_status_name(NodeStatus s);

struct TraceEvent {
    std::string event;  // "fire" | "done" | "fail"
    int node = -1;
    double t_ms = 0;
    std::uint64_t bytes_in = 0;
    std::uint64_t bytes_out = 0;
};

nlohmann::json trace_to_json(const TraceEvent& e);

struct EngineOptions {
    int workers = 1;
    int timeout_ms = 30'000;  // invocations slower than this count as failed
    bool check_invariants = false;  // exhaustive enabled-set scan per step
    std::function<void(const TraceEvent&)> trace;
    std::function<void(const std::string&, const Value&)> on_output;
};

// Mutable execution state; owned by one coordinator, never shared.
struct RunState {
    std::string run_id;
    std::vector<std::vector<std::optional<Value>>> slots;  // node -> in-slot values
    std::vector<int> filled;                               // node -> filled slot count
    std::vector<NodeStatus> status;
    std::map<std::string, Value> outputs;
    int fire_count = 0;  // Invocation + TupleAssembly firings
    bool failed = false;
    std::string failure_code, failure_message;
};

// Data-driven execution of a checked DataflowGraph: the reference semantics
// every distributed mode is tested against. With workers == 1 execution is
// sequential firing the lowest-id enabled node (the canonical oracle order);
// with workers > 1 enabled invocations run concurrently — single assignment
// makes the result confluent. First failure aborts the run (in-flight
// invocations finish and are discarded).
class Engine {
  public:
    Engine(const DataflowGraph& graph, Invoker& invoker, EngineOptions options = {});

    RunState new_run(const std::map<std::string, Value>& inputs,
                     std::string run_id = "local") const;

    // Fires one enabled node synchronously (unit-test granularity).
    void fire(RunState& run, int node_id) const;

    std::vector<int> enabled(const RunState& run) const;

    std::map<std::string, Value> run_to_completion(const std::map<std::string, Value>& inputs);

    const DataflowGraph& graph() const { return graph_; }

    // Slot count a node waits on: one per parameter / tuple element, one for
    // an output binding, zero for sources.
    static int slot_count(const Node& n);

  private:
    void deliver(RunState& run, const Edge& e, const Value& v) const;
    void propagate(RunState& run, int node_id, const Value& v) const;
    Value compute(int node_id, const std::vector<std::pair<std::string, Value>>& args) const;
    std::vector<std::pair<std::string, Value>> gather_args(const RunState& run,
                                                           int node_id) const;
    void emit(const TraceEvent& e) const;
    double now_ms() const;
    void check_enabled_invariant(const RunState& run) const;
    void run_sequential(RunState& run);
    void run_parallel(RunState& run);

    const DataflowGraph& graph_;
    Invoker& invoker_;
    EngineOptions options_;
    std::chrono::steady_clock::time_point epoch_;
};

}  // namespace dflow
