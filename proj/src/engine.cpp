#include "dflow/engine.hpp"

#include <algorithm>
#include <cassert>
#include <condition_variable>
#include <mutex>
#include <thread>

namespace dflow {

const char* node_status_name(NodeStatus s) {
    switch (s) {
        case NodeStatus::Blocked: return "blocked";
        case NodeStatus::Enabled: return "enabled";
        case NodeStatus::Running: return "running";
        case NodeStatus::Done: return "done";
        case NodeStatus::Failed: return "failed";
        case NodeStatus::Cancelled: return "cancelled";
    }
    return "?";
}

nlohmann::json trace_to_json(const TraceEvent& e) {
    return {{"event", e.event},
            {"node", e.node},
            {"t_ms", e.t_ms},
            {"bytes_in", e.bytes_in},
            {"bytes_out", e.bytes_out}};
}

Engine::Engine(const DataflowGraph& graph, Invoker& invoker, EngineOptions options)
    : graph_(graph), invoker_(invoker), options_(std::move(options)),
      epoch_(std::chrono::steady_clock::now()) {}

int Engine::slot_count(const Node& n) {
    switch (n.kind) {
        case NodeKind::Invocation: return static_cast<int>(n.sig.inputs.size());
        case NodeKind::TupleAssembly: return n.arity;
        case NodeKind::Output: return 1;
        case NodeKind::Input:
        case NodeKind::Const: return 0;
    }
    return 0;
}

double Engine::now_ms() const {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now() - epoch_).count();
}

void Engine::emit(const TraceEvent& e) const {
    if (options_.trace) options_.trace(e);
}

RunState Engine::new_run(const std::map<std::string, Value>& inputs, std::string run_id) const {
    for (const auto& [name, value] : inputs) {
        auto it = std::find_if(graph_.inputs.begin(), graph_.inputs.end(),
                               [&](const auto& p) { return p.first == name; });
        if (it == graph_.inputs.end())
            throw RuntimeFailure("UnknownInput", "workflow declares no input '" + name + "'");
        if (!value_compatible(value, it->second))
            throw RuntimeFailure("InputTypeMismatch",
                                 "input '" + name + "' is " + type_display(value.runtime_type()) +
                                     ", declared " + type_display(it->second));
    }

    RunState run;
    run.run_id = std::move(run_id);
    run.slots.resize(graph_.nodes.size());
    run.filled.assign(graph_.nodes.size(), 0);
    run.status.assign(graph_.nodes.size(), NodeStatus::Blocked);
    for (const auto& n : graph_.nodes) run.slots[n.id].resize(slot_count(n));

    for (const auto& n : graph_.nodes)
        if ((n.kind == NodeKind::Invocation || n.kind == NodeKind::TupleAssembly) &&
            slot_count(n) == 0)
            run.status[n.id] = NodeStatus::Enabled;

    for (const auto& n : graph_.nodes) {
        if (n.kind == NodeKind::Input) {
            auto it = inputs.find(n.var);
            if (it == inputs.end())
                throw RuntimeFailure("MissingInput", "no value for input '" + n.var + "'");
            run.status[n.id] = NodeStatus::Done;
            propagate(run, n.id, it->second);
        } else if (n.kind == NodeKind::Const) {
            run.status[n.id] = NodeStatus::Done;
            propagate(run, n.id, Value::from_scalar(n.scalar));
        }
    }
    check_enabled_invariant(run);
    return run;
}

void Engine::deliver(RunState& run, const Edge& e, const Value& v) const {
    auto& slot = run.slots[e.dst][e.dst_slot];
    if (slot.has_value())
        throw std::logic_error("slot refilled: node " + std::to_string(e.dst) + " slot " +
                               std::to_string(e.dst_slot));
    slot = v;
    ++run.filled[e.dst];

    const Node& dst = graph_.nodes[e.dst];
    if (dst.kind == NodeKind::Output) {
        run.status[e.dst] = NodeStatus::Done;
        run.outputs[dst.var] = v;
        if (options_.on_output) options_.on_output(dst.var, v);
        return;
    }
    if (run.filled[e.dst] == slot_count(dst) && run.status[e.dst] == NodeStatus::Blocked)
        run.status[e.dst] = NodeStatus::Enabled;
}

void Engine::propagate(RunState& run, int node_id, const Value& v) const {
    for (int eid : graph_.out_edges[node_id]) {
        const Edge& e = graph_.edges[eid];
        if (e.src_slot >= 0) {
            // element-wise tuple feed
            assert(v.kind == Value::Kind::Tuple &&
                   e.src_slot < static_cast<int>(v.elems.size()));
            deliver(run, e, v.elems[e.src_slot]);
        } else {
            deliver(run, e, v);
        }
    }
}

std::vector<std::pair<std::string, Value>> Engine::gather_args(const RunState& run,
                                                               int node_id) const {
    const Node& n = graph_.nodes[node_id];
    std::vector<std::pair<std::string, Value>> args;
    args.reserve(run.slots[node_id].size());
    for (size_t i = 0; i < run.slots[node_id].size(); ++i) {
        std::string name =
            n.kind == NodeKind::Invocation ? n.sig.inputs[i].first : std::to_string(i);
        args.emplace_back(std::move(name), *run.slots[node_id][i]);
    }
    return args;
}

Value Engine::compute(int node_id, const std::vector<std::pair<std::string, Value>>& args) const {
    const Node& n = graph_.nodes[node_id];
    if (n.kind == NodeKind::TupleAssembly) {
        std::vector<Value> elems;
        elems.reserve(args.size());
        for (const auto& [name, v] : args) elems.push_back(v);
        return Value::of_tuple(std::move(elems));
    }
    auto started = std::chrono::steady_clock::now();
    Value out = invoker_.invoke(n, args);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    if (options_.timeout_ms > 0 && elapsed > options_.timeout_ms)
        throw RuntimeFailure("Timeout", n.display() + " exceeded " +
                                            std::to_string(options_.timeout_ms) + " ms");
    if (!value_compatible(out, n.output_type))
        throw RuntimeFailure("PayloadTypeMismatch",
                             n.display() + " returned " + type_display(out.runtime_type()) +
                                 ", declared " + type_display(n.output_type));
    return out;
}

void Engine::fire(RunState& run, int node_id) const {
    if (run.status[node_id] != NodeStatus::Enabled)
        throw std::logic_error("fire on non-enabled node " + std::to_string(node_id));
    const Node& n = graph_.nodes[node_id];
    run.status[node_id] = NodeStatus::Running;
    auto args = gather_args(run, node_id);
    std::uint64_t bytes_in = 0;
    for (const auto& [name, v] : args) bytes_in += v.payload_bytes();
    emit({"fire", node_id, now_ms(), bytes_in, 0});
    try {
        Value out = compute(node_id, args);
        run.status[node_id] = NodeStatus::Done;
        ++run.fire_count;
        emit({"done", node_id, now_ms(), bytes_in, out.payload_bytes()});
        propagate(run, node_id, out);
    } catch (const std::exception& e) {
        run.status[node_id] = NodeStatus::Failed;
        run.failed = true;
        run.failure_code = "InvocationFailed";
        run.failure_message = n.display() + " failed: " + e.what();
        emit({"fail", node_id, now_ms(), bytes_in, 0});
    }
    check_enabled_invariant(run);
}

std::vector<int> Engine::enabled(const RunState& run) const {
    std::vector<int> out;
    for (const auto& n : graph_.nodes)
        if (run.status[n.id] == NodeStatus::Enabled) out.push_back(n.id);
    return out;
}

void Engine::check_enabled_invariant(const RunState& run) const {
    if (!options_.check_invariants) return;
    for (const auto& n : graph_.nodes) {
        if (n.kind != NodeKind::Invocation && n.kind != NodeKind::TupleAssembly) continue;
        bool all_filled = run.filled[n.id] == slot_count(n);
        if (run.status[n.id] == NodeStatus::Enabled && !all_filled)
            throw std::logic_error("node " + std::to_string(n.id) + " enabled with empty slots");
        if (run.status[n.id] == NodeStatus::Blocked && all_filled)
            throw std::logic_error("node " + std::to_string(n.id) + " blocked with full slots");
    }
}

void Engine::run_sequential(RunState& run) {
    while (!run.failed) {
        int next = -1;
        for (const auto& n : graph_.nodes)
            if (run.status[n.id] == NodeStatus::Enabled) {
                next = n.id;
                break;
            }
        if (next < 0) break;
        fire(run, next);
    }
}

void Engine::run_parallel(RunState& run) {
    std::mutex mu;
    std::condition_variable cv;
    std::vector<int> ready = enabled(run);
    int in_flight = 0;
    bool stop = ready.empty();

    auto worker = [&] {
        std::unique_lock lock(mu);
        for (;;) {
            cv.wait(lock, [&] { return stop || !ready.empty(); });
            if (ready.empty()) return;
            int node_id = ready.back();
            ready.pop_back();
            const Node& n = graph_.nodes[node_id];
            run.status[node_id] = NodeStatus::Running;
            auto args = gather_args(run, node_id);
            std::uint64_t bytes_in = 0;
            for (const auto& [name, v] : args) bytes_in += v.payload_bytes();
            emit({"fire", node_id, now_ms(), bytes_in, 0});
            ++in_flight;
            lock.unlock();

            std::optional<Value> out;
            std::string error;
            try {
                out = compute(node_id, args);
            } catch (const std::exception& e) {
                error = e.what();
            }

            lock.lock();
            --in_flight;
            if (run.failed) {
                run.status[node_id] = NodeStatus::Cancelled;  // late result discarded
            } else if (out) {
                run.status[node_id] = NodeStatus::Done;
                ++run.fire_count;
                emit({"done", node_id, now_ms(), bytes_in, out->payload_bytes()});
                propagate(run, node_id, *out);
                for (const auto& m : graph_.nodes)
                    if (run.status[m.id] == NodeStatus::Enabled &&
                        std::find(ready.begin(), ready.end(), m.id) == ready.end())
                        ready.push_back(m.id);
                check_enabled_invariant(run);
            } else {
                run.status[node_id] = NodeStatus::Failed;
                run.failed = true;
                run.failure_code = "InvocationFailed";
                run.failure_message = n.display() + " failed: " + error;
                emit({"fail", node_id, now_ms(), bytes_in, 0});
                ready.clear();
            }
            if (ready.empty() && in_flight == 0) stop = true;
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(options_.workers);
    for (int i = 0; i < options_.workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

std::map<std::string, Value> Engine::run_to_completion(const std::map<std::string, Value>& inputs) {
    epoch_ = std::chrono::steady_clock::now();
    RunState run = new_run(inputs);
    if (options_.workers <= 1)
        run_sequential(run);
    else
        run_parallel(run);

    if (run.failed) throw RuntimeFailure("RunFailed", run.failure_message);

    // A checked DAG cannot stall: every firing node fired exactly once and
    // every declared output is bound.
    int firable = 0;
    for (const auto& n : graph_.nodes)
        if (n.kind == NodeKind::Invocation || n.kind == NodeKind::TupleAssembly) ++firable;
    if (run.fire_count != firable)
        throw std::logic_error("stalled: " + std::to_string(run.fire_count) + " of " +
                               std::to_string(firable) + " nodes fired");
    for (const auto& [name, type] : graph_.outputs)
        if (!run.outputs.count(name))
            throw std::logic_error("stalled: output '" + name + "' unbound");
    return run.outputs;
}

}  // namespace dflow
