#include "dflow/orchestrator.hpp"

#include <algorithm>

namespace dflow {

const char* run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Pending: return "pending";
        case RunStatus::Running: return "running";
        case RunStatus::Done: return "done";
        case RunStatus::Failed: return "failed";
    }
    return "?";
}

nlohmann::json token_to_json(const TokenMsg& t) {
    nlohmann::json j{{"run", t.run},
                     {"edge", t.edge},
                     {"value", value_to_json(t.value)},
                     {"origin", t.origin},
                     {"seq", t.seq}};
    if (t.fail) j["fail"] = {{"code", t.fail_code}, {"msg", t.fail_message}};
    return j;
}

TokenMsg token_from_json(const nlohmann::json& j) {
    TokenMsg t;
    t.run = j.at("run").get<std::string>();
    t.edge = j.at("edge").get<int>();
    t.value = value_from_json(j.at("value"));
    t.origin = j.value("origin", "");
    t.seq = j.value("seq", std::int64_t{0});
    if (j.contains("fail")) {
        t.fail = true;
        t.fail_code = j["fail"].value("code", "RunFailed");
        t.fail_message = j["fail"].value("msg", "");
    }
    return t;
}

OrchestratorCore::OrchestratorCore(OrchestratorOptions options) : options_(std::move(options)) {}

OrchestratorCore::RunEntry& OrchestratorCore::entry(const std::string& run) {
    auto it = runs_.find(run);
    if (it == runs_.end()) throw RuntimeFailure("UnknownRun", "run '" + run + "' not deployed");
    return it->second;
}

const OrchestratorCore::RunEntry& OrchestratorCore::entry(const std::string& run) const {
    auto it = runs_.find(run);
    if (it == runs_.end()) throw RuntimeFailure("UnknownRun", "run '" + run + "' not deployed");
    return it->second;
}

const Node& OrchestratorCore::node_of(RunEntry& e, int id) const {
    return e.frag.nodes[e.node_index.at(id)];
}

OrchestratorCore::Ack OrchestratorCore::deploy_fragment(const std::string& run, Fragment fragment,
                                                        int64_t now_ms) {
    if (fragment.site != options_.site_id)
        throw RuntimeFailure("WrongSite", "fragment for site '" + fragment.site +
                                              "' posted to '" + options_.site_id + "'");
    if (tombstones_.count(run) || runs_.count(run)) return {.duplicate = true};

    RunEntry e;
    e.frag = std::move(fragment);
    e.created_ms = now_ms;
    e.local_out.resize(e.frag.nodes.size());
    for (size_t i = 0; i < e.frag.nodes.size(); ++i)
        e.node_index[e.frag.nodes[i].id] = static_cast<int>(i);
    for (size_t k = 0; k < e.frag.edges.size(); ++k)
        e.local_out[e.node_index.at(e.frag.edges[k].src)].push_back(static_cast<int>(k));
    for (const auto& n : e.frag.nodes) {
        NodeState st;
        st.slots.resize(Engine::slot_count(n));
        e.nodes.emplace(n.id, std::move(st));
        if (n.kind == NodeKind::Invocation || n.kind == NodeKind::TupleAssembly) ++e.firable;
    }
    auto [it, inserted] = runs_.emplace(run, std::move(e));
    RunEntry& run_entry = it->second;

    for (const auto& n : run_entry.frag.nodes) {
        if (n.kind == NodeKind::Const) {
            run_entry.nodes.at(n.id).status = NodeStatus::Done;
            propagate(run, run_entry, n.id, Value::from_scalar(n.scalar), now_ms);
        } else if ((n.kind == NodeKind::Invocation || n.kind == NodeKind::TupleAssembly) &&
                   Engine::slot_count(n) == 0) {
            schedule(run, run_entry, n.id, now_ms);
        }
    }

    // Replay tokens that arrived ahead of the fragment.
    if (auto buf = buffered_.find(run); buf != buffered_.end()) {
        auto pending = std::move(buf->second);
        buffered_.erase(buf);
        for (auto& [arrived, msg] : pending) deliver_token(msg, now_ms);
    }
    finish_if_complete(run_entry, now_ms);
    return {};
}

void OrchestratorCore::bind_inputs(const std::string& run,
                                   const std::map<std::string, Value>& inputs, int64_t now_ms) {
    RunEntry& e = entry(run);
    for (const auto& [name, value] : inputs) {
        auto it = std::find_if(e.frag.nodes.begin(), e.frag.nodes.end(), [&](const Node& n) {
            return n.kind == NodeKind::Input && n.var == name;
        });
        if (it == e.frag.nodes.end())
            throw RuntimeFailure("UnknownInput", "workflow declares no input '" + name + "'");
        if (!value_compatible(value, it->output_type))
            throw RuntimeFailure("InputTypeMismatch",
                                 "input '" + name + "' is " + type_display(value.runtime_type()) +
                                     ", declared " + type_display(it->output_type));
    }
    for (const auto& n : e.frag.nodes) {
        if (n.kind != NodeKind::Input) continue;
        auto it = inputs.find(n.var);
        if (it == inputs.end())
            throw RuntimeFailure("MissingInput", "no value for input '" + n.var + "'");
        e.nodes.at(n.id).status = NodeStatus::Done;
        propagate(run, e, n.id, it->second, now_ms);
    }
    e.inputs_bound = true;
    if (e.status == RunStatus::Pending) e.status = RunStatus::Running;
    finish_if_complete(e, now_ms);
}

OrchestratorCore::Ack OrchestratorCore::deliver_token(const TokenMsg& msg, int64_t now_ms) {
    if (tombstones_.count(msg.run)) return {.duplicate = true};
    auto it = runs_.find(msg.run);
    if (it == runs_.end()) {
        if (options_.grace_ms <= 0)
            throw RuntimeFailure("UnknownRun", "run '" + msg.run + "' not deployed");
        buffered_[msg.run].emplace_back(now_ms, msg);
        return {.buffered = true};
    }
    RunEntry& e = it->second;

    if (msg.fail) {
        fail_run(msg.run, e, msg.fail_code.empty() ? "RunFailed" : msg.fail_code,
                 msg.fail_message, msg.origin, now_ms);
        return {};
    }
    if (e.status == RunStatus::Failed) return {.duplicate = true};

    const InboundEntry* hit = nullptr;
    for (const auto& ib : e.frag.inbound)
        if (ib.edge == msg.edge) {
            hit = &ib;
            break;
        }
    if (!hit)
        throw RuntimeFailure("UnknownEdge", "no inbound transfer with edge id " +
                                                std::to_string(msg.edge) + " at site " +
                                                options_.site_id);
    if (!value_compatible(msg.value, hit->type))
        throw RuntimeFailure("PayloadTypeMismatch",
                             "edge " + std::to_string(msg.edge) + " carries " +
                                 type_display(hit->type) + ", token holds " +
                                 type_display(msg.value.runtime_type()));

    if (!e.store.emplace(msg.edge, msg.value).second) return {.duplicate = true};
    ++e.tokens_in;
    e.bytes_in += msg.value.payload_bytes();
    if (e.status == RunStatus::Pending) e.status = RunStatus::Running;

    // One wire copy fans out to every local consumer of (src, src_slot).
    for (const auto& ib : e.frag.inbound)
        if (ib.src == hit->src && ib.src_slot == hit->src_slot)
            deliver_local(msg.run, e, ib.dst, ib.dst_slot, msg.value, now_ms);
    finish_if_complete(e, now_ms);
    return {};
}

void OrchestratorCore::deliver_local(const std::string& run, RunEntry& e, int node_id, int slot,
                                     const Value& v, int64_t now_ms) {
    if (e.status == RunStatus::Failed) return;
    const Node& n = node_of(e, node_id);
    NodeState& st = e.nodes.at(node_id);
    if (n.kind == NodeKind::Output) {
        st.status = NodeStatus::Done;
        e.outputs[n.var] = v;
        return;
    }
    auto& cell = st.slots[slot];
    if (cell.has_value())
        throw std::logic_error("slot refilled: node " + std::to_string(node_id) + " slot " +
                               std::to_string(slot));
    cell = v;
    bool full = std::all_of(st.slots.begin(), st.slots.end(),
                            [](const auto& s) { return s.has_value(); });
    if (full && st.status == NodeStatus::Blocked) schedule(run, e, node_id, now_ms);
}

void OrchestratorCore::schedule(const std::string& run, RunEntry& e, int node_id,
                                int64_t now_ms) {
    const Node& n = node_of(e, node_id);
    NodeState& st = e.nodes.at(node_id);
    if (e.status == RunStatus::Pending) e.status = RunStatus::Running;

    if (n.kind == NodeKind::TupleAssembly) {
        std::vector<Value> elems;
        elems.reserve(st.slots.size());
        for (const auto& s : st.slots) elems.push_back(*s);
        st.status = NodeStatus::Done;
        ++e.fired;
        propagate(run, e, node_id, Value::of_tuple(std::move(elems)), now_ms);
        return;
    }

    st.status = NodeStatus::Running;
    ++e.outstanding;
    Action a;
    a.kind = Action::Kind::Invoke;
    a.run = run;
    a.node = n;
    a.args.reserve(st.slots.size());
    for (size_t i = 0; i < st.slots.size(); ++i) {
        e.svc_bytes_out += st.slots[i]->payload_bytes();
        a.args.emplace_back(n.sig.inputs[i].first, *st.slots[i]);
    }
    e.invoked.emplace_back(n.endpoint, n.op);
    actions_.push_back(std::move(a));
}

void OrchestratorCore::send_token(const std::string& run, RunEntry& e, const OutboundEntry& out,
                                  const Value& v) {
    Action a;
    a.kind = Action::Kind::SendToken;
    a.run = run;
    a.to_site = out.to_site;
    a.to_url = out.to_url;
    a.token.run = run;
    a.token.edge = out.edge;
    a.token.value = out.src_slot >= 0 ? v.elems[out.src_slot] : v;
    a.token.origin = options_.site_id;
    a.token.seq = e.next_seq++;
    ++e.tokens_out;
    e.bytes_out += a.token.value.payload_bytes();
    actions_.push_back(std::move(a));
}

void OrchestratorCore::propagate(const std::string& run, RunEntry& e, int node_id,
                                 const Value& v, int64_t now_ms) {
    for (int k : e.local_out[e.node_index.at(node_id)]) {
        const Edge& edge = e.frag.edges[k];
        const Value& slice = edge.src_slot >= 0 ? v.elems[edge.src_slot] : v;
        deliver_local(run, e, edge.dst, edge.dst_slot, slice, now_ms);
        if (e.status == RunStatus::Failed) return;
    }
    for (const auto& out : e.frag.outbound) {
        if (out.src != node_id) continue;
        send_token(run, e, out, v);
    }
}

void OrchestratorCore::invocation_done(const std::string& run, int node, Value result,
                                       int64_t now_ms) {
    auto it = runs_.find(run);
    if (it == runs_.end()) return;  // garbage-collected mid-flight
    RunEntry& e = it->second;
    if (e.status == RunStatus::Failed) return;  // fail-fast: discard late results

    const Node& n = node_of(e, node);
    if (!value_compatible(result, n.output_type)) {
        fail_run(run, e, "InvocationFailed",
                 n.display() + " returned " + type_display(result.runtime_type()) +
                     ", declared " + type_display(n.output_type),
                 options_.site_id, now_ms);
        return;
    }
    e.nodes.at(node).status = NodeStatus::Done;
    ++e.fired;
    --e.outstanding;
    e.svc_bytes_in += result.payload_bytes();
    propagate(run, e, node, result, now_ms);
    finish_if_complete(e, now_ms);
}

void OrchestratorCore::invocation_failed(const std::string& run, int node,
                                         const std::string& message, int64_t now_ms) {
    auto it = runs_.find(run);
    if (it == runs_.end()) return;
    RunEntry& e = it->second;
    if (e.status == RunStatus::Failed) return;
    const Node& n = node_of(e, node);
    e.nodes.at(node).status = NodeStatus::Failed;
    fail_run(run, e, "InvocationFailed", n.display() + " failed: " + message, options_.site_id,
             now_ms);
}

void OrchestratorCore::fail_run(const std::string& run, RunEntry& e, const std::string& code,
                                const std::string& message, const std::string& origin,
                                int64_t now_ms) {
    if (e.status == RunStatus::Failed) return;
    e.status = RunStatus::Failed;
    e.failure_code = code;
    e.failure_message = message;
    e.failure_origin = origin.empty() ? options_.site_id : origin;
    e.finished_ms = now_ms;
    if (e.frag.site != e.frag.root_site) {
        Action a;
        a.kind = Action::Kind::SendToken;
        a.run = run;
        a.to_site = e.frag.root_site;
        a.to_url = e.frag.root_url;
        a.token.run = run;
        a.token.fail = true;
        a.token.fail_code = code;
        a.token.fail_message = message;
        a.token.origin = e.failure_origin;
        a.token.seq = e.next_seq++;
        actions_.push_back(std::move(a));
    }
}

void OrchestratorCore::finish_if_complete(RunEntry& e, int64_t now_ms) {
    if (e.status == RunStatus::Done || e.status == RunStatus::Failed) return;
    if (e.fired != e.firable || e.outstanding != 0) return;
    for (const auto& n : e.frag.nodes) {
        if (n.kind == NodeKind::Input && !e.inputs_bound) return;
        if (n.kind == NodeKind::Output && !e.outputs.count(n.var)) return;
    }
    e.status = RunStatus::Done;
    e.finished_ms = now_ms;
}

std::vector<Action> OrchestratorCore::drain_actions() {
    std::vector<Action> out(std::make_move_iterator(actions_.begin()),
                            std::make_move_iterator(actions_.end()));
    actions_.clear();
    return out;
}

OutputsView OrchestratorCore::collect_outputs(const std::string& run) const {
    OutputsView view;
    if (tombstones_.count(run)) {
        view.status = RunStatus::Failed;
        view.failure_code = "Gone";
        view.failure_message = "run '" + run + "' garbage-collected";
        return view;
    }
    const RunEntry& e = entry(run);
    view.status = e.status;
    view.nodes_total = static_cast<int>(e.frag.nodes.size());
    for (const auto& [id, st] : e.nodes)
        if (st.status == NodeStatus::Done) ++view.nodes_done;
    if (e.status == RunStatus::Done) view.outputs = e.outputs;
    view.failure_code = e.failure_code;
    view.failure_message = e.failure_message;
    view.failure_origin = e.failure_origin;
    return view;
}

bool OrchestratorCore::knows_run(const std::string& run) const { return runs_.count(run) > 0; }

RunStatus OrchestratorCore::run_status(const std::string& run) const {
    return entry(run).status;
}

nlohmann::json OrchestratorCore::metrics(const std::string& run) const {
    const RunEntry& e = entry(run);
    nlohmann::json invoked = nlohmann::json::array();
    for (const auto& [endpoint, op] : e.invoked)
        invoked.push_back({{"endpoint", endpoint}, {"op", op}});
    return {{"run", run},
            {"site", options_.site_id},
            {"status", run_status_name(e.status)},
            {"tokens_in", e.tokens_in},
            {"tokens_out", e.tokens_out},
            {"bytes_in", e.bytes_in},
            {"bytes_out", e.bytes_out},
            {"svc_bytes_in", e.svc_bytes_in},
            {"svc_bytes_out", e.svc_bytes_out},
            {"fired", e.fired},
            {"invoked", invoked},
            {"created_ms", e.created_ms},
            {"finished_ms", e.finished_ms}};
}

void OrchestratorCore::tick(int64_t now_ms) {
    for (auto it = buffered_.begin(); it != buffered_.end();) {
        auto& vec = it->second;
        vec.erase(std::remove_if(vec.begin(), vec.end(),
                                 [&](const auto& p) {
                                     return now_ms - p.first >= options_.grace_ms;
                                 }),
                  vec.end());
        it = vec.empty() ? buffered_.erase(it) : std::next(it);
    }
    for (auto it = runs_.begin(); it != runs_.end();) {
        const RunEntry& e = it->second;
        bool finished = e.status == RunStatus::Done || e.status == RunStatus::Failed;
        if (finished && now_ms - e.finished_ms >= options_.gc_ms) {
            tombstones_.insert(it->first);
            it = runs_.erase(it);
        } else {
            ++it;
        }
    }
}

}  // namespace dflow
