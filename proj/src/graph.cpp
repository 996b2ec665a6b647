#include "dflow/graph.hpp"

#include <algorithm>
#include <map>

namespace dflow {

const char* node_kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Input: return "input";
        case NodeKind::Output: return "output";
        case NodeKind::Invocation: return "invocation";
        case NodeKind::TupleAssembly: return "tuple";
        case NodeKind::Const: return "const";
    }
    return "?";
}

std::string Node::display() const {
    switch (kind) {
        case NodeKind::Input: return "in:" + var;
        case NodeKind::Output: return "out:" + var;
        case NodeKind::Invocation: return port + "." + op;
        case NodeKind::TupleAssembly: return var + "=(...)";
        case NodeKind::Const: return render_scalar(scalar);
    }
    return "?";
}

void DataflowGraph::rebuild_adjacency() {
    in_edges.assign(nodes.size(), {});
    out_edges.assign(nodes.size(), {});
    for (const auto& e : edges) {
        out_edges[e.src].push_back(e.id);
        in_edges[e.dst].push_back(e.id);
    }
}

const Node* DataflowGraph::find_invocation(const std::string& port, const std::string& op) const {
    for (const auto& n : nodes)
        if (n.kind == NodeKind::Invocation && n.port == port && n.op == op) return &n;
    return nullptr;
}

namespace {

class GraphBuilder {
  public:
    explicit GraphBuilder(const ResolvedWorkflow& w) : w_(w) {}

    DataflowGraph run() {
        g_.inputs = w_.inputs;
        g_.outputs = w_.outputs;
        for (const auto& [name, type] : w_.inputs) {
            Node n;
            n.kind = NodeKind::Input;
            n.var = name;
            n.output_type = type;
            var_node_[name] = add_node(std::move(n));
        }
        build_statements();
        for (const auto& [name, type] : w_.outputs) {
            Node n;
            n.kind = NodeKind::Output;
            n.var = name;
            n.output_type = type;
            int id = add_node(std::move(n));
            add_edge(source_of(name), id, 0, "", def_type(name));
        }
        g_.rebuild_adjacency();
        check_acyclic();
        return std::move(g_);
    }

  private:
    const ResolvedWorkflow& w_;
    DataflowGraph g_;
    std::map<std::string, int> var_node_;   // variable -> producing node
    std::map<std::string, int> inv_node_;   // "port.Op" -> node
    size_t next_binding_ = 0;

    int add_node(Node n) {
        n.id = static_cast<int>(g_.nodes.size());
        g_.nodes.push_back(std::move(n));
        return g_.nodes.back().id;
    }

    void add_edge(std::pair<int, int> src, int dst, int dst_slot, std::string param,
                  TypeExpr type) {
        Edge e;
        e.id = static_cast<int>(g_.edges.size());
        e.src = src.first;
        e.src_slot = src.second;
        e.dst = dst;
        e.dst_slot = dst_slot;
        e.dst_param = std::move(param);
        e.type = std::move(type);
        g_.edges.push_back(std::move(e));
    }

    // Producing (node, src_slot) for a variable, following aliases.
    std::pair<int, int> source_of(const std::string& var) { return {var_node_.at(var), -1}; }

    TypeExpr def_type(const std::string& var) const { return w_.variables.at(var).type; }

    int ensure_invocation(const InvocationRef& ref) {
        std::string key = ref.port + "." + ref.op;
        auto it = inv_node_.find(key);
        if (it != inv_node_.end()) return it->second;
        const ResolvedInvocation& inv = w_.invocations.at(key);
        Node n;
        n.kind = NodeKind::Invocation;
        n.port = inv.port;
        n.op = inv.op;
        n.endpoint = inv.endpoint;
        n.sig = inv.sig;
        n.output_type = inv.sig.output;
        int id = add_node(std::move(n));
        inv_node_[key] = id;
        return id;
    }

    int make_const(const ScalarLit& lit) {
        Node n;
        n.kind = NodeKind::Const;
        n.scalar = lit;
        n.output_type = TypeExpr::of(lit.type);
        return add_node(std::move(n));
    }

    // Emits the checked bindings belonging to statement `stmt`, using
    // `const_node` as the source for scalar feeds.
    void emit_bindings(int stmt, int const_node) {
        while (next_binding_ < w_.bindings.size() && w_.bindings[next_binding_].stmt == stmt) {
            const ParamBinding& b = w_.bindings[next_binding_++];
            int dst = inv_node_.at(b.inv_key);
            const auto& param = w_.invocations.at(b.inv_key).sig.inputs[b.param_index];
            std::pair<int, int> src;
            TypeExpr type;
            if (b.src_is_scalar) {
                src = {const_node, -1};
                type = TypeExpr::of(b.scalar.type);
            } else if (b.tuple_elem >= 0) {
                src = {var_node_.at(b.src_var), b.tuple_elem};
                type = def_type(b.src_var).elems[b.tuple_elem];
            } else {
                src = source_of(b.src_var);
                type = def_type(b.src_var);
            }
            add_edge(src, dst, b.param_index, param.first, std::move(type));
        }
    }

    void build_statements() {
        const auto& stmts = w_.spec.statements;
        for (int i = 0; i < static_cast<int>(stmts.size()); ++i) {
            const Statement& s = stmts[i];
            switch (s.kind) {
                case StatementKind::BareInvocation:
                    ensure_invocation(s.invocation);
                    break;
                case StatementKind::FeedScalar: {
                    for (const auto& t : s.targets) ensure_invocation(t);
                    int c = make_const(s.scalar);
                    emit_bindings(i, c);
                    break;
                }
                case StatementKind::FeedVariable:
                    for (const auto& t : s.targets) ensure_invocation(t);
                    emit_bindings(i, -1);
                    break;
                case StatementKind::Retrieve: {
                    int inv = ensure_invocation(s.invocation);
                    var_node_[s.var] = inv;
                    break;
                }
                case StatementKind::AssignScalar:
                    var_node_[s.var] = make_const(s.scalar);
                    break;
                case StatementKind::AssignVar:
                    var_node_[s.var] = var_node_.at(s.rhs_var);
                    break;
                case StatementKind::AssignTuple: {
                    Node n;
                    n.kind = NodeKind::TupleAssembly;
                    n.var = s.var;
                    n.arity = static_cast<int>(s.tuple.size());
                    n.output_type = def_type(s.var);
                    int id = add_node(std::move(n));
                    for (size_t k = 0; k < s.tuple.size(); ++k) {
                        const TupleElem& e = s.tuple[k];
                        std::pair<int, int> src = e.is_var
                                                      ? source_of(e.var)
                                                      : std::pair<int, int>{make_const(e.scalar), -1};
                        TypeExpr t = e.is_var ? def_type(e.var) : TypeExpr::of(e.scalar.type);
                        add_edge(src, id, static_cast<int>(k), "", std::move(t));
                    }
                    var_node_[s.var] = id;
                    break;
                }
            }
        }
    }

    void check_acyclic() {
        enum { White, Grey, Black };
        std::vector<int> mark(g_.nodes.size(), White);
        std::vector<int> stack;
        // iterative DFS keeping the grey path for cycle reporting
        for (size_t root = 0; root < g_.nodes.size(); ++root) {
            if (mark[root] != White) continue;
            std::vector<std::pair<int, size_t>> frames{{static_cast<int>(root), 0}};
            mark[root] = Grey;
            stack.push_back(static_cast<int>(root));
            while (!frames.empty()) {
                auto& [node, next] = frames.back();
                if (next >= g_.out_edges[node].size()) {
                    mark[node] = Black;
                    stack.pop_back();
                    frames.pop_back();
                    continue;
                }
                int dst = g_.edges[g_.out_edges[node][next++]].dst;
                if (mark[dst] == Grey) {
                    std::string cycle;
                    auto it = std::find(stack.begin(), stack.end(), dst);
                    for (; it != stack.end(); ++it) {
                        if (!cycle.empty()) cycle += " -> ";
                        cycle += g_.nodes[*it].display();
                    }
                    cycle += " -> " + g_.nodes[dst].display();
                    throw CompileError("CycleError", {}, "dataflow cycle: " + cycle);
                }
                if (mark[dst] == White) {
                    mark[dst] = Grey;
                    stack.push_back(dst);
                    frames.emplace_back(dst, 0);
                }
            }
        }
    }
};

}  // namespace

DataflowGraph build_graph(const ResolvedWorkflow& resolved) {
    return GraphBuilder(resolved).run();
}

ParallelSchedule parallel_sets(const DataflowGraph& g) {
    std::vector<int> level(g.nodes.size(), 0);
    std::vector<int> indeg(g.nodes.size(), 0);
    for (const auto& e : g.edges) ++indeg[e.dst];
    std::vector<int> queue;
    for (const auto& n : g.nodes)
        if (indeg[n.id] == 0) queue.push_back(n.id);
    size_t head = 0;
    int max_level = 0;
    while (head < queue.size()) {
        int n = queue[head++];
        for (int eid : g.out_edges[n]) {
            int dst = g.edges[eid].dst;
            level[dst] = std::max(level[dst], level[n] + 1);
            max_level = std::max(max_level, level[dst]);
            if (--indeg[dst] == 0) queue.push_back(dst);
        }
    }
    ParallelSchedule sched;
    sched.levels.assign(max_level + 1, {});
    for (const auto& n : g.nodes) sched.levels[level[n.id]].push_back(n.id);
    return sched;
}

std::vector<std::vector<int>> ParallelSchedule::invocation_levels(const DataflowGraph& g) const {
    std::vector<std::vector<int>> out;
    for (const auto& lvl : levels) {
        std::vector<int> invs;
        for (int id : lvl)
            if (g.nodes[id].kind == NodeKind::Invocation) invs.push_back(id);
        if (!invs.empty()) out.push_back(std::move(invs));
    }
    return out;
}

std::string to_dot(const DataflowGraph& g) {
    std::string out = "digraph workflow {\n  rankdir=LR;\n";
    for (const auto& n : g.nodes) {
        std::string shape;
        switch (n.kind) {
            case NodeKind::Invocation: shape = "box"; break;
            case NodeKind::TupleAssembly: shape = "diamond"; break;
            case NodeKind::Const: shape = "plaintext"; break;
            default: shape = "ellipse";
        }
        out += "  n" + std::to_string(n.id) + " [label=\"" + n.display() + "\", shape=" + shape +
               "];\n";
    }
    for (const auto& e : g.edges) {
        out += "  n" + std::to_string(e.src) + " -> n" + std::to_string(e.dst);
        std::string label;
        if (!e.dst_param.empty()) label = e.dst_param;
        if (e.src_slot >= 0)
            label = "[" + std::to_string(e.src_slot) + "]" + (label.empty() ? "" : " " + label);
        if (!label.empty()) out += " [label=\"" + label + "\"]";
        out += ";\n";
    }
    out += "}\n";
    return out;
}

nlohmann::json node_to_json(const Node& n) {
    nlohmann::json j{{"id", n.id}, {"kind", node_kind_name(n.kind)}};
    j["type"] = type_to_string(n.output_type);
    switch (n.kind) {
        case NodeKind::Input:
        case NodeKind::Output: j["var"] = n.var; break;
        case NodeKind::TupleAssembly:
            j["var"] = n.var;
            j["arity"] = n.arity;
            break;
        case NodeKind::Const: j["value"] = value_to_json(Value::from_scalar(n.scalar)); break;
        case NodeKind::Invocation: {
            j["port"] = n.port;
            j["op"] = n.op;
            j["endpoint"] = n.endpoint;
            nlohmann::json inputs = nlohmann::json::array();
            for (const auto& [pname, ptype] : n.sig.inputs)
                inputs.push_back({{"name", pname}, {"type", type_to_string(ptype)}});
            j["inputs"] = inputs;
            j["output"] = {{"type", type_to_string(n.sig.output)}};
            break;
        }
    }
    return j;
}

Node node_from_json(const nlohmann::json& j) {
    Node n;
    n.id = j.at("id").get<int>();
    std::string kind = j.at("kind").get<std::string>();
    n.output_type = type_from_string(j.value("type", "any"));
    if (kind == "input") {
        n.kind = NodeKind::Input;
        n.var = j.at("var").get<std::string>();
    } else if (kind == "output") {
        n.kind = NodeKind::Output;
        n.var = j.at("var").get<std::string>();
    } else if (kind == "tuple") {
        n.kind = NodeKind::TupleAssembly;
        n.var = j.at("var").get<std::string>();
        n.arity = j.at("arity").get<int>();
    } else if (kind == "const") {
        n.kind = NodeKind::Const;
        Value v = value_from_json(j.at("value"));
        n.scalar.type = v.scalar_type;
        n.scalar.value = v.scalar;
    } else if (kind == "invocation") {
        n.kind = NodeKind::Invocation;
        n.port = j.at("port").get<std::string>();
        n.op = j.at("op").get<std::string>();
        n.endpoint = j.value("endpoint", "");
        n.sig.name = n.op;
        for (const auto& ji : j.value("inputs", nlohmann::json::array()))
            n.sig.inputs.emplace_back(ji.at("name").get<std::string>(),
                                      type_from_string(ji.at("type").get<std::string>()));
        n.sig.output = type_from_string(j.at("output").at("type").get<std::string>());
    } else {
        throw CompileError("FormatError", {}, "unknown node kind '" + kind + "'");
    }
    return n;
}

nlohmann::json edge_to_json(const Edge& e) {
    return {{"id", e.id},           {"src", e.src},
            {"src_slot", e.src_slot}, {"dst", e.dst},
            {"dst_slot", e.dst_slot}, {"param", e.dst_param},
            {"type", type_to_string(e.type)}};
}

Edge edge_from_json(const nlohmann::json& j) {
    Edge e;
    e.id = j.at("id").get<int>();
    e.src = j.at("src").get<int>();
    e.src_slot = j.value("src_slot", -1);
    e.dst = j.at("dst").get<int>();
    e.dst_slot = j.value("dst_slot", 0);
    e.dst_param = j.value("param", "");
    e.type = type_from_string(j.value("type", "any"));
    return e;
}

nlohmann::json graph_to_json(const DataflowGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : g.nodes) nodes.push_back(node_to_json(n));
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges) edges.push_back(edge_to_json(e));
    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& [name, type] : g.inputs)
        inputs.push_back({{"name", name}, {"type", type_to_string(type)}});
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& [name, type] : g.outputs)
        outputs.push_back({{"name", name}, {"type", type_to_string(type)}});
    return {{"nodes", nodes}, {"edges", edges}, {"inputs", inputs}, {"outputs", outputs}};
}

DataflowGraph graph_from_json(const nlohmann::json& j) {
    DataflowGraph g;
    for (const auto& jn : j.at("nodes")) g.nodes.push_back(node_from_json(jn));
    for (const auto& je : j.at("edges")) g.edges.push_back(edge_from_json(je));
    for (const auto& ji : j.value("inputs", nlohmann::json::array()))
        g.inputs.emplace_back(ji.at("name").get<std::string>(),
                              type_from_string(ji.at("type").get<std::string>()));
    for (const auto& jo : j.value("outputs", nlohmann::json::array()))
        g.outputs.emplace_back(jo.at("name").get<std::string>(),
                               type_from_string(jo.at("type").get<std::string>()));
    std::sort(g.nodes.begin(), g.nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    g.rebuild_adjacency();
    return g;
}

}  // namespace dflow
