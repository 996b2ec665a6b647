#pragma once

#include "dflow/analyzer.hpp"
#include "dflow/value.hpp"

namespace dflow {

enum class NodeKind { Input, Output, Invocation, TupleAssembly, Const };

const char* node_kind_name(NodeKind k);

struct Node {
    int id = -1;
    NodeKind kind = NodeKind::Input;
    std::string var;       // Input/Output/TupleAssembly variable name
    std::string port, op;  // Invocation
    std::string endpoint;
    OperationSig sig;
    ScalarLit scalar;      // Const
    int arity = 0;         // TupleAssembly
    TypeExpr output_type;  // type of the produced value

    std::string display() const;
};

// Variables are elided: an edge connects a producing node to a consuming
// slot. src_slot -1 carries the whole produced value; src_slot k >= 0 carries
// element k of a tuple (positional tuple feeds expand element-wise so an
// invocation always has exactly one in-edge per parameter).
struct Edge {
    int id = -1;
    int src = -1;
    int src_slot = -1;
    int dst = -1;
    int dst_slot = 0;       // parameter index / tuple element / 0 for Output
    std::string dst_param;  // parameter name when dst is an Invocation
    TypeExpr type;
};

struct DataflowGraph {
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::vector<std::pair<std::string, TypeExpr>> inputs;   // interface order
    std::vector<std::pair<std::string, TypeExpr>> outputs;

    std::vector<std::vector<int>> in_edges;   // node id -> edge ids
    std::vector<std::vector<int>> out_edges;

    void rebuild_adjacency();
    const Node* find_invocation(const std::string& port, const std::string& op) const;
};

// Builds the executable DAG from a type-checked workflow (bindings present).
// Throws CompileError("CycleError") naming one cycle's nodes.
DataflowGraph build_graph(const ResolvedWorkflow& resolved);

// Longest-path leveling: level(n) = 1 + max(level of predecessors); nodes in
// one level may run concurrently.
struct ParallelSchedule {
    std::vector<std::vector<int>> levels;

    // The same schedule restricted to invocation nodes (empty levels dropped).
    std::vector<std::vector<int>> invocation_levels(const DataflowGraph& g) const;
};

ParallelSchedule parallel_sets(const DataflowGraph& g);

std::string to_dot(const DataflowGraph& g);

nlohmann::json node_to_json(const Node& n);
Node node_from_json(const nlohmann::json& j);
nlohmann::json edge_to_json(const Edge& e);
Edge edge_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const DataflowGraph& g);
DataflowGraph graph_from_json(const nlohmann::json& j);

}  // namespace dflow
