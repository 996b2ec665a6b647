#pragma once

#include "dflow/engine.hpp"
#include "dflow/graph.hpp"

namespace dflow {

struct Site {
    std::string id;
    std::string url;  // orchestrator base URL
};

// Who runs where: each port is pinned to a site; the root site receives
// workflow inputs and collects outputs. Unmapped ports default to root.
struct Placement {
    std::string root;
    std::vector<Site> sites;
    std::map<std::string, std::string> ports;  // port name -> site id

    const Site* find_site(const std::string& id) const;
};

Placement placement_from_json(const nlohmann::json& j);
nlohmann::json placement_to_json(const Placement& p);

struct InboundEntry {
    int edge = -1;  // cut edge this entry reconstructs
    int dst = -1;
    int dst_slot = 0;
    std::string param;
    int src = -1;      // producing node — tokens are keyed by (src, src_slot)
    int src_slot = -1;  // so one wire transfer re-fans to every local consumer
    TypeExpr type;
};

struct OutboundEntry {
    int edge = -1;  // representative (lowest) edge id of the dedupe group
    int src = -1;
    int src_slot = -1;
    std::string to_site;
    std::string to_url;
};

// One site's share of a partitioned graph. Node/edge ids keep their
// graph-wide values; fragments partition the node set and every cut edge
// appears in exactly one inbound list, with one outbound entry per
// (src, src_slot, destination-site) group.
struct Fragment {
    std::string fragment_id;
    std::string site;
    std::string site_url;
    std::string root_site;  // failure reports and output returns go here
    std::string root_url;
    std::vector<Node> nodes;
    std::vector<Edge> edges;  // both endpoints local
    std::vector<InboundEntry> inbound;
    std::vector<OutboundEntry> outbound;
};

nlohmann::json fragment_to_json(const Fragment& f);
Fragment fragment_from_json(const nlohmann::json& j);

// Splits a graph by the placement: invocations follow their port's site, a
// tuple assembly follows its consumers' single site (else root), sources and
// outputs live at root. Fragments come out in placement-site order, root
// first. Throws RuntimeFailure("UnknownSiteForPort") when a port is mapped
// to an undeclared site.
std::vector<Fragment> partition(const DataflowGraph& graph, const Placement& placement);

// Inverse of partition, validating that the fragments fit back together
// (dense unique ids, full slot coverage). Throws
// RuntimeFailure("ReassemblyMismatch") otherwise.
DataflowGraph reassemble(const std::vector<Fragment>& fragments);

// Reassembles and runs locally — the identity oracle distributed execution
// is compared against.
std::map<std::string, Value> merge_execute_oracle(const std::vector<Fragment>& fragments,
                                                  const std::map<std::string, Value>& inputs,
                                                  Invoker& invoker);

}  // namespace dflow
