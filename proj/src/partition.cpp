#include "dflow/partition.hpp"

#include <algorithm>
#include <set>

namespace dflow {

const Site* Placement::find_site(const std::string& id) const {
    for (const auto& s : sites)
        if (s.id == id) return &s;
    return nullptr;
}

Placement placement_from_json(const nlohmann::json& j) {
    Placement p;
    p.root = j.at("root").get<std::string>();
    for (const auto& js : j.at("sites"))
        p.sites.push_back({js.at("id").get<std::string>(), js.value("url", "")});
    const nlohmann::json ports = j.value("ports", nlohmann::json::object());
    for (const auto& [port, site] : ports.items()) p.ports[port] = site.get<std::string>();
    if (!p.find_site(p.root))
        throw RuntimeFailure("UnknownSiteForPort", "root site '" + p.root + "' not declared");
    return p;
}

nlohmann::json placement_to_json(const Placement& p) {
    nlohmann::json sites = nlohmann::json::array();
    for (const auto& s : p.sites) sites.push_back({{"id", s.id}, {"url", s.url}});
    return {{"root", p.root}, {"sites", sites}, {"ports", p.ports}};
}

nlohmann::json fragment_to_json(const Fragment& f) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : f.nodes) nodes.push_back(node_to_json(n));
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : f.edges) edges.push_back(edge_to_json(e));
    nlohmann::json inbound = nlohmann::json::array();
    for (const auto& i : f.inbound)
        inbound.push_back({{"edge", i.edge},
                           {"dst", i.dst},
                           {"dst_slot", i.dst_slot},
                           {"param", i.param},
                           {"src", i.src},
                           {"src_slot", i.src_slot},
                           {"type", type_to_string(i.type)}});
    nlohmann::json outbound = nlohmann::json::array();
    for (const auto& o : f.outbound)
        outbound.push_back({{"edge", o.edge},
                            {"src", o.src},
                            {"src_slot", o.src_slot},
                            {"to_site", o.to_site},
                            {"to_url", o.to_url}});
    return {{"fragment_id", f.fragment_id},
            {"site", f.site},
            {"site_url", f.site_url},
            {"root_site", f.root_site},
            {"root_url", f.root_url},
            {"nodes", nodes},
            {"edges", edges},
            {"inbound", inbound},
            {"outbound", outbound}};
}

Fragment fragment_from_json(const nlohmann::json& j) {
    Fragment f;
    f.fragment_id = j.at("fragment_id").get<std::string>();
    f.site = j.at("site").get<std::string>();
    f.site_url = j.value("site_url", "");
    f.root_site = j.value("root_site", "");
    f.root_url = j.value("root_url", "");
    for (const auto& jn : j.at("nodes")) f.nodes.push_back(node_from_json(jn));
    for (const auto& je : j.at("edges")) f.edges.push_back(edge_from_json(je));
    for (const auto& ji : j.value("inbound", nlohmann::json::array())) {
        InboundEntry e;
        e.edge = ji.at("edge").get<int>();
        e.dst = ji.at("dst").get<int>();
        e.dst_slot = ji.value("dst_slot", 0);
        e.param = ji.value("param", "");
        e.src = ji.at("src").get<int>();
        e.src_slot = ji.value("src_slot", -1);
        e.type = type_from_string(ji.value("type", "any"));
        f.inbound.push_back(std::move(e));
    }
    for (const auto& jo : j.value("outbound", nlohmann::json::array())) {
        OutboundEntry e;
        e.edge = jo.at("edge").get<int>();
        e.src = jo.at("src").get<int>();
        e.src_slot = jo.value("src_slot", -1);
        e.to_site = jo.at("to_site").get<std::string>();
        e.to_url = jo.value("to_url", "");
        f.outbound.push_back(std::move(e));
    }
    return f;
}

namespace {

// Node -> owning site id per the placement heuristic.
std::vector<std::string> assign_sites(const DataflowGraph& g, const Placement& p) {
    std::vector<std::string> site(g.nodes.size(), p.root);
    for (const auto& n : g.nodes) {
        if (n.kind != NodeKind::Invocation) continue;
        auto it = p.ports.find(n.port);
        if (it == p.ports.end()) continue;  // unmapped port stays at root
        if (!p.find_site(it->second))
            throw RuntimeFailure("UnknownSiteForPort", "port '" + n.port +
                                                           "' mapped to undeclared site '" +
                                                           it->second + "'");
        site[n.id] = it->second;
    }
    // Tuple assembly follows its consumers when they agree on one site.
    for (const auto& n : g.nodes) {
        if (n.kind != NodeKind::TupleAssembly) continue;
        std::set<std::string> consumer_sites;
        for (int eid : g.out_edges[n.id]) {
            const Node& dst = g.nodes[g.edges[eid].dst];
            if (dst.kind == NodeKind::Invocation) consumer_sites.insert(site[dst.id]);
        }
        if (consumer_sites.size() == 1) site[n.id] = *consumer_sites.begin();
    }
    return site;
}

}  // namespace

std::vector<Fragment> partition(const DataflowGraph& graph, const Placement& placement) {
    std::vector<std::string> site = assign_sites(graph, placement);
    const Site* root = placement.find_site(placement.root);

    // Root first, then declared order; only sites that own nodes (the root
    // always does: it owns every Input/Const/Output node).
    std::vector<std::string> order{placement.root};
    for (const auto& s : placement.sites)
        if (s.id != placement.root &&
            std::any_of(graph.nodes.begin(), graph.nodes.end(),
                        [&](const Node& n) { return site[n.id] == s.id; }))
            order.push_back(s.id);

    std::vector<Fragment> fragments;
    for (const auto& sid : order) {
        Fragment f;
        f.fragment_id = "frag-" + sid;
        f.site = sid;
        f.site_url = placement.find_site(sid)->url;
        f.root_site = placement.root;
        f.root_url = root->url;
        for (const auto& n : graph.nodes)
            if (site[n.id] == sid) f.nodes.push_back(n);
        fragments.push_back(std::move(f));
    }

    auto fragment_of = [&](const std::string& sid) -> Fragment& {
        for (auto& f : fragments)
            if (f.site == sid) return f;
        throw std::logic_error("no fragment for site " + sid);
    };

    // (src node, src_slot, destination site) -> representative edge id
    std::map<std::tuple<int, int, std::string>, int> groups;
    for (const auto& e : graph.edges) {
        const std::string& src_site = site[e.src];
        const std::string& dst_site = site[e.dst];
        if (src_site == dst_site) {
            fragment_of(src_site).edges.push_back(e);
            continue;
        }
        fragment_of(dst_site).inbound.push_back(
            {e.id, e.dst, e.dst_slot, e.dst_param, e.src, e.src_slot, e.type});
        auto key = std::make_tuple(e.src, e.src_slot, dst_site);
        auto [it, inserted] = groups.emplace(key, e.id);
        if (!inserted) {
            it->second = std::min(it->second, e.id);
            continue;
        }
    }
    for (const auto& [key, edge_id] : groups) {
        const auto& [src, src_slot, dst_site] = key;
        fragment_of(site[src]).outbound.push_back(
            {edge_id, src, src_slot, dst_site, placement.find_site(dst_site)->url});
    }
    for (auto& f : fragments) {
        std::sort(f.outbound.begin(), f.outbound.end(),
                  [](const OutboundEntry& a, const OutboundEntry& b) { return a.edge < b.edge; });
        std::sort(f.inbound.begin(), f.inbound.end(),
                  [](const InboundEntry& a, const InboundEntry& b) { return a.edge < b.edge; });
    }
    return fragments;
}

DataflowGraph reassemble(const std::vector<Fragment>& fragments) {
    auto mismatch = [](const std::string& why) -> RuntimeFailure {
        return RuntimeFailure("ReassemblyMismatch", why);
    };

    DataflowGraph g;
    std::set<int> node_ids, edge_ids;
    for (const auto& f : fragments) {
        for (const auto& n : f.nodes) {
            if (!node_ids.insert(n.id).second)
                throw mismatch("node " + std::to_string(n.id) + " appears in two fragments");
            g.nodes.push_back(n);
        }
        for (const auto& e : f.edges) {
            if (!edge_ids.insert(e.id).second)
                throw mismatch("edge " + std::to_string(e.id) + " appears twice");
            g.edges.push_back(e);
        }
        for (const auto& i : f.inbound) {
            if (!edge_ids.insert(i.edge).second)
                throw mismatch("edge " + std::to_string(i.edge) + " appears twice");
            Edge e;
            e.id = i.edge;
            e.src = i.src;
            e.src_slot = i.src_slot;
            e.dst = i.dst;
            e.dst_slot = i.dst_slot;
            e.dst_param = i.param;
            e.type = i.type;
            g.edges.push_back(std::move(e));
        }
    }

    // Ids must be dense — partition preserves them verbatim.
    for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i)
        if (!node_ids.count(i)) throw mismatch("node id " + std::to_string(i) + " missing");
    for (int i = 0; i < static_cast<int>(g.edges.size()); ++i)
        if (!edge_ids.count(i)) throw mismatch("edge id " + std::to_string(i) + " missing");

    std::sort(g.nodes.begin(), g.nodes.end(),
              [](const Node& a, const Node& b) { return a.id < b.id; });
    std::sort(g.edges.begin(), g.edges.end(),
              [](const Edge& a, const Edge& b) { return a.id < b.id; });

    for (const auto& e : g.edges)
        if (e.src < 0 || e.src >= static_cast<int>(g.nodes.size()) || e.dst < 0 ||
            e.dst >= static_cast<int>(g.nodes.size()))
            throw mismatch("edge " + std::to_string(e.id) + " references missing node");

    for (const auto& f : fragments)
        for (const auto& o : f.outbound)
            if (!edge_ids.count(o.edge))
                throw mismatch("outbound transfer references missing edge " +
                               std::to_string(o.edge));

    g.rebuild_adjacency();

    // Every firing node must wait on exactly one edge per slot.
    for (const auto& n : g.nodes) {
        int want = Engine::slot_count(n);
        if (static_cast<int>(g.in_edges[n.id].size()) != want)
            throw mismatch("node " + std::to_string(n.id) + " has " +
                           std::to_string(g.in_edges[n.id].size()) + " in-edges, needs " +
                           std::to_string(want));
    }

    for (const auto& n : g.nodes) {
        if (n.kind == NodeKind::Input) g.inputs.emplace_back(n.var, n.output_type);
        if (n.kind == NodeKind::Output) g.outputs.emplace_back(n.var, n.output_type);
    }
    return g;
}

std::map<std::string, Value> merge_execute_oracle(const std::vector<Fragment>& fragments,
                                                  const std::map<std::string, Value>& inputs,
                                                  Invoker& invoker) {
    DataflowGraph g = reassemble(fragments);
    Engine engine(g, invoker);
    return engine.run_to_completion(inputs);
}

}  // namespace dflow
