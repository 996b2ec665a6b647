#include "dflow/testbed.hpp"

#include <charconv>
#include <cmath>
#include <queue>
#include <sstream>

#include "dflow/test_service.hpp"

namespace dflow {

// --- benchmark fixtures -----------------------------------------------------

namespace {

constexpr const char* kBenchUrl = "http://bench.local/services.json";

std::string bench_header() {
    std::string out = "description bench is ";
    out += kBenchUrl;
    out += "\n";
    for (int i = 1; i <= 4; ++i) {
        std::string n = std::to_string(i);
        out += "service s" + n + " is bench.T" + n + "\n";
    }
    for (int i = 1; i <= 4; ++i) {
        std::string n = std::to_string(i);
        out += "port p" + n + " is s" + n + ".Port\n";
    }
    return out;
}

}  // namespace

std::string pattern_source(const std::string& pattern) {
    if (pattern == "pipeline")
        return bench_header() + R"(
input:
    any a

output:
    any x

a -> p1.Run
p1.Run -> p2.Run
p2.Run -> p3.Run
p3.Run -> p4.Run
p4.Run -> x
)";
    if (pattern == "distribution")
        return bench_header() + R"(
input:
    any a

output:
    any x2, x3, x4

a -> p1.Run
p1.Run -> b
b -> p2.Run, p3.Run, p4.Run
p2.Run -> x2
p3.Run -> x3
p4.Run -> x4
)";
    if (pattern == "aggregation")
        return bench_header() + R"(
input:
    any a

output:
    any y

a -> p1.Run, p2.Run, p3.Run
p1.Run -> b1
p2.Run -> b2
p3.Run -> b3
t = (b1, b2, b3)
t -> p4.Run
p4.Run -> y
)";
    throw std::invalid_argument("unknown pattern '" + pattern +
                                "' (pipeline|distribution|aggregation)");
}

CatalogSet bench_catalogs(const std::map<std::string, std::string>& endpoint_remap) {
    nlohmann::json services = nlohmann::json::array();
    for (int i = 1; i <= 4; ++i) {
        std::string name = "T" + std::to_string(i);
        std::string endpoint = "svc://" + name;
        if (auto it = endpoint_remap.find(endpoint); it != endpoint_remap.end())
            endpoint = it->second;
        services.push_back(
            {{"name", name},
             {"ports",
              nlohmann::json::array(
                  {{{"name", "Port"},
                    {"endpoint", endpoint},
                    {"operations",
                     nlohmann::json::array(
                         {{{"name", "Run"},
                           {"inputs", nlohmann::json::array({{{"name", "x"}, {"type", "any"}}})},
                           {"output", {{"type", "any"}}}}})}}})}});
    }
    nlohmann::json doc{{"description", "bench-services"}, {"services", services}};
    CatalogSet set;
    set.catalogs.emplace(kBenchUrl, load_catalog(doc, kBenchUrl));
    return set;
}

Placement bench_placement(const std::map<std::string, std::string>& site_urls) {
    auto url = [&](const std::string& id) {
        auto it = site_urls.find(id);
        return it == site_urls.end() ? std::string() : it->second;
    };
    Placement p;
    p.root = "R";
    p.sites.push_back({"R", url("R")});
    for (int i = 1; i <= 4; ++i) {
        std::string s = "S" + std::to_string(i);
        p.sites.push_back({s, url(s)});
        p.ports["p" + std::to_string(i)] = s;
    }
    return p;
}

Placement bench_placement_centralized(const std::string& root_url) {
    Placement p;
    p.root = "R";
    p.sites.push_back({"R", root_url});
    return p;
}

std::map<std::string, std::string> bench_service_sites() {
    std::map<std::string, std::string> out;
    for (int i = 1; i <= 4; ++i)
        out["svc://T" + std::to_string(i)] = "S" + std::to_string(i);
    return out;
}

std::map<std::string, std::string> bench_service_behaviors(const std::string& pattern) {
    std::map<std::string, std::string> out;
    for (int i = 1; i <= 4; ++i) {
        std::string ep = "svc://T" + std::to_string(i);
        if (pattern == "pipeline") out[ep] = "double";
        else if (pattern == "distribution") out[ep] = "same-size";
        else if (pattern == "aggregation") out[ep] = i == 4 ? "aggregate-double" : "same-size";
        else throw std::invalid_argument("unknown pattern '" + pattern + "'");
    }
    return out;
}

// --- virtual-clock execution -------------------------------------------------

VirtualCluster::VirtualCluster(NetModel net, std::map<std::string, SimService> services)
    : net_(std::move(net)), services_(std::move(services)) {}

RepetitionMetrics VirtualCluster::run(const DataflowGraph& graph, const Placement& placement,
                                      const std::map<std::string, Value>& inputs) {
    const std::string run_id = "sim";
    const std::string& root = placement.root;
    std::vector<Fragment> fragments = partition(graph, placement);

    std::map<std::string, std::unique_ptr<OrchestratorCore>> cores;
    for (const auto& f : fragments) {
        OrchestratorOptions o;
        o.site_id = f.site;
        o.grace_ms = std::numeric_limits<int64_t>::max() / 4;
        o.gc_ms = std::numeric_limits<int64_t>::max() / 4;
        cores.emplace(f.site, std::make_unique<OrchestratorCore>(std::move(o)));
    }

    struct Event {
        double t;
        std::uint64_t seq;
        std::function<void()> fn;
        bool operator>(const Event& o) const { return std::tie(t, seq) > std::tie(o.t, o.seq); }
    };
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
    double now = 0;
    std::uint64_t next_seq = 0;
    double makespan = -1;

    RepetitionMetrics metrics;
    auto count_bytes = [&](const std::string& from, const std::string& to, std::uint64_t bytes) {
        if (from == to) return;  // intra-site traffic is free and unmetered
        metrics.link_bytes[{from, to}] += bytes;
    };
    auto schedule = [&](double delay, std::function<void()> fn) {
        queue.push({now + delay, next_seq++, std::move(fn)});
    };

    std::function<void(const std::string&)> pump = [&](const std::string& site) {
        for (Action& a : cores.at(site)->drain_actions()) {
            if (a.kind == Action::Kind::Invoke) {
                auto svc_it = services_.find(a.node.endpoint);
                std::uint64_t out_bytes = 0;
                if (svc_it != services_.end()) {
                    try {
                        std::uint64_t in_bytes = 0;
                        for (const auto& [name, v] : a.args) in_bytes += v.payload_bytes();
                        out_bytes = behavior_output_bytes(svc_it->second.behavior, in_bytes);
                        const SimService& svc = svc_it->second;
                        double req_ms = net_.transfer_ms(site, svc.site, in_bytes);
                        count_bytes(site, svc.site, in_bytes);
                        double resp_ms = net_.transfer_ms(svc.site, site, out_bytes);
                        count_bytes(svc.site, site, out_bytes);
                        schedule(req_ms + svc.compute_delay_ms + resp_ms,
                                 [&, site, run = a.run, node = a.node.id, out_bytes] {
                                     cores.at(site)->invocation_done(
                                         run, node,
                                         Value::of_blob(
                                             std::vector<std::uint8_t>(out_bytes, 's')),
                                         static_cast<int64_t>(now));
                                     pump(site);
                                 });
                        continue;
                    } catch (const std::invalid_argument&) {
                        // unknown behavior rule: fall through to a failure
                    }
                }
                schedule(0, [&, site, run = a.run, node = a.node.id, ep = a.node.endpoint] {
                    cores.at(site)->invocation_failed(run, node, "no service at " + ep,
                                                      static_cast<int64_t>(now));
                    pump(site);
                });
            } else {
                std::uint64_t bytes = a.token.fail ? 0 : a.token.value.payload_bytes();
                double delay = net_.transfer_ms(site, a.to_site, bytes);
                count_bytes(site, a.to_site, bytes);
                schedule(delay, [&, to = a.to_site, msg = std::move(a.token)] {
                    cores.at(to)->deliver_token(msg, static_cast<int64_t>(now));
                    pump(to);
                });
            }
        }
        if (site == root && makespan < 0 &&
            cores.at(root)->run_status(run_id) == RunStatus::Done)
            makespan = now;
    };

    // The root deploys itself immediately, ships peer fragments as latency-
    // only control messages, and binds inputs only once every ack is back.
    cores.at(root)->deploy_fragment(run_id, fragments.front(), 0);
    pump(root);
    int pending_acks = static_cast<int>(fragments.size()) - 1;
    auto bind_now = [&] {
        cores.at(root)->bind_inputs(run_id, inputs, static_cast<int64_t>(now));
        pump(root);
    };
    if (pending_acks == 0) bind_now();
    for (size_t i = 1; i < fragments.size(); ++i) {
        const Fragment& frag = fragments[i];
        schedule(net_.transfer_ms(root, frag.site, 0), [&, frag] {
            cores.at(frag.site)->deploy_fragment(run_id, frag, static_cast<int64_t>(now));
            pump(frag.site);
            schedule(net_.transfer_ms(frag.site, root, 0), [&] {
                if (--pending_acks == 0) bind_now();
            });
        });
    }

    while (!queue.empty()) {
        Event e = std::move(const_cast<Event&>(queue.top()));
        queue.pop();
        now = e.t;
        e.fn();
    }

    if (makespan < 0) {
        OutputsView v = cores.at(root)->collect_outputs(run_id);
        throw RuntimeFailure("RunFailed",
                             "virtual run ended " + std::string(run_status_name(v.status)) +
                                 (v.failure_message.empty() ? "" : ": " + v.failure_message));
    }
    metrics.makespan_ms = makespan;
    metrics.outputs = cores.at(root)->collect_outputs(run_id).outputs;
    for (const auto& [link, bytes] : metrics.link_bytes) {
        metrics.bytes_total += bytes;
        if (link.first == root || link.second == root) metrics.bytes_through_root += bytes;
    }
    return metrics;
}

// --- experiments --------------------------------------------------------------

nlohmann::json experiment_params_to_json(const ExperimentParams& p) {
    nlohmann::json j{{"pattern", p.pattern},
                     {"input_bytes", p.input_bytes},
                     {"repetitions", p.repetitions},
                     {"net", netmodel_to_json(p.net)},
                     {"compute_delay_ms", p.compute_delay_ms},
                     {"modes", p.modes}};
    if (!p.services.empty()) {
        nlohmann::json services = nlohmann::json::array();
        for (const auto& s : p.services) services.push_back(test_service_spec_to_json(s));
        j["services"] = services;
    }
    if (p.placement) j["placement"] = placement_to_json(*p.placement);
    return j;
}

ExperimentParams experiment_params_from_json(const nlohmann::json& j) {
    ExperimentParams p;
    p.pattern = j.value("pattern", "pipeline");
    p.input_bytes = j.value("input_bytes", std::uint64_t{256 * 1024});
    p.repetitions = j.value("repetitions", 20);
    if (j.contains("net")) p.net = netmodel_from_json(j["net"]);
    p.compute_delay_ms = j.value("compute_delay_ms", 5.0);
    if (j.contains("modes")) p.modes = j["modes"].get<std::vector<std::string>>();
    else if (j.contains("mode")) p.modes = {j["mode"].get<std::string>()};
    for (const auto& js : j.value("services", nlohmann::json::array()))
        p.services.push_back(test_service_spec_from_json(js));
    if (j.contains("placement")) p.placement = placement_from_json(j["placement"]);
    return p;
}

void ModeReport::finalize() {
    if (reps.empty()) return;
    double sum = 0;
    for (const auto& r : reps) sum += r.makespan_ms;
    mean_makespan_ms = sum / static_cast<double>(reps.size());
    double var = 0;
    for (const auto& r : reps) {
        double d = r.makespan_ms - mean_makespan_ms;
        var += d * d;
    }
    stddev_makespan_ms = std::sqrt(var / static_cast<double>(reps.size()));
}

const ModeReport* MetricsReport::mode(const std::string& name) const {
    for (const auto& m : modes)
        if (m.mode == name) return &m;
    return nullptr;
}

MetricsReport run_experiment(const ExperimentParams& params) {
    MetricsReport report;
    report.pattern = params.pattern;
    report.input_bytes = params.input_bytes;

    CompileOutput compiled = compile_workflow(pattern_source(params.pattern), bench_catalogs());
    auto sites = bench_service_sites();
    auto behaviors = bench_service_behaviors(params.pattern);
    std::map<std::string, SimService> services;
    for (const auto& [endpoint, site] : sites)
        services[endpoint] = {site, behaviors.at(endpoint), params.compute_delay_ms};
    for (const auto& spec : params.services) {
        auto it = services.find("svc://" + spec.name);
        if (it == services.end())
            throw std::invalid_argument("unknown benchmark service '" + spec.name + "'");
        it->second.behavior = spec.behavior;
        it->second.compute_delay_ms = spec.compute_delay_ms;
    }

    std::map<std::string, Value> inputs{
        {"a", Value::of_blob(std::vector<std::uint8_t>(params.input_bytes, 'a'))}};

    for (const auto& mode : params.modes) {
        Placement placement = mode == "centralized" ? bench_placement_centralized()
                              : params.placement    ? *params.placement
                                                    : bench_placement();
        ModeReport mr;
        mr.mode = mode;
        for (int rep = 0; rep < params.repetitions && report.valid; ++rep) {
            VirtualCluster cluster(params.net, services);
            try {
                mr.reps.push_back(cluster.run(compiled.graph, placement, inputs));
            } catch (const RuntimeFailure&) {
                report.valid = false;  // keep the partial report, flagged
            }
        }
        mr.finalize();
        report.modes.push_back(std::move(mr));
        if (!report.valid) break;
    }

    const ModeReport* c = report.mode("centralized");
    const ModeReport* d = report.mode("decentralized");
    if (c && d && d->mean_makespan_ms > 0) report.speedup = c->mean_makespan_ms / d->mean_makespan_ms;
    return report;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace

nlohmann::json report_to_json(const MetricsReport& r) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : r.modes) {
        nlohmann::json reps = nlohmann::json::array();
        for (size_t i = 0; i < m.reps.size(); ++i) {
            const auto& rep = m.reps[i];
            nlohmann::json links = nlohmann::json::array();
            for (const auto& [link, bytes] : rep.link_bytes)
                links.push_back(
                    {{"from", link.first}, {"to", link.second}, {"bytes", bytes}});
            reps.push_back({{"repetition", i},
                            {"makespan_ms", rep.makespan_ms},
                            {"bytes_total", rep.bytes_total},
                            {"bytes_through_root", rep.bytes_through_root},
                            {"links", links}});
        }
        modes.push_back({{"mode", m.mode},
                         {"mean_makespan_ms", m.mean_makespan_ms},
                         {"stddev_makespan_ms", m.stddev_makespan_ms},
                         {"reps", reps}});
    }
    return {{"pattern", r.pattern},
            {"input_bytes", r.input_bytes},
            {"modes", modes},
            {"speedup", r.speedup},
            {"valid", r.valid}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
    MetricsReport r;
    r.pattern = j.at("pattern").get<std::string>();
    r.input_bytes = j.value("input_bytes", std::uint64_t{0});
    r.speedup = j.value("speedup", 0.0);
    r.valid = j.value("valid", true);
    for (const auto& jm : j.at("modes")) {
        ModeReport m;
        m.mode = jm.at("mode").get<std::string>();
        m.mean_makespan_ms = jm.value("mean_makespan_ms", 0.0);
        m.stddev_makespan_ms = jm.value("stddev_makespan_ms", 0.0);
        for (const auto& jr : jm.value("reps", nlohmann::json::array())) {
            RepetitionMetrics rep;
            rep.makespan_ms = jr.value("makespan_ms", 0.0);
            rep.bytes_total = jr.value("bytes_total", std::uint64_t{0});
            rep.bytes_through_root = jr.value("bytes_through_root", std::uint64_t{0});
            for (const auto& jl : jr.value("links", nlohmann::json::array()))
                rep.link_bytes[{jl.at("from").get<std::string>(),
                                jl.at("to").get<std::string>()}] =
                    jl.at("bytes").get<std::uint64_t>();
            m.reps.push_back(std::move(rep));
        }
        r.modes.push_back(std::move(m));
    }
    return r;
}

std::string report_to_csv(const MetricsReport& r) {
    std::string out =
        "pattern,mode,repetition,makespan_ms,bytes_total,bytes_through_root,"
        "mean_centralized_ms,mean_decentralized_ms,speedup\n";
    for (const auto& m : r.modes)
        for (size_t i = 0; i < m.reps.size(); ++i) {
            const auto& rep = m.reps[i];
            out += r.pattern + "," + m.mode + "," + std::to_string(i) + "," +
                   fmt_double(rep.makespan_ms) + "," + std::to_string(rep.bytes_total) + "," +
                   std::to_string(rep.bytes_through_root) + ",,,\n";
        }
    if (r.modes.empty()) return out;  // empty report stays header-only
    const ModeReport* c = r.mode("centralized");
    const ModeReport* d = r.mode("decentralized");
    out += r.pattern + ",aggregate,,,,," + (c ? fmt_double(c->mean_makespan_ms) : "") + "," +
           (d ? fmt_double(d->mean_makespan_ms) : "") + "," + fmt_double(r.speedup) + "\n";
    return out;
}

MetricsReport report_from_csv(const std::string& text) {
    MetricsReport r;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream row(s);
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        while (cells.size() < 9) cells.emplace_back();
        return cells;
    };
    std::map<std::string, ModeReport> modes;
    std::vector<std::string> mode_order;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        r.pattern = cells[0];
        if (cells[1] == "aggregate") {
            if (!cells[6].empty() && modes.count("centralized"))
                modes["centralized"].mean_makespan_ms = std::stod(cells[6]);
            if (!cells[7].empty() && modes.count("decentralized"))
                modes["decentralized"].mean_makespan_ms = std::stod(cells[7]);
            if (!cells[8].empty()) r.speedup = std::stod(cells[8]);
            continue;
        }
        if (!modes.count(cells[1])) {
            modes[cells[1]].mode = cells[1];
            mode_order.push_back(cells[1]);
        }
        RepetitionMetrics rep;
        rep.makespan_ms = std::stod(cells[3]);
        rep.bytes_total = std::stoull(cells[4]);
        rep.bytes_through_root = std::stoull(cells[5]);
        modes[cells[1]].reps.push_back(std::move(rep));
    }
    for (const auto& name : mode_order) r.modes.push_back(modes.at(name));
    return r;
}

}  // namespace dflow
