#pragma once

#include <optional>

#include "dflow/compile.hpp"
#include "dflow/netmodel.hpp"
#include "dflow/orchestrator.hpp"
#include "dflow/test_service.hpp"

namespace dflow {

// --- benchmark fixtures -----------------------------------------------------

// Embedded workflow source for a benchmark pattern
// (pipeline | distribution | aggregation).
std::string pattern_source(const std::string& pattern);

// Catalog for services T1..T4 (one port, one `Run(x: any) -> any` operation
// each) with symbolic endpoints svc://T1..svc://T4, optionally remapped to
// live addresses.
CatalogSet bench_catalogs(const std::map<std::string, std::string>& endpoint_remap = {});

// Sites R (root) and S1..S4, port pi pinned to Si. URLs filled when given.
Placement bench_placement(const std::map<std::string, std::string>& site_urls = {});
Placement bench_placement_centralized(const std::string& root_url = "");

// endpoint -> owning site (svc://Ti -> Si).
std::map<std::string, std::string> bench_service_sites();

// endpoint -> behavior for a pattern: the pipeline doubles at every stage,
// distribution preserves sizes, aggregation collects size-preserving outputs
// into a doubling aggregator (T4).
std::map<std::string, std::string> bench_service_behaviors(const std::string& pattern);

// --- virtual-clock execution -------------------------------------------------

struct SimService {
    std::string site;
    std::string behavior = "double";
    double compute_delay_ms = 5.0;
};

struct RepetitionMetrics {
    double makespan_ms = 0;
    std::map<std::pair<std::string, std::string>, std::uint64_t> link_bytes;  // inter-site
    std::uint64_t bytes_total = 0;
    std::uint64_t bytes_through_root = 0;
    std::map<std::string, Value> outputs;
};

// Discrete-event harness: one orchestration core per fragment site, simulated
// services, every inter-site message delayed by the net model (payload bytes
// only; fragment deploys and acks are latency-only control messages). The
// root binds inputs only after every peer fragment is acknowledged.
// Single-threaded and fully deterministic.
class VirtualCluster {
  public:
    VirtualCluster(NetModel net, std::map<std::string, SimService> services);

    RepetitionMetrics run(const DataflowGraph& graph, const Placement& placement,
                          const std::map<std::string, Value>& inputs);

  private:
    NetModel net_;
    std::map<std::string, SimService> services_;
};

// --- experiments --------------------------------------------------------------

struct ExperimentParams {
    std::string pattern = "pipeline";
    std::uint64_t input_bytes = 256 * 1024;
    int repetitions = 20;
    NetModel net;
    double compute_delay_ms = 5.0;
    std::vector<std::string> modes{"centralized", "decentralized"};
    std::vector<TestServiceSpec> services;  // per-service behavior overrides, by name T1..T4
    std::optional<Placement> placement;     // decentralized placement override
};

nlohmann::json experiment_params_to_json(const ExperimentParams& p);
ExperimentParams experiment_params_from_json(const nlohmann::json& j);

struct ModeReport {
    std::string mode;
    std::vector<RepetitionMetrics> reps;
    double mean_makespan_ms = 0;
    double stddev_makespan_ms = 0;

    void finalize();
};

struct MetricsReport {
    std::string pattern;
    std::uint64_t input_bytes = 0;
    std::vector<ModeReport> modes;
    double speedup = 0;  // mean centralized / mean decentralized; 0 if one-sided
    bool valid = true;

    const ModeReport* mode(const std::string& name) const;
};

// Runs the pattern in each requested mode on the virtual clock.
MetricsReport run_experiment(const ExperimentParams& params);

nlohmann::json report_to_json(const MetricsReport& r);
std::string report_to_csv(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);
MetricsReport report_from_csv(const std::string& text);

}  // namespace dflow
