#pragma once

#include <memory>
#include <thread>

#include "dflow/catalog.hpp"
#include "dflow/orchestrator.hpp"

namespace httplib {
struct Response;
}

namespace dflow {

// HTTP host for one orchestration service + its proxy. Serves, per run:
//   POST /runs/{run}/fragments   fragment JSON (optional "inputs" key) -> 201
//   POST /runs/{run}/tokens      token JSON                          -> 202
//   POST /runs/{run}/blobs       raw body + X-Edge/X-Origin/X-Seq    -> 202
//   GET  /runs/{run}/outputs     200 done | 202 pending | 410 failed/gone
//   GET  /runs/{run}/metrics
//   GET  /healthz
// and, at the root site, POST /workflows {source, inputs, placement, mode}
// -> {run_id}: compile, partition, deploy to peers (waiting for their acks),
// then bind inputs.
class OrchestratorServer {
  public:
    struct Config {
        std::string site_id = "A";
        std::string host = "127.0.0.1";
        int port = 0;  // 0 picks an ephemeral port
        OrchestratorOptions core;
        std::shared_ptr<Invoker> invoker;
        CatalogSet catalogs;            // for POST /workflows
        bool duplicate_tokens = false;  // resend every token once (idempotency drills)
        int invoke_workers = 4;
        std::size_t blob_side_channel_bytes = 64 * 1024;
    };

    explicit OrchestratorServer(Config config);
    ~OrchestratorServer();

    OrchestratorServer(const OrchestratorServer&) = delete;
    OrchestratorServer& operator=(const OrchestratorServer&) = delete;

    // Binds and serves on a background thread; returns the bound port.
    int start();
    void stop();

    std::string url() const;
    int port() const { return port_; }
    const std::string& site() const { return config_.site_id; }

    // Test access; callers must not race the serving thread.
    OrchestratorCore& core() { return core_; }

  private:
    struct Impl;

    void dispatch(std::vector<Action> actions);
    void handle_workflow(const std::string& body, httplib::Response& res);

    Config config_;
    OrchestratorCore core_;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

// Client helpers shared by the CLI, tests, and peer forwarding.
namespace client {

// Deploys over HTTP; throws RuntimeFailure("DeployFailed") on non-201.
void post_fragment(const std::string& base_url, const std::string& run, const Fragment& f,
                   const std::map<std::string, Value>* inputs = nullptr, int timeout_ms = 30'000);

// Sends a token, using the octet-stream side channel for big blobs.
void post_token(const std::string& base_url, const TokenMsg& token,
                std::size_t blob_side_channel_bytes = 64 * 1024, int timeout_ms = 30'000);

struct RunResult {
    bool done = false;
    bool failed = false;
    std::map<std::string, Value> outputs;
    std::string failure;
};

RunResult get_outputs(const std::string& base_url, const std::string& run,
                      int timeout_ms = 30'000);

// Polls until done/failed or the deadline passes.
RunResult await_outputs(const std::string& base_url, const std::string& run,
                        int deadline_ms = 60'000);

nlohmann::json get_metrics(const std::string& base_url, const std::string& run);

// POST /workflows against a root orchestrator.
std::string submit_workflow(const std::string& base_url, const std::string& source,
                            const std::map<std::string, Value>& inputs,
                            const nlohmann::json& placement, const std::string& mode);

}  // namespace client

}  // namespace dflow
