#include "dflow/orchestrator_server.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <random>

#include <httplib.h>

#include "dflow/compile.hpp"
#include "dflow/invokers.hpp"

namespace dflow {

namespace {

int http_status_for(const RuntimeFailure& f) {
    const std::string& c = f.code();
    if (c == "UnknownRun") return 404;
    if (c == "WrongSite") return 409;
    if (c == "DeployFailed" || c == "TokenRejected") return 502;
    if (c == "IoError") return 500;
    return 422;
}

nlohmann::json error_json(const std::string& code, const std::string& message) {
    return {{"error", code}, {"msg", message}};
}

}  // namespace

struct OrchestratorServer::Impl {
    httplib::Server svr;
    std::thread serve_thread;
    std::thread tick_thread;

    std::mutex mu;  // guards core
    std::chrono::steady_clock::time_point epoch = std::chrono::steady_clock::now();

    std::mutex task_mu;
    std::condition_variable task_cv;
    std::deque<std::function<void()>> tasks;
    std::vector<std::thread> pool;
    bool stopping = false;

    std::mutex tick_mu;
    std::condition_variable tick_cv;
    bool tick_stop = false;

    std::atomic<std::uint64_t> next_run{1};
    std::mt19937_64 rng{std::random_device{}()};

    int64_t now_ms() const {
        using namespace std::chrono;
        return duration_cast<milliseconds>(steady_clock::now() - epoch).count();
    }

    void submit(std::function<void()> task) {
        {
            std::lock_guard lock(task_mu);
            tasks.push_back(std::move(task));
        }
        task_cv.notify_one();
    }

    void pool_worker() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock lock(task_mu);
                task_cv.wait(lock, [&] { return stopping || !tasks.empty(); });
                if (tasks.empty()) return;
                task = std::move(tasks.front());
                tasks.pop_front();
            }
            task();
        }
    }
};

OrchestratorServer::OrchestratorServer(Config config)
    : config_(std::move(config)),
      core_([&] {
          OrchestratorOptions o = config_.core;
          o.site_id = config_.site_id;
          return o;
      }()),
      impl_(std::make_unique<Impl>()) {
    if (!config_.invoker) config_.invoker = std::make_shared<MockInvoker>();
}

OrchestratorServer::~OrchestratorServer() { stop(); }

std::string OrchestratorServer::url() const {
    return "http://" + config_.host + ":" + std::to_string(port_);
}

void OrchestratorServer::stop() {
    if (!impl_) return;
    impl_->svr.stop();
    if (impl_->serve_thread.joinable()) impl_->serve_thread.join();
    {
        std::lock_guard lock(impl_->tick_mu);
        impl_->tick_stop = true;
    }
    impl_->tick_cv.notify_all();
    if (impl_->tick_thread.joinable()) impl_->tick_thread.join();
    {
        std::lock_guard lock(impl_->task_mu);
        impl_->stopping = true;
    }
    impl_->task_cv.notify_all();
    for (auto& t : impl_->pool)
        if (t.joinable()) t.join();
    impl_->pool.clear();
}

int OrchestratorServer::start() {
    Impl& im = *impl_;

    for (int i = 0; i < config_.invoke_workers; ++i)
        im.pool.emplace_back([this] { impl_->pool_worker(); });

    im.tick_thread = std::thread([this] {
        Impl& im = *impl_;
        std::unique_lock lock(im.tick_mu);
        while (!im.tick_cv.wait_for(lock, std::chrono::milliseconds(250),
                                    [&] { return im.tick_stop; })) {
            std::lock_guard core_lock(im.mu);
            core_.tick(im.now_ms());
        }
    });

    auto guard = [this](auto handler) {
        return [this, handler](const httplib::Request& req, httplib::Response& res) {
            try {
                handler(req, res);
            } catch (const RuntimeFailure& f) {
                res.status = http_status_for(f);
                res.set_content(error_json(f.code(), f.message()).dump(), "application/json");
            } catch (const CompileError& e) {
                nlohmann::json body{{"diagnostics", nlohmann::json::array({to_json(e.diagnostic())})}};
                res.status = 400;
                res.set_content(body.dump(), "application/json");
            } catch (const nlohmann::json::exception& e) {
                res.status = 400;
                res.set_content(error_json("FormatError", e.what()).dump(), "application/json");
            } catch (const std::exception& e) {
                res.status = 500;
                res.set_content(error_json("InternalError", e.what()).dump(),
                                "application/json");
            }
        };
    };

    im.svr.Get("/healthz", guard([this](const httplib::Request&, httplib::Response& res) {
                   nlohmann::json body{{"status", "ok"}, {"site", config_.site_id}};
                   res.set_content(body.dump(), "application/json");
               }));

    im.svr.Post(R"(/runs/([^/]+)/fragments)",
                guard([this](const httplib::Request& req, httplib::Response& res) {
                    std::string run = req.matches[1];
                    nlohmann::json j = nlohmann::json::parse(req.body);
                    Fragment frag = fragment_from_json(j);
                    std::optional<std::map<std::string, Value>> inputs;
                    if (j.contains("inputs")) {
                        inputs.emplace();
                        for (const auto& [name, jv] : j["inputs"].items())
                            (*inputs)[name] = value_from_json(jv);
                    }
                    std::vector<Action> actions;
                    OrchestratorCore::Ack ack;
                    {
                        std::lock_guard lock(impl_->mu);
                        ack = core_.deploy_fragment(run, std::move(frag), impl_->now_ms());
                        if (inputs && !ack.duplicate)
                            core_.bind_inputs(run, *inputs, impl_->now_ms());
                        actions = core_.drain_actions();
                    }
                    dispatch(std::move(actions));
                    nlohmann::json body{{"status", ack.duplicate ? "duplicate" : "deployed"},
                                        {"run", run}};
                    res.status = 201;
                    res.set_content(body.dump(), "application/json");
                }));

    auto accept_token = [this](const std::string& run, TokenMsg token, httplib::Response& res) {
        if (token.run != run)
            throw RuntimeFailure("TokenRejected",
                                 "token names run '" + token.run + "', path names '" + run + "'");
        std::vector<Action> actions;
        OrchestratorCore::Ack ack;
        {
            std::lock_guard lock(impl_->mu);
            ack = core_.deliver_token(token, impl_->now_ms());
            actions = core_.drain_actions();
        }
        dispatch(std::move(actions));
        nlohmann::json body{
            {"status", ack.duplicate ? "duplicate" : (ack.buffered ? "buffered" : "accepted")}};
        res.status = 202;
        res.set_content(body.dump(), "application/json");
    };

    im.svr.Post(R"(/runs/([^/]+)/tokens)",
                guard([accept_token](const httplib::Request& req, httplib::Response& res) {
                    accept_token(req.matches[1], token_from_json(nlohmann::json::parse(req.body)),
                                 res);
                }));

    im.svr.Post(R"(/runs/([^/]+)/blobs)",
                guard([accept_token](const httplib::Request& req, httplib::Response& res) {
                    // Keep `run` alive separately: moving t during the call would
                    // gut t.run before the reference parameter binds.
                    std::string run = req.matches[1];
                    TokenMsg t;
                    t.run = run;
                    t.edge = std::stoi(req.get_header_value("X-Edge"));
                    t.origin = req.get_header_value("X-Origin");
                    if (req.has_header("X-Seq")) t.seq = std::stoll(req.get_header_value("X-Seq"));
                    t.value = Value::of_blob(std::vector<std::uint8_t>(req.body.begin(),
                                                                       req.body.end()));
                    accept_token(run, std::move(t), res);
                }));

    im.svr.Get(R"(/runs/([^/]+)/outputs)",
               guard([this](const httplib::Request& req, httplib::Response& res) {
                   OutputsView view;
                   {
                       std::lock_guard lock(impl_->mu);
                       view = core_.collect_outputs(req.matches[1]);
                   }
                   if (view.status == RunStatus::Done) {
                       nlohmann::json outs = nlohmann::json::object();
                       for (const auto& [name, v] : view.outputs) outs[name] = value_to_json(v);
                       res.status = 200;
                       res.set_content(nlohmann::json{{"status", "done"}, {"outputs", outs}}.dump(),
                                       "application/json");
                   } else if (view.status == RunStatus::Failed) {
                       nlohmann::json body{{"status", "failed"},
                                           {"code", view.failure_code},
                                           {"msg", view.failure_message},
                                           {"origin", view.failure_origin}};
                       res.status = 410;
                       res.set_content(body.dump(), "application/json");
                   } else {
                       nlohmann::json body{{"status", run_status_name(view.status)},
                                           {"nodes_done", view.nodes_done},
                                           {"nodes_total", view.nodes_total}};
                       res.status = 202;
                       res.set_content(body.dump(), "application/json");
                   }
               }));

    im.svr.Get(R"(/runs/([^/]+)/metrics)",
               guard([this](const httplib::Request& req, httplib::Response& res) {
                   nlohmann::json body;
                   {
                       std::lock_guard lock(impl_->mu);
                       body = core_.metrics(req.matches[1]);
                   }
                   res.set_content(body.dump(), "application/json");
               }));

    im.svr.Post("/workflows", guard([this](const httplib::Request& req, httplib::Response& res) {
                    handle_workflow(req.body, res);
                }));

    if (config_.port == 0) {
        port_ = im.svr.bind_to_any_port(config_.host);
        if (port_ <= 0) throw RuntimeFailure("BindError", "cannot bind " + config_.host);
    } else {
        if (!im.svr.bind_to_port(config_.host, config_.port))
            throw RuntimeFailure("BindError", "cannot bind " + config_.host + ":" +
                                                  std::to_string(config_.port));
        port_ = config_.port;
    }
    im.serve_thread = std::thread([this] { impl_->svr.listen_after_bind(); });
    im.svr.wait_until_ready();
    return port_;
}

void OrchestratorServer::dispatch(std::vector<Action> actions) {
    for (auto& action : actions) {
        if (action.kind == Action::Kind::Invoke) {
            impl_->submit([this, a = std::move(action)]() mutable {
                std::vector<Action> next;
                try {
                    Value out = config_.invoker->invoke(a.node, a.args);
                    std::lock_guard lock(impl_->mu);
                    core_.invocation_done(a.run, a.node.id, std::move(out), impl_->now_ms());
                    next = core_.drain_actions();
                } catch (const std::exception& e) {
                    std::lock_guard lock(impl_->mu);
                    core_.invocation_failed(a.run, a.node.id, e.what(), impl_->now_ms());
                    next = core_.drain_actions();
                }
                dispatch(std::move(next));
            });
        } else {
            impl_->submit([this, a = std::move(action)] {
                int sends = config_.duplicate_tokens ? 2 : 1;
                for (int i = 0; i < sends; ++i) {
                    try {
                        client::post_token(a.to_url, a.token, config_.blob_side_channel_bytes);
                    } catch (const std::exception& e) {
                        std::fprintf(stderr, "[%s] token send to %s failed: %s\n",
                                     config_.site_id.c_str(), a.to_url.c_str(), e.what());
                        break;
                    }
                }
            });
        }
    }
}

void OrchestratorServer::handle_workflow(const std::string& body, httplib::Response& res) {
    nlohmann::json j = nlohmann::json::parse(body);
    std::string source = j.at("source").get<std::string>();
    std::string mode = j.value("mode", "decentralized");
    std::map<std::string, Value> inputs;
    const nlohmann::json jin = j.value("inputs", nlohmann::json::object());
    for (const auto& [name, jv] : jin.items()) inputs[name] = value_from_json(jv);

    CompileOutput compiled = compile_workflow(source, config_.catalogs);

    Placement placement;
    if (mode == "centralized" || mode == "local") {
        placement.root = config_.site_id;
        placement.sites = {{config_.site_id, url()}};
    } else if (mode == "decentralized") {
        placement = placement_from_json(j.at("placement"));
        if (placement.root != config_.site_id)
            throw RuntimeFailure("WrongSite", "placement roots at '" + placement.root +
                                                  "', this orchestrator is '" +
                                                  config_.site_id + "'");
    } else {
        throw RuntimeFailure("BadMode", "mode '" + mode + "' is not centralized|decentralized");
    }

    std::vector<Fragment> fragments = partition(compiled.graph, placement);

    std::string run = "r" + std::to_string(impl_->next_run.fetch_add(1)) + "-" +
                      std::to_string(impl_->rng() & 0xffffff);

    // Self first, then peers; inputs bind only after every ack so no site
    // starts from a partially deployed run.
    std::vector<Action> actions;
    {
        std::lock_guard lock(impl_->mu);
        core_.deploy_fragment(run, fragments.front(), impl_->now_ms());
        actions = core_.drain_actions();
    }
    dispatch(std::move(actions));
    for (size_t i = 1; i < fragments.size(); ++i)
        client::post_fragment(fragments[i].site_url, run, fragments[i]);
    {
        std::lock_guard lock(impl_->mu);
        core_.bind_inputs(run, inputs, impl_->now_ms());
        actions = core_.drain_actions();
    }
    dispatch(std::move(actions));

    res.status = 201;
    res.set_content(nlohmann::json{{"run_id", run}}.dump(), "application/json");
}

namespace client {

namespace {

httplib::Client make_client(const std::string& base_url, int timeout_ms) {
    httplib::Client cli(base_url);
    cli.set_connection_timeout(0, timeout_ms * 1000);
    cli.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    return cli;
}

}  // namespace

void post_fragment(const std::string& base_url, const std::string& run, const Fragment& f,
                   const std::map<std::string, Value>* inputs, int timeout_ms) {
    nlohmann::json body = fragment_to_json(f);
    if (inputs) {
        nlohmann::json ji = nlohmann::json::object();
        for (const auto& [name, v] : *inputs) ji[name] = value_to_json(v);
        body["inputs"] = ji;
    }
    auto cli = make_client(base_url, timeout_ms);
    auto res = cli.Post("/runs/" + run + "/fragments", body.dump(), "application/json");
    if (!res || res->status != 201)
        throw RuntimeFailure("DeployFailed",
                             base_url + " run " + run + ": " +
                                 (res ? std::to_string(res->status) + " " + res->body
                                      : httplib::to_string(res.error())));
}

void post_token(const std::string& base_url, const TokenMsg& token,
                std::size_t blob_side_channel_bytes, int timeout_ms) {
    auto cli = make_client(base_url, timeout_ms);
    httplib::Result res;
    if (!token.fail && token.value.kind == Value::Kind::Blob &&
        token.value.blob.size() > blob_side_channel_bytes) {
        httplib::Headers headers{{"X-Edge", std::to_string(token.edge)},
                                 {"X-Origin", token.origin},
                                 {"X-Seq", std::to_string(token.seq)}};
        res = cli.Post("/runs/" + token.run + "/blobs", headers,
                       std::string(token.value.blob.begin(), token.value.blob.end()),
                       "application/octet-stream");
    } else {
        res = cli.Post("/runs/" + token.run + "/tokens", token_to_json(token).dump(),
                       "application/json");
    }
    if (!res || res->status != 202)
        throw RuntimeFailure("TokenRejected",
                             base_url + " edge " + std::to_string(token.edge) + ": " +
                                 (res ? std::to_string(res->status) + " " + res->body
                                      : httplib::to_string(res.error())));
}

RunResult get_outputs(const std::string& base_url, const std::string& run, int timeout_ms) {
    auto cli = make_client(base_url, timeout_ms);
    auto res = cli.Get("/runs/" + run + "/outputs");
    if (!res)
        throw RuntimeFailure("Timeout", base_url + ": " + httplib::to_string(res.error()));
    RunResult out;
    if (res->status == 200) {
        out.done = true;
        nlohmann::json j = nlohmann::json::parse(res->body);
        for (const auto& [name, jv] : j.at("outputs").items())
            out.outputs[name] = value_from_json(jv);
    } else if (res->status == 410) {
        out.failed = true;
        out.failure = res->body;
    } else if (res->status == 404) {
        throw RuntimeFailure("UnknownRun", base_url + " run " + run);
    } else if (res->status != 202) {
        throw RuntimeFailure("ServiceError", std::to_string(res->status) + " " + res->body);
    }
    return out;
}

RunResult await_outputs(const std::string& base_url, const std::string& run, int deadline_ms) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(deadline_ms);
    for (;;) {
        RunResult r = get_outputs(base_url, run);
        if (r.done || r.failed) return r;
        if (std::chrono::steady_clock::now() >= deadline)
            throw RuntimeFailure("Timeout", "run " + run + " still pending after " +
                                                std::to_string(deadline_ms) + " ms");
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
}

nlohmann::json get_metrics(const std::string& base_url, const std::string& run) {
    auto cli = make_client(base_url, 30'000);
    auto res = cli.Get("/runs/" + run + "/metrics");
    if (!res || res->status != 200)
        throw RuntimeFailure("ServiceError",
                             base_url + " metrics: " +
                                 (res ? std::to_string(res->status) : httplib::to_string(res.error())));
    return nlohmann::json::parse(res->body);
}

std::string submit_workflow(const std::string& base_url, const std::string& source,
                            const std::map<std::string, Value>& inputs,
                            const nlohmann::json& placement, const std::string& mode) {
    nlohmann::json ji = nlohmann::json::object();
    for (const auto& [name, v] : inputs) ji[name] = value_to_json(v);
    nlohmann::json body{{"source", source}, {"inputs", ji}, {"mode", mode}};
    if (!placement.is_null()) body["placement"] = placement;
    auto cli = make_client(base_url, 60'000);
    auto res = cli.Post("/workflows", body.dump(), "application/json");
    if (!res || res->status != 201)
        throw RuntimeFailure("WorkflowRejected",
                             res ? std::to_string(res->status) + " " + res->body
                                 : httplib::to_string(res.error()));
    return nlohmann::json::parse(res->body).at("run_id").get<std::string>();
}

}  // namespace client

}  // namespace dflow
