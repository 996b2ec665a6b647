#include "dflow/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "dflow/compile.hpp"
#include "dflow/engine.hpp"
#include "dflow/invokers.hpp"
#include "dflow/orchestrator_server.hpp"
#include "dflow/test_service.hpp"
#include "dflow/testbed.hpp"

namespace dflow {

namespace {

constexpr int kExitCompile = 1;
constexpr int kExitIo = 2;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::atomic<bool> g_interrupted{false};
void on_signal(int) { g_interrupted.store(true); }

// Blocks a daemon command until SIGINT/SIGTERM (or, for tests, a deadline).
void serve_until_signal(int serve_for_ms) {
    g_interrupted.store(false);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(serve_for_ms);
    while (!g_interrupted.load()) {
        if (serve_for_ms > 0 && std::chrono::steady_clock::now() >= deadline) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
}

CatalogSet load_catalogs(const std::string& table_path) {
    if (table_path.empty()) return {};
    return load_catalog_table(table_path);
}

Value parse_input_value(const TypeExpr& t, const std::string& raw) {
    if (!raw.empty() && raw[0] == '@') {
        std::string data = read_file(raw.substr(1));
        if (t.is_any())
            return Value::of_blob(std::vector<std::uint8_t>(data.begin(), data.end()));
        Value v = value_from_json(nlohmann::json::parse(data));
        if (!value_compatible(v, t))
            throw UsageError("file value does not match input type " + type_display(t));
        return v;
    }
    if (t.kind != TypeExpr::Kind::Base)
        throw UsageError("inputs of type " + type_display(t) + " must come from @file");
    try {
        switch (t.base) {
            case BaseType::Any:
                return Value::of_blob(std::vector<std::uint8_t>(raw.begin(), raw.end()));
            case BaseType::String:
                return Value::of_string(raw);
            case BaseType::Decimal:
                return Value::of_decimal(raw);
            case BaseType::Boolean:
                if (raw == "true") return Value::of_bool(true);
                if (raw == "false") return Value::of_bool(false);
                throw UsageError("boolean input must be true or false, got '" + raw + "'");
            case BaseType::Float:
            case BaseType::Double:
                return Value::of_double(std::stod(raw), t.base);
            case BaseType::Byte:
            case BaseType::Short:
            case BaseType::Int:
            case BaseType::Long:
                return Value::of_int(std::stoll(raw), t.base);
        }
    } catch (const std::invalid_argument&) {
    } catch (const std::out_of_range&) {
    }
    throw UsageError("cannot parse '" + raw + "' as " + type_display(t));
}

// name=value / name=@file pairs against the workflow's input interface.
std::map<std::string, Value> parse_inputs(const ResolvedWorkflow& w,
                                          const std::vector<std::string>& pairs) {
    std::map<std::string, Value> out;
    for (const auto& pair : pairs) {
        auto eq = pair.find('=');
        if (eq == std::string::npos)
            throw UsageError("input '" + pair + "' is not name=value or name=@file");
        std::string name = pair.substr(0, eq), raw = pair.substr(eq + 1);
        auto decl = std::find_if(w.inputs.begin(), w.inputs.end(),
                                 [&](const auto& in) { return in.first == name; });
        if (decl == w.inputs.end())
            throw UsageError("'" + name + "' is not a workflow input");
        out[name] = parse_input_value(decl->second, raw);
    }
    return out;
}

std::shared_ptr<Invoker> make_invoker(const std::string& kind,
                                      const std::vector<std::string>& remaps) {
    if (kind == "mock") return std::make_shared<MockInvoker>();
    if (kind == "doubling") return std::make_shared<DoublingInvoker>();
    if (kind == "http") {
        auto inv = std::make_shared<HttpInvoker>();
        for (const auto& pair : remaps) {
            auto eq = pair.find('=');
            if (eq == std::string::npos)
                throw UsageError("remap '" + pair + "' is not endpoint=url");
            inv->map_endpoint(pair.substr(0, eq), pair.substr(eq + 1));
        }
        return inv;
    }
    throw UsageError("unknown invoker '" + kind + "' (mock|doubling|http)");
}

void emit(std::ostream& out, const std::string& text, const std::string& path) {
    if (path.empty() || path == "-")
        out << text;
    else
        write_file(path, text);
}

struct CommonArgs {
    std::string catalogs;
    std::string log_level = "info";
    bool json = false;
};

// Compiles `path`, streaming every diagnostic to err as JSON lines.
CompileResult compile_file(const std::string& path, const CommonArgs& common,
                           std::ostream& err) {
    CompileResult result = compile_collect(read_file(path), load_catalogs(common.catalogs));
    err << to_json_lines(result.diagnostics);
    return result;
}

int cmd_check(const std::string& path, const CommonArgs& common, std::ostream& out,
              std::ostream& err) {
    CompileResult result = compile_file(path, common, err);
    if (!result.ok()) return kExitCompile;
    if (common.log_level == "debug")
        out << "ok: " << result.out->graph.nodes.size() << " nodes\n";
    return 0;
}

int cmd_graph(const std::string& path, const std::string& format, const std::string& out_path,
              const CommonArgs& common, std::ostream& out, std::ostream& err) {
    CompileResult result = compile_file(path, common, err);
    if (!result.ok()) return kExitCompile;
    const DataflowGraph& g = result.out->graph;
    if (format == "dot") {
        emit(out, to_dot(g), out_path);
    } else if (format == "json") {
        emit(out, graph_to_json(g).dump(2) + "\n", out_path);
    } else if (format == "levels") {
        nlohmann::json levels = nlohmann::json::array();
        for (const auto& level : parallel_sets(g).invocation_levels(g))
            levels.push_back(level);
        emit(out, levels.dump() + "\n", out_path);
    } else {
        throw UsageError("unknown format '" + format + "' (dot|json|levels)");
    }
    return 0;
}

int run_local(const CompileOutput& compiled, const std::map<std::string, Value>& inputs,
              Invoker& invoker, int workers, int timeout_ms, const std::string& trace_path,
              std::ostream& out) {
    EngineOptions opts;
    opts.workers = workers;
    opts.timeout_ms = timeout_ms;
    std::string trace_lines;
    if (!trace_path.empty())
        opts.trace = [&](const TraceEvent& e) { trace_lines += trace_to_json(e).dump() + "\n"; };
    Engine engine(compiled.graph, invoker, opts);
    auto outputs = engine.run_to_completion(inputs);
    if (!trace_path.empty()) write_file(trace_path, trace_lines);
    out << outputs_to_json(outputs) << "\n";
    return 0;
}

int run_daemons(const CompileOutput& compiled, const std::string& source,
                const std::map<std::string, Value>& inputs, const std::string& mode,
                const std::string& placement_path, const CommonArgs& common,
                const std::shared_ptr<Invoker>& invoker, int deadline_ms, std::ostream& out) {
    CatalogSet catalogs = load_catalogs(common.catalogs);
    std::vector<std::unique_ptr<OrchestratorServer>> servers;
    auto start_server = [&](const std::string& site_id) -> OrchestratorServer& {
        OrchestratorServer::Config config;
        config.site_id = site_id;
        config.core.site_id = site_id;
        config.invoker = invoker;
        config.catalogs = catalogs;
        servers.push_back(std::make_unique<OrchestratorServer>(std::move(config)));
        servers.back()->start();
        return *servers.back();
    };

    std::string root_url;
    nlohmann::json placement_json;
    if (mode == "decentralized") {
        Placement placement =
            placement_from_json(nlohmann::json::parse(read_file(placement_path)));
        for (auto& site : placement.sites)
            if (site.url.empty()) site.url = start_server(site.id).url();
        root_url = placement.find_site(placement.root)->url;
        placement_json = placement_to_json(placement);
    } else {
        root_url = start_server("root").url();
    }

    (void)compiled;  // compiled locally first so diagnostics precede any deploy
    std::string run_id = client::submit_workflow(root_url, source, inputs, placement_json, mode);
    client::RunResult result = client::await_outputs(root_url, run_id, deadline_ms);
    for (auto& server : servers) server->stop();
    if (!result.done)
        throw RuntimeFailure("RunFailed",
                             result.failure.empty() ? "run did not finish" : result.failure);
    out << outputs_to_json(result.outputs) << "\n";
    return 0;
}

int cmd_partition(const std::string& path, const std::string& placement_path,
                  const std::string& out_dir, const CommonArgs& common, std::ostream& out,
                  std::ostream& err) {
    CompileResult result = compile_file(path, common, err);
    if (!result.ok()) return kExitCompile;
    Placement placement = placement_from_json(nlohmann::json::parse(read_file(placement_path)));
    std::vector<Fragment> fragments = partition(result.out->graph, placement);
    if (out_dir.empty()) {
        nlohmann::json all = nlohmann::json::array();
        for (const auto& f : fragments) all.push_back(fragment_to_json(f));
        out << all.dump(2) << "\n";
        return 0;
    }
    std::filesystem::create_directories(out_dir);
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : fragments) {
        auto file = (std::filesystem::path(out_dir) / (f.fragment_id + ".json")).string();
        write_file(file, fragment_to_json(f).dump(2) + "\n");
        files.push_back(file);
    }
    if (common.json)
        out << nlohmann::json{{"files", files}}.dump() << "\n";
    else
        for (const auto& f : files) out << f.get<std::string>() << "\n";
    return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"dataflow workflow compiler and decentralised orchestration tool"};
    app.name("flow");
    app.require_subcommand(1);
    app.fallthrough();

    CommonArgs common;
    app.add_option("--catalogs", common.catalogs,
                   "JSON table mapping catalog/schema URLs to local files");
    app.add_option("--log-level", common.log_level, "debug|info|warn|error")
        ->check(CLI::IsMember({"debug", "info", "warn", "error"}));
    app.add_flag("--json", common.json, "machine-readable output where applicable");

    std::string spec_path, format = "json", out_path, placement_path, mode = "local";
    std::string invoker_kind = "mock", trace_path, out_dir;
    std::vector<std::string> input_pairs, remaps;
    int workers = 1, timeout_ms = 30'000, deadline_ms = 60'000;

    auto* check = app.add_subcommand("check", "compile a workflow and report diagnostics");
    check->add_option("spec", spec_path, "workflow source (.dfl)")->required();

    auto* graph = app.add_subcommand("graph", "export the dataflow graph");
    graph->add_option("spec", spec_path)->required();
    graph->add_option("--format", format, "dot|json|levels");
    graph->add_option("-o,--out", out_path, "output file (default stdout)");

    auto* run = app.add_subcommand("run", "execute a workflow and print its outputs");
    run->add_option("spec", spec_path)->required();
    run->add_option("-i,--input", input_pairs, "name=value or name=@file");
    run->add_option("--mode", mode, "local|centralized|decentralized");
    run->add_option("--placement", placement_path, "placement JSON (decentralized)");
    run->add_option("--invoker", invoker_kind, "mock|doubling|http");
    run->add_option("--remap", remaps, "endpoint=url rewrites for the http invoker");
    run->add_option("--workers", workers, "local-mode worker threads");
    run->add_option("--timeout-ms", timeout_ms, "per-invocation timeout");
    run->add_option("--deadline-ms", deadline_ms, "overall run deadline");
    run->add_option("--trace", trace_path, "write engine trace JSON lines here");

    auto* part = app.add_subcommand("partition", "split a workflow into site fragments");
    part->add_option("spec", spec_path)->required();
    part->add_option("--placement", placement_path)->required();
    part->add_option("-o,--out", out_dir, "directory for per-fragment files");

    std::string site_id = "A", host = "127.0.0.1", svc_name = "T1", behavior = "double";
    int port = 0, serve_for_ms = 0, invoke_workers = 4;
    long long grace_ms = 10'000, gc_ms = 300'000;
    double delay_ms = 5.0;
    bool duplicate_tokens = false;

    auto* serve = app.add_subcommand("serve", "run an orchestration service daemon");
    serve->add_option("--site", site_id, "site id this daemon serves");
    serve->add_option("--host", host);
    serve->add_option("--port", port, "0 picks an ephemeral port");
    serve->add_option("--invoker", invoker_kind, "mock|doubling|http");
    serve->add_option("--remap", remaps, "endpoint=url rewrites for the http invoker");
    serve->add_option("--grace-ms", grace_ms, "early-token buffering window");
    serve->add_option("--gc-ms", gc_ms, "finished-run retention");
    serve->add_option("--workers", invoke_workers, "invocation worker threads");
    serve->add_flag("--duplicate-tokens", duplicate_tokens, "resend every token once");
    serve->add_option("--serve-for-ms", serve_for_ms, "auto-stop after this long (0 = signal)");

    auto* testsvc = app.add_subcommand("testsvc", "run a synthetic benchmark service");
    testsvc->add_option("--name", svc_name);
    testsvc->add_option("--behavior", behavior, "double|same-size|aggregate-double")
        ->check(CLI::IsMember({"double", "same-size", "aggregate-double"}));
    testsvc->add_option("--delay-ms", delay_ms, "compute delay before responding");
    testsvc->add_option("--host", host);
    testsvc->add_option("--port", port, "0 picks an ephemeral port");
    testsvc->add_option("--serve-for-ms", serve_for_ms, "auto-stop after this long (0 = signal)");

    std::string pattern = "pipeline", modes_csv = "centralized,decentralized", config_path,
                net_path;
    int repeats = 20;
    long long input_bytes = 256 * 1024;
    double compute_delay_ms = 5.0;

    auto* bench = app.add_subcommand("bench", "run a benchmark pattern on the virtual clock");
    bench->add_option("--pattern", pattern, "pipeline|distribution|aggregation");
    bench->add_option("--modes", modes_csv, "comma-separated: centralized,decentralized");
    bench->add_option("--repeats", repeats, "repetitions per mode");
    bench->add_option("--input-bytes", input_bytes);
    bench->add_option("--compute-delay-ms", compute_delay_ms);
    bench->add_option("--net", net_path, "net model JSON");
    bench->add_option("--config", config_path, "experiment parameters JSON (flags override)");
    bench->add_option("-o,--out", out_path, "report file (.csv for CSV, else JSON)");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);

        if (check->parsed()) return cmd_check(spec_path, common, out, err);
        if (graph->parsed()) return cmd_graph(spec_path, format, out_path, common, out, err);
        if (part->parsed())
            return cmd_partition(spec_path, placement_path, out_dir, common, out, err);

        if (run->parsed()) {
            if (mode != "local" && mode != "centralized" && mode != "decentralized")
                throw UsageError("unknown mode '" + mode + "'");
            if (mode == "decentralized" && placement_path.empty())
                throw UsageError("--placement is required for decentralized runs");
            CompileResult result = compile_file(spec_path, common, err);
            if (!result.ok()) return kExitCompile;
            auto inputs = parse_inputs(result.out->workflow, input_pairs);
            auto invoker = make_invoker(invoker_kind, remaps);
            if (mode == "local")
                return run_local(*result.out, inputs, *invoker, workers, timeout_ms,
                                 trace_path, out);
            return run_daemons(*result.out, read_file(spec_path), inputs, mode, placement_path,
                               common, invoker, deadline_ms, out);
        }

        if (serve->parsed()) {
            OrchestratorServer::Config config;
            config.site_id = site_id;
            config.core.site_id = site_id;
            config.core.grace_ms = grace_ms;
            config.core.gc_ms = gc_ms;
            config.host = host;
            config.port = port;
            config.invoker = make_invoker(invoker_kind, remaps);
            config.catalogs = load_catalogs(common.catalogs);
            config.duplicate_tokens = duplicate_tokens;
            config.invoke_workers = invoke_workers;
            OrchestratorServer server(std::move(config));
            server.start();
            out << nlohmann::json{{"site", site_id}, {"url", server.url()}}.dump() << "\n";
            out.flush();
            serve_until_signal(serve_for_ms);
            server.stop();
            return 0;
        }

        if (testsvc->parsed()) {
            TestServiceSpec spec{svc_name, behavior, delay_ms, host, port};
            TestService service(spec);
            service.start();
            out << nlohmann::json{{"name", svc_name}, {"url", service.url()}}.dump() << "\n";
            out.flush();
            serve_until_signal(serve_for_ms);
            service.stop();
            return 0;
        }

        if (bench->parsed()) {
            ExperimentParams params;
            if (!config_path.empty())
                params = experiment_params_from_json(nlohmann::json::parse(read_file(config_path)));
            if (bench->count("--pattern") || config_path.empty()) params.pattern = pattern;
            if (bench->count("--repeats") || config_path.empty()) params.repetitions = repeats;
            if (bench->count("--input-bytes") || config_path.empty())
                params.input_bytes = static_cast<std::uint64_t>(input_bytes);
            if (bench->count("--compute-delay-ms") || config_path.empty())
                params.compute_delay_ms = compute_delay_ms;
            if (bench->count("--modes") || config_path.empty()) {
                params.modes.clear();
                std::istringstream csv(modes_csv);
                std::string m;
                while (std::getline(csv, m, ','))
                    if (!m.empty()) params.modes.push_back(m);
            }
            if (!net_path.empty())
                params.net = netmodel_from_json(nlohmann::json::parse(read_file(net_path)));
            MetricsReport report = run_experiment(params);
            std::string text = out_path.size() > 4 && out_path.ends_with(".csv")
                                   ? report_to_csv(report)
                                   : report_to_json(report).dump(2) + "\n";
            emit(out, text, out_path);
            if (!out_path.empty() && common.log_level != "error")
                err << "wrote " << out_path << "\n";
            return report.valid ? 0 : kExitCompile;
        }

        throw UsageError("no subcommand given");
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CompileError& e) {
        err << to_json(e.diagnostic()).dump() << "\n";
        return kExitCompile;
    } catch (const RuntimeFailure& e) {
        err << nlohmann::json{{"severity", "error"},
                              {"code", e.code()},
                              {"msg", e.what()}}
                   .dump()
            << "\n";
        return e.code() == "IoError" ? kExitIo : kExitCompile;
    } catch (const nlohmann::json::exception& e) {
        err << "invalid JSON: " << e.what() << "\n";
        return kExitCompile;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitCompile;
    }
}

}  // namespace dflow
