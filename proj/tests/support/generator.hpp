#pragma once

#include <random>
#include <string>
#include <vector>

#include "dflow/compile.hpp"
#include "dflow/partition.hpp"

namespace dflow::testutil {

// A randomly generated but always-valid workflow: a layered DAG of string ->
// string operations over a synthetic catalog, every intermediate retrieved
// into a fresh variable, every sink variable exported. Node count (inputs +
// invocations + consts + tuples + outputs) never exceeds 20.
struct GeneratedWorkflow {
    std::string source;
    CatalogSet catalogs;
    std::map<std::string, Value> inputs;
    std::vector<std::string> ports;  // declared port names, for placements
};

inline GeneratedWorkflow generate_workflow(std::uint32_t seed) {
    std::mt19937 rng(seed);
    auto pick = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };

    const int n_inputs = pick(1, 3);
    const int n_invocations = pick(1, 7);
    // Worst case every invocation result becomes an output node; consts and
    // tuple nodes spend what is left of the 20-node budget.
    int extras = 20 - (n_inputs + 2 * n_invocations);

    std::vector<int> arity(n_invocations);
    nlohmann::json ops = nlohmann::json::array();
    for (int i = 0; i < n_invocations; ++i) {
        arity[i] = pick(1, 3);
        nlohmann::json params = nlohmann::json::array();
        for (int p = 0; p < arity[i]; ++p)
            params.push_back({{"name", std::string(1, char('a' + p))}, {"type", "string"}});
        ops.push_back({{"name", "F" + std::to_string(i)},
                       {"inputs", params},
                       {"output", {{"type", "string"}}}});
    }
    nlohmann::json catalog{
        {"description", "generated"},
        {"services",
         nlohmann::json::array(
             {{{"name", "GenService"},
               {"ports", nlohmann::json::array({{{"name", "GenPort"},
                                                 {"endpoint", "gen://svc"},
                                                 {"operations", ops}}})}}})}};

    GeneratedWorkflow out;
    const std::string url = "gen://catalog";
    out.catalogs.catalogs.emplace(url, load_catalog(catalog, url));

    std::string src = "description d is " + url + "\nservice s is d.GenService\n";
    for (int i = 0; i < n_invocations; ++i) {
        std::string port = "q" + std::to_string(i);
        out.ports.push_back(port);
        src += "port " + port + " is s.GenPort\n";
    }

    std::vector<std::string> vars;
    std::vector<int> feeds;  // per variable: how often it feeds an invocation
    src += "\ninput:\n    string";
    for (int i = 0; i < n_inputs; ++i) {
        std::string name = "in" + std::to_string(i);
        src += (i ? ", " : " ") + name;
        vars.push_back(name);
        feeds.push_back(0);
        out.inputs[name] = Value::of_string("seed" + std::to_string(seed) + "-" + name);
    }
    src += "\n";

    std::string body;
    auto pick_var = [&] {
        int i = pick(0, static_cast<int>(vars.size()) - 1);
        feeds[i]++;
        return vars[i];
    };
    for (int i = 0; i < n_invocations; ++i) {
        // Each port is used once, so "qi.Fi" names a unique invocation.
        std::string inv = "q" + std::to_string(i) + ".F" + std::to_string(i);
        if (arity[i] >= 2 && extras > 0 && pick(0, 3) == 0) {
            extras--;  // tuple-assembly node
            std::string tup = "t" + std::to_string(i);
            body += tup + " = (";
            for (int p = 0; p < arity[i]; ++p) body += (p ? ", " : "") + pick_var();
            body += ")\n" + tup + " -> " + inv + "\n";
        } else {
            for (int p = 0; p < arity[i]; ++p) {
                std::string param = std::string(1, char('a' + p));
                if (extras > 0 && pick(0, 9) == 0) {
                    extras--;  // const node
                    body += "\"k" + std::to_string(pick(0, 99)) + "\" -> " + inv + "." + param +
                            "\n";
                } else {
                    body += pick_var() + " -> " + inv + "." + param + "\n";
                }
            }
        }
        std::string result = "v" + std::to_string(i);
        body += inv + " -> " + result + "\n";
        vars.push_back(result);
        feeds.push_back(0);
    }

    src += "output:\n    any";
    bool first = true;
    for (size_t i = n_inputs; i < vars.size(); ++i)
        if (feeds[i] == 0) {
            src += (first ? " out_" : ", out_") + vars[i];
            first = false;
        }
    src += "\n\n" + body;
    for (size_t i = n_inputs; i < vars.size(); ++i)
        if (feeds[i] == 0) src += "out_" + vars[i] + " = " + vars[i] + "\n";
    out.source = std::move(src);
    return out;
}

// Random placement over the generated ports: k sites, root always "S0",
// every port pinned somewhere (possibly the root).
inline Placement generate_placement(const GeneratedWorkflow& w, std::uint32_t seed) {
    std::mt19937 rng(seed);
    auto pick = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    };
    Placement p;
    int n_sites = pick(1, 4);
    p.root = "S0";
    for (int i = 0; i < n_sites; ++i) p.sites.push_back({"S" + std::to_string(i), ""});
    for (const auto& port : w.ports) p.ports[port] = "S" + std::to_string(pick(0, n_sites - 1));
    return p;
}

}  // namespace dflow::testutil
