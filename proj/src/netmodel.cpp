#include "dflow/netmodel.hpp"

#include <stdexcept>

namespace dflow {

LinkParams NetModel::link(const std::string& from, const std::string& to) const {
    if (from == to) return {0, 0};
    if (auto it = links.find({from, to}); it != links.end()) return it->second;
    return fallback;
}

double NetModel::transfer_ms(const std::string& from, const std::string& to,
                             std::uint64_t bytes) const {
    LinkParams l = link(from, to);
    if (l.latency_ms < 0 || l.bandwidth_bps < 0)
        throw std::invalid_argument("negative link parameters");
    double ms = l.latency_ms;
    if (l.bandwidth_bps > 0) ms += static_cast<double>(bytes) / l.bandwidth_bps * 1000.0;
    return ms;
}

nlohmann::json netmodel_to_json(const NetModel& net) {
    nlohmann::json links = nlohmann::json::array();
    for (const auto& [pair, l] : net.links)
        links.push_back({{"from", pair.first},
                         {"to", pair.second},
                         {"latency_ms", l.latency_ms},
                         {"bandwidth_bps", l.bandwidth_bps}});
    return {{"default",
             {{"latency_ms", net.fallback.latency_ms},
              {"bandwidth_bps", net.fallback.bandwidth_bps}}},
            {"links", links}};
}

NetModel netmodel_from_json(const nlohmann::json& j) {
    NetModel net;
    if (j.contains("default")) {
        net.fallback.latency_ms = j["default"].value("latency_ms", 20.0);
        net.fallback.bandwidth_bps = j["default"].value("bandwidth_bps", 10e6);
    }
    for (const auto& jl : j.value("links", nlohmann::json::array()))
        net.links[{jl.at("from").get<std::string>(), jl.at("to").get<std::string>()}] = {
            jl.value("latency_ms", 0.0), jl.value("bandwidth_bps", 0.0)};
    return net;
}

}  // namespace dflow
