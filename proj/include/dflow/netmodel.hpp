#pragma once

#include <map>
#include <string>

#include <json.hpp>

namespace dflow {

struct LinkParams {
    double latency_ms = 0;
    double bandwidth_bps = 0;  // bytes per second; 0 = unlimited
};

// Deterministic inter-site link costs: transfer = latency + bytes/bandwidth.
// Intra-site transfers are free. Pairs without an override use `fallback`.
struct NetModel {
    LinkParams fallback{20.0, 10e6};
    std::map<std::pair<std::string, std::string>, LinkParams> links;

    LinkParams link(const std::string& from, const std::string& to) const;
    double transfer_ms(const std::string& from, const std::string& to,
                       std::uint64_t bytes) const;
};

nlohmann::json netmodel_to_json(const NetModel& net);
NetModel netmodel_from_json(const nlohmann::json& j);

}  // namespace dflow
