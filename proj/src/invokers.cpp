#include "dflow/invokers.hpp"

#include <httplib.h>

namespace dflow {

namespace {

Value default_for(const TypeExpr& t, const std::string& call);

std::int64_t sum_ints(const std::vector<std::pair<std::string, Value>>& args) {
    std::int64_t sum = 0;
    for (const auto& [name, v] : args)
        if (v.kind == Value::Kind::Scalar && std::holds_alternative<std::int64_t>(v.scalar))
            sum += std::get<std::int64_t>(v.scalar);
    return sum;
}

double sum_numeric(const std::vector<std::pair<std::string, Value>>& args) {
    double sum = 0;
    for (const auto& [name, v] : args) {
        if (v.kind != Value::Kind::Scalar) continue;
        if (std::holds_alternative<std::int64_t>(v.scalar))
            sum += static_cast<double>(std::get<std::int64_t>(v.scalar));
        else if (std::holds_alternative<double>(v.scalar))
            sum += std::get<double>(v.scalar);
    }
    return sum;
}

Value default_for(const TypeExpr& t, const std::string& call) {
    switch (t.kind) {
        case TypeExpr::Kind::Complex: {
            Value v;
            v.kind = Value::Kind::Record;
            v.record_schema = t.schema;
            v.record_type = t.name;
            return v;
        }
        case TypeExpr::Kind::Tuple: {
            std::vector<Value> elems;
            for (const auto& e : t.elems) elems.push_back(default_for(e, call));
            return Value::of_tuple(std::move(elems));
        }
        case TypeExpr::Kind::Base:
            switch (t.base) {
                case BaseType::Any:
                case BaseType::String: return Value::of_string(call);
                case BaseType::Boolean: return Value::of_bool(true);
                case BaseType::Decimal: return Value::of_decimal("0");
                case BaseType::Float:
                case BaseType::Double: return Value::of_double(0, t.base);
                default: return Value::of_int(0, t.base);
            }
    }
    return Value::of_string(call);
}

}  // namespace

Value MockInvoker::invoke(const Node& node,
                          const std::vector<std::pair<std::string, Value>>& args) {
    std::string call = node.op + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i) call += ", ";
        call += args[i].second.display();
    }
    call += ")";

    const TypeExpr& out = node.sig.output;
    if (out.kind == TypeExpr::Kind::Base) {
        switch (out.base) {
            case BaseType::Byte:
            case BaseType::Short:
            case BaseType::Int:
            case BaseType::Long: return Value::of_int(sum_ints(args), out.base);
            case BaseType::Float:
            case BaseType::Double: return Value::of_double(sum_numeric(args), out.base);
            case BaseType::Decimal: return Value::of_decimal(std::to_string(sum_ints(args)));
            default: break;
        }
    }
    return default_for(out, call);
}

Value DoublingInvoker::invoke(const Node& node,
                              const std::vector<std::pair<std::string, Value>>& args) {
    std::uint64_t in_bytes = 0;
    for (const auto& [name, v] : args) in_bytes += v.payload_bytes();
    (void)node;
    return Value::of_blob(std::vector<std::uint8_t>(2 * in_bytes, 0x64));
}

nlohmann::json invoke_request_json(const std::vector<std::pair<std::string, Value>>& args) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& [name, v] : args)
        items.push_back({{"name", name}, {"value", value_to_json(v)}});
    return {{"args", items}};
}

std::vector<std::pair<std::string, Value>> invoke_request_parse(const nlohmann::json& body) {
    std::vector<std::pair<std::string, Value>> args;
    for (const auto& item : body.at("args"))
        args.emplace_back(item.at("name").get<std::string>(),
                          value_from_json(item.at("value")));
    return args;
}

HttpInvoker::HttpInvoker(int timeout_ms) : timeout_ms_(timeout_ms) {}

void HttpInvoker::map_endpoint(std::string from, std::string to) {
    remap_[std::move(from)] = std::move(to);
}

Value HttpInvoker::invoke(const Node& node,
                          const std::vector<std::pair<std::string, Value>>& args) {
    std::string endpoint = node.endpoint;
    if (auto it = remap_.find(endpoint); it != remap_.end()) endpoint = it->second;

    httplib::Client client(endpoint);
    client.set_connection_timeout(0, timeout_ms_ * 1000);
    client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);

    auto res = client.Post("/invoke/" + node.op, invoke_request_json(args).dump(),
                           "application/json");
    if (!res)
        throw RuntimeFailure("Timeout", endpoint + "/invoke/" + node.op + ": " +
                                            httplib::to_string(res.error()));
    if (res->status != 200)
        throw RuntimeFailure("ServiceError", endpoint + "/invoke/" + node.op + " -> " +
                                                 std::to_string(res->status) + " " + res->body);
    if (res->get_header_value("Content-Type") == "application/octet-stream")
        return Value::of_blob(std::vector<std::uint8_t>(res->body.begin(), res->body.end()));
    return value_from_json(nlohmann::json::parse(res->body));
}

}  // namespace dflow
