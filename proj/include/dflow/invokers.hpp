#pragma once

#include "dflow/engine.hpp"

namespace dflow {

// Deterministic stand-in for live services: the result depends only on the
// operation name, its declared output type, and the argument values.
// string/any outputs render the call ("Op2(Op1(5))"), numeric outputs sum
// their numeric arguments, records carry just their type tag.
class MockInvoker : public Invoker {
  public:
    Value invoke(const Node& node,
                 const std::vector<std::pair<std::string, Value>>& args) override;
};

// Byte-growth stand-in: returns a blob of 2 x the summed argument payload
// bytes (requires `any`-typed outputs).
class DoublingInvoker : public Invoker {
  public:
    Value invoke(const Node& node,
                 const std::vector<std::pair<std::string, Value>>& args) override;
};

// Invokes POST {endpoint}/invoke/{op} with JSON-encoded named arguments.
// Blob responses arrive as raw octet-stream bodies, everything else as a
// JSON value. Transport failures surface as Timeout, non-200 responses as
// ServiceError(status, body).
class HttpInvoker : public Invoker {
  public:
    explicit HttpInvoker(int timeout_ms = 30'000);

    Value invoke(const Node& node,
                 const std::vector<std::pair<std::string, Value>>& args) override;

    // Rewrites a catalog endpoint to a live address (tests bind ephemeral
    // ports; catalogs hold stable names).
    void map_endpoint(std::string from, std::string to);

  private:
    int timeout_ms_;
    std::map<std::string, std::string> remap_;
};

// Serialization of invocation requests shared by HttpInvoker and the test
// service daemon.
nlohmann::json invoke_request_json(const std::vector<std::pair<std::string, Value>>& args);
std::vector<std::pair<std::string, Value>> invoke_request_parse(const nlohmann::json& body);

}  // namespace dflow
