#pragma once

#include <memory>

#include "dflow/value.hpp"

namespace dflow {

// Synthetic benchmark service: consumes any arguments, produces a blob whose
// size follows the behavior rule after a fixed compute delay.
struct TestServiceSpec {
    std::string name = "T1";
    std::string behavior = "double";  // double | same-size | aggregate-double
    double compute_delay_ms = 5.0;
    std::string host = "127.0.0.1";
    int port = 0;  // 0 picks an ephemeral port
};

nlohmann::json test_service_spec_to_json(const TestServiceSpec& s);
TestServiceSpec test_service_spec_from_json(const nlohmann::json& j);

// The size rule shared by the live daemon and the virtual-clock simulation:
// double and aggregate-double emit 2 x the summed input bytes, same-size
// emits them unchanged. Throws std::invalid_argument on unknown behaviors.
std::uint64_t behavior_output_bytes(const std::string& behavior, std::uint64_t input_bytes);

// Serves POST /invoke/{op} (any op name): sleeps the compute delay, then
// responds with an octet-stream blob sized by the behavior rule.
class TestService {
  public:
    explicit TestService(TestServiceSpec spec);
    ~TestService();

    TestService(const TestService&) = delete;
    TestService& operator=(const TestService&) = delete;

    int start();  // returns the bound port; throws RuntimeFailure("BindError")
    void stop();

    std::string url() const;
    const TestServiceSpec& spec() const { return spec_; }

  private:
    struct Impl;
    TestServiceSpec spec_;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace dflow
