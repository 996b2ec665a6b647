#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dflow/types.hpp"

namespace dflow {

// Runtime values moving along edges: typed scalars, opaque blobs (declared
// type `any`), ordered tuples, and named records for complex types.
struct Value {
    enum class Kind { Scalar, Blob, Tuple, Record };

    Kind kind = Kind::Scalar;
    BaseType scalar_type = BaseType::Int;
    std::variant<std::int64_t, double, bool, std::string> scalar = std::int64_t{0};
    std::vector<std::uint8_t> blob;
    std::vector<Value> elems;
    std::string record_schema;  // complex-type tag for records
    std::string record_type;
    std::vector<std::pair<std::string, Value>> fields;

    static Value from_scalar(const ScalarLit& lit);
    static Value of_int(std::int64_t v, BaseType t = BaseType::Int);
    static Value of_double(double v, BaseType t = BaseType::Double);
    static Value of_bool(bool v);
    static Value of_string(std::string v);
    static Value of_decimal(std::string digits);
    static Value of_blob(std::vector<std::uint8_t> bytes);
    static Value of_tuple(std::vector<Value> elems);

    bool operator==(const Value&) const = default;

    // The runtime type tag; tuples recurse, blobs/records report any/complex.
    TypeExpr runtime_type() const;

    // Payload size used by metrics and traces: blobs and strings count their
    // bytes, fixed-width scalars their width, containers the element sum.
    std::uint64_t payload_bytes() const;

    // Compact single-line rendering (mock invoker results, log lines).
    std::string display() const;
};

// `true` when a value of this runtime shape may travel an edge/slot of the
// given declared type.
bool value_compatible(const Value& v, const TypeExpr& declared);

nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);

// Canonical rendering of a named output map (sorted keys) — the byte-exact
// comparison form used by determinism and equivalence checks.
std::string outputs_to_json(const std::map<std::string, Value>& outputs);
std::map<std::string, Value> outputs_from_json(const std::string& text);

}  // namespace dflow
