#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dflow/diagnostics.hpp"

namespace dflow {

enum class BaseType { Any, Byte, Boolean, String, Int, Float, Double, Decimal, Long, Short };

const char* base_type_name(BaseType t);
std::optional<BaseType> base_type_from_name(std::string_view name);

// A type as written in an interface declaration: either a base keyword or a
// `schemaAlias:TypeName` pair (resolved against schema definitions later).
struct TypeRef {
    bool is_base = true;
    BaseType base = BaseType::Any;
    std::string schema_alias;  // only when !is_base
    std::string type_name;     // only when !is_base
    SourcePos pos;

    bool same(const TypeRef& o) const {
        return is_base == o.is_base && base == o.base && schema_alias == o.schema_alias &&
               type_name == o.type_name;
    }
};

// Literal values: integer literals are int, decimal-point literals double,
// true/false boolean, quoted text string. No sign prefix exists in the
// grammar, so all numeric literals are nonnegative.
struct ScalarLit {
    BaseType type = BaseType::Int;
    std::variant<std::int64_t, double, bool, std::string> value = std::int64_t{0};
    SourcePos pos;

    bool same(const ScalarLit& o) const { return type == o.type && value == o.value; }
};

std::string render_scalar(const ScalarLit& s);

// `port.Operation` with an optional `.parameter` routing suffix.
struct InvocationRef {
    std::string port;
    std::string op;
    std::string param;  // empty = positional binding
    SourcePos pos;

    std::string display() const {
        return param.empty() ? port + "." + op : port + "." + op + "." + param;
    }
    bool same(const InvocationRef& o) const {
        return port == o.port && op == o.op && param == o.param;
    }
};

struct Definition {  // description / schema
    std::string name;
    std::string url;
    SourcePos pos;
    bool same(const Definition& o) const { return name == o.name && url == o.url; }
};

struct ServiceDef {  // service s1 is desc.Service1
    std::string name;
    std::string description;
    std::string service;
    SourcePos pos;
    bool same(const ServiceDef& o) const {
        return name == o.name && description == o.description && service == o.service;
    }
};

struct PortDef {  // port p1 is s1.Port1
    std::string name;
    std::string service;
    std::string port;
    SourcePos pos;
    bool same(const PortDef& o) const {
        return name == o.name && service == o.service && port == o.port;
    }
};

struct TypedVar {
    TypeRef type;
    std::string name;
    SourcePos pos;
    bool same(const TypedVar& o) const { return type.same(o.type) && name == o.name; }
};

// Assignment right-hand sides; tuple elements are variables or scalars.
struct TupleElem {
    bool is_var = true;
    std::string var;
    ScalarLit scalar;
    bool same(const TupleElem& o) const {
        if (is_var != o.is_var) return false;
        return is_var ? var == o.var : scalar.same(o.scalar);
    }
};

enum class StatementKind {
    BareInvocation,  // p1.Op1
    FeedScalar,      // 5 -> p1.Op1, p2.Op2.x
    FeedVariable,    // v -> p1.Op1, ...
    Retrieve,        // p1.Op1 -> v
    AssignScalar,    // v = 5
    AssignVar,       // v = w
    AssignTuple,     // v = (a, 5, b)
};

struct Statement {
    StatementKind kind = StatementKind::BareInvocation;
    InvocationRef invocation;             // BareInvocation / Retrieve source
    ScalarLit scalar;                     // FeedScalar / AssignScalar
    std::string var;                      // Feed source, Retrieve target, Assign target
    std::string rhs_var;                  // AssignVar
    std::vector<InvocationRef> targets;   // Feed* targets
    std::vector<TupleElem> tuple;         // AssignTuple
    bool synthesized = false;             // produced by composition desugaring
    SourcePos pos;

    bool same(const Statement& o) const;
};

// A parsed workflow: definitions, interface, dataflow. Section order is
// definitions -> schemas -> interface -> dataflow.
struct WorkflowSpec {
    std::vector<Definition> descriptions;
    std::vector<ServiceDef> services;
    std::vector<PortDef> ports;
    std::vector<Definition> schemas;
    std::vector<TypedVar> inputs;
    std::vector<TypedVar> outputs;
    std::vector<Statement> statements;

    bool same(const WorkflowSpec& o) const;
};

}  // namespace dflow
