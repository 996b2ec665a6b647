#pragma once

#include <string>
#include <vector>

#include "dflow/ast.hpp"

namespace dflow {

// Resolved (semantic) types. Complex types are canonical (schema-id from the
// schema document, not the .dfl alias). Tuple types arise only from tuple
// assignments; they cannot be written in an interface declaration.
struct TypeExpr {
    enum class Kind { Base, Complex, Tuple };
    Kind kind = Kind::Base;
    BaseType base = BaseType::Any;
    std::string schema;               // Complex
    std::string name;                 // Complex
    std::vector<TypeExpr> elems;      // Tuple

    static TypeExpr any() { return TypeExpr{}; }
    static TypeExpr of(BaseType b) {
        TypeExpr t;
        t.base = b;
        return t;
    }
    static TypeExpr complex(std::string schema, std::string name) {
        TypeExpr t;
        t.kind = Kind::Complex;
        t.schema = std::move(schema);
        t.name = std::move(name);
        return t;
    }
    static TypeExpr tuple(std::vector<TypeExpr> elems) {
        TypeExpr t;
        t.kind = Kind::Tuple;
        t.elems = std::move(elems);
        return t;
    }

    bool is_any() const { return kind == Kind::Base && base == BaseType::Any; }
    bool operator==(const TypeExpr&) const = default;
};

// `any` is compatible with everything in both directions. Base types match
// exactly (no numeric coercion). Complex types match by schema-id + name.
// Tuples match element-wise.
bool compatible(const TypeExpr& from, const TypeExpr& to);

std::string type_display(const TypeExpr& t);

// Serialized form used in catalog/schema/fragment JSON: a base keyword or
// "schema:TypeName" (tuple types additionally as "(a,b,...)").
std::string type_to_string(const TypeExpr& t);
TypeExpr type_from_string(const std::string& s);

}  // namespace dflow
