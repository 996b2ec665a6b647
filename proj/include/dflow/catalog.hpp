#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dflow/types.hpp"

namespace dflow {

struct OperationSig {
    std::string name;
    std::vector<std::pair<std::string, TypeExpr>> inputs;  // ordered parameters
    TypeExpr output;

    int param_index(const std::string& pname) const {
        for (size_t i = 0; i < inputs.size(); ++i)
            if (inputs[i].first == pname) return static_cast<int>(i);
        return -1;
    }
};

struct PortDesc {
    std::string name;
    std::string endpoint;
    std::vector<OperationSig> operations;
};

struct ServiceDesc {
    std::string name;
    std::vector<PortDesc> ports;
};

struct ServiceCatalog {
    std::string description_id;
    std::vector<ServiceDesc> services;

    const ServiceDesc* find_service(const std::string& name) const;
};

struct TypeDef {
    std::string name;
    std::vector<std::pair<std::string, TypeExpr>> fields;
};

struct TypeSchema {
    std::string schema_id;
    std::vector<TypeDef> types;

    const TypeDef* find_type(const std::string& name) const;
};

// Loaded documents keyed by the URL the .dfl file references.
struct CatalogSet {
    std::map<std::string, ServiceCatalog> catalogs;
    std::map<std::string, TypeSchema> schemas;
};

// Both loaders throw CompileError("FormatError") on malformed documents and
// CompileError("DuplicateName") on duplicate service/port/operation/type
// names. `origin` is used in messages (a path or URL).
ServiceCatalog load_catalog(const nlohmann::json& doc, const std::string& origin);
ServiceCatalog load_catalog_text(const std::string& text, const std::string& origin);

// Schema field types must resolve within the same schema or to base types,
// and may not be recursive (directly or mutually).
TypeSchema load_schema(const nlohmann::json& doc, const std::string& origin);
TypeSchema load_schema_text(const std::string& text, const std::string& origin);

// Throws CompileError with UnknownService/UnknownPort/UnknownOperation.
const OperationSig& lookup_operation(const ServiceCatalog& catalog, const std::string& service,
                                     const std::string& port, const std::string& op);

nlohmann::json catalog_to_json(const ServiceCatalog& c);

}  // namespace dflow
