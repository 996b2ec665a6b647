#include "dflow/catalog.hpp"

#include <functional>
#include <set>

namespace dflow {

bool compatible(const TypeExpr& from, const TypeExpr& to) {
    if (from.is_any() || to.is_any()) return true;
    if (from.kind != to.kind) return false;
    switch (from.kind) {
        case TypeExpr::Kind::Base: return from.base == to.base;
        case TypeExpr::Kind::Complex: return from.schema == to.schema && from.name == to.name;
        case TypeExpr::Kind::Tuple: {
            if (from.elems.size() != to.elems.size()) return false;
            for (size_t i = 0; i < from.elems.size(); ++i)
                if (!compatible(from.elems[i], to.elems[i])) return false;
            return true;
        }
    }
    return false;
}

std::string type_display(const TypeExpr& t) { return type_to_string(t); }

std::string type_to_string(const TypeExpr& t) {
    switch (t.kind) {
        case TypeExpr::Kind::Base: return base_type_name(t.base);
        case TypeExpr::Kind::Complex: return t.schema + ":" + t.name;
        case TypeExpr::Kind::Tuple: {
            std::string out = "(";
            for (size_t i = 0; i < t.elems.size(); ++i) {
                if (i) out += ",";
                out += type_to_string(t.elems[i]);
            }
            return out + ")";
        }
    }
    return "any";
}

TypeExpr type_from_string(const std::string& s) {
    if (!s.empty() && s.front() == '(') {
        if (s.back() != ')') throw CompileError("FormatError", {}, "unbalanced tuple type: " + s);
        TypeExpr t;
        t.kind = TypeExpr::Kind::Tuple;
        int depth = 0;
        std::string cur;
        for (size_t i = 1; i + 1 < s.size(); ++i) {
            char c = s[i];
            if (c == '(') ++depth;
            if (c == ')') --depth;
            if (c == ',' && depth == 0) {
                t.elems.push_back(type_from_string(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) t.elems.push_back(type_from_string(cur));
        return t;
    }
    auto colon = s.find(':');
    if (colon != std::string::npos)
        return TypeExpr::complex(s.substr(0, colon), s.substr(colon + 1));
    auto base = base_type_from_name(s);
    if (!base) throw CompileError("FormatError", {}, "unknown type: '" + s + "'");
    return TypeExpr::of(*base);
}

const ServiceDesc* ServiceCatalog::find_service(const std::string& name) const {
    for (const auto& s : services)
        if (s.name == name) return &s;
    return nullptr;
}

const TypeDef* TypeSchema::find_type(const std::string& name) const {
    for (const auto& t : types)
        if (t.name == name) return &t;
    return nullptr;
}

namespace {

[[noreturn]] void format_error(const std::string& origin, const std::string& why) {
    throw CompileError("FormatError", {}, origin + ": " + why);
}

void check_unique(std::set<std::string>& seen, const std::string& name,
                  const std::string& origin, const std::string& what) {
    if (!seen.insert(name).second)
        throw CompileError("DuplicateName", {}, origin + ": duplicate " + what + " '" + name + "'");
}

TypeExpr parse_type_field(const nlohmann::json& j, const std::string& origin) {
    if (!j.is_string()) format_error(origin, "type must be a string");
    try {
        return type_from_string(j.get<std::string>());
    } catch (const CompileError& e) {
        format_error(origin, e.diagnostic().message);
    }
}

}  // namespace

ServiceCatalog load_catalog(const nlohmann::json& doc, const std::string& origin) {
    if (!doc.is_object() || !doc.contains("description") || !doc.contains("services"))
        format_error(origin, "catalog must have 'description' and 'services'");
    ServiceCatalog cat;
    cat.description_id = doc["description"].get<std::string>();
    std::set<std::string> service_names;
    for (const auto& js : doc["services"]) {
        ServiceDesc svc;
        if (!js.contains("name") || !js.contains("ports"))
            format_error(origin, "service entries need 'name' and 'ports'");
        svc.name = js["name"].get<std::string>();
        check_unique(service_names, svc.name, origin, "service");
        std::set<std::string> port_names;
        for (const auto& jp : js["ports"]) {
            PortDesc port;
            if (!jp.contains("name") || !jp.contains("endpoint") || !jp.contains("operations"))
                format_error(origin, "port entries need 'name', 'endpoint', 'operations'");
            port.name = jp["name"].get<std::string>();
            check_unique(port_names, port.name, origin, "port");
            port.endpoint = jp["endpoint"].get<std::string>();
            std::set<std::string> op_names;
            for (const auto& jo : jp["operations"]) {
                OperationSig op;
                if (!jo.contains("name") || !jo.contains("output"))
                    format_error(origin, "operation entries need 'name' and 'output'");
                op.name = jo["name"].get<std::string>();
                check_unique(op_names, op.name, origin, "operation");
                std::set<std::string> param_names;
                for (const auto& ji : jo.value("inputs", nlohmann::json::array())) {
                    if (!ji.contains("name") || !ji.contains("type"))
                        format_error(origin, "operation inputs need 'name' and 'type'");
                    std::string pname = ji["name"].get<std::string>();
                    check_unique(param_names, pname, origin, "parameter");
                    op.inputs.emplace_back(pname, parse_type_field(ji["type"], origin));
                }
                op.output = parse_type_field(jo["output"].contains("type") ? jo["output"]["type"]
                                                                           : jo["output"],
                                             origin);
                port.operations.push_back(std::move(op));
            }
            svc.ports.push_back(std::move(port));
        }
        cat.services.push_back(std::move(svc));
    }
    return cat;
}

ServiceCatalog load_catalog_text(const std::string& text, const std::string& origin) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) format_error(origin, "not valid JSON");
    return load_catalog(doc, origin);
}

TypeSchema load_schema(const nlohmann::json& doc, const std::string& origin) {
    if (!doc.is_object() || !doc.contains("schema") || !doc.contains("types"))
        format_error(origin, "schema must have 'schema' and 'types'");
    TypeSchema schema;
    schema.schema_id = doc["schema"].get<std::string>();
    std::set<std::string> type_names;
    for (const auto& jt : doc["types"]) {
        TypeDef def;
        if (!jt.contains("name")) format_error(origin, "type entries need 'name'");
        def.name = jt["name"].get<std::string>();
        check_unique(type_names, def.name, origin, "type");
        std::set<std::string> field_names;
        for (const auto& jf : jt.value("fields", nlohmann::json::array())) {
            if (!jf.contains("name") || !jf.contains("type"))
                format_error(origin, "fields need 'name' and 'type'");
            std::string fname = jf["name"].get<std::string>();
            check_unique(field_names, fname, origin, "field");
            def.fields.emplace_back(fname, parse_type_field(jf["type"], origin));
        }
        schema.types.push_back(std::move(def));
    }

    // Field types must resolve here or to base types; recursion is unsupported.
    for (const auto& def : schema.types) {
        for (const auto& [fname, ftype] : def.fields) {
            if (ftype.kind != TypeExpr::Kind::Complex) continue;
            if (ftype.schema != schema.schema_id)
                format_error(origin, "field '" + def.name + "." + fname +
                                         "' references foreign schema '" + ftype.schema + "'");
            if (!schema.find_type(ftype.name))
                format_error(origin, "field '" + def.name + "." + fname +
                                         "' references unknown type '" + ftype.name + "'");
        }
    }
    // cycle scan (DFS over intra-schema references)
    enum class Mark { White, Grey, Black };
    std::map<std::string, Mark> marks;
    std::function<void(const TypeDef&)> visit = [&](const TypeDef& def) {
        marks[def.name] = Mark::Grey;
        for (const auto& [fname, ftype] : def.fields) {
            if (ftype.kind != TypeExpr::Kind::Complex) continue;
            Mark m = marks.count(ftype.name) ? marks[ftype.name] : Mark::White;
            if (m == Mark::Grey)
                format_error(origin, "recursive type '" + ftype.name + "' is unsupported");
            if (m == Mark::White) visit(*schema.find_type(ftype.name));
        }
        marks[def.name] = Mark::Black;
    };
    for (const auto& def : schema.types)
        if (!marks.count(def.name)) visit(def);
    return schema;
}

TypeSchema load_schema_text(const std::string& text, const std::string& origin) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) format_error(origin, "not valid JSON");
    return load_schema(doc, origin);
}

const OperationSig& lookup_operation(const ServiceCatalog& catalog, const std::string& service,
                                     const std::string& port, const std::string& op) {
    const ServiceDesc* svc = catalog.find_service(service);
    if (!svc)
        throw CompileError("UnknownService", {},
                           "no service '" + service + "' in catalog '" + catalog.description_id + "'");
    for (const auto& p : svc->ports) {
        if (p.name != port) continue;
        for (const auto& o : p.operations)
            if (o.name == op) return o;
        throw CompileError("UnknownOperation", {},
                           "no operation '" + op + "' on port '" + port + "'");
    }
    throw CompileError("UnknownPort", {}, "no port '" + port + "' on service '" + service + "'");
}

nlohmann::json catalog_to_json(const ServiceCatalog& c) {
    nlohmann::json services = nlohmann::json::array();
    for (const auto& s : c.services) {
        nlohmann::json ports = nlohmann::json::array();
        for (const auto& p : s.ports) {
            nlohmann::json ops = nlohmann::json::array();
            for (const auto& o : p.operations) {
                nlohmann::json inputs = nlohmann::json::array();
                for (const auto& [n, t] : o.inputs)
                    inputs.push_back({{"name", n}, {"type", type_to_string(t)}});
                ops.push_back({{"name", o.name},
                               {"inputs", inputs},
                               {"output", {{"type", type_to_string(o.output)}}}});
            }
            ports.push_back({{"name", p.name}, {"endpoint", p.endpoint}, {"operations", ops}});
        }
        services.push_back({{"name", s.name}, {"ports", ports}});
    }
    return {{"description", c.description_id}, {"services", services}};
}

}  // namespace dflow
