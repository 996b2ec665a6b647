#include "dflow/value.hpp"

#include <array>
#include <charconv>
#include <map>

namespace dflow {

namespace {

const char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const std::vector<std::uint8_t>& data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 2 < data.size()) {
        std::uint32_t n = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out += kB64Alphabet[(n >> 18) & 63];
        out += kB64Alphabet[(n >> 12) & 63];
        out += kB64Alphabet[(n >> 6) & 63];
        out += kB64Alphabet[n & 63];
        i += 3;
    }
    if (i + 1 == data.size()) {
        std::uint32_t n = data[i] << 16;
        out += kB64Alphabet[(n >> 18) & 63];
        out += kB64Alphabet[(n >> 12) & 63];
        out += "==";
    } else if (i + 2 == data.size()) {
        std::uint32_t n = (data[i] << 16) | (data[i + 1] << 8);
        out += kB64Alphabet[(n >> 18) & 63];
        out += kB64Alphabet[(n >> 12) & 63];
        out += kB64Alphabet[(n >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> b64_decode(const std::string& text) {
    static const auto table = [] {
        std::array<int, 256> t;
        t.fill(-1);
        for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kB64Alphabet[i])] = i;
        return t;
    }();
    std::vector<std::uint8_t> out;
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        int v = table[static_cast<unsigned char>(c)];
        if (v < 0) throw CompileError("FormatError", {}, "invalid base64 payload");
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    return out;
}

std::string scalar_kind_name(BaseType t) { return base_type_name(t); }

std::string double_to_string(double d) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, p);
}

}  // namespace

Value Value::from_scalar(const ScalarLit& lit) {
    Value v;
    v.kind = Kind::Scalar;
    v.scalar_type = lit.type;
    v.scalar = lit.value;
    return v;
}

Value Value::of_int(std::int64_t x, BaseType t) {
    Value v;
    v.scalar_type = t;
    v.scalar = x;
    return v;
}

Value Value::of_double(double x, BaseType t) {
    Value v;
    v.scalar_type = t;
    v.scalar = x;
    return v;
}

Value Value::of_bool(bool x) {
    Value v;
    v.scalar_type = BaseType::Boolean;
    v.scalar = x;
    return v;
}

Value Value::of_string(std::string x) {
    Value v;
    v.scalar_type = BaseType::String;
    v.scalar = std::move(x);
    return v;
}

Value Value::of_decimal(std::string digits) {
    Value v;
    v.scalar_type = BaseType::Decimal;
    v.scalar = std::move(digits);
    return v;
}

Value Value::of_blob(std::vector<std::uint8_t> bytes) {
    Value v;
    v.kind = Kind::Blob;
    v.blob = std::move(bytes);
    return v;
}

Value Value::of_tuple(std::vector<Value> elems) {
    Value v;
    v.kind = Kind::Tuple;
    v.elems = std::move(elems);
    return v;
}

TypeExpr Value::runtime_type() const {
    switch (kind) {
        case Kind::Scalar: return TypeExpr::of(scalar_type);
        case Kind::Blob: return TypeExpr::any();
        case Kind::Record: return TypeExpr::complex(record_schema, record_type);
        case Kind::Tuple: {
            std::vector<TypeExpr> elems;
            elems.reserve(this->elems.size());
            for (const auto& e : this->elems) elems.push_back(e.runtime_type());
            return TypeExpr::tuple(std::move(elems));
        }
    }
    return TypeExpr::any();
}

std::uint64_t Value::payload_bytes() const {
    switch (kind) {
        case Kind::Blob: return blob.size();
        case Kind::Tuple: {
            std::uint64_t n = 0;
            for (const auto& e : elems) n += e.payload_bytes();
            return n;
        }
        case Kind::Record: {
            std::uint64_t n = 0;
            for (const auto& [k, v] : fields) n += v.payload_bytes();
            return n;
        }
        case Kind::Scalar:
            switch (scalar_type) {
                case BaseType::String:
                case BaseType::Decimal: return std::get<std::string>(scalar).size();
                case BaseType::Byte:
                case BaseType::Boolean: return 1;
                case BaseType::Short: return 2;
                case BaseType::Float: return 4;
                default: return 8;
            }
    }
    return 0;
}

std::string Value::display() const {
    switch (kind) {
        case Kind::Blob: return "blob:" + std::to_string(blob.size());
        case Kind::Tuple: {
            std::string out = "(";
            for (size_t i = 0; i < elems.size(); ++i) {
                if (i) out += ",";
                out += elems[i].display();
            }
            return out + ")";
        }
        case Kind::Record: {
            std::string out = record_schema + ":" + record_type + "{";
            for (size_t i = 0; i < fields.size(); ++i) {
                if (i) out += ",";
                out += fields[i].first + "=" + fields[i].second.display();
            }
            return out + "}";
        }
        case Kind::Scalar:
            switch (scalar_type) {
                case BaseType::Boolean: return std::get<bool>(scalar) ? "true" : "false";
                case BaseType::String: return std::get<std::string>(scalar);
                case BaseType::Decimal: return std::get<std::string>(scalar);
                case BaseType::Float:
                case BaseType::Double: return double_to_string(std::get<double>(scalar));
                default: return std::to_string(std::get<std::int64_t>(scalar));
            }
    }
    return "";
}

bool value_compatible(const Value& v, const TypeExpr& declared) {
    if (declared.is_any()) return true;
    switch (v.kind) {
        case Value::Kind::Blob: return false;  // blobs are `any` payloads only
        case Value::Kind::Scalar:
            return declared.kind == TypeExpr::Kind::Base && declared.base == v.scalar_type;
        case Value::Kind::Record:
            return declared.kind == TypeExpr::Kind::Complex &&
                   declared.schema == v.record_schema && declared.name == v.record_type;
        case Value::Kind::Tuple: {
            if (declared.kind != TypeExpr::Kind::Tuple) return false;
            if (declared.elems.size() != v.elems.size()) return false;
            for (size_t i = 0; i < v.elems.size(); ++i)
                if (!value_compatible(v.elems[i], declared.elems[i])) return false;
            return true;
        }
    }
    return false;
}

nlohmann::json value_to_json(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Blob:
            return {{"kind", "blob"}, {"b64", b64_encode(v.blob)}};
        case Value::Kind::Tuple: {
            nlohmann::json items = nlohmann::json::array();
            for (const auto& e : v.elems) items.push_back(value_to_json(e));
            return {{"kind", "tuple"}, {"items", items}};
        }
        case Value::Kind::Record: {
            nlohmann::json fields = nlohmann::json::array();
            for (const auto& [k, f] : v.fields)
                fields.push_back({{"name", k}, {"value", value_to_json(f)}});
            return {{"kind", "record"},
                    {"schema", v.record_schema},
                    {"type", v.record_type},
                    {"fields", fields}};
        }
        case Value::Kind::Scalar: {
            nlohmann::json j{{"kind", scalar_kind_name(v.scalar_type)}};
            switch (v.scalar_type) {
                case BaseType::Boolean: j["value"] = std::get<bool>(v.scalar); break;
                case BaseType::String:
                case BaseType::Decimal: j["value"] = std::get<std::string>(v.scalar); break;
                case BaseType::Float:
                case BaseType::Double: j["value"] = std::get<double>(v.scalar); break;
                default: j["value"] = std::get<std::int64_t>(v.scalar); break;
            }
            return j;
        }
    }
    return nullptr;
}

Value value_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw CompileError("FormatError", {}, "value JSON needs a 'kind'");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "blob") return Value::of_blob(b64_decode(j.at("b64").get<std::string>()));
    if (kind == "tuple") {
        std::vector<Value> elems;
        for (const auto& e : j.at("items")) elems.push_back(value_from_json(e));
        return Value::of_tuple(std::move(elems));
    }
    if (kind == "record") {
        Value v;
        v.kind = Value::Kind::Record;
        v.record_schema = j.value("schema", "");
        v.record_type = j.value("type", "");
        for (const auto& f : j.at("fields"))
            v.fields.emplace_back(f.at("name").get<std::string>(), value_from_json(f.at("value")));
        return v;
    }
    auto base = base_type_from_name(kind);
    if (!base || *base == BaseType::Any)
        throw CompileError("FormatError", {}, "unknown value kind '" + kind + "'");
    Value v;
    v.scalar_type = *base;
    const auto& val = j.at("value");
    switch (*base) {
        case BaseType::Boolean: v.scalar = val.get<bool>(); break;
        case BaseType::String:
        case BaseType::Decimal: v.scalar = val.get<std::string>(); break;
        case BaseType::Float:
        case BaseType::Double: v.scalar = val.get<double>(); break;
        default: v.scalar = val.get<std::int64_t>(); break;
    }
    return v;
}

std::string outputs_to_json(const std::map<std::string, Value>& outputs) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, v] : outputs) j[name] = value_to_json(v);
    return j.dump();
}

std::map<std::string, Value> outputs_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::map<std::string, Value> out;
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = value_from_json(it.value());
    return out;
}

}  // namespace dflow
