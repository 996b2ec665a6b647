#include "dflow/printer.hpp"

#include <charconv>

namespace dflow {

std::string render_scalar(const ScalarLit& s) {
    switch (s.type) {
        case BaseType::Boolean: return std::get<bool>(s.value) ? "true" : "false";
        case BaseType::String: {
            std::string out = "\"";
            for (char c : std::get<std::string>(s.value)) {
                if (c == '"' || c == '\\') out += '\\';
                out += c;
            }
            out += '"';
            return out;
        }
        case BaseType::Double: {
            char buf[32];
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(s.value));
            std::string out(buf, p);
            // keep a dot so the literal re-lexes as a double
            if (out.find('.') == std::string::npos && out.find('e') == std::string::npos)
                out += ".0";
            return out;
        }
        default: return std::to_string(std::get<std::int64_t>(s.value));
    }
}

std::string render_type(const TypeRef& t) {
    return t.is_base ? base_type_name(t.base) : t.schema_alias + ":" + t.type_name;
}

namespace {

void render_variables(std::string& out, const std::vector<TypedVar>& vars) {
    size_t i = 0;
    while (i < vars.size()) {
        size_t j = i + 1;
        while (j < vars.size() && vars[j].type.same(vars[i].type)) ++j;
        out += "    " + render_type(vars[i].type) + " ";
        for (size_t k = i; k < j; ++k) {
            if (k > i) out += ", ";
            out += vars[k].name;
        }
        out += '\n';
        i = j;
    }
}

std::string render_statement(const Statement& s) {
    auto targets = [&] {
        std::string out;
        for (size_t i = 0; i < s.targets.size(); ++i) {
            if (i) out += ", ";
            out += s.targets[i].display();
        }
        return out;
    };
    switch (s.kind) {
        case StatementKind::BareInvocation: return s.invocation.display();
        case StatementKind::FeedScalar: return render_scalar(s.scalar) + " -> " + targets();
        case StatementKind::FeedVariable: return s.var + " -> " + targets();
        case StatementKind::Retrieve: return s.invocation.display() + " -> " + s.var;
        case StatementKind::AssignScalar: return s.var + " = " + render_scalar(s.scalar);
        case StatementKind::AssignVar: return s.var + " = " + s.rhs_var;
        case StatementKind::AssignTuple: {
            std::string out = s.var + " = (";
            for (size_t i = 0; i < s.tuple.size(); ++i) {
                if (i) out += ", ";
                out += s.tuple[i].is_var ? s.tuple[i].var : render_scalar(s.tuple[i].scalar);
            }
            return out + ")";
        }
    }
    return "";
}

}  // namespace

std::string render(const WorkflowSpec& spec) {
    std::string out;
    for (const auto& d : spec.descriptions) out += "description " + d.name + " is " + d.url + "\n";
    if (!spec.descriptions.empty() && !spec.services.empty()) out += '\n';
    for (const auto& s : spec.services)
        out += "service " + s.name + " is " + s.description + "." + s.service + "\n";
    if (!spec.services.empty() && !spec.ports.empty()) out += '\n';
    for (const auto& p : spec.ports)
        out += "port " + p.name + " is " + p.service + "." + p.port + "\n";
    for (const auto& d : spec.schemas) out += "schema " + d.name + " is " + d.url + "\n";

    if (!out.empty()) out += '\n';
    out += "input:\n";
    render_variables(out, spec.inputs);
    out += "output:\n";
    render_variables(out, spec.outputs);

    if (!spec.statements.empty()) out += '\n';
    for (const auto& s : spec.statements) out += render_statement(s) + "\n";
    return out;
}

}  // namespace dflow
