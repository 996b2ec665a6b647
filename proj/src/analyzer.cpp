#include "dflow/analyzer.hpp"

#include <set>

namespace dflow {

const VarInfo& ResolvedWorkflow::canonical_def(const std::string& var) const {
    const VarInfo* info = &variables.at(var);
    while (info->def == VarInfo::Def::AssignVar)
        info = &variables.at(spec.statements[info->def_stmt].rhs_var);
    return *info;
}

namespace {

class Resolver {
  public:
    Resolver(const WorkflowSpec& spec, const CatalogSet& catalogs)
        : catalogs_(catalogs) {
        out_.spec = spec;
    }

    AnalysisResult run() {
        resolve_definitions();
        resolve_interface();
        resolve_statements();
        AnalysisResult res;
        res.diagnostics = std::move(diags_);
        if (!fatal_) res.workflow = std::move(out_);
        return res;
    }

  private:
    const CatalogSet& catalogs_;
    ResolvedWorkflow out_;
    std::vector<Diagnostic> diags_;
    bool fatal_ = false;

    std::map<std::string, const ServiceCatalog*> descriptions_;  // alias -> doc
    std::map<std::string, const TypeSchema*> schema_aliases_;
    std::map<std::string, std::pair<std::string, std::string>> services_;  // alias -> (desc, name)
    struct PortInfo {
        std::string endpoint;
        const ServiceCatalog* catalog;
        std::string service, port;
    };
    std::map<std::string, PortInfo> ports_;

    void error(const std::string& code, SourcePos pos, const std::string& msg) {
        diags_.push_back({Severity::Error, code, pos, msg});
        fatal_ = true;
    }
    void warn(const std::string& code, SourcePos pos, const std::string& msg) {
        diags_.push_back({Severity::Warning, code, pos, msg});
    }

    void resolve_definitions() {
        const auto& spec = out_.spec;
        for (const auto& d : spec.descriptions) {
            auto it = catalogs_.catalogs.find(d.url);
            if (it == catalogs_.catalogs.end()) {
                error("UnknownDescription", d.pos,
                      "no catalog loaded for '" + d.url + "' (description " + d.name + ")");
                continue;
            }
            descriptions_[d.name] = &it->second;
        }
        for (const auto& d : spec.schemas) {
            auto it = catalogs_.schemas.find(d.url);
            if (it == catalogs_.schemas.end()) {
                error("UnknownSchema", d.pos,
                      "no schema loaded for '" + d.url + "' (schema " + d.name + ")");
                continue;
            }
            schema_aliases_[d.name] = &it->second;
        }
        for (const auto& s : spec.services) {
            auto it = descriptions_.find(s.description);
            if (it == descriptions_.end()) {
                error("UnknownDescription", s.pos,
                      "service " + s.name + " references undeclared description '" +
                          s.description + "'");
                continue;
            }
            if (!it->second->find_service(s.service)) {
                error("UnknownService", s.pos,
                      "catalog '" + it->second->description_id + "' has no service '" +
                          s.service + "'");
                continue;
            }
            services_[s.name] = {s.description, s.service};
        }
        for (const auto& p : spec.ports) {
            auto it = services_.find(p.service);
            if (it == services_.end()) {
                error("UnknownService", p.pos,
                      "port " + p.name + " references undeclared service '" + p.service + "'");
                continue;
            }
            const ServiceCatalog* cat = descriptions_.at(it->second.first);
            const ServiceDesc* svc = cat->find_service(it->second.second);
            const PortDesc* found = nullptr;
            for (const auto& port : svc->ports)
                if (port.name == p.port) found = &port;
            if (!found) {
                error("UnknownPort", p.pos,
                      "service '" + svc->name + "' has no port '" + p.port + "'");
                continue;
            }
            ports_[p.name] = {found->endpoint, cat, svc->name, found->name};
        }
    }

    std::optional<TypeExpr> canonical_type(const TypeRef& t) {
        if (t.is_base) return TypeExpr::of(t.base);
        auto it = schema_aliases_.find(t.schema_alias);
        if (it == schema_aliases_.end()) {
            error("UnknownSchema", t.pos, "undeclared schema '" + t.schema_alias + "'");
            return std::nullopt;
        }
        if (!it->second->find_type(t.type_name)) {
            error("UnknownType", t.pos,
                  "schema '" + it->second->schema_id + "' has no type '" + t.type_name + "'");
            return std::nullopt;
        }
        return TypeExpr::complex(it->second->schema_id, t.type_name);
    }

    void define_var(const std::string& name, TypeExpr type, VarInfo::Def def, int stmt,
                    SourcePos pos) {
        auto [it, fresh] = out_.variables.try_emplace(name);
        VarInfo& v = it->second;
        if (fresh) {
            v.name = name;
            v.type = std::move(type);
            v.def = def;
            v.def_stmt = stmt;
        }
        v.def_sites.push_back(pos);  // extra sites surface as DoubleAssignment later
    }

    void resolve_interface() {
        for (const auto& in : out_.spec.inputs) {
            auto type = canonical_type(in.type);
            if (!type) continue;
            out_.inputs.emplace_back(in.name, *type);
            define_var(in.name, *type, VarInfo::Def::Input, -1, in.pos);
        }
        for (const auto& o : out_.spec.outputs) {
            auto type = canonical_type(o.type);
            if (!type) continue;
            out_.outputs.emplace_back(o.name, *type);
        }
    }

    // Registers the invocation node for `inv`, or reports why it cannot exist.
    void resolve_invocation(const InvocationRef& inv) {
        std::string key = inv.port + "." + inv.op;
        if (out_.invocations.count(key)) return;
        auto it = ports_.find(inv.port);
        if (it == ports_.end()) {
            error("UnknownPort", inv.pos, "undeclared port '" + inv.port + "'");
            return;
        }
        try {
            const OperationSig& sig =
                lookup_operation(*it->second.catalog, it->second.service, it->second.port, inv.op);
            ResolvedInvocation r;
            r.port = inv.port;
            r.op = inv.op;
            r.endpoint = it->second.endpoint;
            r.sig = sig;
            r.first_pos = inv.pos;
            out_.invocations.emplace(key, std::move(r));
        } catch (const CompileError& e) {
            error(e.diagnostic().code, inv.pos, e.diagnostic().message);
        }
    }

    bool check_use(const std::string& var, SourcePos pos) {
        if (out_.variables.count(var)) return true;
        error("UndefinedVariable", pos, "variable '" + var + "' used before definition");
        return false;
    }

    void resolve_statements() {
        const auto& stmts = out_.spec.statements;
        for (int i = 0; i < static_cast<int>(stmts.size()); ++i) {
            const Statement& s = stmts[i];
            switch (s.kind) {
                case StatementKind::BareInvocation:
                    resolve_invocation(s.invocation);
                    break;
                case StatementKind::FeedScalar:
                    for (const auto& t : s.targets) resolve_invocation(t);
                    break;
                case StatementKind::FeedVariable:
                    check_use(s.var, s.pos);
                    for (const auto& t : s.targets) resolve_invocation(t);
                    break;
                case StatementKind::Retrieve: {
                    resolve_invocation(s.invocation);
                    auto it = out_.invocations.find(s.invocation.port + "." + s.invocation.op);
                    TypeExpr t = it != out_.invocations.end() ? it->second.sig.output
                                                              : TypeExpr::any();
                    define_var(s.var, std::move(t), VarInfo::Def::Retrieve, i, s.pos);
                    break;
                }
                case StatementKind::AssignScalar:
                    define_var(s.var, TypeExpr::of(s.scalar.type), VarInfo::Def::AssignScalar, i,
                               s.pos);
                    break;
                case StatementKind::AssignVar:
                    if (check_use(s.rhs_var, s.pos))
                        define_var(s.var, out_.variables.at(s.rhs_var).type,
                                   VarInfo::Def::AssignVar, i, s.pos);
                    break;
                case StatementKind::AssignTuple: {
                    std::vector<TypeExpr> elems;
                    bool all_known = true;
                    for (const auto& e : s.tuple) {
                        if (e.is_var) {
                            if (check_use(e.var, s.pos))
                                elems.push_back(out_.variables.at(e.var).type);
                            else
                                all_known = false;
                        } else {
                            elems.push_back(TypeExpr::of(e.scalar.type));
                        }
                    }
                    if (all_known)
                        define_var(s.var, TypeExpr::tuple(std::move(elems)),
                                   VarInfo::Def::AssignTuple, i, s.pos);
                    break;
                }
            }
        }
    }
};

class TypeChecker {
  public:
    explicit TypeChecker(ResolvedWorkflow& w) : w_(w) {}

    std::vector<Diagnostic> run() {
        check_double_assignment();
        check_feeds();
        check_slot_coverage();
        check_outputs();
        warn_unconsumed();
        if (!has_errors(diags_)) w_.bindings = std::move(bindings_);
        return std::move(diags_);
    }

  private:
    ResolvedWorkflow& w_;
    std::vector<Diagnostic> diags_;
    std::vector<ParamBinding> bindings_;
    std::map<std::pair<std::string, int>, int> slot_fills_;  // (inv key, param) -> count

    void error(const std::string& code, SourcePos pos, const std::string& msg) {
        diags_.push_back({Severity::Error, code, pos, msg});
    }

    void check_double_assignment() {
        for (const auto& [name, info] : w_.variables) {
            if (info.def_sites.size() <= 1) continue;
            error("DoubleAssignment", info.def_sites[1],
                  "variable '" + name + "' already has a definition (single assignment)");
        }
        std::set<std::string> seen;
        for (const auto& o : w_.spec.outputs)
            if (!seen.insert(o.name).second)
                error("DoubleAssignment", o.pos, "output '" + o.name + "' declared twice");
    }

    void bind(int stmt, const ResolvedInvocation& inv, int param, const Statement& s,
              bool scalar_src, const TypeExpr& src_type, int tuple_elem) {
        auto key = std::make_pair(inv.key(), param);
        if (++slot_fills_[key] > 1) {
            error("DoubleAssignment", s.pos,
                  "parameter '" + inv.sig.inputs[param].first + "' of " + inv.key() +
                      " is fed more than once");
            return;
        }
        const TypeExpr& want = inv.sig.inputs[param].second;
        if (!compatible(src_type, want)) {
            error("TypeMismatch", s.pos,
                  "cannot feed " + type_display(src_type) + " into parameter '" +
                      inv.sig.inputs[param].first + "' of " + inv.key() + " (expects " +
                      type_display(want) + ")");
            return;
        }
        ParamBinding b;
        b.stmt = stmt;
        b.inv_key = inv.key();
        b.param_index = param;
        b.src_is_scalar = scalar_src;
        if (scalar_src) b.scalar = s.scalar;
        else b.src_var = s.var;
        b.tuple_elem = tuple_elem;
        bindings_.push_back(std::move(b));
    }

    void feed_one(int stmt, const Statement& s, const InvocationRef& target, bool scalar_src,
                  const TypeExpr& src_type) {
        auto it = w_.invocations.find(target.port + "." + target.op);
        if (it == w_.invocations.end()) return;  // resolution already failed
        const ResolvedInvocation& inv = it->second;
        if (!target.param.empty()) {
            int idx = inv.sig.param_index(target.param);
            if (idx < 0) {
                error("UnknownParameter", target.pos,
                      inv.key() + " has no parameter '" + target.param + "'");
                return;
            }
            bind(stmt, inv, idx, s, scalar_src, src_type, -1);
            return;
        }
        if (!scalar_src && src_type.kind == TypeExpr::Kind::Tuple) {
            // A single compatible parameter (in practice: `any`) receives the
            // tuple as one value; otherwise elements bind positionally.
            if (inv.sig.inputs.size() == 1 && compatible(src_type, inv.sig.inputs[0].second)) {
                bind(stmt, inv, 0, s, false, src_type, -1);
                return;
            }
            if (src_type.elems.size() != inv.sig.inputs.size()) {
                error("ArityMismatch", s.pos,
                      "tuple of " + std::to_string(src_type.elems.size()) + " fed to " +
                          inv.key() + " which takes " + std::to_string(inv.sig.inputs.size()) +
                          " parameter(s)");
                return;
            }
            for (size_t k = 0; k < src_type.elems.size(); ++k)
                bind(stmt, inv, static_cast<int>(k), s, false, src_type.elems[k],
                     static_cast<int>(k));
            return;
        }
        if (inv.sig.inputs.size() != 1) {
            error("ArityMismatch", s.pos,
                  inv.key() + " takes " + std::to_string(inv.sig.inputs.size()) +
                      " parameter(s); feed one value via '.param' routing or a matching tuple");
            return;
        }
        bind(stmt, inv, 0, s, scalar_src, src_type, -1);
    }

    void check_feeds() {
        const auto& stmts = w_.spec.statements;
        for (int i = 0; i < static_cast<int>(stmts.size()); ++i) {
            const Statement& s = stmts[i];
            if (s.kind == StatementKind::FeedScalar) {
                for (const auto& t : s.targets)
                    feed_one(i, s, t, true, TypeExpr::of(s.scalar.type));
            } else if (s.kind == StatementKind::FeedVariable) {
                auto it = w_.variables.find(s.var);
                if (it == w_.variables.end()) continue;
                for (const auto& t : s.targets) feed_one(i, s, t, false, it->second.type);
            }
        }
    }

    void check_slot_coverage() {
        for (const auto& [key, inv] : w_.invocations) {
            std::string missing;
            for (size_t p = 0; p < inv.sig.inputs.size(); ++p) {
                if (slot_fills_.count({key, static_cast<int>(p)})) continue;
                if (!missing.empty()) missing += ", ";
                missing += inv.sig.inputs[p].first;
            }
            if (!missing.empty())
                error("ArityMismatch", inv.first_pos,
                      key + " has unbound parameter(s): " + missing);
        }
    }

    void check_outputs() {
        for (const auto& [name, declared] : w_.outputs) {
            auto it = w_.variables.find(name);
            if (it == w_.variables.end()) {
                SourcePos pos;
                for (const auto& o : w_.spec.outputs)
                    if (o.name == name) pos = o.pos;
                error("UnboundOutput", pos,
                      "output '" + name + "' is never produced by the dataflow");
                continue;
            }
            if (!compatible(it->second.type, declared)) {
                error("TypeMismatch", it->second.def_sites.front(),
                      "output '" + name + "' is declared " + type_display(declared) +
                          " but defined as " + type_display(it->second.type));
            }
        }
    }

    void warn_unconsumed() {
        std::set<std::string> consumed;
        for (const auto& s : w_.spec.statements)
            if (s.kind == StatementKind::Retrieve)
                consumed.insert(s.invocation.port + "." + s.invocation.op);
        for (const auto& [key, inv] : w_.invocations) {
            if (consumed.count(key)) continue;
            diags_.push_back({Severity::Warning, "UnconsumedResult", inv.first_pos,
                              "result of " + key + " is not consumed (node still executes)"});
        }
    }
};

}  // namespace

AnalysisResult resolve(const WorkflowSpec& spec, const CatalogSet& catalogs) {
    return Resolver(spec, catalogs).run();
}

std::vector<Diagnostic> check_types(ResolvedWorkflow& resolved) {
    return TypeChecker(resolved).run();
}

}  // namespace dflow
