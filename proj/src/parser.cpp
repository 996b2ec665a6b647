#include "dflow/parser.hpp"

#include <charconv>
#include <set>

namespace dflow {

const char* base_type_name(BaseType t) {
    switch (t) {
        case BaseType::Any: return "any";
        case BaseType::Byte: return "byte";
        case BaseType::Boolean: return "boolean";
        case BaseType::String: return "string";
        case BaseType::Int: return "int";
        case BaseType::Float: return "float";
        case BaseType::Double: return "double";
        case BaseType::Decimal: return "decimal";
        case BaseType::Long: return "long";
        case BaseType::Short: return "short";
    }
    return "?";
}

std::optional<BaseType> base_type_from_name(std::string_view name) {
    if (name == "any") return BaseType::Any;
    if (name == "byte") return BaseType::Byte;
    if (name == "boolean") return BaseType::Boolean;
    if (name == "string") return BaseType::String;
    if (name == "int") return BaseType::Int;
    if (name == "float") return BaseType::Float;
    if (name == "double") return BaseType::Double;
    if (name == "decimal") return BaseType::Decimal;
    if (name == "long") return BaseType::Long;
    if (name == "short") return BaseType::Short;
    return std::nullopt;
}

bool Statement::same(const Statement& o) const {
    if (kind != o.kind || var != o.var || rhs_var != o.rhs_var) return false;
    if (!invocation.same(o.invocation) || !scalar.same(o.scalar)) return false;
    if (targets.size() != o.targets.size() || tuple.size() != o.tuple.size()) return false;
    for (size_t i = 0; i < targets.size(); ++i)
        if (!targets[i].same(o.targets[i])) return false;
    for (size_t i = 0; i < tuple.size(); ++i)
        if (!tuple[i].same(o.tuple[i])) return false;
    return true;
}

bool WorkflowSpec::same(const WorkflowSpec& o) const {
    auto all_same = [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i)
            if (!a[i].same(b[i])) return false;
        return true;
    };
    return all_same(descriptions, o.descriptions) && all_same(services, o.services) &&
           all_same(ports, o.ports) && all_same(schemas, o.schemas) &&
           all_same(inputs, o.inputs) && all_same(outputs, o.outputs) &&
           all_same(statements, o.statements);
}

namespace {

ScalarLit decode_scalar(const Token& t) {
    ScalarLit s;
    s.pos = t.pos;
    const std::string& x = t.lexeme;
    if (!x.empty() && x[0] == '"') {
        s.type = BaseType::String;
        s.value = x.substr(1);
    } else if (x == "true" || x == "false") {
        s.type = BaseType::Boolean;
        s.value = (x == "true");
    } else if (x.find('.') != std::string::npos) {
        s.type = BaseType::Double;
        s.value = std::stod(x);
    } else {
        s.type = BaseType::Int;
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(x.data(), x.data() + x.size(), v);
        if (ec != std::errc{})
            throw CompileError("LexError", t.pos, "integer literal out of range: " + x);
        s.value = v;
    }
    return s;
}

class Parser {
  public:
    explicit Parser(const std::vector<Token>& toks) : toks_(toks) {
        for (const auto& t : toks_)
            if (t.kind == TokenKind::Identifier) used_names_.insert(t.lexeme);
    }

    WorkflowSpec run() {
        parse_definitions();
        parse_interface();
        parse_dataflow();
        return std::move(spec_);
    }

  private:
    const std::vector<Token>& toks_;
    size_t i_ = 0;
    WorkflowSpec spec_;
    std::set<std::string> used_names_;
    int tmp_counter_ = 0;

    const Token& peek(size_t ahead = 0) const {
        size_t j = i_ + ahead;
        return j < toks_.size() ? toks_[j] : toks_.back();
    }
    const Token& advance() { return toks_[std::min(i_++, toks_.size() - 1)]; }
    bool at(TokenKind k) const { return peek().kind == k; }
    bool at_keyword(std::string_view kw) const {
        return at(TokenKind::Keyword) && peek().lexeme == kw;
    }

    [[noreturn]] void fail(const std::string& expected) {
        const Token& t = peek();
        std::string found = t.kind == TokenKind::Keyword || t.kind == TokenKind::Identifier
                                ? "'" + t.lexeme + "'"
                                : token_kind_name(t.kind);
        throw CompileError("ParseError", t.pos, "expected " + expected + ", found " + found);
    }

    Token expect(TokenKind k, const std::string& what) {
        if (!at(k)) fail(what);
        return advance();
    }

    void skip_newlines() {
        while (at(TokenKind::Newline)) advance();
    }

    void end_of_line() {
        if (at(TokenKind::Eof)) return;
        if (!at(TokenKind::Newline)) fail("end of line");
        advance();
    }

    std::string fresh_tmp() {
        std::string name;
        do {
            name = "tmp" + std::to_string(++tmp_counter_);
        } while (used_names_.count(name));
        used_names_.insert(name);
        return name;
    }

    // --- definitions section: description/service/port lines, then schemas ---

    void parse_definitions() {
        bool seen_schema = false;
        while (true) {
            skip_newlines();
            if (at_keyword("description") || at_keyword("service") || at_keyword("port")) {
                if (seen_schema) fail("'schema' or 'input:' (definitions precede schemas)");
                const std::string what = peek().lexeme;
                if (what == "description") parse_description();
                else if (what == "service") parse_service();
                else parse_port();
            } else if (at_keyword("schema")) {
                seen_schema = true;
                parse_schema();
            } else {
                return;
            }
        }
    }

    void parse_description() {
        advance();
        Definition d;
        d.pos = peek().pos;
        d.name = expect(TokenKind::Identifier, "description name").lexeme;
        if (!at_keyword("is")) fail("'is'");
        advance();
        if (!at(TokenKind::ScalarLiteral)) fail("URL");
        d.url = advance().lexeme;
        end_of_line();
        spec_.descriptions.push_back(std::move(d));
    }

    void parse_schema() {
        advance();
        Definition d;
        d.pos = peek().pos;
        d.name = expect(TokenKind::Identifier, "schema name").lexeme;
        if (!at_keyword("is")) fail("'is'");
        advance();
        if (!at(TokenKind::ScalarLiteral)) fail("URL");
        d.url = advance().lexeme;
        end_of_line();
        spec_.schemas.push_back(std::move(d));
    }

    void parse_service() {
        advance();
        ServiceDef s;
        s.pos = peek().pos;
        s.name = expect(TokenKind::Identifier, "service name").lexeme;
        if (!at_keyword("is")) fail("'is'");
        advance();
        s.description = expect(TokenKind::Identifier, "description reference").lexeme;
        expect(TokenKind::Dot, "'.'");
        s.service = expect(TokenKind::Identifier, "service name in catalog").lexeme;
        end_of_line();
        spec_.services.push_back(std::move(s));
    }

    void parse_port() {
        advance();
        PortDef p;
        p.pos = peek().pos;
        p.name = expect(TokenKind::Identifier, "port name").lexeme;
        if (!at_keyword("is")) fail("'is'");
        advance();
        p.service = expect(TokenKind::Identifier, "service reference").lexeme;
        expect(TokenKind::Dot, "'.'");
        p.port = expect(TokenKind::Identifier, "port name in catalog").lexeme;
        end_of_line();
        spec_.ports.push_back(std::move(p));
    }

    // --- interface: `input:` block then `output:` block ---

    void parse_interface() {
        skip_newlines();
        if (!at_keyword("input")) fail("'input:'");
        advance();
        expect(TokenKind::Colon, "':'");
        end_of_line();
        parse_variable_block(spec_.inputs, "output");
        skip_newlines();
        if (!at_keyword("output")) fail("'output:'");
        advance();
        expect(TokenKind::Colon, "':'");
        end_of_line();
        parse_variable_block(spec_.outputs, "");
    }

    bool looks_like_declaration() const {
        if (at(TokenKind::Keyword)) return base_type_from_name(peek().lexeme).has_value();
        // `alias:TypeName name` — identifier followed by colon
        return at(TokenKind::Identifier) && peek(1).kind == TokenKind::Colon;
    }

    void parse_variable_block(std::vector<TypedVar>& into, const std::string& until_kw) {
        while (true) {
            skip_newlines();
            if (!until_kw.empty() && at_keyword(until_kw)) return;
            if (!looks_like_declaration()) return;
            TypeRef type = parse_type();
            while (true) {
                TypedVar v;
                v.type = type;
                v.pos = peek().pos;
                v.name = expect(TokenKind::Identifier, "variable name").lexeme;
                into.push_back(v);
                if (at(TokenKind::Comma)) {
                    advance();
                    continue;
                }
                break;
            }
            end_of_line();
        }
    }

    TypeRef parse_type() {
        TypeRef t;
        t.pos = peek().pos;
        if (at(TokenKind::Keyword)) {
            auto base = base_type_from_name(peek().lexeme);
            if (!base) fail("type");
            advance();
            t.is_base = true;
            t.base = *base;
            return t;
        }
        t.is_base = false;
        t.schema_alias = expect(TokenKind::Identifier, "type").lexeme;
        expect(TokenKind::Colon, "':'");
        t.type_name = expect(TokenKind::Identifier, "type name").lexeme;
        return t;
    }

    // --- dataflow statements ---

    void parse_dataflow() {
        while (true) {
            skip_newlines();
            if (at(TokenKind::Eof)) return;
            parse_statement();
        }
    }

    InvocationRef parse_invocation() {
        InvocationRef inv;
        inv.pos = peek().pos;
        inv.port = expect(TokenKind::Identifier, "invocation").lexeme;
        expect(TokenKind::Dot, "'.'");
        inv.op = expect(TokenKind::Identifier, "operation name").lexeme;
        if (at(TokenKind::Dot)) {
            advance();
            inv.param = expect(TokenKind::Identifier, "parameter name").lexeme;
        }
        return inv;
    }

    std::vector<InvocationRef> parse_invocation_list() {
        std::vector<InvocationRef> list;
        list.push_back(parse_invocation());
        while (at(TokenKind::Comma)) {
            advance();
            list.push_back(parse_invocation());
        }
        return list;
    }

    void parse_statement() {
        SourcePos at = peek().pos;
        if (at_token_scalar()) {
            Statement s;
            s.kind = StatementKind::FeedScalar;
            s.pos = at;
            s.scalar = decode_scalar(advance());
            if (!this->at(TokenKind::Arrow)) fail("'->'");
            advance();
            s.targets = parse_invocation_list();
            end_of_line();
            spec_.statements.push_back(std::move(s));
            return;
        }
        if (!this->at(TokenKind::Identifier)) fail("statement");

        if (peek(1).kind == TokenKind::Dot) {
            // starts with an invocation: bare, retrieve, or composition
            InvocationRef inv = parse_invocation();
            if (this->at(TokenKind::Newline) || this->at(TokenKind::Eof)) {
                if (!inv.param.empty())
                    throw CompileError("ParseError", inv.pos,
                                       "a bare invocation cannot carry a parameter suffix");
                Statement s;
                s.kind = StatementKind::BareInvocation;
                s.pos = at;
                s.invocation = inv;
                end_of_line();
                spec_.statements.push_back(std::move(s));
                return;
            }
            if (!this->at(TokenKind::Arrow)) fail("'->' or end of line");
            advance();
            if (!inv.param.empty())
                throw CompileError("ParseError", inv.pos,
                                   "a parameter suffix is only valid on a feed target");
            if (this->at(TokenKind::Identifier) && peek(1).kind != TokenKind::Dot) {
                // retrieve into a variable; a list of variables is not a statement
                Statement s;
                s.kind = StatementKind::Retrieve;
                s.pos = at;
                s.invocation = inv;
                s.var = advance().lexeme;
                end_of_line();
                spec_.statements.push_back(std::move(s));
                return;
            }
            if (!this->at(TokenKind::Identifier)) fail("variable or invocation");
            // composition: desugar through a synthetic variable
            std::vector<InvocationRef> targets = parse_invocation_list();
            end_of_line();
            std::string tmp = fresh_tmp();
            Statement r;
            r.kind = StatementKind::Retrieve;
            r.pos = at;
            r.invocation = inv;
            r.var = tmp;
            r.synthesized = true;
            Statement f;
            f.kind = StatementKind::FeedVariable;
            f.pos = at;
            f.var = tmp;
            f.targets = std::move(targets);
            f.synthesized = true;
            spec_.statements.push_back(std::move(r));
            spec_.statements.push_back(std::move(f));
            return;
        }

        // starts with a plain identifier: feed or assignment
        std::string name = advance().lexeme;
        if (this->at(TokenKind::Arrow)) {
            advance();
            Statement s;
            s.kind = StatementKind::FeedVariable;
            s.pos = at;
            s.var = name;
            if (!this->at(TokenKind::Identifier) || peek(1).kind != TokenKind::Dot)
                fail("invocation");
            s.targets = parse_invocation_list();
            end_of_line();
            spec_.statements.push_back(std::move(s));
            return;
        }
        if (this->at(TokenKind::Equals)) {
            advance();
            parse_assignment(name, at);
            return;
        }
        fail("'->' or '='");
    }

    bool at_token_scalar() const { return at(TokenKind::ScalarLiteral); }

    void parse_assignment(std::string target, SourcePos at) {
        Statement s;
        s.pos = at;
        s.var = std::move(target);
        if (at_token_scalar()) {
            s.kind = StatementKind::AssignScalar;
            s.scalar = decode_scalar(advance());
        } else if (this->at(TokenKind::Identifier)) {
            s.kind = StatementKind::AssignVar;
            s.rhs_var = advance().lexeme;
        } else if (this->at(TokenKind::LParen)) {
            advance();
            s.kind = StatementKind::AssignTuple;
            while (true) {
                TupleElem e;
                if (at_token_scalar()) {
                    e.is_var = false;
                    e.scalar = decode_scalar(advance());
                } else if (this->at(TokenKind::Identifier)) {
                    e.is_var = true;
                    e.var = advance().lexeme;
                } else {
                    fail("variable or scalar");
                }
                s.tuple.push_back(std::move(e));
                if (this->at(TokenKind::Comma)) {
                    advance();
                    continue;
                }
                break;
            }
            expect(TokenKind::RParen, "')'");
        } else {
            fail("scalar, variable, or tuple");
        }
        end_of_line();
        spec_.statements.push_back(std::move(s));
    }
};

}  // namespace

WorkflowSpec parse(const std::vector<Token>& tokens) { return Parser(tokens).run(); }

}  // namespace dflow
