#include "dflow/lexer.hpp"

#include <cctype>

namespace dflow {

const char* token_kind_name(TokenKind k) {
    switch (k) {
        case TokenKind::Keyword: return "keyword";
        case TokenKind::Identifier: return "identifier";
        case TokenKind::ScalarLiteral: return "scalar literal";
        case TokenKind::Arrow: return "'->'";
        case TokenKind::Dot: return "'.'";
        case TokenKind::Comma: return "','";
        case TokenKind::Colon: return "':'";
        case TokenKind::Equals: return "'='";
        case TokenKind::LParen: return "'('";
        case TokenKind::RParen: return "')'";
        case TokenKind::Newline: return "end of line";
        case TokenKind::Eof: return "end of input";
    }
    return "?";
}

namespace {

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        while (!at_end()) lex_line();
        emit(TokenKind::Eof, "");
        return std::move(out_);
    }

  private:
    std::string_view src_;
    size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
    std::vector<Token> out_;

    bool at_end() const { return i_ >= src_.size(); }
    char peek(size_t ahead = 0) const {
        return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
    }
    char advance() {
        char c = src_[i_++];
        ++col_;
        return c;
    }

    void emit(TokenKind k, std::string lexeme, SourcePos at = {}) {
        if (at.line == 0) at = {line_, col_};
        out_.push_back(Token{k, std::move(lexeme), at});
    }

    [[noreturn]] void fail(SourcePos at, const std::string& what) {
        throw CompileError("LexError", at, what);
    }

    void newline() {
        if (peek() == '\r' && peek(1) == '\n') advance();
        advance();
        emit(TokenKind::Newline, "", {line_, col_ - 1});
        ++line_;
        col_ = 1;
    }

    void skip_blanks() {
        while (peek() == ' ' || peek() == '\t') advance();
    }

    // Lexes one physical line. Definition lines starting with `description`
    // or `schema` switch to raw-URL capture after their `is`.
    void lex_line() {
        bool raw_after_is = false;
        bool line_has_tokens = false;
        while (!at_end()) {
            skip_blanks();
            char c = peek();
            if (c == '\0') break;
            if (c == '\n' || c == '\r') {
                newline();
                return;
            }
            if (c == '#') {  // comment to end of line
                while (!at_end() && peek() != '\n' && peek() != '\r') advance();
                continue;
            }
            SourcePos at{line_, col_};
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::string word;
                while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')
                    word += advance();
                if (word == "true" || word == "false") {
                    emit(TokenKind::ScalarLiteral, word, at);
                } else if (is_keyword(word)) {
                    if (!line_has_tokens && (word == "description" || word == "schema"))
                        raw_after_is = true;
                    if (raw_after_is && word == "is" && line_has_tokens) {
                        emit(TokenKind::Keyword, word, at);
                        lex_raw_remainder();
                        line_has_tokens = true;
                        continue;
                    }
                    emit(TokenKind::Keyword, word, at);
                } else {
                    emit(TokenKind::Identifier, word, at);
                }
                line_has_tokens = true;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string num;
                while (std::isdigit(static_cast<unsigned char>(peek()))) num += advance();
                // A dot is part of the number only when digits follow, so
                // `1.x` stays [1][.][x] and fails in the parser instead.
                if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                    num += advance();
                    while (std::isdigit(static_cast<unsigned char>(peek()))) num += advance();
                }
                emit(TokenKind::ScalarLiteral, num, at);
                line_has_tokens = true;
                continue;
            }
            switch (c) {
                case '"': {
                    advance();
                    std::string text;
                    while (true) {
                        if (at_end() || peek() == '\n' || peek() == '\r')
                            fail(at, "unterminated string literal");
                        char d = advance();
                        if (d == '"') break;
                        if (d == '\\' && peek() == '"') {
                            text += '"';
                            advance();
                        } else if (d == '\\' && peek() == '\\') {
                            text += '\\';
                            advance();
                        } else {
                            text += d;
                        }
                    }
                    // Mark decoded strings so the parser can tell `"5"` from 5.
                    emit(TokenKind::ScalarLiteral, "\"" + text, at);
                    line_has_tokens = true;
                    continue;
                }
                case '-':
                    if (peek(1) == '>') {
                        advance();
                        advance();
                        emit(TokenKind::Arrow, "->", at);
                        line_has_tokens = true;
                        continue;
                    }
                    fail(at, "stray '-' (did you mean '->'?)");
                case '.': advance(); emit(TokenKind::Dot, ".", at); break;
                case ',': advance(); emit(TokenKind::Comma, ",", at); break;
                case ':': advance(); emit(TokenKind::Colon, ":", at); break;
                case '=': advance(); emit(TokenKind::Equals, "=", at); break;
                case '(': advance(); emit(TokenKind::LParen, "(", at); break;
                case ')': advance(); emit(TokenKind::RParen, ")", at); break;
                default:
                    fail(at, std::string("unexpected character '") + c + "'");
            }
            line_has_tokens = true;
        }
    }

    // Everything to end of line, trimmed, as one literal. Used for URLs, which
    // may contain ':', '/', '#' and other characters with no meaning here.
    void lex_raw_remainder() {
        skip_blanks();
        SourcePos at{line_, col_};
        std::string text;
        while (!at_end() && peek() != '\n' && peek() != '\r') text += advance();
        while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.pop_back();
        if (!text.empty()) emit(TokenKind::ScalarLiteral, text, at);
    }
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace dflow
