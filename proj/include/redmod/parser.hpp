#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "redmod/context.hpp"

namespace redmod {

namespace detail {

struct Token {
    enum class Kind { number, ident, op, lparen, rparen, lbracket, rbracket, comma, end };
    Kind kind;
    std::string text;
    std::size_t pos;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
        std::size_t at = i_;
        if (i_ >= src_.size()) return {Token::Kind::end, "", at};
        char c = src_[i_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i_;
            while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
            Token t{Token::Kind::number, src_.substr(i_, j - i_), at};
            i_ = j;
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
                ++j;
            Token t{Token::Kind::ident, src_.substr(i_, j - i_), at};
            i_ = j;
            return t;
        }
        ++i_;
        switch (c) {
            case '(': return {Token::Kind::lparen, "(", at};
            case ')': return {Token::Kind::rparen, ")", at};
            case '[': return {Token::Kind::lbracket, "[", at};
            case ']': return {Token::Kind::rbracket, "]", at};
            case ',': return {Token::Kind::comma, ",", at};
            case '+': case '-': case '*': case '/': case '^':
                return {Token::Kind::op, std::string(1, c), at};
        }
        throw syntax_error("unexpected character '" + std::string(1, c) + "'", at);
    }

private:
    const std::string& src_;
    std::size_t i_ = 0;
};

class Parser {
public:
    Parser(const std::string& src, const JetContext& ctx) : ctx_(ctx), lex_(src) { advance(); }

    Expr parse() {
        Expr e = sum();
        if (tok_.kind != Token::Kind::end) throw syntax_error("trailing input", tok_.pos);
        return e;
    }

private:
    void advance() { tok_ = lex_.next(); }
    bool is_op(const char* s) const { return tok_.kind == Token::Kind::op && tok_.text == s; }

    Expr sum() {
        Expr e = product();
        while (is_op("+") || is_op("-")) {
            bool minus = tok_.text == "-";
            advance();
            Expr rhs = product();
            e = minus ? e - rhs : e + rhs;
        }
        return e;
    }

    Expr product() {
        Expr e = unary();
        while (is_op("*") || is_op("/")) {
            bool div = tok_.text == "/";
            std::size_t at = tok_.pos;
            advance();
            Expr rhs = unary();
            if (div) {
                if (rhs.canonical_zero()) throw syntax_error("division by zero", at);
                e = e / rhs;
            } else {
                e = e * rhs;
            }
        }
        return e;
    }

    Expr unary() {
        if (is_op("-")) {
            advance();
            return -unary();
        }
        if (is_op("+")) {
            advance();
            return unary();
        }
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (!is_op("^")) return base;
        std::size_t at = tok_.pos;
        advance();
        int k = exponent(at);
        if (k < 0 && base.canonical_zero()) throw syntax_error("zero raised to a negative power", at);
        return base.pow(k);
    }

    // Exponents are integer literals, optionally signed or parenthesized.
    int exponent(std::size_t at) {
        bool neg = false;
        bool parens = false;
        if (tok_.kind == Token::Kind::lparen) {
            parens = true;
            advance();
        }
        if (is_op("-")) {
            neg = true;
            advance();
        } else if (is_op("+")) {
            advance();
        }
        if (tok_.kind != Token::Kind::number) throw syntax_error("expected an integer exponent", at);
        long v;
        try {
            v = std::stol(tok_.text);
        } catch (...) {
            throw syntax_error("exponent out of range", tok_.pos);
        }
        if (v > 64) throw resource_limit("exponent " + tok_.text + " exceeds the supported range");
        advance();
        if (parens) {
            if (tok_.kind != Token::Kind::rparen) throw syntax_error("expected ')'", tok_.pos);
            advance();
        }
        return static_cast<int>(neg ? -v : v);
    }

    Expr primary() {
        switch (tok_.kind) {
            case Token::Kind::number: {
                Rational v(Int(tok_.text));
                advance();
                return Expr(v);
            }
            case Token::Kind::lparen: {
                advance();
                Expr e = sum();
                if (tok_.kind != Token::Kind::rparen) throw syntax_error("expected ')'", tok_.pos);
                advance();
                return e;
            }
            case Token::Kind::ident:
                return identifier();
            default:
                throw syntax_error("expected a number, identifier, or '('", tok_.pos);
        }
    }

    Expr identifier() {
        std::string name = tok_.text;
        std::size_t at = tok_.pos;
        advance();
        if (name == "exp") {
            if (tok_.kind != Token::Kind::lparen) throw syntax_error("expected '(' after exp", tok_.pos);
            advance();
            Expr arg = sum();
            if (tok_.kind != Token::Kind::rparen) throw syntax_error("expected ')'", tok_.pos);
            advance();
            return Expr::exp_atom(arg);
        }
        if (name == "u" && tok_.kind == Token::Kind::lbracket) {
            advance();
            std::vector<int> entries;
            while (true) {
                if (tok_.kind != Token::Kind::number)
                    throw syntax_error("expected a nonnegative integer jet index entry", tok_.pos);
                entries.push_back(static_cast<int>(std::stol(tok_.text)));
                advance();
                if (tok_.kind == Token::Kind::comma) {
                    advance();
                    continue;
                }
                break;
            }
            if (tok_.kind != Token::Kind::rbracket) throw syntax_error("expected ']'", tok_.pos);
            advance();
            if (static_cast<int>(entries.size()) != ctx_.n())
                throw syntax_error("jet index has " + std::to_string(entries.size()) +
                                       " entries, context has n = " + std::to_string(ctx_.n()),
                                   at);
            return Expr(ctx_.jet_var(MultiIndex(std::move(entries))));
        }
        if (auto v = ctx_.resolve(name)) return Expr(*v);
        throw unknown_identifier(name);
    }

    const JetContext& ctx_;
    Lexer lex_;
    Token tok_;
};

}  // namespace detail

inline Expr parse_expr(const std::string& text, const JetContext& ctx) {
    return detail::Parser(text, ctx).parse();
}

}  // namespace redmod
