/**
 * @file expr.hpp
 * @brief Scalar coefficient expressions in the variable `t` and the parameter `lambda`.
 *
 * Grammar (whitespace is insignificant):
 *
 *     expr    := term (('+' | '-') term)*
 *     term    := unary (('*' | '/') unary)*
 *     unary   := '-' unary | power
 *     power   := primary ('^' integer)?
 *     primary := number | 't' | 'lambda' | func '(' expr ')' | '(' expr ')'
 *     func    := 'sin' | 'cos' | 'exp' | 'abs'
 *
 * `^` binds tighter than unary minus, so `-t^2` is `-(t^2)`. Exponents are
 * nonnegative integer literals; a chain such as `t^2^3` must be parenthesized.
 */
#pragma once

#include <greenkit/error.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>

namespace greenkit {

enum class NodeKind { Constant, VarT, ParamLambda, Add, Sub, Mul, Div, Neg, Pow, Call };
enum class Function { Sin, Cos, Exp, Abs };

struct ExprNode {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;         // Constant
    unsigned exponent = 0;      // Pow
    Function function = Function::Sin; // Call
    std::shared_ptr<const ExprNode> lhs; // unary operand / left operand / base / argument
    std::shared_ptr<const ExprNode> rhs;
};

using NodePtr = std::shared_ptr<const ExprNode>;

namespace detail {

inline double ipow(double base, unsigned exponent) {
    double result = 1.0;
    while (exponent != 0) {
        if (exponent & 1U) result *= base;
        base *= base;
        exponent >>= 1U;
    }
    return result;
}

inline double eval_node(const ExprNode& node, double t, double lambda) {
    switch (node.kind) {
    case NodeKind::Constant: return node.value;
    case NodeKind::VarT: return t;
    case NodeKind::ParamLambda: return lambda;
    case NodeKind::Add: return eval_node(*node.lhs, t, lambda) + eval_node(*node.rhs, t, lambda);
    case NodeKind::Sub: return eval_node(*node.lhs, t, lambda) - eval_node(*node.rhs, t, lambda);
    case NodeKind::Mul: return eval_node(*node.lhs, t, lambda) * eval_node(*node.rhs, t, lambda);
    case NodeKind::Div: {
        const double num = eval_node(*node.lhs, t, lambda);
        const double den = eval_node(*node.rhs, t, lambda);
        if (den == 0.0) throw EvalError("division by zero at t = " + std::to_string(t));
        return num / den;
    }
    case NodeKind::Neg: return -eval_node(*node.lhs, t, lambda);
    case NodeKind::Pow: return ipow(eval_node(*node.lhs, t, lambda), node.exponent);
    case NodeKind::Call: {
        const double x = eval_node(*node.lhs, t, lambda);
        switch (node.function) {
        case Function::Sin: return std::sin(x);
        case Function::Cos: return std::cos(x);
        case Function::Exp: return std::exp(x);
        case Function::Abs: return std::fabs(x);
        }
    }
    }
    return 0.0;
}

inline bool same_tree(const ExprNode* a, const ExprNode* b) {
    if (a == b) return true;
    if (a == nullptr || b == nullptr) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case NodeKind::Constant: return a->value == b->value;
    case NodeKind::Pow:
        if (a->exponent != b->exponent) return false;
        break;
    case NodeKind::Call:
        if (a->function != b->function) return false;
        break;
    default: break;
    }
    return same_tree(a->lhs.get(), b->lhs.get()) && same_tree(a->rhs.get(), b->rhs.get());
}

inline const char* function_name(Function f) {
    switch (f) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Exp: return "exp";
    case Function::Abs: return "abs";
    }
    return "?";
}

inline void print_node(const ExprNode& node, std::string& out) {
    auto binary = [&](const char* op) {
        out += '(';
        print_node(*node.lhs, out);
        out += op;
        print_node(*node.rhs, out);
        out += ')';
    };
    switch (node.kind) {
    case NodeKind::Constant: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", node.value);
        out += buf;
        break;
    }
    case NodeKind::VarT: out += 't'; break;
    case NodeKind::ParamLambda: out += "lambda"; break;
    case NodeKind::Add: binary(" + "); break;
    case NodeKind::Sub: binary(" - "); break;
    case NodeKind::Mul: binary(" * "); break;
    case NodeKind::Div: binary(" / "); break;
    case NodeKind::Neg:
        out += "(-";
        print_node(*node.lhs, out);
        out += ')';
        break;
    case NodeKind::Pow:
        out += '(';
        print_node(*node.lhs, out);
        out += ")^" + std::to_string(node.exponent);
        break;
    case NodeKind::Call:
        out += function_name(node.function);
        out += '(';
        print_node(*node.lhs, out);
        out += ')';
        break;
    }
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse() {
        skip_ws();
        if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
        NodePtr root = parse_expr();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError(std::string("unexpected character '") + src_[pos_] + "'", pos_);
        return root;
    }

private:
    static NodePtr make(NodeKind kind, NodePtr lhs = {}, NodePtr rhs = {}) {
        auto node = std::make_shared<ExprNode>();
        node->kind = kind;
        node->lhs = std::move(lhs);
        node->rhs = std::move(rhs);
        return node;
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = make(NodeKind::Add, lhs, parse_term());
            else if (accept('-')) lhs = make(NodeKind::Sub, lhs, parse_term());
            else return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = make(NodeKind::Mul, lhs, parse_unary());
            else if (accept('/')) lhs = make(NodeKind::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make(NodeKind::Neg, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (!accept('^')) return base;
        skip_ws();
        const std::size_t start = pos_;
        if (pos_ < src_.size() && src_[pos_] == '-')
            throw ParseError("negative exponent", start);
        if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
            throw ParseError("exponent must be a nonnegative integer literal", start);
        unsigned value = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            value = value * 10U + static_cast<unsigned>(src_[pos_] - '0');
            if (value > 1000U) throw ParseError("exponent too large", start);
            ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))
            throw ParseError("non-integer exponent", start);
        auto node = std::make_shared<ExprNode>();
        node->kind = NodeKind::Pow;
        node->exponent = value;
        node->lhs = std::move(base);
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '^')
            throw ParseError("chained exponent requires parentheses", pos_);
        return node;
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            const std::size_t d0 = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            return pos_ - d0;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            if (digits() == 0) throw ParseError("expected digits after decimal point", pos_);
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) throw ParseError("malformed number exponent", pos_);
        }
        double value = 0.0;
        const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
            throw ParseError("malformed number", start);
        auto node = std::make_shared<ExprNode>();
        node->kind = NodeKind::Constant;
        node->value = value;
        return node;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            const std::string_view ident = src_.substr(start, pos_ - start);
            if (ident == "t") return make(NodeKind::VarT);
            if (ident == "lambda") return make(NodeKind::ParamLambda);
            Function f{};
            if (ident == "sin") f = Function::Sin;
            else if (ident == "cos") f = Function::Cos;
            else if (ident == "exp") f = Function::Exp;
            else if (ident == "abs") f = Function::Abs;
            else throw ParseError("unknown identifier '" + std::string(ident) + "'", start);
            if (!accept('(')) throw ParseError("expected '(' after function name", pos_);
            auto node = std::make_shared<ExprNode>();
            node->kind = NodeKind::Call;
            node->function = f;
            node->lhs = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return node;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Immutable parsed expression. Copies share the tree.
class ExprAst {
public:
    ExprAst() : root_(constant_node(0.0)) {}

    static ExprAst parse(std::string_view src) { return ExprAst(detail::Parser(src).parse()); }
    static ExprAst constant(double value) { return ExprAst(constant_node(value)); }

    double eval(double t, double lambda) const { return detail::eval_node(*root_, t, lambda); }

    /// Fully parenthesized form; re-parses to a structurally identical tree.
    std::string to_string() const {
        std::string out;
        detail::print_node(*root_, out);
        return out;
    }

    const ExprNode& root() const noexcept { return *root_; }

    friend bool operator==(const ExprAst& a, const ExprAst& b) {
        return detail::same_tree(a.root_.get(), b.root_.get());
    }

private:
    explicit ExprAst(NodePtr root) : root_(std::move(root)) {}

    static NodePtr constant_node(double value) {
        auto node = std::make_shared<ExprNode>();
        node->value = value;
        return node;
    }

    NodePtr root_;
};

inline ExprAst parse_expression(std::string_view src) { return ExprAst::parse(src); }

inline double eval_expr(const ExprAst& ast, double t, double lambda) { return ast.eval(t, lambda); }

} // namespace greenkit
