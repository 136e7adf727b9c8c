// A small expression language for fixture files: sums, products, quotients
// and powers of the coordinates, the critical curves psiK(x) and decimal
// constants. Expressions are compiled to a tree evaluated in Taylor mode, so
// one expression yields jets of any order at any point.
//
//   expr   := term  { ('+' | '-') term }
//   term   := unary { ('*' | '/') unary }
//   unary  := ('-' | '+') unary | power
//   power  := atom [ '^' exponent ]
//   exponent := ['-'] integer | '(' ['-'] integer [ '/' integer ] ')'
//   atom   := number | name | '(' expr ')'
//   name   := x | y | x1..xn | psi0..psiK
#ifndef WHITNEY_EXPR_HPP
#define WHITNEY_EXPR_HPP

#include "jet.hpp"
#include "patching.hpp"
#include "puiseux.hpp"
#include "scalar.hpp"
#include "taylor.hpp"

#include <cctype>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace whitney {

class ExprError : public std::runtime_error {
public:
    ExprError(const std::string& what, std::size_t pos)
        : std::runtime_error(what + " at offset " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

// Names visible to an expression: coordinates x1..xn (x, y as aliases when
// n <= 2) and optionally a ladder of curves psi0..psiK in the first coordinate.
struct ExprScope {
    int n = 2;
    std::vector<Puiseux> curves;
};

// Exact value of a decimal literal such as "-12.5e-3" or of "a/b".
inline rational parse_decimal(const std::string& s) {
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
        const rational num = parse_decimal(s.substr(0, slash)), den = parse_decimal(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator in \"" + s + "\"");
        return num / den;
    }
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    boost::multiprecision::cpp_int mant = 0;
    int scale = 0;
    bool digits = false, dot = false;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mant = mant * 10 + (c - '0');
            if (dot) ++scale;
            digits = true;
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            break;
        }
    }
    if (!digits) throw std::invalid_argument("not a number: \"" + s + "\"");
    int exp10 = 0;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t used = 0;
        exp10 = std::stoi(s.substr(i + 1), &used);
        i += 1 + used;
    }
    if (i != s.size()) throw std::invalid_argument("trailing characters in number \"" + s + "\"");
    rational v(mant);
    const int shift = exp10 - scale;
    boost::multiprecision::cpp_int p10 = 1;
    for (int k = 0; k < std::abs(shift); ++k) p10 *= 10;
    v = shift >= 0 ? v * rational(p10) : v / rational(p10);
    return neg ? -v : v;
}

class Expression {
public:
    Expression() = default;

    static Expression parse(const std::string& src, const ExprScope& scope = {}) {
        Expression e;
        e.src_ = src;
        e.scope_ = scope;
        Parser p{src, scope, 0};
        e.root_ = p.expr();
        p.skip();
        if (p.pos != src.size()) throw ExprError("unexpected '" + std::string(1, src[p.pos]) + "'", p.pos);
        return e;
    }

    const std::string& source() const { return src_; }
    const ExprScope& scope() const { return scope_; }

    // vars: one coordinate jet per dimension of the scope.
    Jet<double> eval(const std::vector<Jet<double>>& vars) const {
        if (static_cast<int>(vars.size()) != scope_.n) throw ExprError("expected " + std::to_string(scope_.n) + " coordinate jets", 0);
        return root_->eval(vars, scope_);
    }

    double value(const std::vector<double>& point) const {
        std::vector<Jet<double>> vars;
        for (int i = 0; i < scope_.n; ++i) vars.push_back(Jet<double>::coordinate(scope_.n, 0, point, i));
        return eval(vars)[0];
    }

    // Taylor coefficients (graded-lex) of order m at the point.
    Jet<double> jet_at(const std::vector<double>& point, int m) const {
        std::vector<Jet<double>> vars;
        for (int i = 0; i < scope_.n; ++i) vars.push_back(Jet<double>::coordinate(scope_.n, m, point, i));
        return eval(vars);
    }

private:
    enum class Op { constant, variable, curve, add, sub, mul, div, neg, ipow, rpow };

    struct Node {
        Op op = Op::constant;
        double c = 0.0;
        int index = 0;
        std::int64_t ip = 0;
        double rp = 0.0;
        std::shared_ptr<const Node> a, b;

        Jet<double> eval(const std::vector<Jet<double>>& v, const ExprScope& s) const {
            const auto& ref = v.front();
            switch (op) {
                case Op::constant: return Jet<double>::constant(ref.n(), ref.m(), ref.base(), c);
                case Op::variable: return v[index];
                case Op::curve: return s.curves[index].compose(v[0]);
                case Op::add: return a->eval(v, s) + b->eval(v, s);
                case Op::sub: return a->eval(v, s) - b->eval(v, s);
                case Op::mul: return a->eval(v, s).multiply(b->eval(v, s));
                case Op::div: return divide(a->eval(v, s), b->eval(v, s));
                case Op::neg: return -a->eval(v, s);
                case Op::ipow: return integer_power(a->eval(v, s), static_cast<int>(ip));
                case Op::rpow: return real_power(a->eval(v, s), rp);
            }
            return ref;
        }
    };
    using NodeP = std::shared_ptr<const Node>;

    struct Parser {
        const std::string& s;
        const ExprScope& scope;
        std::size_t pos;

        void skip() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool eat(char c) {
            skip();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        static NodeP make(Op op, NodeP a = nullptr, NodeP b = nullptr) {
            auto n = std::make_shared<Node>();
            n->op = op;
            n->a = std::move(a);
            n->b = std::move(b);
            return n;
        }
        NodeP expr() {
            NodeP lhs = term();
            for (;;) {
                if (eat('+')) lhs = make(Op::add, lhs, term());
                else if (eat('-')) lhs = make(Op::sub, lhs, term());
                else return lhs;
            }
        }
        NodeP term() {
            NodeP lhs = unary();
            for (;;) {
                if (eat('*')) lhs = make(Op::mul, lhs, unary());
                else if (eat('/')) lhs = make(Op::div, lhs, unary());
                else return lhs;
            }
        }
        NodeP unary() {
            if (eat('-')) return make(Op::neg, unary());
            if (eat('+')) return unary();
            return power();
        }
        std::int64_t integer() {
            skip();
            const std::size_t start = pos;
            bool neg = false;
            if (pos < s.size() && s[pos] == '-') {
                neg = true;
                ++pos;
            }
            std::int64_t v = 0;
            const std::size_t digits_at = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) v = v * 10 + (s[pos++] - '0');
            if (pos == digits_at) throw ExprError("expected an integer exponent", start);
            return neg ? -v : v;
        }
        NodeP power() {
            NodeP base = atom();
            if (!eat('^')) return base;
            std::int64_t num = 0, den = 1;
            std::size_t den_at = pos;
            if (eat('(')) {
                num = integer();
                if (eat('/')) {
                    skip();
                    den_at = pos;
                    den = integer();
                }
                if (!eat(')')) throw ExprError("expected ')' after exponent", pos);
            } else {
                num = integer();
            }
            if (den <= 0) throw ExprError("exponent denominator must be positive", den_at);
            auto n = std::make_shared<Node>();
            n->a = base;
            if (num % den == 0) {
                n->op = Op::ipow;
                n->ip = num / den;
            } else {
                n->op = Op::rpow;
                n->rp = static_cast<double>(num) / static_cast<double>(den);
            }
            return n;
        }
        NodeP atom() {
            skip();
            if (pos >= s.size()) throw ExprError("unexpected end of expression", pos);
            const std::size_t start = pos;
            if (eat('(')) {
                NodeP e = expr();
                if (!eat(')')) throw ExprError("expected ')'", pos);
                return e;
            }
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.')) ++pos;
                if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
                    std::size_t q = pos + 1;
                    if (q < s.size() && (s[q] == '-' || s[q] == '+')) ++q;
                    if (q < s.size() && std::isdigit(static_cast<unsigned char>(s[q]))) {
                        pos = q;
                        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
                    }
                }
                auto n = std::make_shared<Node>();
                try {
                    n->c = static_cast<double>(parse_decimal(s.substr(start, pos - start)));
                } catch (const std::exception&) {
                    throw ExprError("malformed number", start);
                }
                return n;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
                return name(s.substr(start, pos - start), start);
            }
            throw ExprError("unexpected '" + std::string(1, c) + "'", start);
        }
        NodeP name(const std::string& id, std::size_t at) {
            auto n = std::make_shared<Node>();
            auto suffix = [&](std::size_t from) -> int {
                if (from >= id.size()) return -1;
                for (std::size_t i = from; i < id.size(); ++i)
                    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return -1;
                return std::stoi(id.substr(from));
            };
            if (scope.n <= 2 && (id == "x" || id == "y")) {
                const int i = id == "x" ? 0 : 1;
                if (i >= scope.n) throw ExprError("unknown name '" + id + "'", at);
                n->op = Op::variable;
                n->index = i;
                return n;
            }
            if (id.rfind("psi", 0) == 0) {
                const int k = suffix(3);
                if (k < 0 || k >= static_cast<int>(scope.curves.size())) throw ExprError("unknown curve '" + id + "'", at);
                n->op = Op::curve;
                n->index = k;
                return n;
            }
            if (id[0] == 'x') {
                const int k = suffix(1);
                if (k >= 1 && k <= scope.n) {
                    n->op = Op::variable;
                    n->index = k - 1;
                    return n;
                }
            }
            throw ExprError("unknown name '" + id + "'", at);
        }
    };

    std::string src_;
    ExprScope scope_;
    NodeP root_;
};

// A planar expression as a field piece.
inline FieldPiece expression_field(const Expression& e, char side = 'w') {
    if (e.scope().n != 2) throw ExprError("a field piece needs a planar expression", 0);
    return {side, [e](const Jet<double>& X, const Jet<double>& Y) { return e.eval({X, Y}); }};
}

}  // namespace whitney

#endif
