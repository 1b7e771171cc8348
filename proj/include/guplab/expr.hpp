#pragma once

// Rational-polynomial expressions in the variable p with named parameters.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | atom ('^' uint)?
//   atom   := number | ident | '(' expr ')'

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "guplab/units.hpp"

namespace guplab {

class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t offset)
        : ValidationError("syntax error at offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { num, var, param, neg, add, sub, mul, div, pow };
    Kind kind = Kind::num;
    double value = 0.0;     // num
    std::string name;       // param
    unsigned exponent = 0;  // pow
    ExprPtr lhs, rhs;       // rhs unused for neg and pow
};

using ParamMap = std::map<std::string, double>;

namespace expr {

inline ExprPtr make(Expr::Kind k, ExprPtr a = nullptr, ExprPtr b = nullptr) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
}
inline ExprPtr num(double v) {
    auto e = std::make_shared<Expr>();
    e->value = v;
    return e;
}
inline ExprPtr var() { return make(Expr::Kind::var); }
inline ExprPtr param(std::string n) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::param;
    e->name = std::move(n);
    return e;
}
inline ExprPtr pow(ExprPtr base, unsigned n) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::pow;
    e->lhs = std::move(base);
    e->exponent = n;
    return e;
}

inline bool is_num(const ExprPtr& e, double v) { return e->kind == Expr::Kind::num && e->value == v; }
inline bool is_num(const ExprPtr& e) { return e->kind == Expr::Kind::num; }

// Constant folding keeps literals non-negative so printed trees stay parseable.
inline ExprPtr lit(double v) { return v < 0 ? make(Expr::Kind::neg, num(-v)) : num(v); }
inline bool const_value(const ExprPtr& e, double& v) {
    if (e->kind == Expr::Kind::num) {
        v = e->value;
        return true;
    }
    if (e->kind == Expr::Kind::neg && e->lhs->kind == Expr::Kind::num) {
        v = -e->lhs->value;
        return true;
    }
    return false;
}

inline ExprPtr neg(ExprPtr a) {
    double v = 0;
    if (const_value(a, v)) return lit(-v);
    if (a->kind == Expr::Kind::neg) return a->lhs;
    return make(Expr::Kind::neg, std::move(a));
}
inline ExprPtr add(ExprPtr a, ExprPtr b) {
    double x = 0, y = 0;
    bool ca = const_value(a, x), cb = const_value(b, y);
    if (ca && cb) return lit(x + y);
    if (ca && x == 0) return b;
    if (cb && y == 0) return a;
    return make(Expr::Kind::add, std::move(a), std::move(b));
}
inline ExprPtr sub(ExprPtr a, ExprPtr b) {
    double x = 0, y = 0;
    bool ca = const_value(a, x), cb = const_value(b, y);
    if (ca && cb) return lit(x - y);
    if (cb && y == 0) return a;
    if (ca && x == 0) return neg(b);
    return make(Expr::Kind::sub, std::move(a), std::move(b));
}
inline ExprPtr mul(ExprPtr a, ExprPtr b) {
    double x = 0, y = 0;
    bool ca = const_value(a, x), cb = const_value(b, y);
    if (ca && cb) return lit(x * y);
    if ((ca && x == 0) || (cb && y == 0)) return num(0);
    if (ca && x == 1) return b;
    if (cb && y == 1) return a;
    if (ca && x == -1) return neg(b);
    if (cb && y == -1) return neg(a);
    return make(Expr::Kind::mul, std::move(a), std::move(b));
}
inline ExprPtr div(ExprPtr a, ExprPtr b) {
    double x = 0, y = 0;
    bool ca = const_value(a, x), cb = const_value(b, y);
    if (ca && x == 0) return num(0);
    if (cb && y == 1) return a;
    if (ca && cb && y != 0) return lit(x / y);
    return make(Expr::Kind::div, std::move(a), std::move(b));
}
inline ExprPtr power(ExprPtr a, unsigned n) {
    double x;
    if (n == 0) return num(1);
    if (n == 1) return a;
    if (const_value(a, x)) return lit(std::pow(x, double(n)));
    return pow(std::move(a), n);
}

} // namespace expr

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    ExprPtr parse() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("empty expression", pos_);
        ExprPtr e = parse_expr();
        skip();
        if (pos_ < s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ExprPtr parse_expr() {
        ExprPtr lhs = parse_term();
        for (;;) {
            if (accept('+'))
                lhs = expr::make(Expr::Kind::add, lhs, parse_term());
            else if (accept('-'))
                lhs = expr::make(Expr::Kind::sub, lhs, parse_term());
            else
                return lhs;
        }
    }
    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        for (;;) {
            if (accept('*'))
                lhs = expr::make(Expr::Kind::mul, lhs, parse_factor());
            else if (accept('/'))
                lhs = expr::make(Expr::Kind::div, lhs, parse_factor());
            else
                return lhs;
        }
    }
    ExprPtr parse_factor() {
        if (accept('-')) return expr::make(Expr::Kind::neg, parse_factor());
        ExprPtr base = parse_atom();
        if (accept('^')) {
            skip();
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) throw ParseError("expected unsigned integer exponent", start);
            unsigned n = 0;
            auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, n);
            if (ec != std::errc() || n > 64) throw ParseError("exponent out of range", start);
            return expr::pow(base, n);
        }
        return base;
    }
    ExprPtr parse_atom() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            ExprPtr e = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string id(s_.substr(start, pos_ - start));
            return id == "p" ? expr::var() : expr::param(id);
        }
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }
    ExprPtr parse_number() {
        std::size_t start = pos_;
        auto digits = [&] {
            std::size_t b = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return pos_ - b;
        };
        std::size_t nd = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            nd += digits();
        }
        if (nd == 0) throw ParseError("malformed number", start);
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;  // 'e' belongs to something else
        }
        double v = 0;
        auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (ec != std::errc() || ptr != s_.data() + pos_ || !std::isfinite(v))
            throw ParseError("malformed number", start);
        return expr::num(v);
    }
};

inline ExprPtr parse_expression(std::string_view text) { return Parser(text).parse(); }

namespace detail {
inline int precedence(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::add:
    case Expr::Kind::sub: return 1;
    case Expr::Kind::mul:
    case Expr::Kind::div: return 2;
    case Expr::Kind::neg: return 3;
    case Expr::Kind::pow: return 4;
    default: return 5;
    }
}
inline void print_to(std::string& out, const Expr& e, int min_prec) {
    int prec = precedence(e);
    bool paren = prec < min_prec;
    if (paren) out += '(';
    switch (e.kind) {
    case Expr::Kind::num: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", e.value);
        out += buf;
        break;
    }
    case Expr::Kind::var: out += 'p'; break;
    case Expr::Kind::param: out += e.name; break;
    case Expr::Kind::neg:
        out += '-';
        print_to(out, *e.lhs, 3);
        break;
    case Expr::Kind::pow:
        print_to(out, *e.lhs, 5);
        out += '^' + std::to_string(e.exponent);
        break;
    default: {
        const char* op = e.kind == Expr::Kind::add ? " + " : e.kind == Expr::Kind::sub ? " - "
                         : e.kind == Expr::Kind::mul ? "*" : "/";
        print_to(out, *e.lhs, prec);
        out += op;
        print_to(out, *e.rhs, prec + 1);
    }
    }
    if (paren) out += ')';
}
} // namespace detail

inline std::string print(const ExprPtr& e) {
    std::string s;
    detail::print_to(s, *e, 0);
    return s;
}

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
    case Expr::Kind::num: return a->value == b->value;
    case Expr::Kind::var: return true;
    case Expr::Kind::param: return a->name == b->name;
    case Expr::Kind::neg: return equal(a->lhs, b->lhs);
    case Expr::Kind::pow: return a->exponent == b->exponent && equal(a->lhs, b->lhs);
    default: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    }
}

// d/dp, simplified by constant folding
inline ExprPtr derivative(const ExprPtr& e) {
    using namespace expr;
    switch (e->kind) {
    case Expr::Kind::num:
    case Expr::Kind::param: return num(0);
    case Expr::Kind::var: return num(1);
    case Expr::Kind::neg: return neg(derivative(e->lhs));
    case Expr::Kind::add: return add(derivative(e->lhs), derivative(e->rhs));
    case Expr::Kind::sub: return sub(derivative(e->lhs), derivative(e->rhs));
    case Expr::Kind::mul:
        return add(mul(derivative(e->lhs), e->rhs), mul(e->lhs, derivative(e->rhs)));
    case Expr::Kind::div: {
        ExprPtr du = derivative(e->lhs), dv = derivative(e->rhs);
        if (is_num(dv, 0)) return div(du, e->rhs);
        return div(sub(mul(du, e->rhs), mul(e->lhs, dv)), power(e->rhs, 2));
    }
    case Expr::Kind::pow:
        return mul(mul(num(double(e->exponent)), power(e->lhs, e->exponent - 1)), derivative(e->lhs));
    }
    return num(0);
}

inline void collect_params(const ExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == Expr::Kind::param) out.insert(e->name);
    collect_params(e->lhs, out);
    collect_params(e->rhs, out);
}

inline bool depends_on_p(const ExprPtr& e) {
    if (!e) return false;
    if (e->kind == Expr::Kind::var) return true;
    return depends_on_p(e->lhs) || depends_on_p(e->rhs);
}

// polynomial in p: p never appears under a denominator
inline bool is_polynomial(const ExprPtr& e) {
    if (!e) return true;
    if (e->kind == Expr::Kind::div) return is_polynomial(e->lhs) && !depends_on_p(e->rhs);
    return is_polynomial(e->lhs) && is_polynomial(e->rhs);
}

// parameters replaced by their values, constants folded
inline ExprPtr bind(const ExprPtr& e, const ParamMap& params) {
    using namespace expr;
    switch (e->kind) {
    case Expr::Kind::num:
    case Expr::Kind::var: return e;
    case Expr::Kind::param: {
        auto it = params.find(e->name);
        if (it == params.end()) throw ValidationError("unbound parameter '" + e->name + "'");
        return lit(it->second);
    }
    case Expr::Kind::neg: return neg(bind(e->lhs, params));
    case Expr::Kind::add: return add(bind(e->lhs, params), bind(e->rhs, params));
    case Expr::Kind::sub: return sub(bind(e->lhs, params), bind(e->rhs, params));
    case Expr::Kind::mul: return mul(bind(e->lhs, params), bind(e->rhs, params));
    case Expr::Kind::div: return div(bind(e->lhs, params), bind(e->rhs, params));
    case Expr::Kind::pow: return power(bind(e->lhs, params), e->exponent);
    }
    return e;
}

// evaluates a bound tree
inline double evaluate(const Expr& e, double p) {
    switch (e.kind) {
    case Expr::Kind::num: return e.value;
    case Expr::Kind::var: return p;
    case Expr::Kind::param: throw ValidationError("unbound parameter '" + e.name + "'");
    case Expr::Kind::neg: return -evaluate(*e.lhs, p);
    case Expr::Kind::add: return evaluate(*e.lhs, p) + evaluate(*e.rhs, p);
    case Expr::Kind::sub: return evaluate(*e.lhs, p) - evaluate(*e.rhs, p);
    case Expr::Kind::mul: return evaluate(*e.lhs, p) * evaluate(*e.rhs, p);
    case Expr::Kind::div: return evaluate(*e.lhs, p) / evaluate(*e.rhs, p);
    case Expr::Kind::pow: {
        double b = evaluate(*e.lhs, p), r = 1.0;
        for (unsigned i = 0; i < e.exponent; ++i) r *= b;
        return r;
    }
    }
    return 0.0;
}

// coefficient list c[0] + c[1] p + ... of a bound polynomial tree
inline std::vector<double> coefficients(const ExprPtr& e) {
    auto conv = [](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> r(a.size() + b.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
        return r;
    };
    auto addv = [](std::vector<double> a, const std::vector<double>& b, double sign) {
        if (b.size() > a.size()) a.resize(b.size(), 0.0);
        for (std::size_t i = 0; i < b.size(); ++i) a[i] += sign * b[i];
        return a;
    };
    switch (e->kind) {
    case Expr::Kind::num: return {e->value};
    case Expr::Kind::var: return {0.0, 1.0};
    case Expr::Kind::neg: {
        auto c = coefficients(e->lhs);
        for (auto& x : c) x = -x;
        return c;
    }
    case Expr::Kind::add: return addv(coefficients(e->lhs), coefficients(e->rhs), 1.0);
    case Expr::Kind::sub: return addv(coefficients(e->lhs), coefficients(e->rhs), -1.0);
    case Expr::Kind::mul: return conv(coefficients(e->lhs), coefficients(e->rhs));
    case Expr::Kind::div: {
        if (depends_on_p(e->rhs)) throw ValidationError("not a polynomial");
        double d = evaluate(*e->rhs, 0.0);
        auto c = coefficients(e->lhs);
        for (auto& x : c) x /= d;
        return c;
    }
    case Expr::Kind::pow: {
        std::vector<double> r{1.0}, b = coefficients(e->lhs);
        for (unsigned i = 0; i < e->exponent; ++i) r = conv(r, b);
        return r;
    }
    case Expr::Kind::param: throw ValidationError("unbound parameter '" + e->name + "'");
    }
    return {};
}

} // namespace guplab
