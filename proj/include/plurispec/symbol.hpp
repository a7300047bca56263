#pragma once

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plurispec/errors.hpp"
#include "plurispec/numeric.hpp"
#include "plurispec/spaces.hpp"

namespace plurispec {

// Symbol functions are given as expressions over z (or z1, z2 on the ball),
// with + - * / ^, unary minus, complex literals like 2.5 or 1.5i, and the
// functions conj, abs, re, im, exp, sin, cos, log, arg, sqrt. '^' takes an
// integer exponent only, so symbols stay single-valued.
struct SymbolNode {
    enum class Tag { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
    Tag tag = Tag::Const;
    cplx value{};            // Const
    int var = 0;             // Var: 0 -> z / z1, 1 -> z2
    int ipow = 0;            // Pow exponent
    std::string fn;          // Call
    std::vector<SymbolNode> kids;
    std::size_t pos = 0;     // offset into the source text, for error messages
};

struct SymbolExpr {
    SymbolNode root;
    std::string source;
};

namespace detail {

inline bool known_function(const std::string& s) {
    static const char* fns[] = {"conj", "abs", "re", "im", "exp",
                                "sin",  "cos", "log", "arg", "sqrt"};
    for (const char* f : fns)
        if (s == f) return true;
    return false;
}

class SymbolParser {
public:
    explicit SymbolParser(const std::string& text) : text_(text) {}

    SymbolNode parse() {
        skip_ws();
        if (at_end()) throw config_error("symbol parse error: empty expression");
        SymbolNode e = expr();
        skip_ws();
        if (!at_end()) fail("unexpected trailing input");
        return e;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw config_error("symbol parse error at position " + std::to_string(pos_) + ": " +
                           what);
    }
    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }
    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    SymbolNode expr() {
        SymbolNode lhs = term();
        for (;;) {
            skip_ws();
            const std::size_t at = pos_;
            if (accept('+')) {
                SymbolNode n;
                n.tag = SymbolNode::Tag::Add;
                n.pos = at;
                n.kids = {std::move(lhs), term()};
                lhs = std::move(n);
            } else if (accept('-')) {
                SymbolNode n;
                n.tag = SymbolNode::Tag::Sub;
                n.pos = at;
                n.kids = {std::move(lhs), term()};
                lhs = std::move(n);
            } else {
                return lhs;
            }
        }
    }

    SymbolNode term() {
        SymbolNode lhs = factor();
        for (;;) {
            skip_ws();
            const std::size_t at = pos_;
            if (accept('*')) {
                SymbolNode n;
                n.tag = SymbolNode::Tag::Mul;
                n.pos = at;
                n.kids = {std::move(lhs), factor()};
                lhs = std::move(n);
            } else if (accept('/')) {
                SymbolNode n;
                n.tag = SymbolNode::Tag::Div;
                n.pos = at;
                n.kids = {std::move(lhs), factor()};
                lhs = std::move(n);
            } else {
                return lhs;
            }
        }
    }

    SymbolNode factor() {
        SymbolNode base = unary();
        skip_ws();
        if (accept('^')) {
            SymbolNode n;
            n.tag = SymbolNode::Tag::Pow;
            n.pos = pos_;
            n.ipow = integer();
            n.kids = {std::move(base)};
            return n;
        }
        return base;
    }

    SymbolNode unary() {
        skip_ws();
        const std::size_t at = pos_;
        if (accept('-')) {
            SymbolNode n;
            n.tag = SymbolNode::Tag::Neg;
            n.pos = at;
            n.kids = {atom()};
            return n;
        }
        return atom();
    }

    int integer() {
        skip_ws();
        bool neg = accept('-');
        skip_ws();
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected integer exponent");
        long v = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            v = v * 10 + (text_[pos_] - '0');
            if (v > 1000000) fail("exponent out of range");
            ++pos_;
        }
        return static_cast<int>(neg ? -v : v);
    }

    SymbolNode atom() {
        skip_ws();
        const std::size_t at = pos_;
        const char c = peek();
        if (c == '(') {
            ++pos_;
            SymbolNode inner = expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(at);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier(at);
        fail("expected a number, identifier or '('");
    }

    SymbolNode number(std::size_t at) {
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.'))
            ++end;
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            std::size_t e = end + 1;
            if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
            if (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) {
                ++e;
                while (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) ++e;
                end = e;
            }
        }
        double v = 0.0;
        try {
            v = std::stod(text_.substr(pos_, end - pos_));
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos_ = end;
        SymbolNode n;
        n.tag = SymbolNode::Tag::Const;
        n.pos = at;
        if (!at_end() && peek() == 'i') { // imaginary literal, e.g. 1.5i
            ++pos_;
            n.value = cplx{0.0, v};
        } else {
            n.value = cplx{v, 0.0};
        }
        return n;
    }

    SymbolNode identifier(std::size_t at) {
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
            ++end;
        const std::string name = text_.substr(pos_, end - pos_);
        pos_ = end;
        skip_ws();
        if (peek() == '(') {
            ++pos_;
            if (!known_function(name))
                throw config_error("symbol parse error at position " + std::to_string(at) +
                                   ": unknown function '" + name + "'");
            SymbolNode n;
            n.tag = SymbolNode::Tag::Call;
            n.fn = name;
            n.pos = at;
            n.kids.push_back(expr());
            while (accept(',')) n.kids.push_back(expr());
            expect(')');
            if (n.kids.size() != 1)
                throw config_error("symbol parse error at position " + std::to_string(at) +
                                   ": '" + name + "' takes exactly one argument");
            return n;
        }
        SymbolNode n;
        n.pos = at;
        if (name == "z" || name == "z1") {
            n.tag = SymbolNode::Tag::Var;
            n.var = 0;
        } else if (name == "z2") {
            n.tag = SymbolNode::Tag::Var;
            n.var = 1;
        } else if (name == "i") {
            n.tag = SymbolNode::Tag::Const;
            n.value = cplx{0.0, 1.0};
        } else {
            throw config_error("symbol parse error at position " + std::to_string(at) +
                               ": unknown identifier '" + name + "'");
        }
        return n;
    }
};

inline cplx eval_node(const SymbolNode& n, const Point& p) {
    using Tag = SymbolNode::Tag;
    switch (n.tag) {
        case Tag::Const: return n.value;
        case Tag::Var: return n.var == 0 ? p.z1 : p.z2;
        case Tag::Neg: return -eval_node(n.kids[0], p);
        case Tag::Add: return eval_node(n.kids[0], p) + eval_node(n.kids[1], p);
        case Tag::Sub: return eval_node(n.kids[0], p) - eval_node(n.kids[1], p);
        case Tag::Mul: return eval_node(n.kids[0], p) * eval_node(n.kids[1], p);
        case Tag::Div: {
            const cplx den = eval_node(n.kids[1], p);
            if (den == cplx{0.0, 0.0})
                throw numeric_error("symbol eval: division by zero at position " +
                                    std::to_string(n.pos));
            return eval_node(n.kids[0], p) / den;
        }
        case Tag::Pow: {
            const cplx base = eval_node(n.kids[0], p);
            if (n.ipow >= 0) return pow_int(base, n.ipow);
            if (base == cplx{0.0, 0.0})
                throw numeric_error("symbol eval: zero to a negative power at position " +
                                    std::to_string(n.pos));
            return 1.0 / pow_int(base, -n.ipow);
        }
        case Tag::Call: {
            const cplx v = eval_node(n.kids[0], p);
            if (n.fn == "conj") return std::conj(v);
            if (n.fn == "abs") return cplx{std::abs(v), 0.0};
            if (n.fn == "re") return cplx{v.real(), 0.0};
            if (n.fn == "im") return cplx{v.imag(), 0.0};
            if (n.fn == "exp") return std::exp(v);
            if (n.fn == "sin") return std::sin(v);
            if (n.fn == "cos") return std::cos(v);
            if (n.fn == "sqrt") return std::sqrt(v);
            if (n.fn == "arg") return cplx{std::arg(v), 0.0};
            if (n.fn == "log") {
                if (v == cplx{0.0, 0.0})
                    throw numeric_error("symbol eval: log(0) at position " +
                                        std::to_string(n.pos));
                return std::log(v);
            }
            throw config_error("symbol eval: unknown function '" + n.fn + "'");
        }
    }
    throw config_error("symbol eval: corrupt tree");
}

inline void print_node(const SymbolNode& n, std::string& out) {
    using Tag = SymbolNode::Tag;
    switch (n.tag) {
        case Tag::Const: {
            char buf[64];
            if (n.value.imag() == 0.0) {
                std::snprintf(buf, sizeof(buf), "%.17g", n.value.real());
                out += buf;
            } else if (n.value.real() == 0.0 && n.value.imag() >= 0.0) {
                std::snprintf(buf, sizeof(buf), "%.17g", n.value.imag());
                out += buf;
                out += "i";
            } else {
                std::snprintf(buf, sizeof(buf), "%.17g", n.value.real());
                out += "(";
                out += buf;
                out += n.value.imag() < 0 ? "-" : "+";
                std::snprintf(buf, sizeof(buf), "%.17g", std::abs(n.value.imag()));
                out += buf;
                out += "i)";
            }
            return;
        }
        case Tag::Var: out += (n.var == 0 ? "z" : "z2"); return;
        case Tag::Neg:
            out += "(-";
            print_node(n.kids[0], out);
            out += ")";
            return;
        case Tag::Add:
        case Tag::Sub:
        case Tag::Mul:
        case Tag::Div: {
            const char op = n.tag == Tag::Add ? '+' : n.tag == Tag::Sub ? '-'
                            : n.tag == Tag::Mul ? '*' : '/';
            out += "(";
            print_node(n.kids[0], out);
            out += op;
            print_node(n.kids[1], out);
            out += ")";
            return;
        }
        case Tag::Pow: {
            out += "(";
            print_node(n.kids[0], out);
            out += ")^";
            out += std::to_string(n.ipow);
            return;
        }
        case Tag::Call:
            out += n.fn;
            out += "(";
            print_node(n.kids[0], out);
            out += ")";
            return;
    }
}

} // namespace detail

inline SymbolExpr parse_symbol(const std::string& text) {
    detail::SymbolParser p(text);
    SymbolExpr e;
    e.root = p.parse();
    e.source = text;
    return e;
}

inline cplx eval_symbol(const SymbolExpr& expr, const Point& p) {
    return detail::eval_node(expr.root, p);
}

// Fully parenthesized canonical form; parse(print(parse(s))) is a fixed point.
inline std::string print_symbol(const SymbolExpr& expr) {
    std::string out;
    detail::print_node(expr.root, out);
    return out;
}

// Total-degree bound when the expression is a polynomial in the coordinates and
// their conjugates; nullopt otherwise. Used to size exact quadrature rules and
// inner truncations.
inline std::optional<int> polynomial_bandwidth(const SymbolNode& n) {
    using Tag = SymbolNode::Tag;
    switch (n.tag) {
        case Tag::Const: return 0;
        case Tag::Var: return 1;
        case Tag::Neg: return polynomial_bandwidth(n.kids[0]);
        case Tag::Add:
        case Tag::Sub: {
            auto a = polynomial_bandwidth(n.kids[0]);
            auto b = polynomial_bandwidth(n.kids[1]);
            if (!a || !b) return std::nullopt;
            return std::max(*a, *b);
        }
        case Tag::Mul: {
            auto a = polynomial_bandwidth(n.kids[0]);
            auto b = polynomial_bandwidth(n.kids[1]);
            if (!a || !b) return std::nullopt;
            return *a + *b;
        }
        case Tag::Div: {
            auto a = polynomial_bandwidth(n.kids[0]);
            if (!a) return std::nullopt;
            if (n.kids[1].tag == Tag::Const) return a;
            return std::nullopt;
        }
        case Tag::Pow: {
            auto a = polynomial_bandwidth(n.kids[0]);
            if (!a || n.ipow < 0) return std::nullopt;
            return *a * n.ipow;
        }
        case Tag::Call: {
            if (n.fn == "conj" || n.fn == "re" || n.fn == "im")
                return polynomial_bandwidth(n.kids[0]);
            return std::nullopt;
        }
    }
    return std::nullopt;
}

inline std::optional<int> polynomial_bandwidth(const SymbolExpr& e) {
    return polynomial_bandwidth(e.root);
}

namespace detail {

inline bool radial_safe(const SymbolNode& n) {
    using Tag = SymbolNode::Tag;
    switch (n.tag) {
        case Tag::Const: return true;
        case Tag::Var: return false;
        case Tag::Call:
            if (n.fn == "abs" && n.kids[0].tag == Tag::Var && n.kids[0].var == 0) return true;
            return radial_safe(n.kids[0]);
        case Tag::Mul: {
            const SymbolNode& a = n.kids[0];
            const SymbolNode& b = n.kids[1];
            auto is_z = [](const SymbolNode& k) { return k.tag == Tag::Var && k.var == 0; };
            auto is_conj_z = [&](const SymbolNode& k) {
                return k.tag == Tag::Call && k.fn == "conj" && is_z(k.kids[0]);
            };
            if ((is_z(a) && is_conj_z(b)) || (is_conj_z(a) && is_z(b))) return true;
            return radial_safe(a) && radial_safe(b);
        }
        case Tag::Neg:
        case Tag::Pow: return radial_safe(n.kids[0]);
        case Tag::Add:
        case Tag::Sub:
        case Tag::Div: return radial_safe(n.kids[0]) && radial_safe(n.kids[1]);
    }
    return false;
}

inline bool mentions_z2(const SymbolNode& n) {
    if (n.tag == SymbolNode::Tag::Var && n.var == 1) return true;
    for (const auto& k : n.kids)
        if (mentions_z2(k)) return true;
    return false;
}

} // namespace detail

// Best-effort syntactic test that the symbol depends on z only through |z|;
// used as an angular-integration shortcut, never for correctness.
inline bool is_radial(const SymbolExpr& e) {
    return !detail::mentions_z2(e.root) && detail::radial_safe(e.root);
}

// User-asserted symbol class flags. They gate which diagnostics run before an
// experiment; the library never treats them as proven facts.
struct SymbolClassTags {
    bool bounded = false;
    bool continuous_up_to_boundary = false;
    bool vanishes_at_boundary = false;
    bool vanishing_oscillation = false;
};

// Type-erased evaluable symbol: every operator/Berezin routine consumes this,
// so tests can inject symbols (step functions, bumps) that the expression
// grammar does not cover. Parsed expressions carry their bandwidth and
// radiality along.
struct SymbolFn {
    std::function<cplx(const Point&)> eval;
    std::optional<int> bandwidth; // polynomial total degree, if polynomial
    bool radial = false;
    std::string label;

    cplx operator()(const Point& p) const { return eval(p); }

    static SymbolFn from_expr(const SymbolExpr& e) {
        SymbolFn s;
        s.eval = [e](const Point& p) { return eval_symbol(e, p); };
        s.bandwidth = polynomial_bandwidth(e);
        s.radial = is_radial(e);
        s.label = e.source;
        return s;
    }

    static SymbolFn from_function(std::function<cplx(const Point&)> fn, std::string label,
                                  std::optional<int> bandwidth = std::nullopt,
                                  bool radial = false) {
        SymbolFn s;
        s.eval = std::move(fn);
        s.bandwidth = bandwidth;
        s.radial = radial;
        s.label = std::move(label);
        return s;
    }

    static SymbolFn constant(cplx c) {
        SymbolFn s;
        s.eval = [c](const Point&) { return c; };
        s.bandwidth = 0;
        s.radial = true;
        s.label = "const";
        return s;
    }

    // Pointwise product, used for the fg side of semi-commutators.
    static SymbolFn product(const SymbolFn& a, const SymbolFn& b) {
        SymbolFn s;
        auto ea = a.eval, eb = b.eval;
        s.eval = [ea, eb](const Point& p) { return ea(p) * eb(p); };
        if (a.bandwidth && b.bandwidth) s.bandwidth = *a.bandwidth + *b.bandwidth;
        s.radial = a.radial && b.radial;
        s.label = "(" + a.label + ")*(" + b.label + ")";
        return s;
    }

    static SymbolFn conjugate(const SymbolFn& a) {
        SymbolFn s;
        auto ea = a.eval;
        s.eval = [ea](const Point& p) { return std::conj(ea(p)); };
        s.bandwidth = a.bandwidth;
        s.radial = a.radial;
        s.label = "conj(" + a.label + ")";
        return s;
    }

    static SymbolFn reciprocal(const SymbolFn& a, double floor_abs) {
        SymbolFn s;
        auto ea = a.eval;
        auto label = a.label;
        s.eval = [ea, floor_abs, label](const Point& p) {
            const cplx v = ea(p);
            if (std::abs(v) < floor_abs)
                throw numeric_error("reciprocal symbol 1/(" + label + "): |value| < " +
                                    std::to_string(floor_abs) + " at a node");
            return 1.0 / v;
        };
        s.radial = a.radial;
        s.label = "1/(" + a.label + ")";
        return s;
    }
};

} // namespace plurispec
