#include <doctest.h>

#include <cmath>

#include "plurispec/symbol.hpp"

using namespace plurispec;

namespace {
cplx ev(const std::string& s, cplx z) {
    return eval_symbol(parse_symbol(s), Point{z, {}});
}
} // namespace

TEST_CASE("literal and arithmetic evaluation") {
    CHECK(ev("1", {}) == cplx{1.0, 0.0});
    CHECK(ev("z*conj(z)", cplx{0.5, 0.0}) == cplx{0.25, 0.0});
    CHECK(std::abs(ev("(z+conj(z))/2", cplx{0.3, 0.4}) - cplx{0.3, 0.0}) < 1e-15);
    CHECK(ev("exp(z)", {}) == cplx{1.0, 0.0});
    CHECK(std::abs(ev("abs(z)^2", cplx{1.0, 1.0}) - cplx{2.0, 0.0}) < 1e-15);
    CHECK(std::abs(ev("sin(log(1-z*conj(z)))", {})) < 1e-15);
    CHECK(ev("1.5i", {}) == cplx{0.0, 1.5});
    CHECK(ev("i", {}) == cplx{0.0, 1.0});
    CHECK(std::abs(ev("2+3i", {}) - cplx{2.0, 3.0}) < 1e-15);
    CHECK(std::abs(ev("(z-conj(z))/(2i)", cplx{0.3, 0.4}) - cplx{0.4, 0.0}) < 1e-15);
}

TEST_CASE("precedence and associativity") {
    CHECK(ev("1+2*3", {}).real() == doctest::Approx(7.0));
    CHECK(ev("2*3^2", {}).real() == doctest::Approx(18.0)); // ^ binds over *
    CHECK(ev("8/4/2", {}).real() == doctest::Approx(1.0));  // left associative
    CHECK(ev("1-2-3", {}).real() == doctest::Approx(-4.0));
    // Per the grammar the unary minus is inside the power base: (-2)^2.
    CHECK(ev("-2^2", {}).real() == doctest::Approx(4.0));
    CHECK(ev("z^-1", cplx{2.0, 0.0}).real() == doctest::Approx(0.5));
}

TEST_CASE("the radial step symbol used for boundary experiments") {
    // arg of a negative real is pi, of a positive real 0.
    const auto step = parse_symbol("arg(abs(z) - 0.5)/3.141592653589793");
    CHECK(eval_symbol(step, Point{cplx{0.2, 0.1}, {}}).real() == doctest::Approx(1.0));
    CHECK(eval_symbol(step, Point{cplx{0.7, 0.0}, {}}).real() == doctest::Approx(0.0));
    CHECK(is_radial(SymbolExpr{step.root, step.source}));
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_WITH_AS(parse_symbol(""), "symbol parse error: empty expression", config_error);
    CHECK_THROWS_AS(parse_symbol("z+"), config_error);
    CHECK_THROWS_AS(parse_symbol("(z"), config_error);
    CHECK_THROWS_AS(parse_symbol("foo(z)"), config_error);  // unknown function
    CHECK_THROWS_AS(parse_symbol("w+1"), config_error);     // unknown identifier
    CHECK_THROWS_AS(parse_symbol("conj(z, z)"), config_error); // arity
    CHECK_THROWS_AS(parse_symbol("z^z"), config_error);     // integer exponent only
    CHECK_THROWS_AS(parse_symbol("z 1"), config_error);     // trailing input
}

TEST_CASE("evaluation errors name the node position") {
    CHECK_THROWS_AS(ev("1/(z-z)", cplx{0.5, 0.0}), numeric_error);
    CHECK_THROWS_AS(ev("log(z)", cplx{0.0, 0.0}), numeric_error);
    CHECK_THROWS_AS(ev("(z-z)^-2", cplx{0.1, 0.0}), numeric_error);
}

TEST_CASE("printer round-trip is a fixed point") {
    for (const char* src :
         {"1", "z*conj(z)", "(z+conj(z))/2", "-z^2+3*z-1.5i", "exp(sin(z))/(2+re(z))",
          "arg(abs(z)-0.5)/3.141592653589793", "z2*conj(z)", "sqrt(im(z))"}) {
        const auto e1 = parse_symbol(src);
        const std::string p1 = print_symbol(e1);
        const auto e2 = parse_symbol(p1);
        const std::string p2 = print_symbol(e2);
        CHECK(p1 == p2);
        // And the reprint evaluates identically.
        const Point at{cplx{0.31, -0.12}, cplx{0.2, 0.05}};
        CHECK(std::abs(eval_symbol(e1, at) - eval_symbol(e2, at)) < 1e-15);
    }
}

TEST_CASE("conjugation identity") {
    for (const char* src : {"z^3-2*z", "exp(z)", "(1+2i)*z+conj(z)^2", "sin(z)*cos(z)"}) {
        const auto e = parse_symbol(src);
        const auto ce = parse_symbol("conj(" + std::string(src) + ")");
        for (const cplx z : {cplx{0.3, 0.7}, cplx{-1.2, 0.4}, cplx{0.0, -0.9}}) {
            const Point p{z, {}};
            CHECK(std::abs(eval_symbol(ce, p) - std::conj(eval_symbol(e, p))) < 1e-13);
        }
    }
}

TEST_CASE("polynomial bandwidth analysis") {
    CHECK(*polynomial_bandwidth(parse_symbol("z*conj(z)")) == 2);
    CHECK(*polynomial_bandwidth(parse_symbol("(z+conj(z))/2")) == 1);
    CHECK(*polynomial_bandwidth(parse_symbol("z^3+z2")) == 3);
    CHECK(*polynomial_bandwidth(parse_symbol("re(z)*im(z)")) == 2);
    CHECK(!polynomial_bandwidth(parse_symbol("exp(z)")).has_value());
    CHECK(!polynomial_bandwidth(parse_symbol("1/(2+re(z))")).has_value());
    CHECK(!polynomial_bandwidth(parse_symbol("abs(z)")).has_value());
}

TEST_CASE("radial detection is conservative") {
    CHECK(is_radial(parse_symbol("z*conj(z)")));
    CHECK(is_radial(parse_symbol("abs(z)")));
    CHECK(is_radial(parse_symbol("exp(-abs(z)^2)+1")));
    CHECK(!is_radial(parse_symbol("z+conj(z)")));
    CHECK(!is_radial(parse_symbol("abs(z+1)")));
    CHECK(!is_radial(parse_symbol("z2*conj(z2)"))); // z2 dependence is never radial in z
}

TEST_CASE("two-variable symbols") {
    const auto e = parse_symbol("z1*z2+conj(z1)");
    const Point p{cplx{0.2, 0.1}, cplx{0.5, -0.5}};
    CHECK(std::abs(eval_symbol(e, p) - (p.z1 * p.z2 + std::conj(p.z1))) < 1e-15);
}
