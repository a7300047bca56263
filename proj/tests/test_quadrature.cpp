#include <doctest.h>

#include <cmath>

#include "plurispec/quadrature.hpp"
#include "plurispec/symbol.hpp"

using namespace plurispec;

namespace {

// Independent oracle: raw midpoint integration of f against dv_lambda on the
// disk, no Gauss machinery involved.
double midpoint_disk(double lambda, const std::function<double(cplx)>& f, int n) {
    const double h = 2.0 / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x = -1.0 + (i + 0.5) * h;
            const double y = -1.0 + (j + 0.5) * h;
            const double r2 = x * x + y * y;
            if (r2 >= 1.0) continue;
            sum += f(cplx{x, y}) * std::pow(1.0 - r2, lambda) * h * h;
        }
    }
    return sum * (lambda + 1.0) / kPi;
}

double midpoint_fock(double lambda, const std::function<double(cplx)>& f, int n, double cut) {
    const double h = 2.0 * cut / n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x = -cut + (i + 0.5) * h;
            const double y = -cut + (j + 0.5) * h;
            sum += f(cplx{x, y}) * std::exp(-lambda * (x * x + y * y)) * h * h;
        }
    }
    return sum * lambda / kPi;
}

} // namespace

TEST_CASE("closed-form moments agree with raw midpoint integration") {
    // |z|^2 against dv_0 on the disk is 1/2.
    const double disk_val = midpoint_disk(0.0, [](cplx z) { return std::norm(z); }, 2000);
    CHECK(disk_val == doctest::Approx(0.5).epsilon(2e-4));
    CHECK(moment_closed_form(DomainKind::UnitDisk, 0.0, 1, 1) == doctest::Approx(0.5));

    // |z|^4 against dv_1 on the plane is 2.
    const double fock_val = midpoint_fock(1.0, [](cplx z) { return std::norm(z) * std::norm(z); },
                                          1500, 8.0);
    CHECK(fock_val == doctest::Approx(2.0).epsilon(2e-3));
    CHECK(moment_closed_form(DomainKind::FockPlane, 1.0, 2, 2) == doctest::Approx(2.0));
}

TEST_CASE("rule moments match the Gamma/Beta closed forms") {
    for (double lam : {0.0, 0.5, 5.0}) {
        const SpaceSpec s{DomainKind::UnitDisk, lam, SpaceFlavor::Holo};
        const auto rule = rule_for(s, 24, 64);
        CHECK(quadrature_moment(rule, 0, 0) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(quadrature_moment(rule, 1, 1) ==
              doctest::Approx(1.0 / (lam + 2.0)).epsilon(1e-13));
        CHECK(quadrature_moment(rule, 1, 0) == 0.0);
        for (int d = 0; d <= 24; ++d)
            CHECK(std::abs(quadrature_moment(rule, d, d) -
                           moment_closed_form(DomainKind::UnitDisk, lam, d, d)) <
                  1e-12 * std::max(1.0, moment_closed_form(DomainKind::UnitDisk, lam, d, d)));
    }
    for (double lam : {0.5, 1.0, 20.0}) {
        const SpaceSpec s{DomainKind::FockPlane, lam, SpaceFlavor::Holo};
        const auto rule = rule_for(s, 24, 64);
        CHECK(quadrature_moment(rule, 1, 1) == doctest::Approx(1.0 / lam).epsilon(1e-13));
        for (int d = 0; d <= 24; ++d) {
            const double m = moment_closed_form(DomainKind::FockPlane, lam, d, d);
            CHECK(std::abs(quadrature_moment(rule, d, d) - m) <= 1e-12 * std::max(1.0, m));
        }
    }
}

TEST_CASE("frozen small-rule nodes: shifted Legendre and Laguerre") {
    // Disk at lambda 0, 2 radial nodes: shifted Gauss-Legendre on [0,1].
    const auto disk = rule_for(SpaceSpec{DomainKind::UnitDisk, 0.0, SpaceFlavor::Holo}, 3, 8);
    REQUIRE(disk.radial_x.size() == 2);
    CHECK(disk.radial_x[0] == doctest::Approx(0.5 - 0.5 / std::sqrt(3.0)).epsilon(1e-13));
    CHECK(disk.radial_x[1] == doctest::Approx(0.5 + 0.5 / std::sqrt(3.0)).epsilon(1e-13));
    CHECK(disk.radial_w[0] == doctest::Approx(0.5).epsilon(1e-13));

    // Fock: Gauss-Laguerre, 2 nodes at 2 -+ sqrt(2).
    const auto fock = rule_for(SpaceSpec{DomainKind::FockPlane, 1.0, SpaceFlavor::Holo}, 3, 8);
    REQUIRE(fock.radial_x.size() == 2);
    CHECK(fock.radial_x[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-13));
    CHECK(fock.radial_x[1] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-13));
    CHECK(fock.radial_w[0] == doctest::Approx((2.0 + std::sqrt(2.0)) / 4.0).epsilon(1e-13));
    CHECK(fock.radial_w[1] == doctest::Approx((2.0 - std::sqrt(2.0)) / 4.0).epsilon(1e-13));
    CHECK(fock.tail_weight == fock.radial_w.back());
}

TEST_CASE("rule structure invariants") {
    const auto rule = rule_for(SpaceSpec{DomainKind::UnitDisk, 0.7, SpaceFlavor::Holo}, 12, 40);
    double total = 0.0;
    for (double w : rule.weights) {
        CHECK(w > 0.0);
        total += w;
    }
    CHECK(std::abs(total - 1.0) < 1e-13);

    // Deterministic for fixed inputs.
    const auto rule2 = rule_for(SpaceSpec{DomainKind::UnitDisk, 0.7, SpaceFlavor::Holo}, 12, 40);
    REQUIRE(rule.weights.size() == rule2.weights.size());
    for (std::size_t i = 0; i < rule.weights.size(); ++i) {
        CHECK(rule.weights[i] == rule2.weights[i]);
        CHECK(rule.nodes[i].z1 == rule2.nodes[i].z1);
    }

    CHECK_THROWS_AS(rule_for(SpaceSpec{DomainKind::UnitDisk, 0.7, SpaceFlavor::Holo}, 12, 24),
                    config_error); // angular order must exceed 2 * max_degree
}

TEST_CASE("integration of symbols over flattened nodes") {
    const SpaceSpec s{DomainKind::UnitDisk, 0.0, SpaceFlavor::Holo};
    const auto rule = rule_for(s, 12, 32);
    const auto f_const = SymbolFn::constant(cplx{2.5, -1.0});
    CHECK(std::abs(integrate([&](const Point& p) { return f_const(p); }, rule) -
                   cplx{2.5, -1.0}) < 1e-14);

    const auto f_zzbar = SymbolFn::from_expr(parse_symbol("z*conj(z)"));
    CHECK(integrate([&](const Point& p) { return f_zzbar(p); }, rule).real() ==
          doctest::Approx(0.5).epsilon(1e-13));

    // Angular exactness kills z and z^2 conj(z).
    CHECK(std::abs(integrate([](const Point& p) { return p.z1; }, rule)) < 1e-15);
    CHECK(std::abs(integrate([](const Point& p) { return p.z1 * p.z1 * std::conj(p.z1); }, rule)) <
          1e-15);

    // Non-finite values are reported with the node.
    CHECK_THROWS_AS(integrate([](const Point&) { return cplx{1.0 / 0.0, 0.0}; }, rule),
                    numeric_error);
}

TEST_CASE("inner product is conjugate symmetric by construction") {
    const SpaceSpec s{DomainKind::UnitDisk, 1.5, SpaceFlavor::Holo};
    const auto rule = rule_for(s, 8, 24);
    auto f = [](const Point& p) { return p.z1 * p.z1 + cplx{0.0, 0.3}; };
    auto g = [](const Point& p) { return std::conj(p.z1) + cplx{0.2, 0.0}; };
    const cplx a = inner_product(f, g, rule);
    const cplx b = inner_product(g, f, rule);
    CHECK(a == std::conj(b)); // bitwise: conjugation commutes with the reduction
}

TEST_CASE("basis orthonormality through the flat node path") {
    for (auto dom : {DomainKind::UnitDisk, DomainKind::FockPlane}) {
        const SpaceSpec s{dom, 1.5, SpaceFlavor::Plurih};
        const auto rule = rule_for(s, 16, 40);
        const auto basis = enumerate_basis(s, Truncation{4, 4, 0});
        for (std::size_t i = 0; i < basis.size(); ++i) {
            for (std::size_t j = 0; j < basis.size(); ++j) {
                const cplx ip = inner_product(
                    [&](const Point& p) { return eval_basis(s, basis[i], p); },
                    [&](const Point& p) { return eval_basis(s, basis[j], p); }, rule);
                CHECK(std::abs(ip - (i == j ? cplx{1.0, 0.0} : cplx{})) < 1e-12);
            }
        }
    }
}

TEST_CASE("doubling the angular order leaves exact moments unchanged") {
    const SpaceSpec s{DomainKind::UnitDisk, 0.5, SpaceFlavor::Holo};
    const auto r1 = rule_for(s, 10, 24);
    const auto r2 = rule_for(s, 10, 48);
    auto mono = [](int a, int b) {
        return [a, b](const Point& p) { return pow_int(p.z1, a) * pow_int(std::conj(p.z1), b); };
    };
    for (int a = 0; a <= 5; ++a)
        for (int b = 0; b <= 5; ++b)
            CHECK(std::abs(integrate(mono(a, b), r1) - integrate(mono(a, b), r2)) < 1e-13);
}

TEST_CASE("ball rule: probability mass and decoupled moments") {
    const SpaceSpec ball{DomainKind::UnitBall2, 0.5, SpaceFlavor::PlurihHolo2D};
    const auto rule = rule_for(ball, 10, 24);
    CHECK(std::abs(integrate([](const Point&) { return cplx{1.0, 0.0}; }, rule) -
                   cplx{1.0, 0.0}) < 1e-13);
    for (int a : {0, 1, 3})
        for (int c : {0, 1, 2})
            CHECK(quadrature_moment_ball2(rule, a, c) ==
                  doctest::Approx(moment_closed_form_ball2(0.5, a, c)).epsilon(1e-12));
    // Flat-path cross-check of one mixed ball moment.
    const cplx m11 = integrate(
        [](const Point& p) { return std::norm(p.z1) * std::norm(p.z2); }, rule);
    CHECK(m11.real() == doctest::Approx(moment_closed_form_ball2(0.5, 1, 1)).epsilon(1e-12));
}

TEST_CASE("rule JSON round-trip is bit-faithful") {
    const SpaceSpec s{DomainKind::FockPlane, 2.0, SpaceFlavor::Holo};
    const auto rule = rule_for(s, 6, 16);
    const auto j = rule_to_json(rule);
    const auto back = rule_from_json(j);
    REQUIRE(back.nodes.size() == rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        CHECK(back.nodes[i].z1 == rule.nodes[i].z1);
        CHECK(back.weights[i] == rule.weights[i]);
    }
    CHECK(back.max_degree == rule.max_degree);
}
