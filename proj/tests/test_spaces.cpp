#include <doctest.h>

#include <cmath>

#include "plurispec/quadrature.hpp"
#include "plurispec/spaces.hpp"

using namespace plurispec;

TEST_CASE("basis enumeration follows the documented order") {
    const SpaceSpec disk{DomainKind::UnitDisk, 1.0, SpaceFlavor::Plurih};
    const auto b = enumerate_basis(disk, Truncation{1, 1, 0});
    REQUIRE(b.size() == 3);
    CHECK(b[0] == BasisIndex::holo(0));
    CHECK(b[1] == BasisIndex::holo(1));
    CHECK(b[2] == BasisIndex::anti(1));

    const SpaceSpec fock{DomainKind::FockPlane, 2.0, SpaceFlavor::Holo};
    const auto h = enumerate_basis(fock, Truncation{0, 0, 0});
    REQUIRE(h.size() == 1);
    CHECK(h[0] == BasisIndex::holo(0));

    // Degenerate pluriharmonic truncation: the constants only.
    const auto c = enumerate_basis(disk, Truncation{0, 0, 0});
    REQUIRE(c.size() == 1);
    CHECK(c[0] == BasisIndex::holo(0));

    // The anti-holomorphic flavor spans the complement of the constants.
    const SpaceSpec anti{DomainKind::UnitDisk, 1.0, SpaceFlavor::AntiHolo};
    const auto a = enumerate_basis(anti, Truncation{5, 3, 0});
    REQUIRE(a.size() == 3);
    CHECK(a[0] == BasisIndex::anti(1));
    CHECK(a[2] == BasisIndex::anti(3));
}

TEST_CASE("ball basis enumeration groups by the second index") {
    const SpaceSpec ball{DomainKind::UnitBall2, 0.0, SpaceFlavor::PlurihHolo2D};
    const auto b = enumerate_basis(ball, Truncation{1, 1, 1});
    // Hand enumeration: per a2 block [plus(0,.), plus(1,.), minus(1,.)], a2 = 0, 1.
    REQUIRE(b.size() == 6);
    CHECK(b[0] == BasisIndex::plus(0, 0));
    CHECK(b[1] == BasisIndex::plus(1, 0));
    CHECK(b[2] == BasisIndex::minus(1, 0));
    CHECK(b[3] == BasisIndex::plus(0, 1));
    CHECK(b[4] == BasisIndex::plus(1, 1));
    CHECK(b[5] == BasisIndex::minus(1, 1));
}

TEST_CASE("space/flavor compatibility is enforced") {
    CHECK_THROWS_AS(SpaceSpec(DomainKind::UnitBall2, 0.0, SpaceFlavor::Holo).validate(),
                    config_error);
    CHECK_THROWS_AS(SpaceSpec(DomainKind::UnitDisk, 0.0, SpaceFlavor::PlurihHolo2D).validate(),
                    config_error);
    CHECK_THROWS_AS(SpaceSpec(DomainKind::FockPlane, 0.0, SpaceFlavor::Holo).validate(),
                    config_error); // fock needs lambda > 0
    CHECK_THROWS_AS(SpaceSpec(DomainKind::UnitDisk, -1.0, SpaceFlavor::Holo).validate(),
                    config_error);
    const SpaceSpec disk{DomainKind::UnitDisk, 0.0, SpaceFlavor::Holo};
    CHECK_THROWS_AS(basis_coefficient(disk, BasisIndex::anti(1)), config_error);
    CHECK_THROWS_AS(basis_coefficient(disk, BasisIndex::plus(0, 0)), config_error);
}

TEST_CASE("basis coefficients against the moment oracles") {
    // Constants have unit norm under a probability measure.
    for (double lam : {0.0, 0.7, 3.0})
        CHECK(basis_coefficient(SpaceSpec{DomainKind::UnitDisk, lam, SpaceFlavor::Holo},
                                BasisIndex::holo(0)) == doctest::Approx(1.0).epsilon(1e-14));

    // Disk, lambda = 0, a = 1: the beta integral gives ||z||^2 = 1/2.
    CHECK(basis_coefficient(SpaceSpec{DomainKind::UnitDisk, 0.0, SpaceFlavor::Holo},
                            BasisIndex::holo(1)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    // Fock, lambda = 1, a = 2: the Gaussian moment gives ||z^2||^2 = 2.
    CHECK(basis_coefficient(SpaceSpec{DomainKind::FockPlane, 1.0, SpaceFlavor::Holo},
                            BasisIndex::holo(2)) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

    // General consistency: coefficient^2 * closed-form moment = 1.
    for (double lam : {0.25, 2.0}) {
        const SpaceSpec s{DomainKind::UnitDisk, lam, SpaceFlavor::Holo};
        for (int a = 0; a <= 20; ++a) {
            const double c = basis_coefficient(s, BasisIndex::holo(a));
            const double m = moment_closed_form(DomainKind::UnitDisk, lam, a, a);
            CHECK(c * c * m == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("squared monomial norms are log-convex (Cauchy-Schwarz oracle)") {
    for (auto dom : {DomainKind::UnitDisk, DomainKind::FockPlane}) {
        for (double lam : {0.5, 1.0, 5.0}) {
            const SpaceSpec s{dom, lam, SpaceFlavor::Holo};
            for (int a = 1; a <= 50; ++a) {
                const double ca = basis_coefficient(s, BasisIndex::holo(a));
                CHECK(ca > 0.0);
                // m_a^2 <= m_{a-1} m_{a+1}  <=>  c_a^2 >= c_{a-1} c_{a+1}.
                const double lhs = 2.0 * log_basis_coefficient(s, BasisIndex::holo(a));
                const double rhs = log_basis_coefficient(s, BasisIndex::holo(a - 1)) +
                                   log_basis_coefficient(s, BasisIndex::holo(a + 1));
                CHECK(lhs >= rhs - 1e-12);
            }
        }
    }
}

TEST_CASE("basis evaluation") {
    const SpaceSpec disk0{DomainKind::UnitDisk, 0.0, SpaceFlavor::Plurih};
    CHECK(eval_basis(disk0, BasisIndex::holo(0), Point{cplx{0.3, 0.2}, {}}) == cplx{1.0, 0.0});
    // anti b=1 at z = 0.5: conj is real here.
    CHECK(eval_basis(disk0, BasisIndex::anti(1), Point{cplx{0.5, 0.0}, {}}).real() ==
          doctest::Approx(std::sqrt(2.0) * 0.5).epsilon(1e-14));
    CHECK_THROWS_AS(eval_basis(disk0, BasisIndex::holo(1), Point{cplx{1.5, 0.0}, {}}),
                    domain_error);
}

TEST_CASE("ball basis factorizes into shifted-weight disk factors") {
    const double lam = 0.6;
    const SpaceSpec ball{DomainKind::UnitBall2, lam, SpaceFlavor::PlurihHolo2D};
    const Point z{cplx{0.35, -0.2}, cplx{0.4, 0.25}};
    for (int a1 : {0, 1, 3}) {
        for (int a2 : {0, 1, 2}) {
            const cplx whole = eval_basis(ball, BasisIndex::plus(a1, a2), z);
            const SpaceSpec d1{DomainKind::UnitDisk, a2 + lam + 1.0, SpaceFlavor::Holo};
            const SpaceSpec d2{DomainKind::UnitDisk, lam + 1.0, SpaceFlavor::Holo};
            const cplx split = eval_basis(d1, BasisIndex::holo(a1), Point{z.z1, {}}) *
                               eval_basis(d2, BasisIndex::holo(a2), Point{z.z2, {}});
            CHECK(std::abs(whole - split) < 1e-12);
        }
    }
    // Minus flavor conjugates the first factor.
    const cplx m = eval_basis(ball, BasisIndex::minus(2, 1), z);
    const SpaceSpec d1{DomainKind::UnitDisk, 1.0 + lam + 1.0, SpaceFlavor::Plurih};
    const SpaceSpec d2{DomainKind::UnitDisk, lam + 1.0, SpaceFlavor::Holo};
    const cplx split = eval_basis(d1, BasisIndex::anti(2), Point{z.z1, {}}) *
                       eval_basis(d2, BasisIndex::holo(1), Point{z.z2, {}});
    CHECK(std::abs(m - split) < 1e-12);
}

TEST_CASE("kernel values and symmetries") {
    const SpaceSpec disk{DomainKind::UnitDisk, 1.3, SpaceFlavor::Holo};
    CHECK(std::abs(kernel(disk, Point{cplx{0.7, 0.1}, {}}, Point{}) - cplx{1.0, 0.0}) < 1e-15);

    const SpaceSpec ph{DomainKind::UnitDisk, 1.3, SpaceFlavor::Plurih};
    CHECK(std::abs(kernel(ph, Point{}, Point{}) - cplx{1.0, 0.0}) < 1e-15);

    const SpaceSpec fock{DomainKind::FockPlane, 2.0, SpaceFlavor::Holo};
    const Point z{cplx{std::sqrt(0.5), 0.0}, {}};
    CHECK(kernel(fock, z, z).real() == doctest::Approx(std::exp(1.0)).epsilon(1e-14));

    const Point w{cplx{0.3, 0.4}, {}}, v{cplx{-0.2, 0.5}, {}};
    for (const auto& sp : {disk, ph}) {
        const cplx kwz = kernel(sp, w, v);
        const cplx kzw = kernel(sp, v, w);
        CHECK(std::abs(kwz - std::conj(kzw)) < 1e-13);
    }
    CHECK(kernel(ph, w, w).imag() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("partial kernel sums converge monotonically on a ray") {
    const SpaceSpec sp{DomainKind::UnitDisk, 0.5, SpaceFlavor::Plurih};
    const Point w{cplx{0.6, 0.0}, {}}, z{cplx{0.3, 0.0}, {}};
    const cplx full = kernel(sp, w, z);
    double prev_err = std::abs(full);
    for (int d : {2, 4, 8, 16, 32}) {
        cplx partial{};
        for (const auto& ix : enumerate_basis(sp, Truncation{d, d, 0}))
            partial += eval_basis(sp, ix, w) * std::conj(eval_basis(sp, ix, z));
        const double err = std::abs(full - partial);
        CHECK(err < prev_err + 1e-15);
        prev_err = err;
    }
    CHECK(prev_err < 1e-10);
}

TEST_CASE("reproducing identity at truncation") {
    const SpaceSpec sp{DomainKind::UnitDisk, 1.0, SpaceFlavor::Plurih};
    const QuadratureRule rule = rule_for(sp, 16, 40);
    // p(z) = 2 z^2 - conj(z) + 0.5, inside the span of the truncated basis.
    auto p = [](const Point& q) {
        return 2.0 * q.z1 * q.z1 - std::conj(q.z1) + cplx{0.5, 0.0};
    };
    const auto basis = enumerate_basis(sp, Truncation{4, 4, 0});
    for (const cplx zv : {cplx{0.4, 0.1}, cplx{-0.2, 0.6}, cplx{0.0, 0.0}}) {
        const Point z{zv, {}};
        cplx rec{};
        for (const auto& ix : basis) {
            const cplx coef =
                inner_product(p, [&](const Point& q) { return eval_basis(sp, ix, q); }, rule);
            rec += coef * eval_basis(sp, ix, z);
        }
        CHECK(std::abs(rec - p(z)) < 1e-10);
    }
}

TEST_CASE("metric distances") {
    CHECK(metric_distance(DomainKind::FockPlane, Point{cplx{1, 1}, {}}, Point{cplx{1, 1}, {}}) ==
          0.0);
    CHECK(metric_distance(DomainKind::FockPlane, Point{}, Point{cplx{3.0, 4.0}, {}}) ==
          doctest::Approx(5.0));
    const double b = metric_distance(DomainKind::UnitDisk, Point{}, Point{cplx{0.5, 0.0}, {}});
    CHECK(b == doctest::Approx(std::atanh(0.5)).epsilon(1e-14));
    CHECK(metric_distance(DomainKind::UnitDisk, Point{cplx{0.5, 0.0}, {}}, Point{}) ==
          doctest::Approx(b).epsilon(1e-14));
    // Symmetric and zero iff equal, sampled.
    const Point a{cplx{0.3, -0.4}, {}}, c{cplx{-0.1, 0.2}, {}};
    CHECK(metric_distance(DomainKind::UnitDisk, a, c) ==
          doctest::Approx(metric_distance(DomainKind::UnitDisk, c, a)).epsilon(1e-13));
    CHECK(metric_distance(DomainKind::UnitDisk, a, c) > 0.0);
    CHECK_THROWS_AS(metric_distance(DomainKind::UnitBall2, Point{}, Point{}), config_error);
}
