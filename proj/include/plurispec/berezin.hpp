#pragma once

#include <cmath>

#include "plurispec/errors.hpp"
#include "plurispec/operators.hpp"
#include "plurispec/quadrature.hpp"
#include "plurispec/spaces.hpp"
#include "plurispec/symbol.hpp"

namespace plurispec {

struct BerezinSample {
    Point z{};
    cplx value{};
    SpaceFlavor flavor = SpaceFlavor::Holo;
    double lambda = 0.0;
    double partial_kernel_mass = 1.0; // ||truncated kernel||^2 / K(z,z), operator transform only
    bool low_mass_warning = false;
};

// Berezin transform of a symbol at z, from closed-form kernels (no basis
// truncation). The holomorphic/anti-holomorphic cases integrate f against the
// kernel's probability measure moved to z: a plain translation on the plane and
// the Möbius pullback on the disk, both exact kernel identities that stay
// stable arbitrarily close to the boundary. The pluriharmonic case integrates
// the squared kernel directly.
inline cplx berezin_symbol(const SpaceSpec& space, const SymbolFn& f, const Point& z,
                           const QuadratureRule& rule) {
    space.validate();
    if (!domain_contains(space.domain, z))
        throw domain_error("berezin_symbol: point outside domain");
    if (space.domain == DomainKind::UnitBall2)
        throw config_error("berezin_symbol: not provided on UnitBall2");
    const double lam = space.lambda;

    if (space.flavor == SpaceFlavor::Holo || space.flavor == SpaceFlavor::AntiHolo) {
        // |k_ah(., z)| = |k(., z)| pointwise, so both flavors share one value.
        if (space.domain == DomainKind::FockPlane)
            return integrate([&](const Point& u) { return f(Point{z.z1 + u.z1, cplx{}}); }, rule);
        return integrate(
            [&](const Point& u) { return f(Point{disk_involution(z.z1, u.z1), cplx{}}); }, rule);
    }
    if (space.flavor == SpaceFlavor::Plurih) {
        const SpaceSpec holo{space.domain, lam, SpaceFlavor::Holo};
        const double den = kernel(SpaceSpec{space.domain, lam, SpaceFlavor::Plurih}, z, z).real();
        const cplx num = integrate(
            [&](const Point& w) {
                const cplx k = kernel(holo, w, z);
                const double kph = 2.0 * k.real() - 1.0;
                return f(w) * (kph * kph);
            },
            rule);
        return num / den;
    }
    throw config_error("berezin_symbol: unsupported flavor");
}

inline cplx berezin_symbol(const SpaceSpec& space, const SymbolExpr& f, const Point& z,
                           const QuadratureRule& rule) {
    return berezin_symbol(space, SymbolFn::from_expr(f), z, rule);
}

// Where the transform at z actually samples the symbol for a given rule node:
// the recentered/pulled-back point for the kernel-covariant flavors, the node
// itself for the direct pluriharmonic integral. The transform value is a
// weighted average over these points, so sup |f| over them bounds it.
inline Point berezin_eval_point(const SpaceSpec& space, const Point& z, const Point& node) {
    if (space.flavor == SpaceFlavor::Holo || space.flavor == SpaceFlavor::AntiHolo) {
        if (space.domain == DomainKind::FockPlane) return Point{z.z1 + node.z1, cplx{}};
        if (space.domain == DomainKind::UnitDisk)
            return Point{disk_involution(z.z1, node.z1), cplx{}};
    }
    return node;
}

// Berezin transform of a truncated operator: v^H m v / ||v||^2 with v the
// coefficient vector of the truncated kernel at z. The partial-kernel mass
// ||v||^2 / K(z,z) is reported so truncation artifacts are visible.
inline BerezinSample berezin_operator(const SpaceSpec& space, const OperatorMatrix& m,
                                      const Point& z) {
    if (!m.square() || m.row_basis != m.col_basis)
        throw config_error("berezin_operator: square truncation over one basis expected");
    if (!domain_contains(space.domain, z))
        throw domain_error("berezin_operator: point outside domain");
    CVector v(static_cast<Eigen::Index>(m.row_basis.size()));
    for (std::size_t k = 0; k < m.row_basis.size(); ++k)
        v(static_cast<Eigen::Index>(k)) = std::conj(eval_basis(space, m.row_basis[k], z));
    const double den = v.squaredNorm();
    if (!(den > 0.0)) throw numeric_error("berezin_operator: vanishing truncated kernel");
    BerezinSample s;
    s.z = z;
    s.flavor = space.flavor;
    s.lambda = space.lambda;
    s.value = cplx(v.adjoint() * (m.entries * v)) / den;
    s.partial_kernel_mass = den / kernel(space, z, z).real();
    s.low_mass_warning = s.partial_kernel_mass < 0.5;
    return s;
}

// MO_lambda(f, z) = B(|f|^2)(z) - |B(f)(z)|^2, holomorphic Berezin transform.
// Nonnegative up to rounding (it is a variance under a probability measure);
// tiny negative noise is clipped.
inline double mean_oscillation(const SpaceSpec& space, const SymbolFn& f, const Point& z,
                               const QuadratureRule& rule) {
    const SpaceSpec holo{space.domain, space.lambda, SpaceFlavor::Holo};
    const SymbolFn f2 = SymbolFn::from_function(
        [f](const Point& p) { return cplx{std::norm(f(p)), 0.0}; }, "|" + f.label + "|^2",
        f.bandwidth ? std::optional<int>(2 * *f.bandwidth) : std::nullopt, f.radial);
    const double b2 = berezin_symbol(holo, f2, z, rule).real();
    const cplx b1 = berezin_symbol(holo, f, z, rule);
    return std::max(0.0, b2 - std::norm(b1));
}

// Sampled lower bound of sup{|f(z) - f(w)| : d(z, w) <= 1}: deterministic
// golden-angle spiral over the metric unit ball, mapped through the disk
// involution when the metric is hyperbolic.
inline double oscillation(const SymbolFn& f, const Point& z, DomainKind domain, int n_samples,
                          std::uint64_t seed = 0) {
    if (domain == DomainKind::UnitBall2)
        throw config_error("oscillation: not provided on UnitBall2");
    if (!domain_contains(domain, z)) throw domain_error("oscillation: point outside domain");
    if (n_samples < 1) throw config_error("oscillation: need at least one sample");
    const double golden = 0.6180339887498949;
    const double offset = 2.0 * kPi * static_cast<double>(seed % 1024u) / 1024.0;
    const double ball_radius = domain == DomainKind::FockPlane ? 1.0 : std::tanh(1.0);
    const cplx f0 = f(z);
    double best = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const double r = ball_radius * std::sqrt(double(k + 1) / n_samples);
        const double th = offset + 2.0 * kPi * std::fmod(golden * (k + 1), 1.0);
        const cplx u = r * cplx{std::cos(th), std::sin(th)};
        Point w;
        if (domain == DomainKind::FockPlane)
            w.z1 = z.z1 + u;
        else
            w.z1 = disk_involution(z.z1, u);
        if (!domain_contains(domain, w)) continue; // boundary rounding only
        best = std::max(best, std::abs(f0 - f(w)));
    }
    return best;
}

} // namespace plurispec
