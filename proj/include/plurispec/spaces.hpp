#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "plurispec/errors.hpp"
#include "plurispec/numeric.hpp"

namespace plurispec {

enum class DomainKind { FockPlane, UnitDisk, UnitBall2 };
enum class SpaceFlavor { Holo, AntiHolo, Plurih, PlurihHolo2D };

inline const char* to_string(DomainKind d) {
    switch (d) {
        case DomainKind::FockPlane: return "fock";
        case DomainKind::UnitDisk: return "disk";
        case DomainKind::UnitBall2: return "ball2";
    }
    return "?";
}

inline const char* to_string(SpaceFlavor f) {
    switch (f) {
        case SpaceFlavor::Holo: return "holo";
        case SpaceFlavor::AntiHolo: return "anti";
        case SpaceFlavor::Plurih: return "plurih";
        case SpaceFlavor::PlurihHolo2D: return "plurih_holo_2d";
    }
    return "?";
}

// A point of the domain. z2 is meaningful only on UnitBall2.
struct Point {
    cplx z1{};
    cplx z2{};
};

inline bool domain_contains(DomainKind d, const Point& p) {
    switch (d) {
        case DomainKind::FockPlane:
            return is_finite(p.z1);
        case DomainKind::UnitDisk:
            return std::abs(p.z1) < 1.0;
        case DomainKind::UnitBall2:
            return std::norm(p.z1) + std::norm(p.z2) < 1.0;
    }
    return false;
}

// Which function space is in play: domain, measure weight, and whether we look
// at holomorphic, anti-holomorphic (complement of the constants), pluriharmonic
// functions, or the two-variable ball space that is harmonic in z1 and
// holomorphic in z2.
struct SpaceSpec {
    DomainKind domain = DomainKind::UnitDisk;
    double lambda = 0.0;
    SpaceFlavor flavor = SpaceFlavor::Holo;

    void validate() const {
        if (domain == DomainKind::FockPlane && !(lambda > 0.0))
            throw config_error("SpaceSpec: FockPlane requires lambda > 0");
        if (domain != DomainKind::FockPlane && !(lambda > -1.0))
            throw config_error("SpaceSpec: bounded domains require lambda > -1");
        const bool is2d = (flavor == SpaceFlavor::PlurihHolo2D);
        if (is2d && domain != DomainKind::UnitBall2)
            throw config_error("SpaceSpec: PlurihHolo2D flavor is only valid on UnitBall2");
        if (!is2d && domain == DomainKind::UnitBall2)
            throw config_error("SpaceSpec: UnitBall2 supports only the PlurihHolo2D flavor");
    }

    std::string describe() const {
        return std::string(to_string(domain)) + "/lambda=" + std::to_string(lambda) + "/" +
               to_string(flavor);
    }
};

// One orthonormal basis element.
//   Holo  a       : z^a,            a >= 0
//   Anti  b       : conj(z)^b,      b >= 1  (the constant is carried by Holo 0)
//   Plus  (a1,a2) : z1^a1 z2^a2,    a1,a2 >= 0
//   Minus (b1,b2) : conj(z1)^b1 z2^b2, b1 >= 1, b2 >= 0
struct BasisIndex {
    enum class Kind { Holo, Anti, Plus, Minus };
    Kind kind = Kind::Holo;
    int d1 = 0; // degree in z1 (or conj z1)
    int d2 = 0; // degree in z2, 2D kinds only

    static BasisIndex holo(int a) { return {Kind::Holo, a, 0}; }
    static BasisIndex anti(int b) { return {Kind::Anti, b, 0}; }
    static BasisIndex plus(int a1, int a2) { return {Kind::Plus, a1, a2}; }
    static BasisIndex minus(int b1, int b2) { return {Kind::Minus, b1, b2}; }

    bool conjugated_first() const { return kind == Kind::Anti || kind == Kind::Minus; }
    bool two_dimensional() const { return kind == Kind::Plus || kind == Kind::Minus; }

    bool operator==(const BasisIndex& o) const {
        return kind == o.kind && d1 == o.d1 && d2 == o.d2;
    }

    std::string describe() const {
        switch (kind) {
            case Kind::Holo: return "holo(" + std::to_string(d1) + ")";
            case Kind::Anti: return "anti(" + std::to_string(d1) + ")";
            case Kind::Plus: return "plus(" + std::to_string(d1) + "," + std::to_string(d2) + ")";
            case Kind::Minus: return "minus(" + std::to_string(d1) + "," + std::to_string(d2) + ")";
        }
        return "?";
    }
};

// Finite basis cutoffs. max_holo and max_anti are inclusive top degrees for the
// z / conj(z) sides; max_second caps the z2 degree on UnitBall2.
struct Truncation {
    int max_holo = 0;
    int max_anti = 0;
    int max_second = 0;

    // Needed for the commutator Berezin antisymmetry check: the truncated space
    // is closed under conjugation iff the two sides are cut at the same degree.
    bool conjugation_symmetric() const { return max_holo == max_anti; }

    void validate() const {
        if (max_holo < 0 || max_anti < 0 || max_second < 0)
            throw config_error("Truncation: cutoffs must be >= 0");
    }
};

namespace detail {

inline void check_index(const SpaceSpec& space, const BasisIndex& idx) {
    const bool is2d = idx.two_dimensional();
    if (is2d != (space.flavor == SpaceFlavor::PlurihHolo2D))
        throw config_error("BasisIndex " + idx.describe() + " incompatible with space " +
                           space.describe());
    switch (idx.kind) {
        case BasisIndex::Kind::Holo:
            if (space.flavor == SpaceFlavor::AntiHolo)
                throw config_error("holo index on an anti-holomorphic space");
            if (idx.d1 < 0) throw config_error("holo degree must be >= 0");
            break;
        case BasisIndex::Kind::Anti:
            if (space.flavor == SpaceFlavor::Holo)
                throw config_error("anti index on a holomorphic space");
            if (idx.d1 < 1) throw config_error("anti degree must be >= 1");
            break;
        case BasisIndex::Kind::Plus:
            if (idx.d1 < 0 || idx.d2 < 0) throw config_error("plus degrees must be >= 0");
            break;
        case BasisIndex::Kind::Minus:
            if (idx.d1 < 1) throw config_error("minus first degree must be >= 1");
            if (idx.d2 < 0) throw config_error("minus second degree must be >= 0");
            break;
    }
}

} // namespace detail

// Deterministic basis enumeration. 1D flavors list the holomorphic side in
// ascending degree, then the anti-holomorphic side. PlurihHolo2D is grouped in
// blocks of constant second index a2, each block ordered like a 1D Plurih basis.
inline std::vector<BasisIndex> enumerate_basis(const SpaceSpec& space, const Truncation& trunc) {
    space.validate();
    trunc.validate();
    std::vector<BasisIndex> out;
    switch (space.flavor) {
        case SpaceFlavor::Holo:
            for (int a = 0; a <= trunc.max_holo; ++a) out.push_back(BasisIndex::holo(a));
            break;
        case SpaceFlavor::AntiHolo:
            for (int b = 1; b <= trunc.max_anti; ++b) out.push_back(BasisIndex::anti(b));
            break;
        case SpaceFlavor::Plurih:
            for (int a = 0; a <= trunc.max_holo; ++a) out.push_back(BasisIndex::holo(a));
            for (int b = 1; b <= trunc.max_anti; ++b) out.push_back(BasisIndex::anti(b));
            break;
        case SpaceFlavor::PlurihHolo2D:
            for (int a2 = 0; a2 <= trunc.max_second; ++a2) {
                for (int a1 = 0; a1 <= trunc.max_holo; ++a1)
                    out.push_back(BasisIndex::plus(a1, a2));
                for (int b1 = 1; b1 <= trunc.max_anti; ++b1)
                    out.push_back(BasisIndex::minus(b1, a2));
            }
            break;
    }
    return out;
}

// log of the normalizing constant that gives the monomial unit norm in
// L^2(dv_lambda). Everything is a Gamma ratio; kept in log space so degrees and
// weights up to a few hundred stay finite.
inline double log_basis_coefficient(const SpaceSpec& space, const BasisIndex& idx) {
    detail::check_index(space, idx);
    const double lam = space.lambda;
    switch (space.domain) {
        case DomainKind::FockPlane: {
            const double a = idx.d1;
            return 0.5 * (a * std::log(lam) - log_gamma(a + 1.0));
        }
        case DomainKind::UnitDisk: {
            const double a = idx.d1;
            return 0.5 * (log_gamma(a + lam + 2.0) - log_gamma(a + 1.0) - log_gamma(lam + 2.0));
        }
        case DomainKind::UnitBall2: {
            const double a1 = idx.d1, a2 = idx.d2;
            return 0.5 * (log_gamma(a1 + a2 + lam + 3.0) - log_gamma(a1 + 1.0) -
                          log_gamma(a2 + 1.0) - log_gamma(lam + 3.0));
        }
    }
    throw config_error("log_basis_coefficient: unknown domain");
}

inline double basis_coefficient(const SpaceSpec& space, const BasisIndex& idx) {
    const double c = std::exp(log_basis_coefficient(space, idx));
    if (!std::isfinite(c))
        throw numeric_error("basis_coefficient: overflow at index " + idx.describe());
    return c;
}

inline cplx pow_int(cplx base, int n) {
    cplx r{1.0, 0.0};
    cplx b = base;
    int k = n;
    while (k > 0) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

inline cplx eval_basis(const SpaceSpec& space, const BasisIndex& idx, const Point& p) {
    if (!domain_contains(space.domain, p))
        throw domain_error("eval_basis: point outside " + std::string(to_string(space.domain)));
    const double c = basis_coefficient(space, idx);
    switch (idx.kind) {
        case BasisIndex::Kind::Holo: return c * pow_int(p.z1, idx.d1);
        case BasisIndex::Kind::Anti: return c * pow_int(std::conj(p.z1), idx.d1);
        case BasisIndex::Kind::Plus: return c * pow_int(p.z1, idx.d1) * pow_int(p.z2, idx.d2);
        case BasisIndex::Kind::Minus:
            return c * pow_int(std::conj(p.z1), idx.d1) * pow_int(p.z2, idx.d2);
    }
    throw config_error("eval_basis: unknown index kind");
}

namespace detail {

// Holomorphic reproducing kernel of the domain, K(w, z).
inline cplx holo_kernel(DomainKind domain, double lam, const Point& w, const Point& z) {
    switch (domain) {
        case DomainKind::FockPlane:
            return std::exp(lam * w.z1 * std::conj(z.z1));
        case DomainKind::UnitDisk:
            return std::exp(-(lam + 2.0) * std::log(cplx{1.0, 0.0} - w.z1 * std::conj(z.z1)));
        case DomainKind::UnitBall2: {
            const cplx q = cplx{1.0, 0.0} - w.z1 * std::conj(z.z1) - w.z2 * std::conj(z.z2);
            return std::exp(-(lam + 3.0) * std::log(q));
        }
    }
    throw config_error("holo_kernel: unknown domain");
}

} // namespace detail

// Reproducing kernel of the space, dispatched on flavor. The pluriharmonic
// kernel is K + conj(K) - 1 and real on the diagonal. On UnitBall2 the kernel
// of the harmonic-in-z1, holomorphic-in-z2 space has three closed-form terms,
// the last removing the doubly counted functions that are constant in z1.
inline cplx kernel(const SpaceSpec& space, const Point& w, const Point& z) {
    space.validate();
    if (!domain_contains(space.domain, w) || !domain_contains(space.domain, z))
        throw domain_error("kernel: point outside " + std::string(to_string(space.domain)));
    const double lam = space.lambda;
    switch (space.flavor) {
        case SpaceFlavor::Holo:
            return detail::holo_kernel(space.domain, lam, w, z);
        case SpaceFlavor::AntiHolo:
            return std::conj(detail::holo_kernel(space.domain, lam, w, z));
        case SpaceFlavor::Plurih: {
            const cplx k = detail::holo_kernel(space.domain, lam, w, z);
            return k + std::conj(k) - 1.0;
        }
        case SpaceFlavor::PlurihHolo2D: {
            const cplx kp = detail::holo_kernel(space.domain, lam, w, z);
            const Point wc{std::conj(w.z1), w.z2};
            const Point zc{std::conj(z.z1), z.z2};
            const cplx km = detail::holo_kernel(space.domain, lam, wc, zc);
            const cplx q2 = cplx{1.0, 0.0} - w.z2 * std::conj(z.z2);
            const cplx k0 = std::exp(-(lam + 3.0) * std::log(q2));
            return kp + km - k0;
        }
    }
    throw config_error("kernel: unknown flavor");
}

// Euclidean distance on the plane; hyperbolic distance beta = atanh(rho) on the
// disk, rho the pseudo-hyperbolic distance. The half-log normalization is the
// library convention; metric balls of radius 1 are taken in it.
inline double metric_distance(DomainKind domain, const Point& a, const Point& b) {
    switch (domain) {
        case DomainKind::FockPlane:
            return std::abs(a.z1 - b.z1);
        case DomainKind::UnitDisk: {
            if (std::abs(a.z1) >= 1.0 || std::abs(b.z1) >= 1.0)
                throw domain_error("metric_distance: point outside the disk");
            const double rho = std::abs((a.z1 - b.z1) / (1.0 - std::conj(a.z1) * b.z1));
            return std::atanh(rho);
        }
        case DomainKind::UnitBall2:
            throw config_error("metric_distance: not provided on UnitBall2");
    }
    throw config_error("metric_distance: unknown domain");
}

// Disk automorphism exchanging 0 and c; used for metric-ball sampling and the
// kernel-covariant Berezin transform.
inline cplx disk_involution(cplx c, cplx u) {
    return (c - u) / (1.0 - std::conj(c) * u);
}

} // namespace plurispec
