#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "plurispec/errors.hpp"
#include "plurispec/linalg.hpp"
#include "plurispec/numeric.hpp"
#include "plurispec/quadrature.hpp"
#include "plurispec/spaces.hpp"
#include "plurispec/symbol.hpp"

namespace plurispec {

// Dense truncation of an operator, with the basis lists that index it.
struct OperatorMatrix {
    SpaceSpec space;
    std::vector<BasisIndex> row_basis;
    std::vector<BasisIndex> col_basis;
    CMatrix entries;
    std::string provenance;

    bool square() const { return entries.rows() == entries.cols(); }
};

namespace detail {

// Signed angular frequency the basis element carries in the first coordinate:
// z^a rotates with +a, conj(z)^b with -b.
inline int angular_sign(const BasisIndex& idx) { return idx.conjugated_first() ? -1 : +1; }

// Evaluate the symbol on the rule's ring grid (values[ir*A + ja]); radial
// symbols are evaluated once per ring.
inline std::vector<cplx> symbol_on_rings(const SymbolFn& f, const QuadratureRule& rule) {
    const int A = rule.angular_order;
    const std::size_t nr = rule.radial_x.size();
    std::vector<cplx> vals(nr * static_cast<std::size_t>(A));
    for (std::size_t ir = 0; ir < nr; ++ir) {
        const double r = rule.domain == DomainKind::FockPlane
                             ? std::sqrt(rule.radial_x[ir] / rule.lambda)
                             : std::sqrt(rule.radial_x[ir]);
        if (f.radial) {
            const cplx v = f(Point{cplx{r, 0.0}, cplx{}});
            if (!is_finite(v))
                throw numeric_error("assemble: non-finite symbol value at radius " +
                                    std::to_string(r));
            for (int ja = 0; ja < A; ++ja) vals[ir * A + ja] = v;
            continue;
        }
        for (int ja = 0; ja < A; ++ja) {
            const double th = 2.0 * kPi * ja / A;
            const cplx v = f(Point{r * cplx{std::cos(th), std::sin(th)}, cplx{}});
            if (!is_finite(v))
                throw numeric_error("assemble: non-finite symbol value at node ring " +
                                    std::to_string(ir) + " angle index " + std::to_string(ja));
            vals[ir * A + ja] = v;
        }
    }
    return vals;
}

// Angular Fourier coefficients per ring: F[mo + m][ir] = (1/A) sum_j f e^{-im theta_j}.
inline std::vector<std::vector<cplx>> angular_transform(const std::vector<cplx>& vals,
                                                        const QuadratureRule& rule, int m_max,
                                                        bool radial_symbol) {
    const int A = rule.angular_order;
    const std::size_t nr = rule.radial_x.size();
    std::vector<std::vector<cplx>> F(static_cast<std::size_t>(2 * m_max + 1),
                                     std::vector<cplx>(nr, cplx{}));
    std::vector<cplx> roots(static_cast<std::size_t>(A));
    for (int k = 0; k < A; ++k) {
        const double th = 2.0 * kPi * k / A;
        roots[static_cast<std::size_t>(k)] = cplx{std::cos(th), std::sin(th)};
    }
    for (int m = -m_max; m <= m_max; ++m) {
        if (radial_symbol && m != 0) continue; // exact zero for radial symbols
        auto& row = F[static_cast<std::size_t>(m + m_max)];
        for (std::size_t ir = 0; ir < nr; ++ir) {
            cplx acc{};
            for (int ja = 0; ja < A; ++ja) {
                const int k = ((-m * ja) % A + A) % A;
                acc += vals[ir * A + ja] * roots[static_cast<std::size_t>(k)];
            }
            row[ir] = acc / static_cast<double>(A);
        }
    }
    return F;
}

// Per-basis-element radial profile with the weight folded in:
// phi_i(ir) = c_i r^{d_i} sqrt(rw_ir). Computed in log space; each profile has
// unit l2 norm up to quadrature error, so entry accumulation never overflows.
inline std::vector<std::vector<double>> radial_profiles(const SpaceSpec& space,
                                                        const std::vector<BasisIndex>& basis,
                                                        const QuadratureRule& rule) {
    const std::size_t nr = rule.radial_x.size();
    std::vector<double> log_r(nr), log_w(nr);
    for (std::size_t ir = 0; ir < nr; ++ir) {
        const double x = rule.domain == DomainKind::FockPlane ? rule.radial_x[ir] / rule.lambda
                                                              : rule.radial_x[ir];
        log_r[ir] = 0.5 * std::log(x);
        log_w[ir] = std::log(rule.radial_w[ir]);
    }
    std::vector<std::vector<double>> phi(basis.size(), std::vector<double>(nr));
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const double lc = log_basis_coefficient(space, basis[i]);
        for (std::size_t ir = 0; ir < nr; ++ir)
            phi[i][ir] = std::exp(lc + basis[i].d1 * log_r[ir] + 0.5 * log_w[ir]);
    }
    return phi;
}

inline OperatorMatrix assemble_1d(const SpaceSpec& space, const SymbolFn& f,
                                  std::vector<BasisIndex> rows, std::vector<BasisIndex> cols,
                                  const QuadratureRule& rule, int jobs,
                                  const std::string& provenance) {
    int m_max = 0;
    for (const auto& r : rows)
        for (const auto& c : cols)
            m_max = std::max(m_max, std::abs(angular_sign(r) * r.d1 - angular_sign(c) * c.d1));
    if (rule.angular_order <= m_max)
        throw config_error("assemble: angular_order " + std::to_string(rule.angular_order) +
                           " cannot separate frequency " + std::to_string(m_max));

    const auto vals = symbol_on_rings(f, rule);
    const auto F = angular_transform(vals, rule, m_max, f.radial);
    const auto phi_r = radial_profiles(space, rows, rule);
    const auto phi_c = radial_profiles(space, cols, rule);
    const std::size_t nr = rule.radial_x.size();

    OperatorMatrix m;
    m.space = space;
    m.row_basis = std::move(rows);
    m.col_basis = std::move(cols);
    m.entries.resize(static_cast<Eigen::Index>(m.row_basis.size()),
                     static_cast<Eigen::Index>(m.col_basis.size()));
    m.provenance = provenance;

    parallel_for(m.row_basis.size(), jobs, [&](std::size_t i) {
        const int si = angular_sign(m.row_basis[i]);
        for (std::size_t j = 0; j < m.col_basis.size(); ++j) {
            const int mm = si * m.row_basis[i].d1 - angular_sign(m.col_basis[j]) * m.col_basis[j].d1;
            const auto& Fm = F[static_cast<std::size_t>(mm + m_max)];
            cplx acc{};
            for (std::size_t ir = 0; ir < nr; ++ir) acc += phi_r[i][ir] * phi_c[j][ir] * Fm[ir];
            m.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
        }
    });
    return m;
}

inline OperatorMatrix assemble_2d(const SpaceSpec& space, const SymbolFn& f,
                                  std::vector<BasisIndex> rows, std::vector<BasisIndex> cols,
                                  const QuadratureRule& rule, int jobs,
                                  const std::string& provenance) {
    const int A = rule.angular_order;
    const std::size_t n1 = rule.radial_x.size();
    const std::size_t n2 = rule.radial2_x.size();
    int m1_max = 0, m2_max = 0;
    for (const auto& r : rows)
        for (const auto& c : cols) {
            m1_max = std::max(m1_max, std::abs(angular_sign(r) * r.d1 - angular_sign(c) * c.d1));
            m2_max = std::max(m2_max, std::abs(r.d2 - c.d2));
        }
    if (A <= std::max(m1_max, m2_max))
        throw config_error("assemble: ball rule angular_order too small");

    std::vector<cplx> roots(static_cast<std::size_t>(A));
    for (int k = 0; k < A; ++k) {
        const double th = 2.0 * kPi * k / A;
        roots[static_cast<std::size_t>(k)] = cplx{std::cos(th), std::sin(th)};
    }

    // Stage 1: symbol values, then transform in theta2.
    // G[(m2+m2_max)][(i1*n2+i2)*A + j1]
    const std::size_t nrad = n1 * n2;
    std::vector<std::vector<cplx>> G(static_cast<std::size_t>(2 * m2_max + 1),
                                     std::vector<cplx>(nrad * static_cast<std::size_t>(A)));
    {
        std::vector<cplx> ring(static_cast<std::size_t>(A));
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            const double x1 = rule.radial_x[i1];
            const double r1 = std::sqrt(x1);
            for (std::size_t i2 = 0; i2 < n2; ++i2) {
                const double r2 = std::sqrt(rule.radial2_x[i2] * (1.0 - x1));
                for (int j1 = 0; j1 < A; ++j1) {
                    const cplx z1 = r1 * roots[static_cast<std::size_t>(j1)];
                    for (int j2 = 0; j2 < A; ++j2) {
                        const cplx v = f(Point{z1, r2 * roots[static_cast<std::size_t>(j2)]});
                        if (!is_finite(v))
                            throw numeric_error("assemble: non-finite symbol value on ball node");
                        ring[static_cast<std::size_t>(j2)] = v;
                    }
                    for (int m2 = -m2_max; m2 <= m2_max; ++m2) {
                        cplx acc{};
                        for (int j2 = 0; j2 < A; ++j2) {
                            const int k = ((-m2 * j2) % A + A) % A;
                            acc += ring[static_cast<std::size_t>(j2)] *
                                   roots[static_cast<std::size_t>(k)];
                        }
                        G[static_cast<std::size_t>(m2 + m2_max)][(i1 * n2 + i2) * A +
                                                                 static_cast<std::size_t>(j1)] =
                            acc / static_cast<double>(A);
                    }
                }
            }
        }
    }
    // Stage 2: transform in theta1. F[(m1+m1_max)*(2*m2_max+1) + (m2+m2_max)][i1*n2+i2]
    std::vector<std::vector<cplx>> F(
        static_cast<std::size_t>((2 * m1_max + 1) * (2 * m2_max + 1)),
        std::vector<cplx>(nrad));
    for (int m1 = -m1_max; m1 <= m1_max; ++m1)
        for (int m2 = -m2_max; m2 <= m2_max; ++m2) {
            auto& dst = F[static_cast<std::size_t>((m1 + m1_max) * (2 * m2_max + 1) + m2 + m2_max)];
            const auto& src = G[static_cast<std::size_t>(m2 + m2_max)];
            for (std::size_t ird = 0; ird < nrad; ++ird) {
                cplx acc{};
                for (int j1 = 0; j1 < A; ++j1) {
                    const int k = ((-m1 * j1) % A + A) % A;
                    acc += src[ird * A + static_cast<std::size_t>(j1)] *
                           roots[static_cast<std::size_t>(k)];
                }
                dst[ird] = acc / static_cast<double>(A);
            }
        }

    // Radial profiles over the (i1, i2) grid.
    auto profile = [&](const BasisIndex& idx) {
        std::vector<double> phi(nrad);
        const double lc = log_basis_coefficient(space, idx);
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
            const double x1 = rule.radial_x[i1];
            for (std::size_t i2 = 0; i2 < n2; ++i2) {
                const double q2 = rule.radial2_x[i2] * (1.0 - x1);
                const double lw = std::log(rule.radial_w[i1] * rule.radial2_w[i2]);
                phi[i1 * n2 + i2] = std::exp(lc + 0.5 * idx.d1 * std::log(x1) +
                                             0.5 * idx.d2 * std::log(q2) + 0.5 * lw);
            }
        }
        return phi;
    };
    std::vector<std::vector<double>> phi_r(rows.size()), phi_c(cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) phi_r[i] = profile(rows[i]);
    for (std::size_t j = 0; j < cols.size(); ++j) phi_c[j] = profile(cols[j]);

    OperatorMatrix m;
    m.space = space;
    m.row_basis = std::move(rows);
    m.col_basis = std::move(cols);
    m.entries.resize(static_cast<Eigen::Index>(m.row_basis.size()),
                     static_cast<Eigen::Index>(m.col_basis.size()));
    m.provenance = provenance;
    parallel_for(m.row_basis.size(), jobs, [&](std::size_t i) {
        const auto& ri = m.row_basis[i];
        for (std::size_t j = 0; j < m.col_basis.size(); ++j) {
            const auto& cj = m.col_basis[j];
            const int m1 = angular_sign(ri) * ri.d1 - angular_sign(cj) * cj.d1;
            const int m2 = ri.d2 - cj.d2;
            const auto& Fm =
                F[static_cast<std::size_t>((m1 + m1_max) * (2 * m2_max + 1) + m2 + m2_max)];
            cplx acc{};
            for (std::size_t ird = 0; ird < nrad; ++ird)
                acc += phi_r[i][ird] * phi_c[j][ird] * Fm[ird];
            m.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
        }
    });
    return m;
}

inline OperatorMatrix assemble_with_bases(const SpaceSpec& space, const SymbolFn& f,
                                          std::vector<BasisIndex> rows,
                                          std::vector<BasisIndex> cols,
                                          const QuadratureRule& rule, int jobs,
                                          const std::string& provenance) {
    space.validate();
    if (rule.domain != space.domain || rule.lambda != space.lambda)
        throw config_error("assemble: rule built for " + std::string(to_string(rule.domain)) +
                           "/lambda=" + std::to_string(rule.lambda) + ", space is " +
                           space.describe());
    if (space.domain == DomainKind::UnitBall2)
        return assemble_2d(space, f, std::move(rows), std::move(cols), rule, jobs, provenance);
    return assemble_1d(space, f, std::move(rows), std::move(cols), rule, jobs, provenance);
}

} // namespace detail

namespace detail {

// For polynomial symbols the entries are exact only when the rule's declared
// exactness covers the truncation degrees plus the symbol bandwidth; for
// anything else the rule order is the caller's accuracy choice.
inline void check_rule_exactness(const SpaceSpec& space, const SymbolFn& f,
                                 const Truncation& trunc, const QuadratureRule& rule) {
    if (!f.bandwidth) return;
    int need = 0;
    switch (space.flavor) {
        case SpaceFlavor::Holo: need = trunc.max_holo + *f.bandwidth; break;
        case SpaceFlavor::AntiHolo: need = trunc.max_anti + *f.bandwidth; break;
        case SpaceFlavor::Plurih:
            need = trunc.max_holo + trunc.max_anti + *f.bandwidth;
            break;
        case SpaceFlavor::PlurihHolo2D:
            need = (trunc.max_holo + trunc.max_anti + *f.bandwidth + 1) / 2 + trunc.max_second;
            break;
    }
    if (rule.max_degree < need)
        throw config_error("assemble: rule exactness " + std::to_string(rule.max_degree) +
                           " below the " + std::to_string(need) +
                           " required by the truncation and symbol bandwidth");
}

} // namespace detail

// Truncated Toeplitz matrix: entry (i, j) = <f e_j, e_i> by quadrature.
inline OperatorMatrix assemble_toeplitz(const SpaceSpec& space, const SymbolFn& f,
                                        const Truncation& trunc, const QuadratureRule& rule,
                                        int jobs = 1) {
    detail::check_rule_exactness(space, f, trunc, rule);
    auto basis = enumerate_basis(space, trunc);
    return detail::assemble_with_bases(space, f, basis, basis, rule, jobs,
                                       "toeplitz[" + f.label + "]");
}

inline OperatorMatrix assemble_toeplitz(const SpaceSpec& space, const SymbolExpr& f,
                                        const Truncation& trunc, const QuadratureRule& rule,
                                        int jobs = 1) {
    return assemble_toeplitz(space, SymbolFn::from_expr(f), trunc, rule, jobs);
}

// Rectangular truncation mapping the col-side cutoffs into the row-side ones;
// the middle factor of operator products.
inline OperatorMatrix assemble_toeplitz_rect(const SpaceSpec& space, const SymbolFn& f,
                                             const Truncation& row_trunc,
                                             const Truncation& col_trunc,
                                             const QuadratureRule& rule, int jobs = 1) {
    return detail::assemble_with_bases(space, f, enumerate_basis(space, row_trunc),
                                       enumerate_basis(space, col_trunc), rule, jobs,
                                       "toeplitz_rect[" + f.label + "]");
}

// Named sub-blocks of a pluriharmonic Toeplitz truncation, plus the rank-one
// couplings with the constants: E = (column) <f*1, conj-basis>, G = (row)
// <f conj-basis, 1>.
struct BlockMap {
    OperatorMatrix holo;       // T: holo -> holo
    OperatorMatrix mixing_a;   // A: anti -> holo
    OperatorMatrix mixing_b;   // B: holo -> anti
    OperatorMatrix anti;       // Tah: anti -> anti (constants excluded)
    OperatorMatrix const_in;   // E: constants -> anti, one column
    OperatorMatrix const_out;  // G: anti -> constants, one row
};

inline BlockMap extract_blocks(const OperatorMatrix& m, const SymbolFn& f,
                               const QuadratureRule& rule, int jobs = 1) {
    if (m.space.flavor != SpaceFlavor::Plurih)
        throw config_error("extract_blocks: matrix must live on a Plurih space");
    if (m.row_basis != m.col_basis)
        throw config_error("extract_blocks: square pluriharmonic truncation expected");
    std::vector<BasisIndex> hb, ab;
    for (const auto& ix : m.row_basis)
        (ix.kind == BasisIndex::Kind::Holo ? hb : ab).push_back(ix);
    const auto nh = static_cast<Eigen::Index>(hb.size());
    const auto na = static_cast<Eigen::Index>(ab.size());

    auto take = [&](Eigen::Index r0, Eigen::Index c0, Eigen::Index nr, Eigen::Index nc,
                    std::vector<BasisIndex> rb, std::vector<BasisIndex> cb,
                    const char* tag) {
        OperatorMatrix s;
        s.space = m.space;
        s.row_basis = std::move(rb);
        s.col_basis = std::move(cb);
        s.entries = m.entries.block(r0, c0, nr, nc);
        s.provenance = m.provenance + ":" + tag;
        return s;
    };
    BlockMap blocks;
    blocks.holo = take(0, 0, nh, nh, hb, hb, "holo");
    blocks.mixing_a = take(0, nh, nh, na, hb, ab, "A");
    blocks.mixing_b = take(nh, 0, na, nh, ab, hb, "B");
    blocks.anti = take(nh, nh, na, na, ab, ab, "anti");
    const std::vector<BasisIndex> unit = {BasisIndex::holo(0)};
    blocks.const_in =
        detail::assemble_with_bases(m.space, f, ab, unit, rule, jobs, m.provenance + ":E");
    blocks.const_out =
        detail::assemble_with_bases(m.space, f, unit, ab, rule, jobs, m.provenance + ":G");
    return blocks;
}

namespace detail {

inline void require_inner_covers(const Truncation& outer, const Truncation& inner) {
    if (inner.max_holo < outer.max_holo || inner.max_anti < outer.max_anti ||
        inner.max_second < outer.max_second)
        throw config_error("inner truncation must dominate the outer truncation");
}

} // namespace detail

// T_f T_g - T_fg with the product taken through an explicit inner truncation:
// hat T_f maps inner -> outer, hat T_g maps outer -> inner. For polynomial
// symbols and inner >= outer + bandwidth the product equals the compression of
// the true operator product.
inline OperatorMatrix semi_commutator(const SpaceSpec& space, const SymbolFn& f,
                                      const SymbolFn& g, const Truncation& trunc,
                                      const Truncation& inner_trunc, const QuadratureRule& rule,
                                      int jobs = 1) {
    detail::require_inner_covers(trunc, inner_trunc);
    const auto tf = assemble_toeplitz_rect(space, f, trunc, inner_trunc, rule, jobs);
    const auto tg = assemble_toeplitz_rect(space, g, inner_trunc, trunc, rule, jobs);
    const auto tfg = assemble_toeplitz(space, SymbolFn::product(f, g), trunc, rule, jobs);
    OperatorMatrix out;
    out.space = space;
    out.row_basis = tf.row_basis;
    out.col_basis = tg.col_basis;
    out.entries = tf.entries * tg.entries - tfg.entries;
    out.provenance = "semi_commutator[" + f.label + ";" + g.label + "]";
    return out;
}

// T_f T_g - T_g T_f through the same inner truncation.
inline OperatorMatrix commutator(const SpaceSpec& space, const SymbolFn& f, const SymbolFn& g,
                                 const Truncation& trunc, const Truncation& inner_trunc,
                                 const QuadratureRule& rule, int jobs = 1) {
    detail::require_inner_covers(trunc, inner_trunc);
    const auto f_oi = assemble_toeplitz_rect(space, f, trunc, inner_trunc, rule, jobs);
    const auto g_io = assemble_toeplitz_rect(space, g, inner_trunc, trunc, rule, jobs);
    const auto g_oi = assemble_toeplitz_rect(space, g, trunc, inner_trunc, rule, jobs);
    const auto f_io = assemble_toeplitz_rect(space, f, inner_trunc, trunc, rule, jobs);
    OperatorMatrix out;
    out.space = space;
    out.row_basis = f_oi.row_basis;
    out.col_basis = g_io.col_basis;
    out.entries = f_oi.entries * g_io.entries - g_oi.entries * f_io.entries;
    out.provenance = "commutator[" + f.label + ";" + g.label + "]";
    return out;
}

inline double operator_norm(const OperatorMatrix& m) { return spectral_norm(m.entries); }

// Largest |f| over the rule's nodes. A lower estimate of the sup norm; reports
// label it as such.
inline double node_sup(const SymbolFn& f, const QuadratureRule& rule) {
    double s = 0.0;
    for (const auto& p : rule.nodes) {
        const cplx v = f(p);
        if (!is_finite(v)) throw numeric_error("node_sup: non-finite symbol value");
        s = std::max(s, std::abs(v));
    }
    return s;
}

inline nlohmann::json matrix_to_json(const OperatorMatrix& m) {
    nlohmann::json j;
    j["space"] = {{"domain", to_string(m.space.domain)},
                  {"lambda", m.space.lambda},
                  {"flavor", to_string(m.space.flavor)}};
    j["provenance"] = m.provenance;
    auto desc = [](const std::vector<BasisIndex>& b) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& ix : b) arr.push_back(ix.describe());
        return arr;
    };
    j["row_basis"] = desc(m.row_basis);
    j["col_basis"] = desc(m.col_basis);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index jx = 0; jx < m.entries.cols(); ++jx)
            row.push_back({m.entries(i, jx).real(), m.entries(i, jx).imag()});
        rows.push_back(std::move(row));
    }
    j["entries"] = std::move(rows);
    return j;
}

} // namespace plurispec
