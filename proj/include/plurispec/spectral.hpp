#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "plurispec/berezin.hpp"
#include "plurispec/errors.hpp"
#include "plurispec/linalg.hpp"
#include "plurispec/operators.hpp"
#include "plurispec/quadrature.hpp"
#include "plurispec/spaces.hpp"
#include "plurispec/symbol.hpp"

namespace plurispec {

// Eigenvalues of the dense truncation. Finite sections of non-normal Toeplitz
// operators pollute spectra, so the library reports these next to, never
// instead of, the Berezin boundary estimate.
inline std::vector<cplx> truncated_spectrum(const OperatorMatrix& m) {
    if (!m.square()) throw config_error("truncated_spectrum: matrix must be square");
    return eigenvalues(m.entries);
}

struct ShellCloud {
    double radius = 0.0;
    std::vector<cplx> values;
    std::vector<bool> unstable; // per-point instability flag
};

struct SpectrumEstimate {
    SpaceSpec space;
    std::string symbol;
    std::vector<ShellCloud> shells; // ordered, last shell = the estimate
    double shell_drift = 0.0;       // max pointwise move between the last two shells
    double dist_zero = 0.0;         // distance from 0 to the outermost cloud
    bool zero_outside_estimate = false;
    double node_sup = 0.0; // sup |f| over the rule nodes and all transform evaluation points
};

// Default boundary shell schedules.
inline std::vector<double> default_shells(DomainKind domain, double lambda) {
    if (domain == DomainKind::FockPlane)
        return {4.0 / std::sqrt(lambda), 6.0 / std::sqrt(lambda), 8.0 / std::sqrt(lambda)};
    return {0.9, 0.99, 0.999};
}

// Berezin values of f on circles approaching the boundary; the outermost cloud
// estimates the essential spectrum. Closed-form kernels, no truncation. The
// shell-to-shell drift is reported instead of claiming set equality, and 0 is
// flagged as outside the estimate only when it clears twice the drift.
inline SpectrumEstimate essential_spectrum_estimate(const SpaceSpec& space, const SymbolFn& f,
                                                    const std::vector<double>& shells,
                                                    int points_per_shell,
                                                    const QuadratureRule& rule) {
    space.validate();
    if (space.domain == DomainKind::UnitBall2)
        throw config_error("essential_spectrum_estimate: 1D domains only");
    if (shells.empty() || points_per_shell < 1)
        throw config_error("essential_spectrum_estimate: need shells and points");
    for (std::size_t i = 0; i + 1 < shells.size(); ++i)
        if (!(shells[i] < shells[i + 1]))
            throw config_error("essential_spectrum_estimate: shells must increase outward");
    if (space.domain == DomainKind::UnitDisk && !(shells.back() < 1.0))
        throw config_error("essential_spectrum_estimate: disk shells must stay inside |z| < 1");

    const SpaceSpec holo{space.domain, space.lambda, SpaceFlavor::Holo};
    SpectrumEstimate est;
    est.space = space;
    est.symbol = f.label;
    est.node_sup = node_sup(f, rule);
    for (double r : shells) {
        ShellCloud cloud;
        cloud.radius = r;
        for (int j = 0; j < points_per_shell; ++j) {
            const double th = 2.0 * kPi * j / points_per_shell;
            const Point z{r * cplx{std::cos(th), std::sin(th)}, cplx{}};
            cplx v;
            bool bad = false;
            try {
                v = berezin_symbol(holo, f, z, rule);
                // The transform averages the symbol over the kernel-moved node
                // set; exceeding that sup by more than noise flags instability.
                double eval_sup = 0.0;
                for (const Point& node : rule.nodes)
                    eval_sup =
                        std::max(eval_sup, std::abs(f(berezin_eval_point(holo, z, node))));
                est.node_sup = std::max(est.node_sup, eval_sup);
                if (!is_finite(v) || std::abs(v) > eval_sup + 1e-6) bad = true;
            } catch (const numeric_error&) {
                v = cplx{0.0, 0.0};
                bad = true;
            }
            cloud.values.push_back(v);
            cloud.unstable.push_back(bad);
        }
        est.shells.push_back(std::move(cloud));
    }
    const auto& outer = est.shells.back();
    if (est.shells.size() >= 2) {
        const auto& prev = est.shells[est.shells.size() - 2];
        for (std::size_t j = 0; j < outer.values.size(); ++j)
            est.shell_drift = std::max(est.shell_drift, std::abs(outer.values[j] - prev.values[j]));
    }
    double dz = std::numeric_limits<double>::infinity();
    for (const cplx& v : outer.values) dz = std::min(dz, std::abs(v));
    est.dist_zero = dz;
    est.zero_outside_estimate = est.shells.size() >= 2 && dz > 2.0 * est.shell_drift;
    return est;
}

struct CompactnessReport {
    std::vector<int> truncations;
    std::vector<std::vector<double>> singular_values; // descending, per ladder step
    int tail_index = 10;

    // k-th smallest singular value at ladder step i; the tail that must decay
    // for a compact operator and stay put for a non-compact one.
    double tail_sigma(std::size_t i) const {
        const auto& s = singular_values[i];
        const int n = static_cast<int>(s.size());
        const int k = std::min(tail_index, n);
        return s[static_cast<std::size_t>(n - k)];
    }
    double top_sigma(std::size_t i) const { return singular_values[i].front(); }
};

// Singular-value ladders across growing truncations. Decreasing tails support
// compactness of the underlying operator; flat tails refute it.
inline CompactnessReport compactness_proxy(const SpaceSpec& space, const SymbolFn& f,
                                           const std::vector<int>& ladder, int tail_index,
                                           int angular_pad = 16, int jobs = 1) {
    if (ladder.size() < 3) throw config_error("compactness_proxy: ladder needs >= 3 truncations");
    for (std::size_t i = 0; i + 1 < ladder.size(); ++i)
        if (!(ladder[i] < ladder[i + 1]))
            throw config_error("compactness_proxy: ladder must increase");
    CompactnessReport rep;
    rep.truncations = ladder;
    rep.tail_index = tail_index;
    for (int d : ladder) {
        const int bw = f.bandwidth ? *f.bandwidth : 8;
        const int max_degree = 2 * d + bw;
        const QuadratureRule rule = rule_for(space, max_degree, 2 * max_degree + angular_pad);
        const Truncation tr{d, d, 0};
        const auto t = assemble_toeplitz(space, f, tr, rule, jobs);
        rep.singular_values.push_back(singular_values(t.entries));
    }
    return rep;
}

// One diagonal block of the two-variable ball operator for a z2-independent
// symbol: the disk truncation at the shifted weight a2 + lambda + 1.
inline OperatorMatrix phh_block_elements(const SymbolFn& g, double lambda, int a2,
                                         const Truncation& trunc, int max_degree,
                                         int angular_order, int jobs = 1) {
    if (a2 < 0) throw config_error("phh_block_elements: a2 must be >= 0");
    const SpaceSpec reduced{DomainKind::UnitDisk, a2 + lambda + 1.0, SpaceFlavor::Plurih};
    const QuadratureRule rule = rule_for(reduced, max_degree, angular_order);
    return assemble_toeplitz(reduced, g, trunc, rule, jobs);
}

// Direct 2D quadrature of <g~ e_col, e_row> over the ball, g~(z1,z2) = g(z1).
// Deliberately a plain weighted sum over the flattened nodes: this is the
// independent route against which the reduced disk blocks are checked. The
// basis normalizations are hoisted out of the node loop.
inline cplx phh_matrix_element_2d(const SymbolFn& g, double lambda, const BasisIndex& row,
                                  const BasisIndex& col, const QuadratureRule& rule2d) {
    if (rule2d.domain != DomainKind::UnitBall2)
        throw config_error("phh_matrix_element_2d: ball rule required");
    const SpaceSpec space{DomainKind::UnitBall2, lambda, SpaceFlavor::PlurihHolo2D};
    space.validate();
    const double norm = basis_coefficient(space, row) * basis_coefficient(space, col);
    const bool conj_row = row.conjugated_first();
    const bool conj_col = col.conjugated_first();
    std::vector<cplx> terms(rule2d.size());
    for (std::size_t i = 0; i < rule2d.size(); ++i) {
        const Point& p = rule2d.nodes[i];
        const cplx gv = g(Point{p.z1, cplx{}});
        if (!is_finite(gv))
            throw numeric_error("phh_matrix_element_2d: non-finite symbol at node " +
                                std::to_string(i));
        const cplx col_mono =
            pow_int(conj_col ? std::conj(p.z1) : p.z1, col.d1) * pow_int(p.z2, col.d2);
        const cplx row_mono =
            pow_int(conj_row ? std::conj(p.z1) : p.z1, row.d1) * pow_int(p.z2, row.d2);
        terms[i] = rule2d.weights[i] * gv * col_mono * std::conj(row_mono);
    }
    return norm * pairwise_sum(terms);
}

// All pairwise 2D elements over a basis list at once: the same plain flat-sum
// route as phh_matrix_element_2d (term order included), with the symbol values
// and monomial powers cached per node instead of re-evaluated per pair.
inline CMatrix phh_elements_2d_batch(const SymbolFn& g, double lambda,
                                     const std::vector<BasisIndex>& basis,
                                     const QuadratureRule& rule2d) {
    if (rule2d.domain != DomainKind::UnitBall2)
        throw config_error("phh_elements_2d_batch: ball rule required");
    const SpaceSpec space{DomainKind::UnitBall2, lambda, SpaceFlavor::PlurihHolo2D};
    space.validate();
    const std::size_t nn = rule2d.size();
    std::vector<cplx> gv(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        gv[i] = g(Point{rule2d.nodes[i].z1, cplx{}});
        if (!is_finite(gv[i]))
            throw numeric_error("phh_elements_2d_batch: non-finite symbol at node " +
                                std::to_string(i));
    }
    const std::size_t nb = basis.size();
    std::vector<std::vector<cplx>> mono(nb, std::vector<cplx>(nn));
    std::vector<double> norms(nb);
    for (std::size_t k = 0; k < nb; ++k) {
        norms[k] = basis_coefficient(space, basis[k]);
        const bool cj = basis[k].conjugated_first();
        for (std::size_t i = 0; i < nn; ++i) {
            const Point& p = rule2d.nodes[i];
            mono[k][i] = pow_int(cj ? std::conj(p.z1) : p.z1, basis[k].d1) *
                         pow_int(p.z2, basis[k].d2);
        }
    }
    CMatrix out(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
    std::vector<cplx> terms(nn);
    for (std::size_t r = 0; r < nb; ++r) {
        for (std::size_t c = 0; c < nb; ++c) {
            for (std::size_t i = 0; i < nn; ++i)
                terms[i] = rule2d.weights[i] * gv[i] * mono[c][i] * std::conj(mono[r][i]);
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                norms[r] * norms[c] * pairwise_sum(terms);
        }
    }
    return out;
}

struct BlockDiagnosticsRow {
    int a2 = 0;
    double effective_weight = 0.0; // a2 + lambda + 1
    double min_singular_value = 0.0;
    std::optional<double> defect_right; // ||T_g T_{1/g} - I||
    std::optional<double> defect_left;  // ||T_{1/g} T_g - I||
    std::optional<double> weak_null;    // B_{a2+lambda+1}(|g|^2)(z1)
};

struct BlockDiagnostics {
    double lambda = 0.0;
    std::string symbol;
    std::vector<BlockDiagnosticsRow> rows;
};

struct PhhFredholmOptions {
    bool regularizer = true;             // compute T_g T_{1/g} defects
    std::optional<cplx> zero_location;   // add the weak-null column at this z1
    int inner_margin = 16;               // product truncation slack
    int max_degree = 0;                  // 0 = auto
    int angular_order = 0;               // 0 = auto
    int jobs = 1;
};

// Holomorphic disk Berezin transform of |g|^2 at z1, at weights j + lambda + 1:
// the bound on ||T_g~ f_j||^2 along the weak null sequence attached to an
// interior zero of g.
inline std::vector<double> weak_null_sequence_bound(const SymbolFn& g, double lambda, cplx z1,
                                                    int j_lo, int j_hi, int max_degree = 96,
                                                    int angular_order = 256) {
    if (std::abs(z1) >= 1.0)
        throw domain_error("weak_null_sequence_bound: z1 must be an interior disk point");
    if (j_lo < 0 || j_hi < j_lo) throw config_error("weak_null_sequence_bound: bad j range");
    const SymbolFn g2 = SymbolFn::from_function(
        [g](const Point& p) { return cplx{std::norm(g(p)), 0.0}; }, "|" + g.label + "|^2",
        g.bandwidth ? std::optional<int>(2 * *g.bandwidth) : std::nullopt, g.radial);
    std::vector<double> out;
    for (int j = j_lo; j <= j_hi; ++j) {
        const SpaceSpec holo{DomainKind::UnitDisk, j + lambda + 1.0, SpaceFlavor::Holo};
        const QuadratureRule rule = rule_for(holo, max_degree, angular_order);
        out.push_back(berezin_symbol(holo, g2, Point{z1, cplx{}}, rule).real());
    }
    return out;
}

// Per-a2 diagnostics of the diagonal blocks: minimal singular value and the
// regularizer defects, whose decay along a2 is the mechanism that makes the
// direct sum Fredholm for symbols bounded away from zero.
inline BlockDiagnostics phh_fredholm_sweep(const SymbolFn& g, double lambda, int a2_lo, int a2_hi,
                                           const Truncation& trunc,
                                           const PhhFredholmOptions& opts = {}) {
    if (a2_lo < 0 || a2_hi < a2_lo) throw config_error("phh_fredholm_sweep: bad a2 range");
    BlockDiagnostics diag;
    diag.lambda = lambda;
    diag.symbol = g.label;
    const int bw = g.bandwidth ? *g.bandwidth : 8;
    const int margin = std::max(opts.inner_margin, bw);
    const Truncation inner{trunc.max_holo + margin, trunc.max_anti + margin, 0};
    for (int a2 = a2_lo; a2 <= a2_hi; ++a2) {
        const double w = a2 + lambda + 1.0;
        const SpaceSpec space{DomainKind::UnitDisk, w, SpaceFlavor::Plurih};
        const int max_degree = opts.max_degree > 0
                                   ? opts.max_degree
                                   : inner.max_holo + inner.max_anti + std::max(bw, 8);
        const int angular = opts.angular_order > 0 ? opts.angular_order : 2 * max_degree + 16;
        const QuadratureRule rule = rule_for(space, max_degree, angular);
        BlockDiagnosticsRow row;
        row.a2 = a2;
        row.effective_weight = w;
        const auto tg = assemble_toeplitz(space, g, trunc, rule, opts.jobs);
        row.min_singular_value = singular_values(tg.entries).back();
        if (opts.regularizer) {
            const SymbolFn ginv = SymbolFn::reciprocal(g, 1e-12);
            const auto g_oi = assemble_toeplitz_rect(space, g, trunc, inner, rule, opts.jobs);
            const auto gi_io = assemble_toeplitz_rect(space, ginv, inner, trunc, rule, opts.jobs);
            const auto gi_oi = assemble_toeplitz_rect(space, ginv, trunc, inner, rule, opts.jobs);
            const auto g_io = assemble_toeplitz_rect(space, g, inner, trunc, rule, opts.jobs);
            const auto n = g_oi.entries.rows();
            const CMatrix id = CMatrix::Identity(n, n);
            row.defect_right = spectral_norm(g_oi.entries * gi_io.entries - id);
            row.defect_left = spectral_norm(gi_oi.entries * g_io.entries - id);
        }
        if (opts.zero_location) {
            const auto wn = weak_null_sequence_bound(g, lambda, *opts.zero_location, a2, a2);
            row.weak_null = wn.front();
        }
        diag.rows.push_back(row);
    }
    return diag;
}

} // namespace plurispec
