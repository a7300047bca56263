#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plurispec/berezin.hpp"
#include "plurispec/errors.hpp"
#include "plurispec/operators.hpp"
#include "plurispec/quadrature.hpp"
#include "plurispec/spaces.hpp"
#include "plurispec/symbol.hpp"

namespace plurispec {

// Either a fixed cutoff or the lambda-scaled rule D = base + ceil(slope * lambda).
// Fixed truncation makes norms decay spuriously as lambda grows (the kernel
// mass escapes to high degrees), so scaled is the default.
struct TruncationPolicy {
    bool scaled = true;
    int fixed = 12;
    int base = 10;
    double slope = 2.0;

    int degree_at(double lambda) const {
        if (!scaled) return fixed;
        return base + static_cast<int>(std::ceil(slope * lambda));
    }
    Truncation truncation_at(double lambda) const {
        const int d = degree_at(lambda);
        return Truncation{d, d, 0};
    }
};

struct QuadratureOrders {
    int max_degree = 0;
    int angular_order = 0;
};

struct SweepConfig {
    DomainKind domain = DomainKind::FockPlane;
    SpaceFlavor flavor = SpaceFlavor::Plurih;
    SymbolFn f;
    std::optional<SymbolFn> g;
    std::optional<SymbolFn> h;
    std::vector<double> lambdas;
    TruncationPolicy policy;
    int inner_margin = 8; // product truncation slack beyond the symbol bandwidth
    std::optional<QuadratureOrders> orders; // fixed across the sweep; auto if absent
    std::vector<Point> samples;
    SymbolClassTags tags;
    int jobs = 1;

    void validate() const {
        if (lambdas.empty()) throw config_error("sweep: empty lambda list");
        for (std::size_t i = 0; i + 1 < lambdas.size(); ++i)
            if (!(lambdas[i] < lambdas[i + 1]))
                throw config_error("sweep: lambda list must be ascending");
        for (double lam : lambdas) SpaceSpec{domain, lam, flavor}.validate();
    }
};

struct SweepRecord {
    double lambda = 0.0;
    int truncation = 0;

    // norm sweep
    double norm_ph = 0.0;
    double norm_holo = 0.0;
    double sup_node = 0.0;
    double gap = 0.0;

    // semi-commutator sweep
    double semi_norm = 0.0;
    double block_11 = 0.0, block_12 = 0.0, block_21 = 0.0, block_22 = 0.0;

    // commutator probe
    double comm_norm = 0.0;
    double lambda_comm_norm = 0.0;
    double probe_norm = 0.0;
    double berezin_comm_max = 0.0;
    double h_berezin_max = 0.0;

    std::vector<double> berezin_errors; // per sample point
    std::vector<double> kernel_masses;  // per sample point
};

struct SweepReport {
    std::string kind;
    nlohmann::json meta;
    std::vector<SweepRecord> records;
};

using RecordSink = std::function<void(const SweepRecord&)>;

namespace detail {

// One fixed rule specification for the whole sweep, sized for the largest
// truncation. Keeping the node set constant across lambda makes the reported
// node-sup comparable between records.
inline QuadratureOrders auto_orders(const SweepConfig& cfg, bool needs_matrices) {
    if (cfg.orders) return *cfg.orders;
    QuadratureOrders o;
    if (!needs_matrices) {
        o.max_degree = 256;
        o.angular_order = 2 * o.max_degree + 16;
        return o;
    }
    int dmax = 0;
    for (double lam : cfg.lambdas) dmax = std::max(dmax, cfg.policy.degree_at(lam));
    int bw = cfg.f.bandwidth ? *cfg.f.bandwidth : 8;
    if (cfg.g && cfg.g->bandwidth) bw += *cfg.g->bandwidth;
    else if (cfg.g) bw += 8;
    const int inner = dmax + std::max(cfg.inner_margin, bw);
    o.max_degree = 2 * inner + bw;
    o.angular_order = 2 * o.max_degree + 16;
    return o;
}

inline Truncation inner_truncation(const SweepConfig& cfg, const Truncation& outer) {
    int bw = cfg.f.bandwidth ? *cfg.f.bandwidth : cfg.inner_margin;
    if (cfg.g) bw = std::max(bw, cfg.g->bandwidth ? *cfg.g->bandwidth : cfg.inner_margin);
    const int m = std::max(bw, cfg.inner_margin);
    return Truncation{outer.max_holo + m, outer.max_anti + m, 0};
}

// Mass of the truncated kernel expansion at z relative to the closed-form
// kernel; the staleness indicator attached to every sampled record.
inline double partial_kernel_mass(const SpaceSpec& space, const std::vector<BasisIndex>& basis,
                                  const Point& z) {
    double num = 0.0;
    for (const auto& ix : basis) num += std::norm(eval_basis(space, ix, z));
    return num / kernel(space, z, z).real();
}

// Split a square pluriharmonic matrix into its four kind-blocks and report
// their spectral norms: (holo,holo), (holo,anti), (anti,holo), (anti,anti).
inline void block_norms(const OperatorMatrix& m, double out[4]) {
    Eigen::Index nh = 0;
    for (const auto& ix : m.row_basis)
        if (ix.kind == BasisIndex::Kind::Holo) ++nh;
    const Eigen::Index na = m.entries.rows() - nh;
    out[0] = spectral_norm(m.entries.block(0, 0, nh, nh));
    out[1] = spectral_norm(m.entries.block(0, nh, nh, na));
    out[2] = spectral_norm(m.entries.block(nh, 0, na, nh));
    out[3] = spectral_norm(m.entries.block(nh, nh, na, na));
}

inline nlohmann::json tag_diagnostics(const SweepConfig& cfg, const QuadratureRule& rule) {
    nlohmann::json j = nlohmann::json::object();
    const DomainKind dom = cfg.domain;
    if (cfg.tags.bounded) j["node_sup"] = node_sup(cfg.f, rule);
    if (cfg.tags.vanishes_at_boundary || cfg.tags.continuous_up_to_boundary ||
        cfg.tags.vanishing_oscillation) {
        // Probe along a ray toward the boundary.
        std::vector<double> radii;
        if (dom == DomainKind::UnitDisk)
            radii = {0.5, 0.8, 0.95, 0.99};
        else
            radii = {1.0, 2.0, 4.0, 8.0};
        nlohmann::json ray = nlohmann::json::array();
        for (double r : radii) {
            const Point z{cplx{r, 0.0}, cplx{}};
            nlohmann::json rec;
            rec["radius"] = r;
            rec["abs_value"] = std::abs(cfg.f(z));
            if (cfg.tags.vanishing_oscillation)
                rec["oscillation"] = oscillation(cfg.f, z, dom, 128);
            ray.push_back(rec);
        }
        j["boundary_ray"] = ray;
    }
    return j;
}

} // namespace detail

// Norm trend experiment: per lambda, the pluriharmonic truncation norm, its
// holomorphic block norm, the node-sup of |f| and the gap between them.
inline SweepReport norm_sweep(const SweepConfig& cfg, const RecordSink& sink = {}) {
    cfg.validate();
    const QuadratureOrders orders = detail::auto_orders(cfg, true);
    SweepReport rep;
    rep.kind = "norm_sweep";
    rep.meta["symbol"] = cfg.f.label;
    rep.meta["orders"] = {{"max_degree", orders.max_degree},
                          {"angular_order", orders.angular_order}};
    for (std::size_t li = 0; li < cfg.lambdas.size(); ++li) {
        const double lam = cfg.lambdas[li];
        const SpaceSpec space{cfg.domain, lam, SpaceFlavor::Plurih};
        const Truncation trunc = cfg.policy.truncation_at(lam);
        const QuadratureRule rule = rule_for(space, orders.max_degree, orders.angular_order);
        const auto t = assemble_toeplitz(space, cfg.f, trunc, rule, cfg.jobs);
        SweepRecord rec;
        rec.lambda = lam;
        rec.truncation = trunc.max_holo;
        rec.norm_ph = operator_norm(t);
        const Eigen::Index nh = trunc.max_holo + 1;
        rec.norm_holo = spectral_norm(t.entries.block(0, 0, nh, nh));
        rec.sup_node = node_sup(cfg.f, rule);
        rec.gap = rec.sup_node - rec.norm_ph;
        if (li == 0) rep.meta["tag_diagnostics"] = detail::tag_diagnostics(cfg, rule);
        for (const Point& z : cfg.samples) {
            const cplx b = berezin_symbol(space, cfg.f, z, rule);
            rec.berezin_errors.push_back(std::abs(b - cfg.f(z)));
            rec.kernel_masses.push_back(
                detail::partial_kernel_mass(space, t.row_basis, z));
        }
        if (sink) sink(rec);
        rep.records.push_back(std::move(rec));
    }
    return rep;
}

// Semi-commutator decay experiment, with the four block norms alongside.
inline SweepReport semicommutator_sweep(const SweepConfig& cfg, const RecordSink& sink = {}) {
    cfg.validate();
    if (!cfg.g) throw config_error("semicommutator_sweep: needs a second symbol g");
    const QuadratureOrders orders = detail::auto_orders(cfg, true);
    SweepReport rep;
    rep.kind = "semicommutator_sweep";
    rep.meta["symbol_f"] = cfg.f.label;
    rep.meta["symbol_g"] = cfg.g->label;
    rep.meta["orders"] = {{"max_degree", orders.max_degree},
                          {"angular_order", orders.angular_order}};
    bool first = true;
    for (double lam : cfg.lambdas) {
        const SpaceSpec space{cfg.domain, lam, SpaceFlavor::Plurih};
        const Truncation trunc = cfg.policy.truncation_at(lam);
        const Truncation inner = detail::inner_truncation(cfg, trunc);
        const QuadratureRule rule = rule_for(space, orders.max_degree, orders.angular_order);
        if (first) {
            rep.meta["tag_diagnostics"] = detail::tag_diagnostics(cfg, rule);
            first = false;
        }
        const auto sc = semi_commutator(space, cfg.f, *cfg.g, trunc, inner, rule, cfg.jobs);
        SweepRecord rec;
        rec.lambda = lam;
        rec.truncation = trunc.max_holo;
        rec.semi_norm = operator_norm(sc);
        double blocks[4];
        detail::block_norms(sc, blocks);
        rec.block_11 = blocks[0];
        rec.block_12 = blocks[1];
        rec.block_21 = blocks[2];
        rec.block_22 = blocks[3];
        rec.sup_node = node_sup(cfg.f, rule) * node_sup(*cfg.g, rule);
        if (sink) sink(rec);
        rep.records.push_back(std::move(rec));
    }
    return rep;
}

// Commutator obstruction experiment: ||(lambda/i)[T_f, T_g] - T_h|| together
// with the operator-Berezin transform of the commutator sampled on a grid.
// Under a conjugation-symmetric truncation the latter vanishes identically;
// a nonzero h therefore keeps the norm away from zero.
inline SweepReport third_property_probe(const SweepConfig& cfg, const RecordSink& sink = {}) {
    cfg.validate();
    if (!cfg.g) throw config_error("third_property_probe: needs a second symbol g");
    if (!cfg.h) throw config_error("third_property_probe: needs a candidate symbol h");
    const QuadratureOrders orders = detail::auto_orders(cfg, true);
    SweepReport rep;
    rep.kind = "third_property_probe";
    rep.meta["symbol_f"] = cfg.f.label;
    rep.meta["symbol_g"] = cfg.g->label;
    rep.meta["symbol_h"] = cfg.h->label;
    rep.meta["orders"] = {{"max_degree", orders.max_degree},
                          {"angular_order", orders.angular_order}};
    bool first = true;
    for (double lam : cfg.lambdas) {
        const SpaceSpec space{cfg.domain, lam, SpaceFlavor::Plurih};
        const Truncation trunc = cfg.policy.truncation_at(lam);
        if (!trunc.conjugation_symmetric())
            throw config_error("third_property_probe: conjugation-symmetric truncation required");
        const Truncation inner = detail::inner_truncation(cfg, trunc);
        const QuadratureRule rule = rule_for(space, orders.max_degree, orders.angular_order);
        if (first) {
            rep.meta["tag_diagnostics"] = detail::tag_diagnostics(cfg, rule);
            first = false;
        }
        const auto comm = commutator(space, cfg.f, *cfg.g, trunc, inner, rule, cfg.jobs);
        const auto th = assemble_toeplitz(space, *cfg.h, trunc, rule, cfg.jobs);
        SweepRecord rec;
        rec.lambda = lam;
        rec.truncation = trunc.max_holo;
        rec.comm_norm = operator_norm(comm);
        rec.lambda_comm_norm = lam * rec.comm_norm;
        const bool h_zero = th.entries.cwiseAbs().maxCoeff() == 0.0;
        if (h_zero) {
            // ||(lambda/i) C - 0|| = lambda ||C|| exactly.
            rec.probe_norm = rec.lambda_comm_norm;
        } else {
            const CMatrix probe = cplx{0.0, -lam} * comm.entries - th.entries;
            rec.probe_norm = spectral_norm(probe);
        }
        for (const Point& z : cfg.samples) {
            const auto bc = berezin_operator(space, comm, z);
            rec.berezin_comm_max = std::max(rec.berezin_comm_max, std::abs(bc.value));
            const auto bh = berezin_operator(space, th, z);
            rec.h_berezin_max = std::max(rec.h_berezin_max, std::abs(bh.value));
            rec.kernel_masses.push_back(bc.partial_kernel_mass);
        }
        if (sink) sink(rec);
        rep.records.push_back(std::move(rec));
    }
    return rep;
}

// Pointwise Berezin convergence experiment on closed-form kernels: per lambda
// and sample point, |B(f)(z) - f(z)| for the configured flavor.
inline SweepReport berezin_convergence_sweep(const SweepConfig& cfg, const RecordSink& sink = {}) {
    cfg.validate();
    if (cfg.samples.empty())
        throw config_error("berezin_convergence_sweep: needs sample points");
    const QuadratureOrders orders = detail::auto_orders(cfg, false);
    SweepReport rep;
    rep.kind = "berezin_convergence_sweep";
    rep.meta["symbol"] = cfg.f.label;
    rep.meta["flavor"] = to_string(cfg.flavor);
    rep.meta["orders"] = {{"max_degree", orders.max_degree},
                          {"angular_order", orders.angular_order}};
    bool first = true;
    for (double lam : cfg.lambdas) {
        const SpaceSpec space{cfg.domain, lam, cfg.flavor};
        const QuadratureRule rule = rule_for(space, orders.max_degree, orders.angular_order);
        if (first) {
            rep.meta["tag_diagnostics"] = detail::tag_diagnostics(cfg, rule);
            first = false;
        }
        SweepRecord rec;
        rec.lambda = lam;
        for (const Point& z : cfg.samples) {
            if (!domain_contains(cfg.domain, z))
                throw domain_error("berezin_convergence_sweep: sample outside domain");
            const cplx b = berezin_symbol(space, cfg.f, z, rule);
            rec.berezin_errors.push_back(std::abs(b - cfg.f(z)));
        }
        if (sink) sink(rec);
        rep.records.push_back(std::move(rec));
    }
    return rep;
}

} // namespace plurispec
