#pragma once

#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "plurispec/asymptotics.hpp"
#include "plurispec/berezin.hpp"
#include "plurispec/errors.hpp"
#include "plurispec/operators.hpp"
#include "plurispec/quadrature.hpp"
#include "plurispec/report.hpp"
#include "plurispec/spaces.hpp"
#include "plurispec/spectral.hpp"
#include "plurispec/symbol.hpp"
#include "plurispec/version.hpp"

namespace plurispec::cli {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config parsing. Unknown keys are rejected before any computation runs.

inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& ctx) {
    if (!obj.is_object()) throw config_error("config: " + ctx + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw config_error("config: unknown key '" + it.key() + "' in " + ctx);
}

inline SpaceFlavor flavor_from_string(const std::string& s) {
    if (s == "holo") return SpaceFlavor::Holo;
    if (s == "anti") return SpaceFlavor::AntiHolo;
    if (s == "plurih") return SpaceFlavor::Plurih;
    if (s == "plurih_holo_2d") return SpaceFlavor::PlurihHolo2D;
    throw config_error("config: unknown flavor '" + s + "'");
}

inline SpaceSpec parse_space(const json& j) {
    check_keys(j, {"domain", "lambda", "flavor"}, "space");
    SpaceSpec s;
    s.domain = domain_from_string(j.at("domain").get<std::string>());
    s.lambda = j.at("lambda").get<double>();
    s.flavor = flavor_from_string(j.value("flavor", "holo"));
    s.validate();
    return s;
}

inline Truncation parse_truncation(const json& j) {
    check_keys(j, {"max_holo", "max_anti", "max_second"}, "truncation");
    Truncation t;
    t.max_holo = j.value("max_holo", 0);
    t.max_anti = j.value("max_anti", 0);
    t.max_second = j.value("max_second", 0);
    t.validate();
    return t;
}

inline QuadratureOrders parse_orders(const json& j) {
    check_keys(j, {"max_degree", "angular_order"}, "quadrature");
    QuadratureOrders o;
    o.max_degree = j.at("max_degree").get<int>();
    o.angular_order = j.at("angular_order").get<int>();
    return o;
}

inline TruncationPolicy parse_policy(const json& j) {
    check_keys(j, {"fixed", "base", "slope"}, "policy");
    TruncationPolicy p;
    if (j.contains("fixed")) {
        if (j.contains("base") || j.contains("slope"))
            throw config_error("config: policy is either fixed or base+slope");
        p.scaled = false;
        p.fixed = j.at("fixed").get<int>();
    } else {
        p.scaled = true;
        p.base = j.value("base", 10);
        p.slope = j.value("slope", 2.0);
    }
    return p;
}

inline SymbolClassTags parse_tags(const json& j) {
    check_keys(j,
               {"bounded", "continuous_up_to_boundary", "vanishes_at_boundary",
                "vanishing_oscillation"},
               "tags");
    SymbolClassTags t;
    t.bounded = j.value("bounded", false);
    t.continuous_up_to_boundary = j.value("continuous_up_to_boundary", false);
    t.vanishes_at_boundary = j.value("vanishes_at_boundary", false);
    t.vanishing_oscillation = j.value("vanishing_oscillation", false);
    return t;
}

inline std::vector<Point> parse_samples(const json& doc) {
    std::vector<Point> pts;
    if (doc.contains("samples")) {
        for (const auto& s : doc.at("samples")) {
            if (s.size() == 2)
                pts.push_back(Point{cplx{s.at(0).get<double>(), s.at(1).get<double>()}, cplx{}});
            else if (s.size() == 4)
                pts.push_back(Point{cplx{s.at(0).get<double>(), s.at(1).get<double>()},
                                    cplx{s.at(2).get<double>(), s.at(3).get<double>()}});
            else
                throw config_error("config: samples entries are [re,im] or [re1,im1,re2,im2]");
        }
    }
    if (doc.contains("sample_spiral")) {
        const auto& sp = doc.at("sample_spiral");
        check_keys(sp, {"count", "radius"}, "sample_spiral");
        const int n = sp.at("count").get<int>();
        const double radius = sp.at("radius").get<double>();
        const double golden = 0.6180339887498949;
        for (int k = 0; k < n; ++k) {
            const double r = radius * std::sqrt(double(k + 1) / n);
            const double th = 2.0 * kPi * std::fmod(golden * (k + 1), 1.0);
            pts.push_back(Point{r * cplx{std::cos(th), std::sin(th)}, cplx{}});
        }
    }
    return pts;
}

inline SymbolFn parse_symbol_field(const json& doc, const char* key) {
    if (!doc.contains(key)) throw config_error(std::string("config: missing '") + key + "'");
    return SymbolFn::from_expr(parse_symbol(doc.at(key).get<std::string>()));
}

// Dotted-path override, applied after file parsing: a.b.c=value.
inline void apply_override(json& doc, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw config_error("--set expects key=value, got '" + spec + "'");
    const std::string path = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw; // plain string
    }
    json* cur = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw config_error("--set: empty path segment in '" + spec + "'");
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            return;
        }
        cur = &((*cur)[key]);
        start = dot + 1;
    }
}

// ---------------------------------------------------------------------------
// Output helpers.

struct Outputs {
    std::optional<std::string> csv;
    std::optional<std::string> json_path;
};

inline Outputs parse_outputs(const json& doc) {
    Outputs o;
    if (doc.contains("output")) {
        check_keys(doc.at("output"), {"csv", "json"}, "output");
        if (doc.at("output").contains("csv")) o.csv = doc.at("output").at("csv").get<std::string>();
        if (doc.at("output").contains("json"))
            o.json_path = doc.at("output").at("json").get<std::string>();
    }
    return o;
}

// ---------------------------------------------------------------------------
// Command implementations. Each throws config_error / numeric_error; the
// driver maps them to exit codes 2 / 3.

inline void cmd_assemble(const json& doc, int jobs, std::ostream& out) {
    check_keys(doc, {"space", "truncation", "quadrature", "symbol", "output"}, "assemble config");
    const SpaceSpec space = parse_space(doc.at("space"));
    const Truncation trunc = parse_truncation(doc.at("truncation"));
    const QuadratureOrders orders = parse_orders(doc.at("quadrature"));
    const SymbolFn f = parse_symbol_field(doc, "symbol");
    const QuadratureRule rule = rule_for(space, orders.max_degree, orders.angular_order);
    const auto m = assemble_toeplitz(space, f, trunc, rule, jobs);
    const Outputs outputs = parse_outputs(doc);
    out << "assembled " << m.entries.rows() << "x" << m.entries.cols() << " matrix, norm "
        << fmt_double(operator_norm(m)) << "\n";
    if (outputs.csv) {
        CsvWriter w(*outputs.csv);
        w.row({"row", "col", "row_basis", "col_basis", "re", "im"});
        for (Eigen::Index i = 0; i < m.entries.rows(); ++i)
            for (Eigen::Index j = 0; j < m.entries.cols(); ++j)
                w.row({std::to_string(i), std::to_string(j),
                       m.row_basis[static_cast<std::size_t>(i)].describe(),
                       m.col_basis[static_cast<std::size_t>(j)].describe(),
                       fmt_double(m.entries(i, j).real()), fmt_double(m.entries(i, j).imag())});
        w.commit();
    }
    if (outputs.json_path) {
        json rep = report_envelope("assemble", doc);
        rep["matrix"] = matrix_to_json(m);
        write_json_report(*outputs.json_path, rep);
    }
}

inline void cmd_blocks(const json& doc, int jobs, std::ostream& out) {
    check_keys(doc, {"space", "truncation", "quadrature", "symbol", "output"}, "blocks config");
    SpaceSpec space = parse_space(doc.at("space"));
    if (space.flavor != SpaceFlavor::Plurih)
        throw config_error("blocks: space.flavor must be 'plurih'");
    const Truncation trunc = parse_truncation(doc.at("truncation"));
    const QuadratureOrders orders = parse_orders(doc.at("quadrature"));
    const SymbolFn f = parse_symbol_field(doc, "symbol");
    const QuadratureRule rule = rule_for(space, orders.max_degree, orders.angular_order);
    const auto m = assemble_toeplitz(space, f, trunc, rule, jobs);
    const auto blocks = extract_blocks(m, f, rule, jobs);
    out << "blocks: |T|=" << fmt_double(operator_norm(blocks.holo))
        << " |A|=" << fmt_double(operator_norm(blocks.mixing_a))
        << " |B|=" << fmt_double(operator_norm(blocks.mixing_b))
        << " |Tah|=" << fmt_double(operator_norm(blocks.anti)) << "\n";
    const Outputs outputs = parse_outputs(doc);
    if (outputs.json_path) {
        json rep = report_envelope("blocks", doc);
        rep["full"] = matrix_to_json(m);
        rep["holo"] = matrix_to_json(blocks.holo);
        rep["A"] = matrix_to_json(blocks.mixing_a);
        rep["B"] = matrix_to_json(blocks.mixing_b);
        rep["anti"] = matrix_to_json(blocks.anti);
        rep["E"] = matrix_to_json(blocks.const_in);
        rep["G"] = matrix_to_json(blocks.const_out);
        write_json_report(*outputs.json_path, rep);
    }
}

inline void cmd_berezin(const json& doc, int /*jobs*/, std::ostream& out) {
    check_keys(doc,
               {"space", "quadrature", "symbol", "samples", "sample_spiral",
                "with_mean_oscillation", "with_oscillation", "seed", "output"},
               "berezin config");
    const SpaceSpec space = parse_space(doc.at("space"));
    const QuadratureOrders orders = parse_orders(doc.at("quadrature"));
    const SymbolFn f = parse_symbol_field(doc, "symbol");
    const auto pts = parse_samples(doc);
    if (pts.empty()) throw config_error("berezin: no sample points");
    const bool with_mo = doc.value("with_mean_oscillation", false);
    int osc_samples = 0;
    if (doc.contains("with_oscillation")) {
        check_keys(doc.at("with_oscillation"), {"n_samples"}, "with_oscillation");
        osc_samples = doc.at("with_oscillation").value("n_samples", 256);
    }
    const std::uint64_t seed = doc.value("seed", 0ull);
    const QuadratureRule rule = rule_for(space, orders.max_degree, orders.angular_order);
    const Outputs outputs = parse_outputs(doc);
    std::optional<CsvWriter> w;
    if (outputs.csv) {
        w.emplace(*outputs.csv);
        std::vector<std::string> hdr = {"re_z", "im_z", "re_value", "im_value", "flavor", "lambda"};
        if (with_mo) hdr.push_back("mean_oscillation");
        if (osc_samples > 0) hdr.push_back("oscillation");
        w->row(hdr);
    }
    json rows = json::array();
    for (const Point& z : pts) {
        const cplx v = berezin_symbol(space, f, z, rule);
        std::vector<std::string> cells = {fmt_double(z.z1.real()),  fmt_double(z.z1.imag()),
                                          fmt_double(v.real()),     fmt_double(v.imag()),
                                          to_string(space.flavor),  fmt_double(space.lambda)};
        json rec = {{"z", {z.z1.real(), z.z1.imag()}}, {"value", {v.real(), v.imag()}}};
        if (with_mo) {
            const double mo = mean_oscillation(space, f, z, rule);
            cells.push_back(fmt_double(mo));
            rec["mean_oscillation"] = mo;
        }
        if (osc_samples > 0) {
            const double osc = oscillation(f, z, space.domain, osc_samples, seed);
            cells.push_back(fmt_double(osc));
            rec["oscillation"] = osc;
        }
        if (w) w->row(cells);
        rows.push_back(std::move(rec));
        out << "berezin z=(" << fmt_double(z.z1.real()) << "," << fmt_double(z.z1.imag())
            << ") value=(" << fmt_double(v.real()) << "," << fmt_double(v.imag()) << ")\n";
    }
    if (w) w->commit();
    if (outputs.json_path) {
        json rep = report_envelope("berezin", doc);
        rep["records"] = std::move(rows);
        write_json_report(*outputs.json_path, rep);
    }
}

namespace detail {

inline SweepConfig sweep_config_common(const json& doc, int jobs, bool needs_g, bool needs_h) {
    SweepConfig cfg;
    cfg.domain = domain_from_string(doc.at("domain").get<std::string>());
    cfg.f = parse_symbol_field(doc, "symbol");
    if (needs_g) cfg.g = parse_symbol_field(doc, "symbol_g");
    if (needs_h) cfg.h = parse_symbol_field(doc, "symbol_h");
    cfg.lambdas = doc.at("lambdas").get<std::vector<double>>();
    if (doc.contains("policy")) cfg.policy = parse_policy(doc.at("policy"));
    if (doc.contains("quadrature")) cfg.orders = parse_orders(doc.at("quadrature"));
    cfg.inner_margin = doc.value("inner_margin", 8);
    cfg.samples = parse_samples(doc);
    if (doc.contains("tags")) cfg.tags = parse_tags(doc.at("tags"));
    cfg.jobs = jobs;
    return cfg;
}

inline double vec_max(const std::vector<double>& v, double fallback) {
    if (v.empty()) return fallback;
    double m = v.front();
    for (double x : v) m = std::max(m, x);
    return m;
}

inline double vec_min(const std::vector<double>& v, double fallback) {
    if (v.empty()) return fallback;
    double m = v.front();
    for (double x : v) m = std::min(m, x);
    return m;
}

inline json record_to_json(const SweepRecord& r) {
    json j;
    j["lambda"] = r.lambda;
    j["truncation"] = r.truncation;
    j["norm_ph"] = r.norm_ph;
    j["norm_holo"] = r.norm_holo;
    j["sup_node"] = r.sup_node;
    j["gap"] = r.gap;
    j["semi_norm"] = r.semi_norm;
    j["blocks"] = {r.block_11, r.block_12, r.block_21, r.block_22};
    j["comm_norm"] = r.comm_norm;
    j["lambda_comm_norm"] = r.lambda_comm_norm;
    j["probe_norm"] = r.probe_norm;
    j["berezin_comm_max"] = r.berezin_comm_max;
    j["h_berezin_max"] = r.h_berezin_max;
    j["berezin_errors"] = r.berezin_errors;
    j["kernel_masses"] = r.kernel_masses;
    return j;
}

inline void finish_sweep_outputs(const std::string& command, const json& doc,
                                 const SweepReport& rep, const Outputs& outputs) {
    if (outputs.json_path) {
        json j = report_envelope(command, doc);
        j["kind"] = rep.kind;
        j["meta"] = rep.meta;
        json recs = json::array();
        for (const auto& r : rep.records) recs.push_back(record_to_json(r));
        j["records"] = std::move(recs);
        write_json_report(*outputs.json_path, j);
    }
}

} // namespace detail

inline void cmd_quantize_norm(const json& doc, int jobs, std::ostream& out) {
    check_keys(doc,
               {"domain", "symbol", "lambdas", "policy", "quadrature", "inner_margin", "samples",
                "sample_spiral", "tags", "seed", "output"},
               "quantize-norm config");
    SweepConfig cfg = detail::sweep_config_common(doc, jobs, false, false);
    const Outputs outputs = parse_outputs(doc);
    std::optional<CsvWriter> w;
    if (outputs.csv) {
        w.emplace(*outputs.csv);
        w->row({"lambda", "truncation", "norm_ph", "norm_holo", "sup_node", "gap",
                "max_berezin_err", "min_kernel_mass"});
    }
    auto sink = [&](const SweepRecord& r) {
        if (w)
            w->row({fmt_double(r.lambda), std::to_string(r.truncation), fmt_double(r.norm_ph),
                    fmt_double(r.norm_holo), fmt_double(r.sup_node), fmt_double(r.gap),
                    fmt_double(detail::vec_max(r.berezin_errors, 0.0)),
                    fmt_double(detail::vec_min(r.kernel_masses, 1.0))});
        out << "lambda=" << fmt_double(r.lambda) << " norm_ph=" << fmt_double(r.norm_ph)
            << " gap=" << fmt_double(r.gap) << "\n";
    };
    const SweepReport rep = norm_sweep(cfg, sink);
    if (w) w->commit();
    detail::finish_sweep_outputs("quantize-norm", doc, rep, outputs);
}

inline void cmd_quantize_semicomm(const json& doc, int jobs, std::ostream& out) {
    check_keys(doc,
               {"domain", "symbol", "symbol_g", "lambdas", "policy", "quadrature", "inner_margin",
                "samples", "sample_spiral", "tags", "seed", "output"},
               "quantize-semicomm config");
    SweepConfig cfg = detail::sweep_config_common(doc, jobs, true, false);
    const Outputs outputs = parse_outputs(doc);
    std::optional<CsvWriter> w;
    if (outputs.csv) {
        w.emplace(*outputs.csv);
        w->row({"lambda", "truncation", "semi_norm", "block_11", "block_12", "block_21",
                "block_22"});
    }
    auto sink = [&](const SweepRecord& r) {
        if (w)
            w->row({fmt_double(r.lambda), std::to_string(r.truncation), fmt_double(r.semi_norm),
                    fmt_double(r.block_11), fmt_double(r.block_12), fmt_double(r.block_21),
                    fmt_double(r.block_22)});
        out << "lambda=" << fmt_double(r.lambda) << " semi_norm=" << fmt_double(r.semi_norm)
            << "\n";
    };
    const SweepReport rep = semicommutator_sweep(cfg, sink);
    if (w) w->commit();
    detail::finish_sweep_outputs("quantize-semicomm", doc, rep, outputs);
}

inline void cmd_quantize_third(const json& doc, int jobs, std::ostream& out) {
    check_keys(doc,
               {"domain", "symbol", "symbol_g", "symbol_h", "lambdas", "policy", "quadrature",
                "inner_margin", "samples", "sample_spiral", "tags", "seed", "output"},
               "quantize-third config");
    SweepConfig cfg = detail::sweep_config_common(doc, jobs, true, true);
    const Outputs outputs = parse_outputs(doc);
    std::optional<CsvWriter> w;
    if (outputs.csv) {
        w.emplace(*outputs.csv);
        w->row({"lambda", "truncation", "comm_norm", "lambda_comm_norm", "probe_norm",
                "berezin_comm_max", "h_berezin_max", "min_kernel_mass"});
    }
    auto sink = [&](const SweepRecord& r) {
        if (w)
            w->row({fmt_double(r.lambda), std::to_string(r.truncation), fmt_double(r.comm_norm),
                    fmt_double(r.lambda_comm_norm), fmt_double(r.probe_norm),
                    fmt_double(r.berezin_comm_max), fmt_double(r.h_berezin_max),
                    fmt_double(detail::vec_min(r.kernel_masses, 1.0))});
        out << "lambda=" << fmt_double(r.lambda) << " probe_norm=" << fmt_double(r.probe_norm)
            << " berezin_comm_max=" << fmt_double(r.berezin_comm_max) << "\n";
    };
    const SweepReport rep = third_property_probe(cfg, sink);
    if (w) w->commit();
    detail::finish_sweep_outputs("quantize-third", doc, rep, outputs);
}

inline void cmd_berezin_converge(const json& doc, int jobs, std::ostream& out) {
    check_keys(doc,
               {"domain", "flavor", "symbol", "lambdas", "quadrature", "samples", "sample_spiral",
                "tags", "seed", "output"},
               "berezin-converge config");
    SweepConfig cfg = detail::sweep_config_common(doc, jobs, false, false);
    cfg.flavor = flavor_from_string(doc.value("flavor", "holo"));
    const Outputs outputs = parse_outputs(doc);
    std::optional<CsvWriter> w;
    if (outputs.csv) {
        w.emplace(*outputs.csv);
        std::vector<std::string> hdr = {"lambda"};
        for (std::size_t i = 0; i < cfg.samples.size(); ++i)
            hdr.push_back("err_" + std::to_string(i));
        w->row(hdr);
    }
    auto sink = [&](const SweepRecord& r) {
        if (w) {
            std::vector<std::string> cells = {fmt_double(r.lambda)};
            for (double e : r.berezin_errors) cells.push_back(fmt_double(e));
            w->row(cells);
        }
        out << "lambda=" << fmt_double(r.lambda)
            << " max_err=" << fmt_double(detail::vec_max(r.berezin_errors, 0.0)) << "\n";
    };
    const SweepReport rep = berezin_convergence_sweep(cfg, sink);
    if (w) w->commit();
    detail::finish_sweep_outputs("berezin-converge", doc, rep, outputs);
}

inline void cmd_spectrum(const json& doc, int jobs, std::ostream& out) {
    check_keys(doc,
               {"space", "symbol", "quadrature", "shells", "points_per_shell",
                "with_truncated_spectrum", "output"},
               "spectrum config");
    const SpaceSpec space = parse_space(doc.at("space"));
    const SymbolFn f = parse_symbol_field(doc, "symbol");
    const QuadratureOrders orders = parse_orders(doc.at("quadrature"));
    std::vector<double> shells = doc.contains("shells")
                                     ? doc.at("shells").get<std::vector<double>>()
                                     : default_shells(space.domain, space.lambda);
    const int pts = doc.value("points_per_shell", 256);
    const QuadratureRule rule = rule_for(space, orders.max_degree, orders.angular_order);
    const auto est = essential_spectrum_estimate(space, f, shells, pts, rule);
    out << "spectrum estimate: outer shell r=" << fmt_double(est.shells.back().radius)
        << " drift=" << fmt_double(est.shell_drift)
        << " dist(0,cloud)=" << fmt_double(est.dist_zero)
        << (est.zero_outside_estimate ? " (0 outside estimate)" : "") << "\n";
    const Outputs outputs = parse_outputs(doc);
    if (outputs.csv) {
        CsvWriter w(*outputs.csv);
        w.row({"re", "im", "shell"});
        for (const auto& sh : est.shells)
            for (const auto& v : sh.values)
                w.row({fmt_double(v.real()), fmt_double(v.imag()), fmt_double(sh.radius)});
        w.commit();
    }
    if (outputs.json_path) {
        json rep = report_envelope("spectrum", doc);
        json shells_j = json::array();
        for (const auto& sh : est.shells) {
            json sj;
            sj["radius"] = sh.radius;
            json vals = json::array();
            for (std::size_t i = 0; i < sh.values.size(); ++i)
                vals.push_back({sh.values[i].real(), sh.values[i].imag(),
                                static_cast<int>(sh.unstable[i])});
            sj["values"] = std::move(vals);
            shells_j.push_back(std::move(sj));
        }
        rep["shells"] = std::move(shells_j);
        rep["shell_drift"] = est.shell_drift;
        rep["dist_zero"] = est.dist_zero;
        rep["zero_outside_estimate"] = est.zero_outside_estimate;
        rep["node_sup"] = est.node_sup;
        if (doc.contains("with_truncated_spectrum")) {
            const Truncation tr = parse_truncation(doc.at("with_truncated_spectrum"));
            const auto t = assemble_toeplitz(space, f, tr, rule, jobs);
            json eigs = json::array();
            for (const cplx& e : truncated_spectrum(t)) eigs.push_back({e.real(), e.imag()});
            rep["truncated_spectrum"] = std::move(eigs);
            rep["truncated_spectrum_hermitian"] = is_hermitian(t.entries, 1e-12);
        }
        write_json_report(*outputs.json_path, rep);
    }
}

inline void cmd_compactness(const json& doc, int jobs, std::ostream& out) {
    check_keys(doc, {"space", "symbol", "ladder", "tail_index", "output"}, "compactness config");
    const SpaceSpec space = parse_space(doc.at("space"));
    const SymbolFn f = parse_symbol_field(doc, "symbol");
    const auto ladder = doc.at("ladder").get<std::vector<int>>();
    const int tail_index = doc.value("tail_index", 10);
    const auto rep = compactness_proxy(space, f, ladder, tail_index, 16, jobs);
    const Outputs outputs = parse_outputs(doc);
    std::optional<CsvWriter> w;
    if (outputs.csv) {
        w.emplace(*outputs.csv);
        w->row({"truncation", "dim", "sigma_top", "sigma_tail"});
    }
    for (std::size_t i = 0; i < rep.truncations.size(); ++i) {
        if (w)
            w->row({std::to_string(rep.truncations[i]),
                    std::to_string(rep.singular_values[i].size()), fmt_double(rep.top_sigma(i)),
                    fmt_double(rep.tail_sigma(i))});
        out << "truncation=" << rep.truncations[i] << " sigma_top=" << fmt_double(rep.top_sigma(i))
            << " sigma_tail=" << fmt_double(rep.tail_sigma(i)) << "\n";
    }
    if (w) w->commit();
    if (outputs.json_path) {
        json j = report_envelope("compactness", doc);
        j["truncations"] = rep.truncations;
        j["tail_index"] = rep.tail_index;
        j["singular_values"] = rep.singular_values;
        write_json_report(*outputs.json_path, j);
    }
}

inline void cmd_phh_check(const json& doc, int /*jobs*/, std::ostream& out) {
    check_keys(doc, {"symbol", "lambda", "max_first", "max_second", "quadrature", "output"},
               "phh-check config");
    const SymbolFn g = parse_symbol_field(doc, "symbol");
    const double lambda = doc.at("lambda").get<double>();
    const int d1 = doc.value("max_first", 3);
    const int d2 = doc.value("max_second", 3);
    const SpaceSpec ball{DomainKind::UnitBall2, lambda, SpaceFlavor::PlurihHolo2D};
    QuadratureOrders orders{0, 0};
    if (doc.contains("quadrature")) orders = parse_orders(doc.at("quadrature"));
    if (orders.max_degree == 0) {
        const int bw = g.bandwidth ? *g.bandwidth : 8;
        orders.max_degree = 2 * (d1 + d2) + bw + 4;
        orders.angular_order = 2 * orders.max_degree + 8;
    }
    const QuadratureRule rule2d = rule_for(ball, orders.max_degree, orders.angular_order);
    const Truncation btr{d1, d1, d2};
    const auto basis = enumerate_basis(ball, btr);

    // Reduced route: one disk block per a2, at the shifted weight.
    std::vector<OperatorMatrix> blocks;
    for (int a2 = 0; a2 <= d2; ++a2)
        blocks.push_back(phh_block_elements(g, lambda, a2, Truncation{d1, d1, 0},
                                            orders.max_degree, orders.angular_order));
    auto block_entry = [&](const BasisIndex& row, const BasisIndex& col) {
        const auto& b = blocks[static_cast<std::size_t>(row.d2)];
        auto pos = [&](const BasisIndex& ix) {
            const BasisIndex flat = ix.kind == BasisIndex::Kind::Plus
                                        ? BasisIndex::holo(ix.d1)
                                        : BasisIndex::anti(ix.d1);
            for (std::size_t k = 0; k < b.row_basis.size(); ++k)
                if (b.row_basis[k] == flat) return static_cast<Eigen::Index>(k);
            throw config_error("phh-check: index not found in reduced block");
        };
        return b.entries(pos(row), pos(col));
    };

    double max_matched = 0.0, max_mismatched = 0.0;
    const CMatrix direct_all = phh_elements_2d_batch(g, lambda, basis, rule2d);
    for (std::size_t r = 0; r < basis.size(); ++r) {
        for (std::size_t c = 0; c < basis.size(); ++c) {
            const cplx direct =
                direct_all(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            if (basis[r].d2 == basis[c].d2)
                max_matched =
                    std::max(max_matched, std::abs(direct - block_entry(basis[r], basis[c])));
            else
                max_mismatched = std::max(max_mismatched, std::abs(direct));
        }
    }
    out << "phh-check: max matched discrepancy " << fmt_double(max_matched)
        << ", max mismatched magnitude " << fmt_double(max_mismatched) << "\n";
    const Outputs outputs = parse_outputs(doc);
    if (outputs.json_path) {
        json j = report_envelope("phh-check", doc);
        j["max_matched_discrepancy"] = max_matched;
        j["max_mismatched_magnitude"] = max_mismatched;
        j["basis_size"] = basis.size();
        write_json_report(*outputs.json_path, j);
    }
}

inline void cmd_phh_fredholm(const json& doc, int jobs, std::ostream& out) {
    check_keys(doc,
               {"symbol", "lambda", "a2_range", "truncation", "regularizer", "zero_location",
                "inner_margin", "quadrature", "output"},
               "phh-fredholm config");
    const SymbolFn g = parse_symbol_field(doc, "symbol");
    const double lambda = doc.at("lambda").get<double>();
    const auto range = doc.at("a2_range").get<std::vector<int>>();
    if (range.size() != 2) throw config_error("phh-fredholm: a2_range must be [lo, hi]");
    Truncation trunc{16, 16, 0};
    if (doc.contains("truncation")) trunc = parse_truncation(doc.at("truncation"));
    PhhFredholmOptions opts;
    opts.regularizer = doc.value("regularizer", true);
    opts.inner_margin = doc.value("inner_margin", 16);
    opts.jobs = jobs;
    if (doc.contains("zero_location")) {
        const auto& zl = doc.at("zero_location");
        opts.zero_location = cplx{zl.at(0).get<double>(), zl.at(1).get<double>()};
    }
    if (doc.contains("quadrature")) {
        const auto orders = parse_orders(doc.at("quadrature"));
        opts.max_degree = orders.max_degree;
        opts.angular_order = orders.angular_order;
    }
    const auto diag = phh_fredholm_sweep(g, lambda, range[0], range[1], trunc, opts);
    const Outputs outputs = parse_outputs(doc);
    std::optional<CsvWriter> w;
    if (outputs.csv) {
        w.emplace(*outputs.csv);
        w->row({"a2", "weight", "min_singular_value", "defect_right", "defect_left", "weak_null"});
    }
    for (const auto& r : diag.rows) {
        if (w)
            w->row({std::to_string(r.a2), fmt_double(r.effective_weight),
                    fmt_double(r.min_singular_value),
                    r.defect_right ? fmt_double(*r.defect_right) : "",
                    r.defect_left ? fmt_double(*r.defect_left) : "",
                    r.weak_null ? fmt_double(*r.weak_null) : ""});
        out << "a2=" << r.a2 << " min_sv=" << fmt_double(r.min_singular_value);
        if (r.defect_right) out << " defect_right=" << fmt_double(*r.defect_right);
        if (r.weak_null) out << " weak_null=" << fmt_double(*r.weak_null);
        out << "\n";
    }
    if (w) w->commit();
    if (outputs.json_path) {
        json j = report_envelope("phh-fredholm", doc);
        json rows = json::array();
        for (const auto& r : diag.rows) {
            json rj = {{"a2", r.a2},
                       {"weight", r.effective_weight},
                       {"min_singular_value", r.min_singular_value}};
            if (r.defect_right) rj["defect_right"] = *r.defect_right;
            if (r.defect_left) rj["defect_left"] = *r.defect_left;
            if (r.weak_null) rj["weak_null"] = *r.weak_null;
            rows.push_back(std::move(rj));
        }
        j["rows"] = std::move(rows);
        write_json_report(*outputs.json_path, j);
    }
}

inline void cmd_selftest(const json& doc, int jobs, std::ostream& out) {
    if (!doc.empty()) check_keys(doc, {}, "selftest config");
    // Quadrature exactness audits run inside rule_for.
    for (double lam : {0.0, 0.5, 2.0}) {
        rule_for(SpaceSpec{DomainKind::UnitDisk, lam, SpaceFlavor::Holo}, 24, 64);
        out << "selftest: disk quadrature audit ok (lambda=" << fmt_double(lam) << ")\n";
    }
    for (double lam : {1.0, 5.0}) {
        rule_for(SpaceSpec{DomainKind::FockPlane, lam, SpaceFlavor::Holo}, 24, 64);
        out << "selftest: fock quadrature audit ok (lambda=" << fmt_double(lam) << ")\n";
    }
    rule_for(SpaceSpec{DomainKind::UnitBall2, 0.0, SpaceFlavor::PlurihHolo2D}, 12, 32);
    out << "selftest: ball quadrature audit ok\n";

    // Identity check: T_1 = I.
    const SymbolFn one = SymbolFn::constant(cplx{1.0, 0.0});
    for (DomainKind dom : {DomainKind::UnitDisk, DomainKind::FockPlane}) {
        const SpaceSpec sp{dom, 2.0, SpaceFlavor::Plurih};
        const QuadratureRule rule = rule_for(sp, 32, 80);
        const auto t = assemble_toeplitz(sp, one, Truncation{10, 10, 0}, rule, jobs);
        const double dev =
            (t.entries - CMatrix::Identity(t.entries.rows(), t.entries.cols())).cwiseAbs().maxCoeff();
        if (dev > 1e-12) throw numeric_error("selftest: T_1 deviates from identity by " +
                                             std::to_string(dev));
        out << "selftest: identity check ok (" << to_string(dom) << ", dev=" << fmt_double(dev)
            << ")\n";
    }

    // Commutator Berezin antisymmetry under a conjugation-symmetric truncation.
    {
        const SpaceSpec sp{DomainKind::FockPlane, 3.0, SpaceFlavor::Plurih};
        const QuadratureRule rule = rule_for(sp, 40, 96);
        const SymbolFn f = SymbolFn::from_expr(parse_symbol("(z+conj(z))/2"));
        const SymbolFn g = SymbolFn::from_expr(parse_symbol("(z-conj(z))/(2i)"));
        const Truncation tr{8, 8, 0};
        const Truncation inner{12, 12, 0};
        const auto comm = commutator(sp, f, g, tr, inner, rule, jobs);
        double worst = 0.0;
        for (int k = 0; k < 12; ++k) {
            const double th = 2.0 * kPi * k / 12.0;
            const Point z{0.7 * cplx{std::cos(th), std::sin(th)}, cplx{}};
            worst = std::max(worst, std::abs(berezin_operator(sp, comm, z).value));
        }
        if (worst > 1e-10)
            throw numeric_error("selftest: commutator Berezin transform reaches " +
                                std::to_string(worst));
        out << "selftest: commutator Berezin antisymmetry ok (max " << fmt_double(worst) << ")\n";
    }
    out << "selftest: all checks passed\n";
}

// ---------------------------------------------------------------------------

inline int run_command(const std::string& command, const json& config, int jobs,
                       std::ostream& out, std::ostream& err) {
    try {
        if (command == "assemble") cmd_assemble(config, jobs, out);
        else if (command == "blocks") cmd_blocks(config, jobs, out);
        else if (command == "berezin") cmd_berezin(config, jobs, out);
        else if (command == "quantize-norm") cmd_quantize_norm(config, jobs, out);
        else if (command == "quantize-semicomm") cmd_quantize_semicomm(config, jobs, out);
        else if (command == "quantize-third") cmd_quantize_third(config, jobs, out);
        else if (command == "berezin-converge") cmd_berezin_converge(config, jobs, out);
        else if (command == "spectrum") cmd_spectrum(config, jobs, out);
        else if (command == "compactness") cmd_compactness(config, jobs, out);
        else if (command == "phh-check") cmd_phh_check(config, jobs, out);
        else if (command == "phh-fredholm") cmd_phh_fredholm(config, jobs, out);
        else if (command == "selftest") cmd_selftest(config, jobs, out);
        else {
            err << "unknown command '" << command << "'\n";
            return 2;
        }
        return 0;
    } catch (const config_error& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        err << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace plurispec::cli
