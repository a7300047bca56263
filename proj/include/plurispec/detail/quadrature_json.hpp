#pragma once

// JSON caching format for quadrature rules: nodes as [re, im] pairs (a pair of
// pairs on the ball), weights as decimal strings so a cache round-trip is
// bit-faithful.

#include <cstdio>
#include <string>

#include <json.hpp>

#include "plurispec/quadrature.hpp"

namespace plurispec {

inline std::string decimal_string(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline nlohmann::json rule_to_json(const QuadratureRule& rule) {
    nlohmann::json j;
    j["domain"] = to_string(rule.domain);
    j["lambda"] = rule.lambda;
    j["max_degree"] = rule.max_degree;
    j["angular_order"] = rule.angular_order;
    j["radial_x"] = rule.radial_x;
    j["radial_w"] = rule.radial_w;
    j["radial2_x"] = rule.radial2_x;
    j["radial2_w"] = rule.radial2_w;
    j["tail_weight"] = rule.tail_weight;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (const auto& p : rule.nodes) {
        if (rule.domain == DomainKind::UnitBall2)
            nodes.push_back({{p.z1.real(), p.z1.imag()}, {p.z2.real(), p.z2.imag()}});
        else
            nodes.push_back({p.z1.real(), p.z1.imag()});
    }
    auto& weights = j["weights"] = nlohmann::json::array();
    for (double w : rule.weights) weights.push_back(decimal_string(w));
    return j;
}

inline DomainKind domain_from_string(const std::string& s) {
    if (s == "fock") return DomainKind::FockPlane;
    if (s == "disk") return DomainKind::UnitDisk;
    if (s == "ball2") return DomainKind::UnitBall2;
    throw config_error("unknown domain '" + s + "'");
}

inline QuadratureRule rule_from_json(const nlohmann::json& j) {
    QuadratureRule rule;
    rule.domain = domain_from_string(j.at("domain").get<std::string>());
    rule.lambda = j.at("lambda").get<double>();
    rule.max_degree = j.at("max_degree").get<int>();
    rule.angular_order = j.at("angular_order").get<int>();
    rule.radial_x = j.at("radial_x").get<std::vector<double>>();
    rule.radial_w = j.at("radial_w").get<std::vector<double>>();
    rule.radial2_x = j.at("radial2_x").get<std::vector<double>>();
    rule.radial2_w = j.at("radial2_w").get<std::vector<double>>();
    rule.tail_weight = j.at("tail_weight").get<double>();
    for (const auto& n : j.at("nodes")) {
        Point p;
        if (rule.domain == DomainKind::UnitBall2) {
            p.z1 = cplx{n.at(0).at(0).get<double>(), n.at(0).at(1).get<double>()};
            p.z2 = cplx{n.at(1).at(0).get<double>(), n.at(1).at(1).get<double>()};
        } else {
            p.z1 = cplx{n.at(0).get<double>(), n.at(1).get<double>()};
        }
        rule.nodes.push_back(p);
    }
    for (const auto& w : j.at("weights")) rule.weights.push_back(std::stod(w.get<std::string>()));
    detail::audit_rule(rule);
    return rule;
}

} // namespace plurispec
