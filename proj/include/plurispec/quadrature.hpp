#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "plurispec/errors.hpp"
#include "plurispec/linalg.hpp"
#include "plurispec/numeric.hpp"
#include "plurispec/spaces.hpp"

namespace plurispec {

// Weighted quadrature rule for dv_lambda, tensor product of Gauss radial
// factors and equispaced angular nodes. Radial factors are kept alongside the
// flattened node/weight arrays because matrix assembly and the exactness audit
// both exploit the ring structure.
//
// Node layout:
//   1D domains:  node[(ir)*angular_order + ja],  z = r_ir * e^{i theta_ja}
//   UnitBall2:   node[(((i1*R2)+i2)*A+j1)*A+j2],
//                z1 = sqrt(x1_i1) e^{i theta_j1},
//                z2 = sqrt(u_i2 (1 - x1_i1)) e^{i theta_j2}
struct QuadratureRule {
    DomainKind domain = DomainKind::UnitDisk;
    double lambda = 0.0;
    int max_degree = 0;    // declared exact for z^a conj(z)^b with a,b <= max_degree
    int angular_order = 0; // angular nodes per circle

    std::vector<double> radial_x;  // disk: x = r^2 in (0,1); fock: t = lambda r^2
    std::vector<double> radial_w;  // probability-normalized radial weights
    std::vector<double> radial2_x; // ball2 only: u = s^2 in (0,1)
    std::vector<double> radial2_w;
    double tail_weight = 0.0;      // fock: weight at the largest node (truncation tail)

    std::vector<Point> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

namespace detail {

// Orthonormal three-term recurrence evaluation: given the symmetric Jacobi
// matrix coefficients of a probability measure, return p_0..p_{n}(x) and the
// derivative of p_n. Used for the Newton polish and the Christoffel weights.
struct RecurrenceEval {
    double pn = 0.0;        // p_n(x)
    double dpn = 0.0;       // p_n'(x)
    double christoffel = 0.0; // sum_{k<n} p_k(x)^2
};

inline RecurrenceEval eval_orthonormal(const std::vector<double>& diag,
                                       const std::vector<double>& sub, double x) {
    const std::size_t n = diag.size();
    double pkm1 = 0.0, pk = 1.0;    // p_{-1}, p_0 (mu0 = 1)
    double dkm1 = 0.0, dk = 0.0;
    double chr = pk * pk;
    for (std::size_t k = 0; k < n; ++k) {
        const double bk = k + 1 < n ? sub[k] : 1.0; // trailing b only scales p_n
        const double bkm1 = k > 0 ? sub[k - 1] : 0.0;
        const double pnext = ((x - diag[k]) * pk - bkm1 * pkm1) / bk;
        const double dnext = (pk + (x - diag[k]) * dk - bkm1 * dkm1) / bk;
        pkm1 = pk;
        pk = pnext;
        dkm1 = dk;
        dk = dnext;
        if (k + 1 < n) chr += pk * pk;
    }
    return {pk, dk, chr};
}

// Golub-Welsch nodes from the Jacobi-matrix eigensolve, polished by Newton
// steps on the degree-n orthonormal polynomial; weights from the Christoffel
// function. The polish keeps declared-exact moments at 1e-12 relative even for
// degrees in the hundreds, where raw eigenvector weights drift.
inline void gauss_from_recurrence(const std::vector<double>& diag, const std::vector<double>& sub,
                                  std::vector<double>& x, std::vector<double>& w) {
    const std::size_t n = diag.size();
    std::vector<double> first;
    symmetric_tridiagonal_eigen(diag, sub, x, first);
    w.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double xi = x[i];
        for (int it = 0; it < 3; ++it) {
            const auto ev = eval_orthonormal(diag, sub, xi);
            if (ev.dpn == 0.0) break;
            const double step = ev.pn / ev.dpn;
            xi -= step;
            if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(xi))) break;
        }
        x[i] = xi;
        w[i] = 1.0 / eval_orthonormal(diag, sub, xi).christoffel;
        if (!(w[i] > 0.0) || !std::isfinite(w[i]))
            throw config_error(
                "quadrature: a tail weight left double range; lower the rule order");
    }
}

// Nodes/weights of the Gauss rule for the probability measure
// (alpha+1)(1-x)^alpha dx on [0,1], via the Jacobi(alpha, 0) matrix on [-1,1].
inline void gauss_unit_interval(double alpha, int n, std::vector<double>& x,
                                std::vector<double>& w) {
    if (n < 1) throw config_error("gauss_unit_interval: need at least one node");
    std::vector<double> diag(static_cast<std::size_t>(n));
    std::vector<double> sub(static_cast<std::size_t>(n > 1 ? n - 1 : 0));
    const double ab = alpha; // beta = 0
    diag[0] = -alpha / (ab + 2.0);
    for (int k = 2; k <= n; ++k) {
        const double abi = 2.0 * k + ab;
        diag[static_cast<std::size_t>(k - 1)] = -alpha * alpha / ((abi - 2.0) * abi);
    }
    if (n > 1) {
        sub[0] = std::sqrt(4.0 * (alpha + 1.0) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0)));
        for (int k = 2; k < n; ++k) {
            const double abi = 2.0 * k + ab;
            sub[static_cast<std::size_t>(k - 1)] =
                std::sqrt(4.0 * k * (k + alpha) * k * (k + ab) /
                          ((abi * abi - 1.0) * abi * abi));
        }
    }
    std::vector<double> t;
    gauss_from_recurrence(diag, sub, t, w);
    x.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        x[static_cast<std::size_t>(i)] = 0.5 * (1.0 + t[static_cast<std::size_t>(i)]);
}

// Gauss-Laguerre for the probability measure e^{-t} dt on [0, inf).
inline void gauss_halfline(int n, std::vector<double>& x, std::vector<double>& w) {
    if (n < 1) throw config_error("gauss_halfline: need at least one node");
    std::vector<double> diag(static_cast<std::size_t>(n));
    std::vector<double> sub(static_cast<std::size_t>(n > 1 ? n - 1 : 0));
    for (int k = 1; k <= n; ++k) diag[static_cast<std::size_t>(k - 1)] = 2.0 * k - 1.0;
    for (int k = 1; k < n; ++k) sub[static_cast<std::size_t>(k - 1)] = k;
    gauss_from_recurrence(diag, sub, x, w);
}

inline int radial_node_count(int max_degree) {
    // Gauss with R nodes is exact through x^{2R-1}; the audit needs x^max_degree.
    return max_degree / 2 + 1;
}

} // namespace detail

// Closed-form mixed moment: integral of z^a conj(z)^b against dv_lambda on a
// 1D domain. Zero off the diagonal by rotation invariance.
inline double moment_closed_form(DomainKind domain, double lambda, int a, int b) {
    if (a < 0 || b < 0) throw config_error("moment_closed_form: negative degree");
    if (a != b) return 0.0;
    switch (domain) {
        case DomainKind::FockPlane:
            return std::exp(log_gamma(a + 1.0) - a * std::log(lambda));
        case DomainKind::UnitDisk:
            return gamma_ratio({a + 1.0, lambda + 2.0}, {a + lambda + 2.0});
        case DomainKind::UnitBall2:
            throw config_error("moment_closed_form: use moment_closed_form_ball2");
    }
    throw config_error("moment_closed_form: unknown domain");
}

// Moment of |z1|^{2a} |z2|^{2c} on the ball: a! c! Gamma(lambda+3) / Gamma(a+c+lambda+3).
inline double moment_closed_form_ball2(double lambda, int a, int c) {
    return gamma_ratio({a + 1.0, c + 1.0, lambda + 3.0}, {a + c + lambda + 3.0});
}

// log of the closed-form diagonal moment, for audits at degrees where the
// linear value leaves double range.
inline double moment_closed_form_log(DomainKind domain, double lambda, int d) {
    if (d < 0) throw config_error("moment_closed_form_log: negative degree");
    switch (domain) {
        case DomainKind::FockPlane:
            return log_gamma(d + 1.0) - d * std::log(lambda);
        case DomainKind::UnitDisk:
            return log_gamma(d + 1.0) + log_gamma(lambda + 2.0) - log_gamma(d + lambda + 2.0);
        case DomainKind::UnitBall2:
            throw config_error("moment_closed_form_log: 1D domains only");
    }
    throw config_error("moment_closed_form_log: unknown domain");
}

namespace detail {

// log of the quadrature value of the diagonal moment |z|^{2d}, via
// log-sum-exp over the radial nodes so huge plane moments stay finite.
inline double quadrature_moment_log(const QuadratureRule& rule, double half) {
    const std::size_t nr = rule.radial_x.size();
    std::vector<double> logs(nr);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nr; ++i) {
        const double x = rule.domain == DomainKind::FockPlane ? rule.radial_x[i] / rule.lambda
                                                              : rule.radial_x[i];
        logs[i] = std::log(rule.radial_w[i]) + half * std::log(x);
        top = std::max(top, logs[i]);
    }
    double s = 0.0;
    for (double l : logs) s += std::exp(l - top);
    return top + std::log(s);
}

} // namespace detail

// Quadrature value of the mixed moment z^a conj(z)^b through the rule's ring
// structure. The angular nodes run over full root-of-unity cycles, whose sum is
// identically zero unless angular_order divides a-b; using that closed cycle
// sum avoids multiplying an O(eps) angular residue by the (possibly enormous)
// unnormalized radial factor.
inline double quadrature_moment(const QuadratureRule& rule, int a, int b) {
    if (rule.domain == DomainKind::UnitBall2)
        throw config_error("quadrature_moment: 1D domains only");
    const int m = a - b;
    if (m % rule.angular_order != 0) return 0.0;
    if (m != 0)
        throw numeric_error("quadrature_moment: angular aliasing, increase angular_order");
    return std::exp(detail::quadrature_moment_log(rule, 0.5 * (a + b)));
}

// Quadrature value of |z1|^{2a} |z2|^{2c} on the ball rule, through the two
// decoupled radial factors (angular cycles contribute exactly 1 here).
inline double quadrature_moment_ball2(const QuadratureRule& rule, int a, int c) {
    if (rule.domain != DomainKind::UnitBall2)
        throw config_error("quadrature_moment_ball2: ball rules only");
    double s = 0.0;
    for (std::size_t i1 = 0; i1 < rule.radial_x.size(); ++i1) {
        const double x1 = rule.radial_x[i1];
        double inner = 0.0;
        for (std::size_t i2 = 0; i2 < rule.radial2_x.size(); ++i2)
            inner += rule.radial2_w[i2] * std::pow(rule.radial2_x[i2] * (1.0 - x1), c);
        s += rule.radial_w[i1] * std::pow(x1, a) * inner;
    }
    return s;
}

namespace detail {

inline void audit_rule(const QuadratureRule& rule) {
    // Probability mass; pairwise reduction so the check measures the rule, not
    // the accumulation order.
    const double total = pairwise_sum(rule.weights);
    if (std::abs(total - 1.0) > 1e-13)
        throw numeric_error("quadrature audit: weights sum to 1 " +
                            (total > 1.0 ? std::string("+ ") : std::string("- ")) +
                            std::to_string(std::abs(total - 1.0)));
    for (double w : rule.weights)
        if (!(w > 0.0)) throw numeric_error("quadrature audit: non-positive weight");
    if (rule.domain == DomainKind::UnitBall2) {
        // Exactness on the ball is declared for total degree a + c <= max_degree,
        // because the first radial factor sees x1^a (1-x1)^c after decoupling.
        for (int a = 0; a <= std::min(rule.max_degree, 10); ++a) {
            for (int c = 0; c <= std::min(rule.max_degree - a, 10); ++c) {
                const double q = quadrature_moment_ball2(rule, a, c);
                const double m = moment_closed_form_ball2(rule.lambda, a, c);
                if (std::abs(q - m) > 1e-12 * std::max(1.0, std::abs(m)))
                    throw numeric_error("quadrature audit: ball2 moment (" + std::to_string(a) +
                                        "," + std::to_string(c) + ") off by " +
                                        std::to_string(q - m));
            }
        }
        return;
    }
    // Declared-exact moments against the Gamma/Beta closed forms, compared in
    // log space: a log gap of r is a relative error of r, and plane moments at
    // high degree overflow the linear scale.
    for (int d = 0; d <= rule.max_degree; ++d) {
        const double lq = quadrature_moment_log(rule, d);
        const double lm = moment_closed_form_log(rule.domain, rule.lambda, d);
        if (std::abs(lq - lm) > 1e-12)
            throw numeric_error("quadrature audit: moment (" + std::to_string(d) + "," +
                                std::to_string(d) + ") off by relative " +
                                std::to_string(std::abs(lq - lm)));
    }
}

} // namespace detail

// Build the rule for a space. Radial nodes come from the Jacobi/Laguerre matrix
// eigen-solve, so fractional weights lambda are handled exactly; angular nodes
// are equispaced with uniform weight. On UnitBall2 the radial part follows the
// substitution z2 = s sqrt(1-|z1|^2), which decouples the measure into
// (1-x1)^{lambda+1} dx1 and (1-u)^lambda du factors.
inline QuadratureRule rule_for(const SpaceSpec& space, int max_degree, int angular_order) {
    space.validate();
    if (max_degree < 0) throw config_error("rule_for: max_degree must be >= 0");
    if (angular_order <= 2 * max_degree)
        throw config_error("rule_for: angular_order " + std::to_string(angular_order) +
                           " too small for exactness degree " + std::to_string(max_degree));
    QuadratureRule rule;
    rule.domain = space.domain;
    rule.lambda = space.lambda;
    rule.max_degree = max_degree;
    rule.angular_order = angular_order;
    const int nr = detail::radial_node_count(max_degree);
    const int am = angular_order;

    if (space.domain == DomainKind::UnitDisk) {
        detail::gauss_unit_interval(space.lambda, nr, rule.radial_x, rule.radial_w);
    } else if (space.domain == DomainKind::FockPlane) {
        detail::gauss_halfline(nr, rule.radial_x, rule.radial_w);
        rule.tail_weight = rule.radial_w.back();
    } else {
        detail::gauss_unit_interval(space.lambda + 1.0, nr, rule.radial_x, rule.radial_w);
        detail::gauss_unit_interval(space.lambda, nr, rule.radial2_x, rule.radial2_w);
    }

    if (space.domain == DomainKind::UnitBall2) {
        rule.nodes.reserve(static_cast<std::size_t>(nr) * nr * am * am);
        rule.weights.reserve(rule.nodes.capacity());
        for (int i1 = 0; i1 < nr; ++i1) {
            const double x1 = rule.radial_x[static_cast<std::size_t>(i1)];
            const double r1 = std::sqrt(x1);
            for (int i2 = 0; i2 < nr; ++i2) {
                const double u = rule.radial2_x[static_cast<std::size_t>(i2)];
                const double r2 = std::sqrt(u * (1.0 - x1));
                const double rw = rule.radial_w[static_cast<std::size_t>(i1)] *
                                  rule.radial2_w[static_cast<std::size_t>(i2)] / (double(am) * am);
                for (int j1 = 0; j1 < am; ++j1) {
                    const double t1 = 2.0 * kPi * j1 / am;
                    for (int j2 = 0; j2 < am; ++j2) {
                        const double t2 = 2.0 * kPi * j2 / am;
                        rule.nodes.push_back(Point{r1 * cplx{std::cos(t1), std::sin(t1)},
                                                   r2 * cplx{std::cos(t2), std::sin(t2)}});
                        rule.weights.push_back(rw);
                    }
                }
            }
        }
    } else {
        rule.nodes.reserve(static_cast<std::size_t>(nr) * am);
        rule.weights.reserve(rule.nodes.capacity());
        for (int ir = 0; ir < nr; ++ir) {
            const double r = space.domain == DomainKind::FockPlane
                                 ? std::sqrt(rule.radial_x[static_cast<std::size_t>(ir)] / space.lambda)
                                 : std::sqrt(rule.radial_x[static_cast<std::size_t>(ir)]);
            const double rw = rule.radial_w[static_cast<std::size_t>(ir)] / am;
            for (int ja = 0; ja < am; ++ja) {
                const double th = 2.0 * kPi * ja / am;
                rule.nodes.push_back(Point{r * cplx{std::cos(th), std::sin(th)}, cplx{}});
                rule.weights.push_back(rw);
            }
        }
    }
    detail::audit_rule(rule);
    return rule;
}

// Weighted sum over the rule's nodes, deterministic pairwise reduction.
inline cplx integrate(const std::function<cplx(const Point&)>& f, const QuadratureRule& rule) {
    std::vector<cplx> terms(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const cplx v = f(rule.nodes[i]);
        if (!is_finite(v))
            throw numeric_error("integrate: non-finite value at node " + std::to_string(i) +
                                " (z1 = " + std::to_string(rule.nodes[i].z1.real()) + " + " +
                                std::to_string(rule.nodes[i].z1.imag()) + "i)");
        terms[i] = rule.weights[i] * v;
    }
    return pairwise_sum(terms);
}

inline cplx inner_product(const std::function<cplx(const Point&)>& f,
                          const std::function<cplx(const Point&)>& g,
                          const QuadratureRule& rule) {
    return integrate([&](const Point& p) { return f(p) * std::conj(g(p)); }, rule);
}

} // namespace plurispec

#include "plurispec/detail/quadrature_json.hpp"
