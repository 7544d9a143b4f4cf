#include "freedyson/entropy.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "freedyson/error.hpp"
#include "freedyson/parallel.hpp"

namespace freedyson {

double gaussian_constant(double c, int m) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("gaussian constant needs c > 0");
    if (m < 1) throw ValidationError("letter count must be at least 1");
    return 0.5 * m * std::log(2.0 * std::numbers::pi / c);
}

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw ValidationError("quadrature needs at least one node");
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const auto un = static_cast<unsigned>(n);
    for (int k = 0; k < (n + 1) / 2; ++k) {
        // Roots of P_n on [−1, 1], refined by Newton from the Chebyshev guess.
        double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            const double p = std::legendre(un, x);
            const double pm = n > 1 ? std::legendre(un - 1, x) : 1.0;
            dp = n * (x * p - pm) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double p = std::legendre(un, x);
        const double pm = n > 1 ? std::legendre(un - 1, x) : 1.0;
        dp = n * (x * p - pm) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(k), hi = static_cast<std::size_t>(n - 1 - k);
        rule.nodes[lo] = 0.5 * (1.0 - x);
        rule.nodes[hi] = 0.5 * (1.0 + x);
        rule.weights[lo] = rule.weights[hi] = 0.5 * w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.5;
    return rule;
}

namespace {

NCPoly interaction(const Potential& v) {
    NCPoly w(v.letters());
    for (const auto& c : v.couplings()) w.add_term(c.monomial, c.beta);
    return w;
}

double tau_at(const Potential& v, double t, const NCPoly& w, const FixedPointOptions& options) {
    try {
        const FixedPointResult r = solve_fixed_point(v.with_coupling_scale(t), options);
        return r.tau(w).real();
    } catch (const NumericError& e) {
        throw NumericError("entropy node t = " + std::to_string(t) + ": " + e.what());
    }
}

std::vector<double> integrand_at(const Potential& v, const std::vector<double>& nodes, const NCPoly& w,
                                 const FixedPointOptions& options) {
    std::vector<double> out(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t k) { out[k] = tau_at(v, nodes[k], w, options); });
    return out;
}

double weighted_sum(const std::vector<double>& weights, const std::vector<double>& values) {
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) s += weights[k] * values[k];
    return s;
}

}  // namespace

EntropyReport free_entropy(const Potential& v, const EntropyOptions& options) {
    if (!v.self_adjoint_mode()) throw ValidationError("free entropy needs a self-adjoint potential");
    if (!v.has_real_couplings()) throw ValidationError("free entropy needs real couplings");
    FixedPointOptions fp = options.fixed_point;
    fp.degree = std::max(fp.degree, v.max_coupling_degree());

    const NCPoly w = interaction(v);
    EntropyReport r;
    r.letters = v.letters();
    r.quadratic_weight = v.quadratic_weight();
    r.gaussian_constant = gaussian_constant(v.quadratic_weight(), v.letters());

    const QuadratureRule rule = gauss_legendre(options.nodes);
    r.t_nodes = rule.nodes;
    r.t_weights = rule.weights;
    r.integrand = integrand_at(v, rule.nodes, w, fp);
    r.integral = weighted_sum(rule.weights, r.integrand);
    if (options.estimate_error && options.nodes >= 2) {
        const QuadratureRule half = gauss_legendre(options.nodes / 2);
        r.integral_error = std::abs(r.integral - weighted_sum(half.weights, integrand_at(v, half.nodes, w, fp)));
    }

    const FixedPointResult full = solve_fixed_point(v, fp);
    r.tau_v = full.tau(v.polynomial()).real();
    r.chi = r.gaussian_constant - r.integral + r.tau_v;
    if (!std::isfinite(r.chi)) throw NumericError("free entropy is not finite");
    return r;
}

}  // namespace freedyson
