#include "freedyson/onematrix.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "freedyson/error.hpp"

namespace freedyson {

namespace {

using cplx = std::complex<double>;

// Reduced double-root condition in s = a².
double endpoint_equation(double beta, double s) { return 3.0 * beta * s * s + s - 4.0; }
double endpoint_slope(double beta, double s) { return 6.0 * beta * s + 1.0; }

bool newton(double beta, double& s, int max_iter) {
    for (int it = 0; it < max_iter; ++it) {
        const double f = endpoint_equation(beta, s);
        const double df = endpoint_slope(beta, s);
        if (!std::isfinite(f) || df == 0.0) return false;
        const double next = s - f / df;
        if (!(next > 0.0) || !std::isfinite(next)) return false;
        const bool done = std::abs(next - s) <= 1e-15 * std::max(1.0, next);
        s = next;
        if (done) return std::abs(endpoint_equation(beta, s)) < 1e-12;
    }
    return std::abs(endpoint_equation(beta, s)) < 1e-12;
}

// Coefficients of √(1 − u) = Σ c_n uⁿ.
std::vector<double> sqrt_series(int n) {
    std::vector<double> c(static_cast<std::size_t>(n) + 1);
    c[0] = 1.0;
    for (int k = 1; k <= n; ++k) c[static_cast<std::size_t>(k)] = c[static_cast<std::size_t>(k - 1)] * (k - 1.5) / k;
    return c;
}

}  // namespace

OneCutSolution::OneCutSolution(double beta, double edge_squared)
    : beta_(beta), s_(edge_squared), edge_(std::sqrt(edge_squared)), b_(1.0 + 2.0 * beta * edge_squared) {}

double OneCutSolution::density(double x) const {
    if (std::abs(x) >= edge_) return 0.0;
    return (b_ + 4.0 * beta_ * x * x) * std::sqrt(s_ - x * x) / (2.0 * std::numbers::pi);
}

double OneCutSolution::cdf(double x) const {
    if (x <= -edge_) return 0.0;
    if (x >= edge_) return 1.0;
    const double r = std::sqrt(s_ - x * x);
    const double arc = std::asin(x / edge_) + 0.5 * std::numbers::pi;
    const double i0 = 0.5 * (x * r + s_ * arc);
    const double i2 = x * (2.0 * x * x - s_) * r / 8.0 + s_ * s_ * arc / 8.0;
    return std::clamp((b_ * i0 + 4.0 * beta_ * i2) / (2.0 * std::numbers::pi), 0.0, 1.0);
}

double OneCutSolution::density_constant() const noexcept { return b_ / (2.0 * std::numbers::pi); }
double OneCutSolution::density_quadratic() const noexcept { return 4.0 * beta_ / (2.0 * std::numbers::pi); }

double OneCutSolution::second_moment() const {
    const auto c = sqrt_series(3);
    return -0.5 * (4.0 * beta_ * c[3] * s_ * s_ * s_ + b_ * c[2] * s_ * s_);
}

cplx OneCutSolution::cauchy(cplx z) const {
    const cplx vp = z + 4.0 * beta_ * z * z * z;
    // Product of principal roots: analytic off [−a, a], ~ z at infinity.
    const cplx root = (4.0 * beta_ * z * z + b_) * std::sqrt(z - edge_) * std::sqrt(z + edge_);
    const cplx sum = vp + root;
    const cplx diff = vp - root;
    // V'² − Q = 4 + 16β(m₂ + z²); use the quotient form where V' and √Q nearly cancel.
    if (std::abs(sum) > std::abs(diff)) return 0.5 * (4.0 + 16.0 * beta_ * (second_moment() + z * z)) / sum;
    return 0.5 * diff;
}

cplx OneCutSolution::equation_residual(cplx z) const {
    const cplx g = cauchy(z);
    const cplx vp = z + 4.0 * beta_ * z * z * z;
    return g * g - vp * g + 1.0 + 4.0 * beta_ * (second_moment() + z * z);
}

OneCutSolution solve_one_cut(double beta, const OneCutOptions& options) {
    if (!std::isfinite(beta)) throw ValidationError("β must be finite");
    double s = 4.0;
    double current = 0.0;
    double step = std::copysign(options.step, beta);
    int halvings = 0;
    while (current != beta) {
        double target = current + step;
        if ((beta > 0.0 && target > beta) || (beta < 0.0 && target < beta)) target = beta;
        double trial = s;
        if (newton(target, trial, options.max_newton)) {
            s = trial;
            current = target;
            continue;
        }
        step *= 0.5;
        if (++halvings > options.max_halvings)
            throw NumericError("one-cut Newton continuation diverged near β = " + std::to_string(target) +
                               " (no one-cut solution)");
    }
    OneCutSolution sol(beta, s);
    // Interior factor b + 4βx² is smallest at the edge when β < 0.
    const double factor_min = std::min(sol.b(), sol.b() + 4.0 * beta * s);
    if (factor_min < -1e-12)
        throw NumericError("one-cut density turns negative at β = " + std::to_string(beta) +
                           " (support no longer connected)");
    return sol;
}

std::vector<double> moments_algebraic(const OneCutSolution& sol, int up_to) {
    if (up_to < 0) throw ValidationError("moment degree must be nonnegative");
    const auto c = sqrt_series(up_to / 2 + 3);
    std::vector<double> m(static_cast<std::size_t>(up_to) + 1, 0.0);
    const double s = sol.edge_squared();
    for (int k = 0; 2 * k <= up_to; ++k) {
        const auto n1 = static_cast<std::size_t>(k + 1), n2 = static_cast<std::size_t>(k + 2);
        m[static_cast<std::size_t>(2 * k)] =
            -0.5 * (4.0 * sol.beta() * c[n2] * std::pow(s, k + 2) + sol.b() * c[n1] * std::pow(s, k + 1));
    }
    return m;
}

std::vector<double> moments_quadrature(const OneCutSolution& sol, int up_to) {
    if (up_to < 0) throw ValidationError("moment degree must be nonnegative");
    // x = a cos θ turns ρ(x)dx into a trigonometric polynomial in θ; the
    // trapezoid rule on [0, π] is exact once the node count exceeds its degree.
    const int nodes = std::max(64, 2 * (up_to + 8));
    const double a = sol.support_edge();
    std::vector<double> m(static_cast<std::size_t>(up_to) + 1, 0.0);
    const double h = std::numbers::pi / nodes;
    for (int j = 0; j <= nodes; ++j) {
        const double theta = j * h;
        const double x = a * std::cos(theta);
        const double sn = std::sin(theta);
        double w = (sol.b() + 4.0 * sol.beta() * x * x) * a * a * sn * sn / (2.0 * std::numbers::pi) * h;
        if (j == 0 || j == nodes) w *= 0.5;
        double xk = 1.0;
        for (int k = 0; k <= up_to; ++k) {
            m[static_cast<std::size_t>(k)] += w * xk;
            xk *= x;
        }
    }
    return m;
}

std::vector<double> moments(const OneCutSolution& sol, int up_to) {
    auto alg = moments_algebraic(sol, up_to);
    const auto quad = moments_quadrature(sol, up_to);
    const double a = sol.support_edge();
    for (int k = 0; k <= up_to; ++k) {
        const double scale = std::max(1.0, std::pow(a, k));
        if (std::abs(alg[static_cast<std::size_t>(k)] - quad[static_cast<std::size_t>(k)]) > 1e-9 * scale)
            throw NumericError("degenerate quadrature: moment " + std::to_string(k) + " disagrees between routes");
    }
    alg[0] = 1.0;
    return alg;
}

}  // namespace freedyson
