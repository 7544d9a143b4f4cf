#pragma once

// One-cut solution of the quartic one-matrix model V(x) = x²/2 + βx⁴.
//
// The Cauchy transform G(z) = ∫ dτ(x)/(z − x) satisfies
//
//     G² − V'(z)·G + 1 + 4β(m₂ + z²) = 0,     V'(z) = z + 4βz³,
//
// so G = ½(V' − √Q) with Q of degree six. A connected support [−a, a] forces
// Q(z) = (4βz² + b)²(z² − a²); matching coefficients leaves
// b = 1 + 2βa² and 3βa⁴ + a² − 4 = 0, with density
// ρ(x) = (b + 4βx²)·√(a² − x²) / 2π.

#include <complex>
#include <vector>

namespace freedyson {

struct OneCutOptions {
    /// Continuation step in β from the semicircle at β = 0.
    double step = 0.005;
    int max_newton = 50;
    int max_halvings = 40;
};

class OneCutSolution {
public:
    OneCutSolution(double beta, double edge_squared);

    double beta() const noexcept { return beta_; }
    double support_edge() const noexcept { return edge_; }
    double edge_squared() const noexcept { return s_; }
    /// Constant term b of the perfect-square factor 4βz² + b.
    double b() const noexcept { return b_; }
    /// β ≥ 0: the potential is convex. Small negative β is admitted while the
    /// density stays nonnegative, with this flag false.
    bool convex() const noexcept { return beta_ >= 0.0; }

    /// G² = 4βz³G + zG + P(z) with P(z) = p₀ + p₂z².
    double p_constant() const { return -1.0 - 4.0 * beta_ * second_moment(); }
    double p_quadratic() const noexcept { return -4.0 * beta_; }
    /// ρ(x) = (d₀ + d₂x²)·√(a² − x²) with d₀ = b/2π, d₂ = 4β/2π.
    double density_constant() const noexcept;
    double density_quadratic() const noexcept;

    double density(double x) const;
    /// ∫_{−a}^{x} ρ, in closed form.
    double cdf(double x) const;
    std::complex<double> cauchy(std::complex<double> z) const;
    /// G² − V'G + 1 + 4β(m₂ + z²).
    std::complex<double> equation_residual(std::complex<double> z) const;
    double second_moment() const;

private:
    double beta_;
    double s_;
    double edge_;
    double b_;
};

/// Throws NumericError when Newton continuation fails or the density turns
/// negative (the one-cut ansatz no longer applies).
OneCutSolution solve_one_cut(double beta, const OneCutOptions& options = {});

/// m_0..m_{up_to} from the 1/z expansion of G.
std::vector<double> moments_algebraic(const OneCutSolution& sol, int up_to);
/// m_0..m_{up_to} by quadrature of x^k·ρ(x).
std::vector<double> moments_quadrature(const OneCutSolution& sol, int up_to);
/// Algebraic moments, cross-checked against quadrature to 1e-9 (relative to
/// a^k); throws NumericError on disagreement.
std::vector<double> moments(const OneCutSolution& sol, int up_to);

inline double density_at(const OneCutSolution& sol, double x) { return sol.density(x); }
inline double support_edge(const OneCutSolution& sol) { return sol.support_edge(); }

}  // namespace freedyson
