#pragma once

// Free entropy of τ_V for V = W + (c/2)ΣXi², obtained by interpolating the
// coupling from the Gaussian point:
//
//     χ(τ_V) = F(c) − ∫₀¹ τ_{tW + (c/2)X.X}(W) dt + τ_V(V).

#include <vector>

#include "freedyson/ncpoly.hpp"
#include "freedyson/sdsolver.hpp"

namespace freedyson {

/// F(c) = (m/2)·log(2π/c): limit of N⁻²·log ∫ exp(−(cN/2)ΣTr Xi²) dX plus
/// (m/2)·log N, with dX the Lebesgue measure of the real inner product
/// Tr(XY) on Hermitian matrices.
double gaussian_constant(double c, int m);

/// n-point Gauss–Legendre rule on [0, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadratureRule gauss_legendre(int n);

struct EntropyOptions {
    int nodes = 16;
    /// Also integrate with nodes/2 points and report the difference.
    bool estimate_error = true;
    FixedPointOptions fixed_point{};
};

struct EntropyReport {
    double chi = 0.0;
    double gaussian_constant = 0.0;
    /// ∫₀¹ τ_t(W) dt.
    double integral = 0.0;
    double integral_error = 0.0;
    double tau_v = 0.0;
    double quadratic_weight = 0.0;
    int letters = 1;
    std::vector<double> t_nodes;
    std::vector<double> t_weights;
    /// τ_t(W) at each node.
    std::vector<double> integrand;
};

/// Requires a self-adjoint potential with real couplings; throws NumericError
/// when the fixed point fails at any node.
EntropyReport free_entropy(const Potential& v, const EntropyOptions& options = {});

}  // namespace freedyson
