#include <doctest.h>

#include <cmath>
#include <numbers>

#include "freedyson/error.hpp"
#include "freedyson/onematrix.hpp"
#include "freedyson/sdsolver.hpp"
#include "support/oracles.hpp"

using namespace freedyson;
using cplx = std::complex<double>;

TEST_CASE("semicircle point") {
    const auto sol = solve_one_cut(0.0);
    CHECK(sol.support_edge() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(sol.density(0.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-15));
    for (cplx z : {cplx(3.0, 0.0), cplx(0.5, 1.0), cplx(-2.5, -0.1), cplx(0.0, 4.0), cplx(1e3, 1.0)}) {
        // Branch with G ~ 1/z.
        cplx root = std::sqrt(z * z - 4.0);
        if (std::real(std::conj(root) * z) < 0.0) root = -root;
        CHECK(std::abs(sol.cauchy(z) - (z - root) / 2.0) < 1e-13);
    }
    const auto m = moments(sol, 12);
    for (int k = 0; k <= 6; ++k) {
        CHECK(m[static_cast<std::size_t>(2 * k)] == doctest::Approx(static_cast<double>(oracle::catalan(k))).epsilon(1e-13));
        if (k < 6) CHECK(m[static_cast<std::size_t>(2 * k + 1)] == 0.0);
    }
}

TEST_CASE("edge and moments against independent quadrature") {
    for (double beta : {-0.01, 0.0, 0.005, 0.01, 0.02, 0.1}) {
        const auto sol = solve_one_cut(beta);
        CHECK(sol.support_edge() == doctest::Approx(oracle::quartic_edge(beta)).epsilon(1e-6));
        const auto m = moments(sol, 20);
        CHECK(m[0] == 1.0);
        const auto ref = oracle::quartic_moments(beta, 20);
        for (int k = 0; k <= 20; ++k)
            CHECK(std::abs(m[static_cast<std::size_t>(k)] - ref[static_cast<std::size_t>(k)]) <=
                  1e-13 * std::max(1.0, std::pow(sol.support_edge(), k)));
        const auto alg = moments_algebraic(sol, 20);
        const auto quad = moments_quadrature(sol, 20);
        for (int k = 0; k <= 20; ++k)
            CHECK(std::abs(alg[static_cast<std::size_t>(k)] - quad[static_cast<std::size_t>(k)]) <=
                  1e-9 * std::max(1.0, std::pow(sol.support_edge(), k)));
        CHECK(sol.second_moment() == doctest::Approx(ref[2]).epsilon(1e-13));
    }
}

TEST_CASE("algebraic equation holds off the cut") {
    for (double beta : {0.0, 0.01, 0.05}) {
        const auto sol = solve_one_cut(beta);
        int k = 0;
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j, ++k) {
                const cplx z(-4.0 + 0.8 * i + 0.01, (j < 5 ? -1.0 : 1.0) * (0.05 + 0.4 * (j % 5)));
                const cplx g = sol.cauchy(z);
                CHECK(std::abs(sol.equation_residual(z)) < 1e-10 * std::max(1.0, std::norm(z) * std::abs(z)));
                // Quadratic form G² = 4βz³G + zG + P(z).
                const cplx p = sol.p_constant() + sol.p_quadratic() * z * z;
                CHECK(std::abs(g * g - 4.0 * beta * z * z * z * g - z * g - p) < 1e-10 * std::max(1.0, std::norm(z) * std::abs(z)));
            }
        CHECK(k == 100);
        // G(z) ~ 1/z + m₂/z³.
        const cplx z(1e3, 0.0);
        CHECK(std::abs(sol.cauchy(z) * z - 1.0 - sol.second_moment() / (z * z)) < 1e-10);
    }
}

TEST_CASE("density and distribution function") {
    for (double beta : {0.0, 0.01, -0.015}) {
        const auto sol = solve_one_cut(beta);
        const double a = sol.support_edge();
        CHECK(sol.density(a) == 0.0);
        CHECK(sol.density(-a) == 0.0);
        CHECK(sol.density(a + 0.1) == 0.0);
        for (double x : {0.1, 0.7, 1.3}) CHECK(sol.density(x) == doctest::Approx(sol.density(-x)).epsilon(1e-15));
        CHECK(sol.cdf(-a) == doctest::Approx(0.0));
        CHECK(sol.cdf(a) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(sol.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
        for (double x : {-1.5, -0.3, 0.4, 1.9}) {
            if (std::abs(x) >= a) continue;
            const double ref = oracle::simpson([&](double t) { return sol.density(t); }, -a, x, 200000);
            CHECK(sol.cdf(x) == doctest::Approx(ref).epsilon(1e-7));
        }
        CHECK(sol.density_constant() + sol.density_quadratic() * 0.25 ==
              doctest::Approx(sol.density(0.5) / std::sqrt(a * a - 0.25)).epsilon(1e-14));
    }
    CHECK(solve_one_cut(0.0).cdf(1.0) == doctest::Approx(oracle::semicircle_cdf(1.0)).epsilon(1e-14));
}

TEST_CASE("continuity and monotonicity in beta") {
    double prev_a = 1e9, prev_m2 = 1e9;
    std::vector<double> edges;
    for (int k = 0; k <= 40; ++k) {
        const double beta = 0.0025 * k;
        const auto sol = solve_one_cut(beta);
        CHECK(sol.convex());
        CHECK(sol.support_edge() < prev_a);
        CHECK(sol.second_moment() < prev_m2);
        prev_a = sol.support_edge();
        prev_m2 = sol.second_moment();
        edges.push_back(prev_a);
    }
    // Second differences vary slowly: no kinks.
    std::vector<double> d2;
    for (std::size_t k = 1; k + 1 < edges.size(); ++k) d2.push_back(edges[k + 1] - 2.0 * edges[k] + edges[k - 1]);
    for (std::size_t k = 1; k < d2.size(); ++k) {
        CHECK(d2[k] > 0.0);
        CHECK(d2[k] / d2[k - 1] == doctest::Approx(1.0).epsilon(0.25));
    }
}

TEST_CASE("Taylor coefficients match the series solver") {
    const std::vector<Word> q{Word::power(1, 4)};
    const auto s = solve_series(q, 1, 1.0, 3, 6);
    // Least-squares polynomial fit of β ↦ τ(x^{2k}) on a small symmetric grid.
    const double h = 2e-4;
    const int points = 9, order = 8;
    Eigen::MatrixXd vand(points, order + 1);
    for (int i = 0; i < points; ++i)
        for (int j = 0; j <= order; ++j) vand(i, j) = std::pow((i - points / 2), j);
    for (int k = 1; k <= 3; ++k) {
        Eigen::VectorXd y(points);
        for (int i = 0; i < points; ++i) y(i) = moments_algebraic(solve_one_cut((i - points / 2) * h), 2 * k)[static_cast<std::size_t>(2 * k)];
        const Eigen::VectorXd c = vand.colPivHouseholderQr().solve(y);
        for (int n = 0; n <= 3; ++n) {
            const double numeric = c(n) / std::pow(h, n);
            const double series = s.coefficient({n}, Word::power(1, 2 * k)).real();
            CHECK(std::abs(numeric - series) <= 1e-6 * std::max(1.0, std::abs(series)));
        }
    }
}

TEST_CASE("beyond the critical coupling") {
    CHECK_NOTHROW(solve_one_cut(-1.0 / 48.0 + 1e-4));
    CHECK_THROWS_AS(solve_one_cut(-0.03), NumericError);
    CHECK_THROWS_AS(moments_algebraic(solve_one_cut(0.0), -1), ValidationError);
    CHECK_FALSE(solve_one_cut(-0.01).convex());
}
