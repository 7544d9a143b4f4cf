#include <doctest.h>

#include <cmath>
#include <random>

#include "freedyson/error.hpp"
#include "freedyson/sdsolver.hpp"
#include "support/oracles.hpp"
#include "support/random_poly.hpp"

using namespace freedyson;

namespace {

std::vector<int> colors_of(const Word& w) {
    std::vector<int> c;
    for (const auto& l : w) c.push_back(l.index);
    return c;
}

}  // namespace

TEST_CASE("necklaces") {
    const auto w = Word::of({2, 1, 1});
    CHECK(necklace(w, Symmetry::cyclic) == Word::of({1, 1, 2}));
    CHECK(necklace(Word::of({1, 2, 2, 1, 3}), Symmetry::cyclic) == necklace(Word::of({2, 1, 3, 1, 2}), Symmetry::cyclic));
    CHECK(necklace(Word::of({1, 2, 3}), Symmetry::dihedral) == necklace(Word::of({3, 2, 1}), Symmetry::dihedral));
    CHECK(necklace(Word::of({1, 2, 3}), Symmetry::cyclic) != necklace(Word::of({3, 2, 1}), Symmetry::cyclic));
    // Binary necklaces of length 6: 14; bracelets: 13.
    CHECK(necklaces(2, 6, Symmetry::cyclic).size() == 14);
    CHECK(necklaces(2, 6, Symmetry::dihedral).size() == 13);
}

TEST_CASE("necklace generation matches brute-force filtering") {
    for (int m = 1; m <= 3; ++m)
        for (std::size_t d = 1; d <= 8; ++d)
            for (auto sym : {Symmetry::cyclic, Symmetry::dihedral}) {
                std::vector<Word> expect;
                std::vector<int> digits(d, 1);
                while (true) {
                    const Word w = Word::of(std::span<const int>(digits));
                    // Smallest among all rotations (and reversals).
                    Word best = w;
                    for (std::size_t r = 0; r < d; ++r) {
                        best = std::min(best, w.rotated(r));
                        if (sym == Symmetry::dihedral) best = std::min(best, w.reversed().rotated(r));
                    }
                    CHECK(necklace(w, sym) == best);
                    if (best == w) expect.push_back(w);
                    std::size_t k = d;
                    while (k > 0 && digits[k - 1] == m) digits[--k] = 1;
                    if (k == 0) break;
                    ++digits[k - 1];
                }
                CHECK(necklaces(m, d, sym) == expect);
            }
}

TEST_CASE("moment functional is tracial and checks degree") {
    MomentFunctional tau(2, 4);
    tau.set(Word::of({1, 2, 2}), 0.25);
    CHECK(tau(Word::of({2, 1, 2})) == cplx(0.25));
    CHECK(tau(Word::of({2, 2, 1})) == cplx(0.25));
    CHECK(tau(Word::of({1, 1})) == cplx(0.0));
    CHECK_THROWS(tau(Word::of({1, 1, 1, 1, 1})));
}

TEST_CASE("Gaussian potential gives Catalan moments") {
    const auto v = Potential::parse("0.5 x^2");
    FixedPointOptions o;
    o.degree = 11;
    const auto fp = solve_fixed_point(v, o);
    for (int k = 0; k <= 5; ++k) CHECK(fp.tau(Word::power(1, 2 * k)).real() == doctest::Approx(oracle::catalan(k)).epsilon(1e-12));
    for (int k = 0; k <= 4; ++k) CHECK(std::abs(fp.tau(Word::power(1, 2 * k + 1))) < 1e-14);
    CHECK(std::abs(sd_residual(fp.tau, v, Word::of({1}), 1)) < 1e-14);
}

TEST_CASE("two free semicirculars") {
    const auto v = Potential::parse("0.5 X1^2 + 0.5 X2^2");
    FixedPointOptions o;
    o.degree = 7;
    const auto fp = solve_fixed_point(v, o);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 40; ++k) {
        const auto w = testing_support::random_word(rng, 2, 2 + 2 * (k % 3), false);
        CHECK(fp.tau(w).real() == doctest::Approx(oracle::free_semicircular_moment(colors_of(w))).epsilon(1e-12));
    }
}

TEST_CASE("quartic fixed point against the one-cut law") {
    for (double beta : {0.005, 0.01, 0.02}) {
        const auto v = Potential::parse("0.5 x^2 + " + std::to_string(beta) + " x^4");
        FixedPointOptions o;
        o.degree = 11;
        const auto fp = solve_fixed_point(v, o);
        const auto m = oracle::quartic_moments(beta, 10);
        for (int k = 0; k <= 10; ++k) CHECK(std::abs(fp.tau(Word::power(1, k)).real() - m[static_cast<std::size_t>(k)]) < 1e-8);
        CHECK(fp.max_residual < o.tol * 10);
        CHECK(std::abs(sd_residual(fp.tau, v, Word::power(1, 3), 1)) < 1e-8);
    }
}

TEST_CASE("fixed point invariants") {
    const auto v = Potential::parse("0.5 X1^2 + 0.5 X2^2 + 0.01 X1 X2 X1 X2");
    FixedPointOptions o;
    o.degree = 6;
    o.tol = 1e-9;
    static const auto fp = solve_fixed_point(v, o);
    SUBCASE("residual certificate") {
        CHECK(fp.max_residual < o.tol);
        CHECK(max_sd_residual(fp.tau, v, o.degree) < o.tol);
    }
    SUBCASE("moment matrix is positive") { CHECK(fp.tau.min_moment_matrix_eigenvalue(3) >= -1e-8); }
    SUBCASE("parity") {
        for (std::size_t d = 1; d <= 7; d += 2)
            for (const auto& w : necklaces(2, d, Symmetry::cyclic)) CHECK(std::abs(fp.tau(w)) < 1e-14);
    }
    SUBCASE("color swap") {
        for (std::size_t d = 2; d <= 6; d += 2)
            for (const auto& w : necklaces(2, d, Symmetry::cyclic)) {
                std::vector<Letter> s;
                for (auto l : w) s.push_back({3 - l.index, false});
                CHECK(std::abs(fp.tau(w) - fp.tau(Word(s))) < o.tol);
            }
    }
    SUBCASE("traciality on random words") {
        std::mt19937_64 rng(3);
        for (int k = 0; k < 50; ++k) {
            const auto w = testing_support::random_word(rng, 2, 6, false);
            for (std::size_t r = 1; r < 6; ++r) CHECK(fp.tau(w) == fp.tau(w.rotated(r)));
        }
    }
}

TEST_CASE("word budget") {
    const auto v = Potential::parse("0.5 X1^2 + 0.5 X2^2 + 0.05 X1 X2 X1 X2");
    FixedPointOptions o;
    o.degree = 6;
    o.max_words = 20'000;
    CHECK_THROWS_AS(solve_fixed_point(v, o), NumericError);
    o.max_words = 10;
    CHECK_THROWS_AS(solve_fixed_point(v, o), InfeasibleError);
}

TEST_CASE("fixed point errors") {
    const auto v = Potential::parse("0.5 x^2 - 0.5 x^4");
    FixedPointOptions o;
    o.max_iter = 2000;
    CHECK_THROWS_AS(solve_fixed_point(v, o), NumericError);
}

TEST_CASE("series coefficients of the quartic") {
    const std::vector<Word> q{Word::power(1, 4)};
    const auto s = solve_series(q, 1, 1.0, 6, 2);
    CHECK(s.coefficient({0}, Word::power(1, 2)) == cplx(1.0));
    CHECK(s.coefficient({1}, Word::power(1, 2)).real() == doctest::Approx(-8.0));
    // Planar maps with one x² star and k labeled x⁴ stars.
    for (int k = 1; k <= 3; ++k) {
        std::vector<std::vector<int>> stars(static_cast<std::size_t>(k), std::vector<int>(4, 1));
        stars.push_back({1, 1});
        CHECK(s.map_certificate({k}, Word::power(1, 2)) == doctest::Approx(static_cast<double>(oracle::count_glued_maps(stars, 0))));
    }
    for (int k = 0; k <= 6; ++k) {
        const double c = s.map_certificate({k}, Word::power(1, 2));
        CHECK(c >= 0.0);
        CHECK(std::abs(c - std::round(c)) < 1e-9);
    }
}

TEST_CASE("series of the two-color quartic") {
    const std::vector<Word> q{Word::of({1, 2, 1, 2})};
    const auto s = solve_series(q, 2, 1.0, 3, 2);
    CHECK(s.coefficient({0}, Word::of({1, 2})) == cplx(0.0));
    CHECK(s.coefficient({0}, Word::of({1, 1})) == cplx(1.0));
    for (int k = 1; k <= 3; ++k) {
        std::vector<std::vector<int>> stars(static_cast<std::size_t>(k), std::vector<int>{1, 2, 1, 2});
        stars.push_back({1, 1});
        CHECK(s.map_certificate({k}, Word::of({1, 1})) ==
              doctest::Approx(static_cast<double>(oracle::count_glued_maps(stars, 0))));
    }
}

TEST_CASE("series evaluation") {
    const std::vector<Word> q{Word::power(1, 4)};
    const auto s = solve_series(q, 1, 1.0, 12, 2);
    const std::vector<cplx> zero{0.0};
    CHECK(evaluate_series(s, zero, Word::power(1, 2)).value == cplx(1.0));

    // Order one is linear in β.
    const auto s1 = solve_series(q, 1, 1.0, 1, 2);
    const std::vector<cplx> b1{1e-3}, b2{2e-3};
    const cplx c0 = 1.0;
    CHECK(std::abs((evaluate_series(s1, b2, Word::power(1, 2)).value - c0) -
                   2.0 * (evaluate_series(s1, b1, Word::power(1, 2)).value - c0)) < 1e-15);

    const std::vector<cplx> beta{0.01};
    const auto val = evaluate_series(s, beta, Word::power(1, 2));
    const double exact = oracle::quartic_moments(0.01, 2)[2];
    CHECK(std::abs(val.value.real() - exact) < 1e-6);
    CHECK(std::abs(val.value.real() - exact) < 2.0 * val.tail_estimate + 1e-12);
    CHECK(val.rate < 1.0);

    // Error shrinks like β^{K+1}: halving β divides it by roughly 2^{K+1}.
    const auto s4 = solve_series(q, 1, 1.0, 4, 2);
    const std::vector<cplx> small{0.0025};
    const double e1 = std::abs(evaluate_series(s4, beta, Word::power(1, 2)).value.real() - exact);
    const double e2 =
        std::abs(evaluate_series(s4, small, Word::power(1, 2)).value.real() - oracle::quartic_moments(0.0025, 2)[2]);
    CHECK(std::log2(e1 / e2) / 2.0 == doctest::Approx(5.0).epsilon(0.1));
}

TEST_CASE("series growth stays geometric") {
    const std::vector<Word> q{Word::power(1, 4)};
    const auto s = solve_series(q, 1, 1.0, 12, 2);
    std::vector<double> roots;
    for (int k = 1; k <= 12; ++k) roots.push_back(std::pow(std::abs(s.coefficient({k}, Word::power(1, 2))), 1.0 / k));
    const double c = s.growth_rate(Word::power(1, 2));
    for (double r : roots) CHECK(r <= c + 1e-12);
    // The radius of convergence is 1/48.
    CHECK(roots.back() < 48.0);
    CHECK(roots.back() > 20.0);
}

TEST_CASE("series refuses oversized problems") {
    const std::vector<Word> q{Word::of({1, 2, 1, 2}), Word::power(1, 4)};
    SeriesOptions o;
    o.max_words = 100;
    CHECK_THROWS_AS(solve_series(q, 2, 1.0, 8, 4, o), InfeasibleError);
}
