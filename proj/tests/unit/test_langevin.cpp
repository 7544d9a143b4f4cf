#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "freedyson/error.hpp"
#include "freedyson/langevin.hpp"
#include "freedyson/onematrix.hpp"
#include "support/oracles.hpp"

using namespace freedyson;

namespace {

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("Philox known answer") {
    const Philox p(0);
    const auto b = p.block(0);
    CHECK(b[0] == 0x6627e8d5u);
    CHECK(b[1] == 0xe169c58du);
    CHECK(b[2] == 0xbc57ac4cu);
    CHECK(b[3] == 0x9b00dbd8u);
}

TEST_CASE("Philox streams are reproducible and resumable") {
    Philox a(42), b(42);
    std::vector<double> x(101), y(101);
    a.normals(x.data(), x.size());
    b.normals(y.data(), 50);
    Philox c(42, b.position());
    c.normals(y.data() + 50, 51);
    CHECK(x == y);
    CHECK(a.position() == 51);

    Philox d(43);
    CHECK(d.normal() != Philox(42).normal());

    // Moments of the normal deviates.
    Philox e(7);
    std::vector<double> g(200000);
    e.normals(g.data(), g.size());
    double m1 = 0.0, m2 = 0.0, m4 = 0.0;
    for (double v : g) {
        m1 += v;
        m2 += v * v;
        m4 += v * v * v * v;
    }
    const double n = static_cast<double>(g.size());
    CHECK(std::abs(m1 / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(m2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(m4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("Brownian increments") {
    Philox rng(3);
    const std::size_t n = 10;
    const double dt = 0.1;
    double sum_re = 0.0, sum_sq = 0.0, sum_diag = 0.0;
    const int reps = 4000;
    for (int k = 0; k < reps; ++k) {
        const auto h = brownian_increment(2, n, dt, rng);
        REQUIRE(h.size() == 2);
        CHECK(max_abs(h[0] - h[0].adjoint()) == 0.0);
        CHECK(h[1].diagonal().imag().cwiseAbs().maxCoeff() == 0.0);
        const double re = h[0](1, 2).real();
        sum_re += re;
        sum_sq += re * re;
        sum_diag += h[1](4, 4).real() * h[1](4, 4).real();
    }
    // Var Re H₁₂ = dt/2N = 0.005; Var H₄₄ = dt/N = 0.01.
    const double var = sum_sq / reps;
    CHECK(std::abs(var - 0.005) < 3.0 * 0.005 * std::sqrt(2.0 / reps));
    CHECK(std::abs(sum_re / reps) < 3.0 * std::sqrt(0.005 / reps));
    CHECK(std::abs(sum_diag / reps - 0.01) < 3.0 * 0.01 * std::sqrt(2.0 / reps));
    CHECK_THROWS_AS(brownian_increment(1, 3, 0.0, rng), ValidationError);
}

TEST_CASE("step keeps matrices Hermitian and advances time") {
    const auto v = Potential::parse("0.5 X1^2 + 0.5 X2^2 + 0.05 X1 X2 X1 X2");
    SimConfig cfg;
    cfg.n = 8;
    cfg.dt = 0.01;
    auto ens = zero_ensemble(2, 8, 5);
    for (int k = 0; k < 50; ++k) CHECK(step(ens, v, cfg) < 1e-12);
    CHECK(ens.time == doctest::Approx(0.5));
    for (const auto& x : ens.x) CHECK(max_abs(x - x.adjoint()) == 0.0);

    // Drift of the Gaussian part is −½X.
    const auto d = drift(Potential::parse("0.5 x^2"), {ens.x[0]});
    CHECK(max_abs(d[0] + 0.5 * ens.x[0]) < 1e-15);

    auto wrong = zero_ensemble(1, 8, 5);
    CHECK_THROWS_AS(step(wrong, v, cfg), ValidationError);
}

TEST_CASE("Gaussian stationary second moment") {
    // For V = (c/2)x² the Euler chain has stationary E τ(X²) = 1/(c(1 − c dt/4)) at every N.
    const auto v = Potential(1, 2.0, {});
    SimConfig cfg;
    cfg.n = 10;
    cfg.dt = 0.01;
    cfg.t_max = 150.0;
    cfg.burn_in = 10.0;
    cfg.seed = 11;
    const auto r = simulate(v, cfg, {parse_poly("X1^2", 1), parse_poly("X1", 1)});
    const double expect = 1.0 / (2.0 * (1.0 - 2.0 * cfg.dt / 4.0));
    REQUIRE(r.observables.size() == 2);
    CHECK(std::abs(r.observables[0].mean - expect) < 4.0 * r.observables[0].standard_error);
    CHECK(r.observables[0].standard_error < 0.01);
    CHECK(std::abs(r.observables[1].mean) < 4.0 * r.observables[1].standard_error);
    CHECK(r.samples == 1401);
    CHECK(r.max_hermiticity_defect < 1e-12);
}

TEST_CASE("one-dimensional Ornstein-Uhlenbeck process") {
    // N = 1 and V = ½x²: x ← (1 − dt/2)x + √dt g, variance dt/(1 − (1 − dt/2)²).
    const auto v = Potential::parse("0.5 x^2");
    SimConfig cfg;
    cfg.n = 1;
    cfg.dt = 0.05;
    cfg.t_max = 4000.0;
    cfg.burn_in = 20.0;
    cfg.stride = 1;
    const auto r = simulate(v, cfg, {parse_poly("x^2", 1)});
    const double a = 1.0 - cfg.dt / 2.0;
    const double expect = cfg.dt / (1.0 - a * a);
    CHECK(std::abs(r.observables[0].mean - expect) < 4.0 * r.observables[0].standard_error);
    CHECK(std::abs(r.observables[0].drift_t) < 5.0);
}

TEST_CASE("synchronous coupling") {
    const auto v = Potential::parse("0.5 x^2");
    SimConfig cfg;
    cfg.n = 6;
    cfg.dt = 0.01;
    cfg.stride = 10;
    std::mt19937_64 rng(1);
    const Matrix z = oracle::random_hermitian(6, rng);

    SUBCASE("identical starts stay identical") {
        const auto r = coupling_decay(v, cfg, {Matrix::Zero(6, 6)}, 1.0);
        for (double d : r.distances) CHECK(d == 0.0);
        CHECK(std::isnan(r.slope));
    }
    SUBCASE("quadratic potential contracts at rate exactly ½") {
        const auto r = coupling_decay(v, cfg, {z}, 2.0);
        CHECK(r.slope == doctest::Approx(std::log(1.0 - cfg.dt / 2.0) / cfg.dt).epsilon(1e-9));
        const auto r2 = coupling_decay(v, cfg, {2.0 * z}, 2.0);
        for (std::size_t k = 0; k < r.distances.size(); ++k)
            CHECK(r2.distances[k] == doctest::Approx(2.0 * r.distances[k]).epsilon(1e-12));
    }
    SUBCASE("convex quartic contracts at least as fast") {
        const auto q = Potential::parse("0.5 X1^2 + 0.5 X2^2 + 0.01 X1^4 + 0.01 X2^4");
        cfg.n = 12;
        std::vector<Matrix> start{oracle::random_hermitian(12, rng), oracle::random_hermitian(12, rng)};
        const auto r = coupling_decay(q, cfg, start, 4.0);
        CHECK(r.slope <= -0.5 + 0.1);
        for (std::size_t k = 1; k < r.distances.size(); ++k) CHECK(r.distances[k] <= r.distances[k - 1] * (1.0 + 1e-12));
    }
    CHECK_THROWS_AS(coupling_decay(v, cfg, {Matrix::Zero(5, 5)}, 1.0), ValidationError);
}

TEST_CASE("convexity probe") {
    const auto quad = Potential::parse("0.5 x^2");
    auto r = convexity_probe(quad, 1.0, 3.0, 20, 4, 1);
    CHECK(r.pass);
    CHECK(std::abs(r.min_eigenvalue) < 1e-12);
    CHECK(r.samples == 20);
    CHECK_FALSE(convexity_probe(quad, 2.0, 3.0, 20, 4, 1).pass);

    CHECK(convexity_probe(Potential::parse("0.5 x^2 + 0.01 x^4"), 1.0, 5.0, 200, 1, 2).pass);
    const auto bad = convexity_probe(Potential::parse("0.5 x^2 - 0.5 x^4"), 1.0, 2.0, 200, 3, 3);
    CHECK_FALSE(bad.pass);
    CHECK(bad.min_eigenvalue < 0.0);
    CHECK_THROWS_AS(convexity_probe(quad, 1.0, 0.0, 10, 2, 1), ValidationError);
}

TEST_CASE("gap statistic") {
    std::vector<double> one, two;
    for (int k = 0; k < 100; ++k) {
        one.push_back(-1.0 + 2.0 * k / 99.0);
        two.push_back(k < 50 ? -1.0 + 0.5 * k / 49.0 : 0.5 + 0.5 * (k - 50) / 49.0);
    }
    const auto c = gap_statistic(one);
    CHECK(c.connected);
    CHECK(c.relative_width == doctest::Approx(1.0));
    const auto d = gap_statistic(two);
    CHECK_FALSE(d.connected);
    CHECK(d.gap_location == doctest::Approx(0.0));
    CHECK(d.gap_width == doctest::Approx(1.0));

    // Outliers at the edges are ignored.
    auto outliers = one;
    outliers.push_back(5.0);
    CHECK(gap_statistic(outliers).connected);
    CHECK(gap_statistic({0.0, 1.0}).connected);

    auto ens = zero_ensemble(1, 4, 1);
    CHECK_THROWS_AS(spectral_report(ens, parse_poly("1i X1", 1)), ValidationError);
}

TEST_CASE("Kolmogorov-Smirnov distance") {
    auto uniform = [](double x) { return std::clamp(0.5 * (x + 1.0), 0.0, 1.0); };
    CHECK(ks_distance({0.0}, uniform) == doctest::Approx(0.5));
    std::vector<double> grid;
    for (int k = 0; k < 1000; ++k) grid.push_back(-1.0 + 2.0 * (k + 0.5) / 1000.0);
    CHECK(ks_distance(grid, uniform) == doctest::Approx(0.0005));
    CHECK(ks_distance(grid, [](double x) { return oracle::semicircle_cdf(2.0 * x); }) > 0.05);
}

TEST_CASE("checkpoints round-trip and resume bit-for-bit") {
    const auto v = Potential::parse("0.5 x^2 + 0.01 x^4");
    SimConfig cfg;
    cfg.n = 6;
    cfg.dt = 0.01;
    cfg.t_max = 1.0;
    cfg.burn_in = 0.0;
    cfg.seed = 9;
    const auto half = simulate(v, cfg, {});
    std::stringstream buf;
    write_checkpoint(buf, half.final_state);
    const auto back = read_checkpoint(buf);
    CHECK(back.time == half.final_state.time);
    CHECK(back.rng.seed() == 9);
    CHECK(back.rng.position() == half.final_state.rng.position());
    CHECK(max_abs(back.x[0] - half.final_state.x[0]) == 0.0);

    cfg.t_max = 2.0;
    const auto resumed = simulate(v, cfg, {}, back);
    const auto direct = simulate(v, cfg, {});
    CHECK(resumed.final_state.time == doctest::Approx(2.0));
    CHECK(max_abs(resumed.final_state.x[0] - direct.final_state.x[0]) == 0.0);

    std::stringstream junk("NOPE");
    CHECK_THROWS_AS(read_checkpoint(junk), ValidationError);
    std::stringstream full;
    write_checkpoint(full, half.final_state);
    std::stringstream cut(full.str().substr(0, full.str().size() - 3));
    CHECK_THROWS_AS(read_checkpoint(cut), ValidationError);
    CHECK_THROWS_AS(read_checkpoint(std::string("/nonexistent/ckpt.bin")), ValidationError);
}

TEST_CASE("determinism across runs") {
    const auto v = Potential::parse("0.5 X1^2 + 0.5 X2^2 + 0.05 X1 X2 X1 X2");
    SimConfig cfg;
    cfg.n = 5;
    cfg.dt = 0.01;
    cfg.t_max = 0.5;
    cfg.burn_in = 0.1;
    const auto a = simulate(v, cfg, {parse_poly("X1 X2 X1 X2", 2)});
    const auto b = simulate(v, cfg, {parse_poly("X1 X2 X1 X2", 2)});
    CHECK(a.observables[0].mean == b.observables[0].mean);
    cfg.seed = 2;
    const auto c = simulate(v, cfg, {parse_poly("X1 X2 X1 X2", 2)});
    CHECK(a.observables[0].mean != c.observables[0].mean);
}

TEST_CASE("configuration checks") {
    const auto v = Potential::parse("0.5 x^2 + 0.01 x^4");
    SimConfig cfg;
    CHECK_NOTHROW(validate(cfg, v));
    CHECK(cfg.resolved_t_max(v) == doctest::Approx(50.0));
    CHECK(cfg.resolved_burn_in(v) == doctest::Approx(10.0));
    CHECK(cfg.resolved_norm_cap(v) == doctest::Approx(1.5 * (2.0 + 0.04)));
    // L for βx⁴ on radius r is 4β·3r².
    CHECK(lipschitz_bound(v, 2.0) == doctest::Approx(0.04 * 3.0 * 4.0));

    cfg.dt = 2.5;
    CHECK_THROWS_AS(validate(cfg, v), ValidationError);
    cfg.dt = -1.0;
    CHECK_THROWS_AS(validate(cfg, v), ValidationError);
    cfg.dt = 0.01;
    cfg.stride = 0;
    CHECK_THROWS_AS(validate(cfg, v), ValidationError);
    cfg.stride = 1;
    cfg.n = 0;
    CHECK_THROWS_AS(validate(cfg, v), ValidationError);
    cfg.n = 4;
    CHECK_THROWS_AS(validate(cfg, Potential(1, 1.0, {{{0.0, 0.1}, Word::power(1, 4)}})), ValidationError);
    CHECK_THROWS_AS(Potential::parse("0 x^2"), ValidationError);
    CHECK_THROWS_AS(zero_ensemble(0, 3, 1), ValidationError);
}

TEST_CASE("clipping bounds the spectrum") {
    const auto v = Potential::parse("0.5 x^2");
    SimConfig cfg;
    cfg.n = 20;
    cfg.dt = 0.01;
    cfg.t_max = 3.0;
    cfg.burn_in = 0.0;
    cfg.clip = true;
    cfg.norm_cap = 0.5;
    const auto r = simulate(v, cfg, {});
    CHECK(r.final_state.norm() <= 0.5 + 1e-12);
}

TEST_CASE("analytic edge and norm table") {
    const auto v = Potential::parse("0.5 x^2");
    CHECK(*analytic_edge(v, parse_poly("X1", 1)) == doctest::Approx(2.0));
    CHECK(*analytic_edge(Potential(1, 4.0, {}), parse_poly("X1", 1)) == doctest::Approx(1.0));
    CHECK(*analytic_edge(Potential::parse("0.5 x^2 + 0.01 x^4"), parse_poly("X1", 1)) ==
          doctest::Approx(solve_one_cut(0.01).support_edge()));
    CHECK_FALSE(analytic_edge(v, parse_poly("X1^2", 1)).has_value());

    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.t_max = 3.0;
    cfg.burn_in = 1.0;
    const auto t = norm_stabilization(v, parse_poly("X1", 1), cfg, {10, 40}, 3);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1].per_seed.size() == 3);
    CHECK(t.cauchy_gaps.size() == 1);
    for (const auto& row : t.rows) CHECK(row.median == doctest::Approx(2.0).epsilon(0.3));
    CHECK_THROWS_AS(norm_stabilization(v, parse_poly("X1", 1), cfg, {}, 3), ValidationError);
}
