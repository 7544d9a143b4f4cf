#pragma once

// Reference computations used by the tests. None of these call into the
// library under test.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline std::uint64_t catalan(int k) {
    std::uint64_t c = 1;
    for (int j = 0; j < k; ++j) c = c * 2 * (2 * j + 1) / (j + 2);
    return c;
}

inline std::uint64_t double_factorial_odd(int n) {
    std::uint64_t r = 1;
    for (int k = n; k > 1; k -= 2) r *= static_cast<std::uint64_t>(k);
    return r;
}

// Calls f(pairing) for every perfect matching of {0..n-1} in which only
// equal colors are paired. pairing[a] = partner of a.
inline void for_each_pairing(const std::vector<int>& colors, const std::function<void(const std::vector<int>&)>& f) {
    const std::size_t n = colors.size();
    if (n % 2) return;
    std::vector<int> partner(n, -1);
    std::function<void()> rec = [&] {
        std::size_t a = 0;
        while (a < n && partner[a] >= 0) ++a;
        if (a == n) {
            f(partner);
            return;
        }
        for (std::size_t b = a + 1; b < n; ++b) {
            if (partner[b] >= 0 || colors[b] != colors[a]) continue;
            partner[a] = static_cast<int>(b);
            partner[b] = static_cast<int>(a);
            rec();
            partner[a] = partner[b] = -1;
        }
    };
    rec();
}

inline bool non_crossing(const std::vector<int>& partner) {
    const int n = static_cast<int>(partner.size());
    for (int a = 0; a < n; ++a) {
        const int b = partner[a];
        if (b < a) continue;
        for (int c = a + 1; c < b; ++c)
            if (partner[c] < a || partner[c] > b) return false;
    }
    return true;
}

// τ(X_{i1}...X_{ik}) for free standard semicirculars: non-crossing pairings
// respecting colors.
inline std::uint64_t free_semicircular_moment(const std::vector<int>& colors) {
    std::uint64_t count = 0;
    for_each_pairing(colors, [&](const std::vector<int>& p) { count += non_crossing(p) ? 1 : 0; });
    return count;
}

// E[∏_s (1/N) Tr H^{d_s}] for a GUE matrix with E|H_ij|² = 1/N by direct
// summation over indices and Wick pairings: E[H_ab H_cd] = δ_ad δ_bc / N.
inline double wick_gue_product(const std::vector<int>& degrees, int n) {
    int total = 0;
    for (int d : degrees) total += d;
    if (total % 2) return 0.0;
    // Half-edge h sits at position t of star s and reads H_{i_h, i_next(h)}.
    std::vector<int> next(static_cast<std::size_t>(total));
    {
        int base = 0;
        for (int d : degrees) {
            for (int t = 0; t < d; ++t) next[static_cast<std::size_t>(base + t)] = base + (t + 1) % d;
            base += d;
        }
    }
    std::vector<int> index(static_cast<std::size_t>(total), 0);
    double sum = 0.0;
    const std::vector<int> colors(static_cast<std::size_t>(total), 0);
    std::vector<std::vector<int>> pairings;
    for_each_pairing(colors, [&](const std::vector<int>& p) { pairings.push_back(p); });
    const auto assignments = static_cast<std::int64_t>(std::pow(n, total));
    for (std::int64_t code = 0; code < assignments; ++code) {
        std::int64_t c = code;
        for (auto& i : index) {
            i = static_cast<int>(c % n);
            c /= n;
        }
        for (const auto& p : pairings) {
            bool ok = true;
            for (int h = 0; h < total && ok; ++h) {
                const int g = p[static_cast<std::size_t>(h)];
                const int a = index[static_cast<std::size_t>(h)], b = index[static_cast<std::size_t>(next[h])];
                const int cc = index[static_cast<std::size_t>(g)], d = index[static_cast<std::size_t>(next[g])];
                ok = (a == d && b == cc);
            }
            if (ok) sum += std::pow(1.0 / n, total / 2);
        }
    }
    double norm = 1.0;
    for (std::size_t s = 0; s < degrees.size(); ++s) norm *= n;
    return sum / norm;
}

// Gluings of stars (each a list of colors read counterclockwise from its
// first half-edge) that are connected and of genus g, by brute force over
// color-respecting pairings; faces are orbits of h ↦ next(partner(h)).
inline std::uint64_t count_glued_maps(const std::vector<std::vector<int>>& stars, int genus) {
    std::vector<int> colors, star_of, next;
    for (std::size_t s = 0; s < stars.size(); ++s) {
        const int base = static_cast<int>(colors.size());
        const int d = static_cast<int>(stars[s].size());
        for (int t = 0; t < d; ++t) {
            colors.push_back(stars[s][static_cast<std::size_t>(t)]);
            star_of.push_back(static_cast<int>(s));
            next.push_back(base + (t + 1) % d);
        }
    }
    const int n = static_cast<int>(colors.size());
    const int v = static_cast<int>(stars.size());
    if (n == 0) return genus == 0 ? 1 : 0;
    std::uint64_t count = 0;
    for_each_pairing(colors, [&](const std::vector<int>& partner) {
        std::vector<int> root(static_cast<std::size_t>(v));
        for (int s = 0; s < v; ++s) root[static_cast<std::size_t>(s)] = s;
        std::function<int(int)> find = [&](int x) {
            while (root[static_cast<std::size_t>(x)] != x) x = root[static_cast<std::size_t>(x)];
            return x;
        };
        for (int h = 0; h < n; ++h)
            root[static_cast<std::size_t>(find(star_of[static_cast<std::size_t>(h)]))] =
                find(star_of[static_cast<std::size_t>(partner[static_cast<std::size_t>(h)])]);
        for (int s = 1; s < v; ++s)
            if (find(s) != find(0)) return;
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        int faces = 0;
        for (int h = 0; h < n; ++h) {
            if (seen[static_cast<std::size_t>(h)]) continue;
            ++faces;
            for (int x = h; !seen[static_cast<std::size_t>(x)];
                 x = next[static_cast<std::size_t>(partner[static_cast<std::size_t>(x)])])
                seen[static_cast<std::size_t>(x)] = true;
        }
        const int g2 = 2 - (v - n / 2 + faces);
        if (g2 == 2 * genus) ++count;
    });
    return count;
}

// ∫∫ log|x − y| dμ(x)dμ(y) for μ on [−a, a] with density ρ, via
// log|cos θ − cos φ| = −log 2 − Σ_{n≥1} (2/n) cos nθ cos nφ.
inline double log_energy(const std::function<double(double)>& rho, double a, int modes = 64, int nodes = 4096) {
    const double h = std::numbers::pi / nodes;
    std::vector<double> c(static_cast<std::size_t>(modes) + 1, 0.0);
    for (int j = 0; j <= nodes; ++j) {
        const double th = j * h;
        double w = rho(a * std::cos(th)) * a * std::sin(th) * h;
        if (j == 0 || j == nodes) w *= 0.5;
        for (int m = 0; m <= modes; ++m) c[static_cast<std::size_t>(m)] += w * std::cos(m * th);
    }
    double e = c[0] * c[0] * (std::log(a) - std::log(2.0));
    for (int m = 1; m <= modes; ++m) e -= 2.0 / m * c[static_cast<std::size_t>(m)] * c[static_cast<std::size_t>(m)];
    return e;
}

// Free entropy of a one-variable law in the normalization where the
// standard semicircle has χ = ½ log 2π + ½.
inline double one_variable_entropy(const std::function<double(double)>& rho, double a) {
    return log_energy(rho, a) + 0.75 + 0.5 * std::log(2.0 * std::numbers::pi);
}

inline double semicircle_density(double x) {
    return std::abs(x) >= 2.0 ? 0.0 : std::sqrt(4.0 - x * x) / (2.0 * std::numbers::pi);
}

inline double semicircle_cdf(double x) {
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    return 0.5 + (x * std::sqrt(4.0 - x * x) / 4.0 + std::asin(x / 2.0)) / std::numbers::pi;
}

// Simpson's rule on [lo, hi].
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int panels = 20000) {
    const double h = (hi - lo) / panels;
    double s = f(lo) + f(hi);
    for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(lo + k * h);
    return s * h / 3.0;
}

// Quartic edge a(β): the one-cut density (1 + 2βa² + 4βx²)√(a² − x²)/2π
// must integrate to 1; bisection on a with numerical integration.
inline double quartic_edge(double beta) {
    auto mass = [&](double a) {
        return simpson(
            [&](double x) {
                return (1.0 + 2.0 * beta * a * a + 4.0 * beta * x * x) * std::sqrt(std::max(0.0, a * a - x * x)) /
                       (2.0 * std::numbers::pi);
            },
            -a, a, 4000);
    };
    double lo = 0.5, hi = 3.0;
    for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        (mass(mid) > 1.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// Moments of the quartic one-cut law: a² from the normalization condition
// 3βa⁴ + a² = 4 and x = a cos θ quadrature (exact for trigonometric
// polynomials once the node count exceeds the degree).
inline std::vector<double> quartic_moments(double beta, int up_to) {
    const double s = beta == 0.0 ? 4.0 : (std::sqrt(1.0 + 48.0 * beta) - 1.0) / (6.0 * beta);
    const double a = std::sqrt(s);
    const int nodes = 4 * (up_to + 8);
    const double h = std::numbers::pi / nodes;
    std::vector<double> m(static_cast<std::size_t>(up_to) + 1, 0.0);
    for (int j = 1; j < nodes; ++j) {
        const double x = a * std::cos(j * h), sn = std::sin(j * h);
        const double w = (1.0 + 2.0 * beta * s + 4.0 * beta * x * x) * a * a * sn * sn / (2.0 * std::numbers::pi) * h;
        double xk = 1.0;
        for (auto& mk : m) {
            mk += w * xk;
            xk *= x;
        }
    }
    return m;
}

inline Eigen::MatrixXcd random_hermitian(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = {g(rng), g(rng)};
    Eigen::MatrixXcd h = (a + a.adjoint()) * (0.5 * scale / std::sqrt(static_cast<double>(n)));
    return h;
}

}  // namespace oracle
