#include "freedyson/langevin.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "freedyson/error.hpp"
#include "freedyson/onematrix.hpp"
#include "freedyson/parallel.hpp"

namespace freedyson {

// ---------------------------------------------------------------------------
// Philox4x32-10

std::array<std::uint32_t, 4> Philox::block(std::uint64_t counter) const noexcept {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    std::array<std::uint32_t, 4> c{static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32), 0u,
                                   0u};
    std::uint32_t k0 = static_cast<std::uint32_t>(seed_), k1 = static_cast<std::uint32_t>(seed_ >> 32);
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
        k0 += w0;
        k1 += w1;
    }
    return c;
}

namespace {

double open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

void Philox::normals(double* out, std::size_t count) {
    for (std::size_t k = 0; k < count; k += 2) {
        const auto b = block(position_++);
        const double r = std::sqrt(-2.0 * std::log(open_unit(b[0], b[1])));
        const double theta = 2.0 * std::numbers::pi * open_unit(b[2], b[3]);
        out[k] = r * std::cos(theta);
        if (k + 1 < count) out[k + 1] = r * std::sin(theta);
    }
}

double Philox::normal() {
    double g;
    normals(&g, 1);
    return g;
}

// ---------------------------------------------------------------------------
// Ensembles and configuration

namespace {

double spectral_norm(const Matrix& h) {
    if (h.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double operator_norm(const Matrix& a) {
    if (a.isApprox(a.adjoint(), 0.0)) return spectral_norm(a);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

std::vector<double> sorted_eigenvalues(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double default_bound(const Potential& v) {
    double r = 2.0 / std::sqrt(v.quadratic_weight());
    for (const auto& c : v.couplings()) r += std::abs(c.beta) * static_cast<double>(c.monomial.degree());
    return r;
}

}  // namespace

double MatrixEnsemble::norm() const {
    double m = 0.0;
    for (const auto& xi : x) m = std::max(m, spectral_norm(xi));
    return m;
}

MatrixEnsemble zero_ensemble(int letters, std::size_t n, std::uint64_t seed) {
    if (letters < 1 || n < 1) throw ValidationError("ensemble needs at least one letter and N ≥ 1");
    MatrixEnsemble e;
    const auto nn = static_cast<Eigen::Index>(n);
    e.x.assign(static_cast<std::size_t>(letters), Matrix::Zero(nn, nn));
    e.rng = Philox(seed);
    return e;
}

double SimConfig::resolved_t_max(const Potential& v) const { return t_max >= 0.0 ? t_max : 50.0 / v.quadratic_weight(); }
double SimConfig::resolved_burn_in(const Potential& v) const {
    return burn_in >= 0.0 ? burn_in : 10.0 / v.quadratic_weight();
}
double SimConfig::resolved_norm_cap(const Potential& v) const {
    return norm_cap > 0.0 ? norm_cap : 1.5 * default_bound(v);
}

double lipschitz_bound(const Potential& v, double radius) {
    // A word of degree k is k·r^{k−1}-Lipschitz on the ball of radius r, and
    // every word in D_i q has degree deg q − 1.
    double l = 0.0;
    for (int i = 1; i <= v.letters(); ++i) {
        double li = 0.0;
        for (const auto& c : v.couplings()) {
            const NCPoly g = cyclic_gradient(NCPoly(v.letters(), c.monomial, c.beta), i);
            for (const auto& [w, coeff] : g.terms()) {
                const auto k = static_cast<double>(w.degree());
                if (k > 0) li += std::abs(coeff) * k * std::pow(radius, k - 1.0);
            }
        }
        l = std::max(l, li);
    }
    return l;
}

void validate(const SimConfig& cfg, const Potential& v) {
    if (cfg.n < 1) throw ValidationError("N must be at least 1");
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ValidationError("dt must be positive");
    if (cfg.stride < 1) throw ValidationError("thinning stride must be at least 1");
    if (!v.self_adjoint_mode() || !v.has_real_couplings())
        throw ValidationError("simulation needs a self-adjoint potential with real couplings");
    const double m = cfg.resolved_norm_cap(v);
    const double l = lipschitz_bound(v, m);
    if (!(cfg.dt * (v.quadratic_weight() + l) < 2.0))
        throw ValidationError("unstable step: dt·(c + L) = " + std::to_string(cfg.dt * (v.quadratic_weight() + l)) +
                              " ≥ 2 with L = " + std::to_string(l) + " on the ball of radius " + std::to_string(m));
}

// ---------------------------------------------------------------------------
// Dynamics

std::vector<Matrix> brownian_increment(int letters, std::size_t n, double dt, Philox& rng) {
    if (!(dt > 0.0)) throw ValidationError("dt must be positive");
    const auto nn = static_cast<Eigen::Index>(n);
    const double sd_diag = std::sqrt(dt / static_cast<double>(n));
    const double sd_off = std::sqrt(dt / (2.0 * static_cast<double>(n)));
    std::vector<double> g(n * n);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(letters));
    for (int i = 0; i < letters; ++i) {
        rng.normals(g.data(), g.size());
        Matrix h(nn, nn);
        std::size_t k = 0;
        for (Eigen::Index c = 0; c < nn; ++c) {
            h(c, c) = sd_diag * g[k++];
            for (Eigen::Index r = c + 1; r < nn; ++r) {
                const cplx z(sd_off * g[k], sd_off * g[k + 1]);
                k += 2;
                h(r, c) = z;
                h(c, r) = std::conj(z);
            }
        }
        out.push_back(std::move(h));
    }
    return out;
}

namespace {

std::vector<Matrix> drift_from(const std::vector<NCPoly>& gradient, const std::vector<Matrix>& x) {
    std::vector<Matrix> out;
    out.reserve(gradient.size());
    for (const auto& g : gradient) out.push_back(-0.5 * evaluate(g, x));
    return out;
}

void clip_eigenvalues(Matrix& x, double cap) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(x);
    const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(-cap).cwiseMin(cap);
    x = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().adjoint();
    x = 0.5 * (x + x.adjoint()).eval();
}

double advance(MatrixEnsemble& ens, const std::vector<NCPoly>& gradient, double dt, std::optional<double> cap,
               const std::vector<Matrix>& increment) {
    const auto d = drift_from(gradient, ens.x);
    double defect = 0.0;
    for (std::size_t i = 0; i < ens.x.size(); ++i) {
        const Matrix y = ens.x[i] + increment[i] + dt * d[i];
        const Matrix ya = y.adjoint();
        defect = std::max(defect, (y - ya).cwiseAbs().maxCoeff());
        ens.x[i] = 0.5 * (y + ya);
        if (cap) clip_eigenvalues(ens.x[i], *cap);
        if (!ens.x[i].allFinite())
            throw NumericError("simulation blew up at t = " + std::to_string(ens.time + dt) +
                               " (dt too large or potential not convex on the reached region)");
    }
    ens.time += dt;
    return defect;
}

std::optional<double> clip_cap(const SimConfig& cfg, const Potential& v) {
    if (!cfg.clip) return std::nullopt;
    return cfg.resolved_norm_cap(v);
}

void check_shape(const MatrixEnsemble& ens, const Potential& v) {
    if (ens.letters() != v.letters())
        throw ValidationError("ensemble has " + std::to_string(ens.letters()) + " matrices, potential has " +
                              std::to_string(v.letters()) + " letters");
}

}  // namespace

std::vector<Matrix> drift(const Potential& v, const std::vector<Matrix>& x) { return drift_from(v.gradient(), x); }

double step_with(MatrixEnsemble& ens, const Potential& v, const SimConfig& cfg, const std::vector<Matrix>& increment) {
    check_shape(ens, v);
    return advance(ens, v.gradient(), cfg.dt, clip_cap(cfg, v), increment);
}

double step(MatrixEnsemble& ens, const Potential& v, const SimConfig& cfg) {
    check_shape(ens, v);
    const auto inc = brownian_increment(ens.letters(), ens.size(), cfg.dt, ens.rng);
    return advance(ens, v.gradient(), cfg.dt, clip_cap(cfg, v), inc);
}

cplx empirical_trace(const MatrixEnsemble& ens, const NCPoly& p) { return normalized_trace(p, ens.x); }
cplx empirical_trace(const MatrixEnsemble& ens, const Word& w) { return normalized_trace(w, ens.x); }

// ---------------------------------------------------------------------------
// Coupling and convexity

namespace {

double slope_of(const std::vector<double>& t, const std::vector<double>& y) {
    const double n = static_cast<double>(t.size());
    const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        sxy += (t[k] - mt) * (y[k] - my);
        sxx += (t[k] - mt) * (t[k] - mt);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

double tuple_distance(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, spectral_norm(a[i] - b[i]));
    return d;
}

}  // namespace

CouplingReport coupling_decay(const Potential& v, const SimConfig& cfg, const std::vector<Matrix>& z, double horizon) {
    validate(cfg, v);
    const auto n = static_cast<Eigen::Index>(cfg.n);
    if (z.size() != static_cast<std::size_t>(v.letters()))
        throw ValidationError("initial tuple has the wrong number of matrices");
    for (const auto& zi : z)
        if (zi.rows() != n || zi.cols() != n) throw ValidationError("initial tuple has the wrong size");
    MatrixEnsemble x = zero_ensemble(v.letters(), cfg.n, cfg.seed);
    MatrixEnsemble y = zero_ensemble(v.letters(), cfg.n, cfg.seed);
    x.x = z;
    const auto gradient = v.gradient();
    const auto cap = clip_cap(cfg, v);

    CouplingReport r;
    r.times.push_back(0.0);
    r.distances.push_back(tuple_distance(x.x, y.x));
    const auto steps = static_cast<std::size_t>(std::llround(horizon / cfg.dt));
    for (std::size_t s = 1; s <= steps; ++s) {
        const auto inc = brownian_increment(v.letters(), cfg.n, cfg.dt, x.rng);
        advance(x, gradient, cfg.dt, cap, inc);
        advance(y, gradient, cfg.dt, cap, inc);
        if (s % cfg.stride == 0 || s == steps) {
            r.times.push_back(x.time);
            r.distances.push_back(tuple_distance(x.x, y.x));
        }
    }
    const bool positive = std::all_of(r.distances.begin(), r.distances.end(), [](double d) { return d > 0.0; });
    if (!positive) {
        r.slope = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    std::vector<double> logs(r.distances.size());
    std::transform(r.distances.begin(), r.distances.end(), logs.begin(), [](double d) { return std::log(d); });
    r.slope = slope_of(r.times, logs);
    return r;
}

namespace {

double uniform(Philox& rng) {
    // Φ of a normal deviate is uniform; erfc keeps full precision in the tails.
    return 0.5 * std::erfc(-rng.normal() / std::numbers::sqrt2);
}

Matrix random_hermitian(std::size_t n, double radius, Philox& rng) {
    const auto nn = static_cast<Eigen::Index>(n);
    Matrix g = brownian_increment(1, n, 1.0, rng).front();
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    Eigen::VectorXd lambda(nn);
    for (Eigen::Index k = 0; k < nn; ++k) lambda(k) = radius * (2.0 * uniform(rng) - 1.0);
    Matrix h = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().adjoint();
    return 0.5 * (h + h.adjoint());
}

Matrix jordan_sum(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    Matrix out = Matrix::Zero(a.front().rows(), a.front().cols());
    for (std::size_t i = 0; i < a.size(); ++i) out += 0.5 * (a[i] * b[i] + b[i] * a[i]);
    return out;
}

}  // namespace

ConvexityReport convexity_probe(const Potential& v, double c, double radius, std::size_t samples, std::size_t n,
                                std::uint64_t seed) {
    if (n < 1 || samples < 1) throw ValidationError("probe needs N ≥ 1 and at least one sample");
    if (!(radius > 0.0)) throw ValidationError("probe radius must be positive");
    Philox rng(seed);
    const auto gradient = v.gradient();
    ConvexityReport r;
    r.min_eigenvalue = std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<Matrix> x, y;
        for (int i = 0; i < v.letters(); ++i) {
            x.push_back(random_hermitian(n, radius, rng));
            y.push_back(random_hermitian(n, radius, rng));
        }
        std::vector<Matrix> a, b;
        for (std::size_t i = 0; i < x.size(); ++i) {
            a.push_back(evaluate(gradient[i], x) - evaluate(gradient[i], y));
            b.push_back(x[i] - y[i]);
        }
        const Matrix bb = jordan_sum(b, b);
        const Matrix e = jordan_sum(a, b) - c * bb;
        const auto ev = sorted_eigenvalues(0.5 * (e + e.adjoint()));
        r.min_eigenvalue = std::min(r.min_eigenvalue, ev.front());
        scale = std::max(scale, spectral_norm(bb) * std::max(1.0, std::abs(c)));
    }
    r.samples = samples;
    r.pass = r.min_eigenvalue >= -1e-10 * std::max(scale, 1e-300);
    return r;
}

// ---------------------------------------------------------------------------
// Spectra

SpectralReport gap_statistic(std::vector<double> eigenvalues, const GapParams& params) {
    std::sort(eigenvalues.begin(), eigenvalues.end());
    SpectralReport r;
    r.eigenvalues = std::move(eigenvalues);
    const auto& ev = r.eigenvalues;
    if (ev.size() < 2 * params.k_edge + 3) return r;
    std::vector<double> spacings;
    for (std::size_t j = params.k_edge; j + 1 < ev.size() - params.k_edge; ++j) spacings.push_back(ev[j + 1] - ev[j]);
    const auto widest = std::max_element(spacings.begin(), spacings.end());
    const std::size_t j = params.k_edge + static_cast<std::size_t>(widest - spacings.begin());
    r.gap_width = *widest;
    r.gap_location = 0.5 * (ev[j] + ev[j + 1]);
    std::vector<double> sorted = spacings;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double median = sorted[sorted.size() / 2];
    r.relative_width = median > 0.0 ? r.gap_width / median : (r.gap_width > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    const double range = ev.back() - ev.front();
    r.connected = !(r.relative_width > params.ratio_threshold && r.gap_width > params.abs_fraction * range);
    return r;
}

SpectralReport spectral_report(const MatrixEnsemble& ens, const NCPoly& p, const GapParams& params) {
    if (involution(p, true) != p) throw ValidationError("observable is not self-adjoint: " + to_string(p));
    SpectralReport r = gap_statistic(sorted_eigenvalues(evaluate(p, ens.x)), params);
    r.observable = to_string(p);
    return r;
}

double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double f = cdf(sorted[k]);
        d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
    }
    return d;
}

// ---------------------------------------------------------------------------
// Runner

namespace {

ObservableStats stats_of(const std::string& name, const std::vector<double>& t, const std::vector<double>& y) {
    ObservableStats s;
    s.name = name;
    if (y.empty()) return s;
    s.mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    const std::size_t batches = std::min<std::size_t>(20, y.size());
    if (batches < 2) return s;
    const std::size_t per = y.size() / batches;
    std::vector<double> bm(batches), bt(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * per, hi = b + 1 == batches ? y.size() : lo + per;
        bm[b] = std::accumulate(y.begin() + static_cast<std::ptrdiff_t>(lo), y.begin() + static_cast<std::ptrdiff_t>(hi), 0.0) /
                static_cast<double>(hi - lo);
        bt[b] = 0.5 * (t[lo] + t[hi - 1]);
    }
    const double mb = std::accumulate(bm.begin(), bm.end(), 0.0) / static_cast<double>(batches);
    double var = 0.0;
    for (double x : bm) var += (x - mb) * (x - mb);
    var /= static_cast<double>(batches - 1);
    s.standard_error = std::sqrt(var / static_cast<double>(batches));

    s.drift = slope_of(bt, bm);
    const double mt = std::accumulate(bt.begin(), bt.end(), 0.0) / static_cast<double>(batches);
    double sxx = 0.0, rss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) sxx += (bt[b] - mt) * (bt[b] - mt);
    for (std::size_t b = 0; b < batches; ++b) {
        const double fit = mb + s.drift * (bt[b] - mt);
        rss += (bm[b] - fit) * (bm[b] - fit);
    }
    const double se_slope = batches > 2 && sxx > 0.0 ? std::sqrt(rss / static_cast<double>(batches - 2) / sxx) : 0.0;
    s.drift_t = se_slope > 0.0 ? s.drift / se_slope : 0.0;
    return s;
}

}  // namespace

SimulationResult simulate(const Potential& v, const SimConfig& cfg, const std::vector<NCPoly>& observables,
                          std::optional<MatrixEnsemble> start, const SimulationHooks& hooks) {
    validate(cfg, v);
    MatrixEnsemble ens = start ? std::move(*start) : zero_ensemble(v.letters(), cfg.n, cfg.seed);
    check_shape(ens, v);
    if (ens.size() != cfg.n) throw ValidationError("checkpoint matrix size differs from N");
    for (const auto& p : observables)
        if (p.letters() > v.letters()) throw ValidationError("observable uses letters beyond the potential");

    std::vector<NCPoly> widened;
    for (const auto& p : observables) widened.push_back(p.with_letters(v.letters()));
    const auto gradient = v.gradient();
    const auto cap = clip_cap(cfg, v);
    const double t_max = cfg.resolved_t_max(v);
    const double burn_in = cfg.resolved_burn_in(v);

    SimulationResult r;
    std::vector<double> times;
    std::vector<std::vector<double>> values(observables.size());
    std::vector<cplx> current(observables.size());
    const double eps = 1e-9 * cfg.dt;
    std::size_t step_count = 0;
    while (ens.time + 0.5 * cfg.dt <= t_max + eps) {
        const auto inc = brownian_increment(ens.letters(), ens.size(), cfg.dt, ens.rng);
        r.max_hermiticity_defect = std::max(r.max_hermiticity_defect, advance(ens, gradient, cfg.dt, cap, inc));
        ++step_count;
        if (step_count % cfg.stride != 0 || ens.time < burn_in - eps) continue;
        for (std::size_t k = 0; k < observables.size(); ++k) {
            current[k] = normalized_trace(widened[k], ens.x);
            values[k].push_back(current[k].real());
        }
        times.push_back(ens.time);
        if (hooks.on_sample) hooks.on_sample(ens.time, current);
        if (hooks.spectrum_every > 0 && r.samples % hooks.spectrum_every == 0) {
            const auto ev = sorted_eigenvalues(ens.x.front());
            r.pooled_spectrum.insert(r.pooled_spectrum.end(), ev.begin(), ev.end());
            r.max_norm = std::max(r.max_norm, ens.norm());
        }
        ++r.samples;
    }
    std::sort(r.pooled_spectrum.begin(), r.pooled_spectrum.end());
    for (std::size_t k = 0; k < observables.size(); ++k)
        r.observables.push_back(stats_of(to_string(observables[k]), times, values[k]));
    r.max_norm = std::max(r.max_norm, ens.norm());
    r.final_state = std::move(ens);
    return r;
}

std::optional<double> analytic_edge(const Potential& v, const NCPoly& p) {
    if (v.letters() != 1 || p != NCPoly::letter(1, 1)) return std::nullopt;
    double beta = 0.0;
    for (const auto& c : v.couplings()) {
        if (c.monomial != Word::power(1, 4) || c.beta.imag() != 0.0) return std::nullopt;
        beta += c.beta.real();
    }
    const double w = v.quadratic_weight();
    try {
        // x = y/√c maps (c/2)x² + βx⁴ to ½y² + (β/c²)y⁴.
        return solve_one_cut(beta / (w * w)).support_edge() / std::sqrt(w);
    } catch (const NumericError&) {
        return std::nullopt;
    }
}

NormTable norm_stabilization(const Potential& v, const NCPoly& p, SimConfig cfg, const std::vector<std::size_t>& sizes,
                             std::size_t seeds) {
    if (sizes.empty() || seeds < 1) throw ValidationError("norm table needs at least one N and one seed");
    const NCPoly obs = p.with_letters(v.letters());
    NormTable table;
    table.reference = analytic_edge(v, p);
    const std::uint64_t base_seed = cfg.seed;
    for (std::size_t n : sizes) {
        cfg.n = n;
        validate(cfg, v);
        NormRow row;
        row.n = n;
        row.per_seed.assign(seeds, 0.0);
        parallel_for(seeds, [&](std::size_t s) {
            SimConfig local = cfg;
            local.seed = base_seed + s;
            MatrixEnsemble ens = zero_ensemble(v.letters(), n, local.seed);
            const auto gradient = v.gradient();
            const auto cap = clip_cap(local, v);
            const double t_max = local.resolved_t_max(v), burn_in = local.resolved_burn_in(v);
            const double eps = 1e-9 * local.dt;
            double sum = 0.0;
            std::size_t count = 0, step_count = 0;
            while (ens.time + 0.5 * local.dt <= t_max + eps) {
                advance(ens, gradient, local.dt, cap, brownian_increment(ens.letters(), n, local.dt, ens.rng));
                if (++step_count % local.stride != 0 || ens.time < burn_in - eps) continue;
                sum += operator_norm(evaluate(obs, ens.x));
                ++count;
            }
            row.per_seed[s] = count > 0 ? sum / static_cast<double>(count) : operator_norm(evaluate(obs, ens.x));
        });
        std::vector<double> sorted = row.per_seed;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t h = sorted.size() / 2;
        row.median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
        table.rows.push_back(std::move(row));
    }
    for (std::size_t k = 1; k < table.rows.size(); ++k)
        table.cauchy_gaps.push_back(std::abs(table.rows[k].median - table.rows[k - 1].median));
    table.monotone = true;
    if (table.reference) {
        for (std::size_t k = 1; k < table.rows.size(); ++k)
            if (!(std::abs(table.rows[k].median - *table.reference) < std::abs(table.rows[k - 1].median - *table.reference)))
                table.monotone = false;
    } else {
        for (std::size_t k = 1; k < table.cauchy_gaps.size(); ++k)
            if (!(table.cauchy_gaps[k] < table.cauchy_gaps[k - 1])) table.monotone = false;
    }
    return table;
}

// ---------------------------------------------------------------------------
// Checkpoints: "FDYN", version, N, m, time, seed, stream position, then the
// m·N² entries (row-major, real then imaginary), all little-endian.

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

template <class T>
void put_le(std::ostream& os, T value) {
    std::uint64_t bits;
    if constexpr (std::is_same_v<T, double>)
        bits = std::bit_cast<std::uint64_t>(value);
    else
        bits = static_cast<std::uint64_t>(value);
    char buf[sizeof(T)];
    for (std::size_t k = 0; k < sizeof(T); ++k) buf[k] = static_cast<char>((bits >> (8 * k)) & 0xFF);
    os.write(buf, sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw ValidationError("truncated checkpoint");
    std::uint64_t bits = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) bits |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
    if constexpr (std::is_same_v<T, double>)
        return std::bit_cast<double>(bits);
    else
        return static_cast<T>(bits);
}

}  // namespace

void write_checkpoint(std::ostream& os, const MatrixEnsemble& ens) {
    os.write("FDYN", 4);
    put_le<std::uint32_t>(os, kCheckpointVersion);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ens.size()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ens.letters()));
    put_le<double>(os, ens.time);
    put_le<std::uint64_t>(os, ens.rng.seed());
    put_le<std::uint64_t>(os, ens.rng.position());
    for (const auto& x : ens.x)
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                put_le<double>(os, x(r, c).real());
                put_le<double>(os, x(r, c).imag());
            }
    if (!os) throw ValidationError("failed to write checkpoint");
}

MatrixEnsemble read_checkpoint(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::string_view(magic, 4) != "FDYN") throw ValidationError("not a checkpoint file");
    if (const auto version = get_le<std::uint32_t>(is); version != kCheckpointVersion)
        throw ValidationError("unsupported checkpoint version " + std::to_string(version));
    const auto n = get_le<std::uint32_t>(is);
    const auto m = get_le<std::uint32_t>(is);
    if (n == 0 || m == 0) throw ValidationError("empty checkpoint");
    MatrixEnsemble ens = zero_ensemble(static_cast<int>(m), n, 0);
    ens.time = get_le<double>(is);
    const auto seed = get_le<std::uint64_t>(is);
    const auto position = get_le<std::uint64_t>(is);
    ens.rng = Philox(seed, position);
    for (auto& x : ens.x)
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                const double re = get_le<double>(is);
                const double im = get_le<double>(is);
                x(r, c) = cplx(re, im);
            }
    return ens;
}

void write_checkpoint(const std::string& path, const MatrixEnsemble& ens) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open checkpoint for writing: " + path);
    write_checkpoint(os, ens);
}

MatrixEnsemble read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open checkpoint: " + path);
    return read_checkpoint(is);
}

}  // namespace freedyson
