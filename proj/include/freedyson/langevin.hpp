#pragma once

// Euler–Maruyama integration of the matrix Langevin diffusion
//
//     dX_i = dH_i − ½ D_iV(X) dt
//
// on m-tuples of N×N Hermitian matrices, where H is a Hermitian Brownian
// motion with E|H_kl(t)|² = t/N. Its invariant law is the Gibbs measure
// ∝ exp(−N Tr V(X)) dX.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "freedyson/ncpoly.hpp"

namespace freedyson {

/// Philox4x32-10 counter-based generator producing standard normals through
/// Box–Muller. The state is (seed, position): position counts consumed
/// counter blocks, each giving two normals.
class Philox {
public:
    explicit Philox(std::uint64_t seed = 0, std::uint64_t position = 0) noexcept : seed_(seed), position_(position) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t position() const noexcept { return position_; }

    std::array<std::uint32_t, 4> block(std::uint64_t counter) const noexcept;
    /// Fills `out` with independent N(0,1) deviates.
    void normals(double* out, std::size_t count);
    double normal();

private:
    std::uint64_t seed_;
    std::uint64_t position_;
};

struct MatrixEnsemble {
    std::vector<Matrix> x;
    double time = 0.0;
    Philox rng;

    std::size_t size() const { return x.empty() ? 0 : static_cast<std::size_t>(x.front().rows()); }
    int letters() const { return static_cast<int>(x.size()); }
    /// max_i ‖X_i‖ (spectral norm).
    double norm() const;
};

/// m zero matrices of size N.
MatrixEnsemble zero_ensemble(int letters, std::size_t n, std::uint64_t seed);

struct SimConfig {
    std::size_t n = 50;
    double dt = 1e-3;
    /// Negative values select 50/c and 10/c.
    double t_max = -1.0;
    double burn_in = -1.0;
    std::uint64_t seed = 1;
    /// Radius M of the ball used by the stability check (and by clipping);
    /// 0 selects 1.5·(2/√c + Σ|β_j|·max deg q_j).
    double norm_cap = 0.0;
    /// Clamp eigenvalues to [−M, M] after each step.
    bool clip = false;
    /// Steps between recorded samples.
    std::size_t stride = 10;

    double resolved_t_max(const Potential& v) const;
    double resolved_burn_in(const Potential& v) const;
    double resolved_norm_cap(const Potential& v) const;
};

/// Upper bound for the Lipschitz constant of X ↦ D(V − (c/2)X.X)(X) on
/// tuples with max_i ‖X_i‖ ≤ radius.
double lipschitz_bound(const Potential& v, double radius);

/// Throws ValidationError unless n ≥ 1, dt > 0, stride ≥ 1 and
/// dt·(c + L) < 2 with L = lipschitz_bound(v, M).
void validate(const SimConfig& cfg, const Potential& v);

/// m Hermitian increments: diagonal N(0, dt/N); off-diagonal real and
/// imaginary parts N(0, dt/2N) each.
std::vector<Matrix> brownian_increment(int letters, std::size_t n, double dt, Philox& rng);

/// Drift −½·D_iV(X) for each i.
std::vector<Matrix> drift(const Potential& v, const std::vector<Matrix>& x);

/// One step: X ← sym(X + ΔH − ½ DV(X) dt), optional clipping, time += dt.
/// Throws NumericError on non-finite entries. Returns the largest entrywise
/// anti-Hermitian part before symmetrization.
double step(MatrixEnsemble& ens, const Potential& v, const SimConfig& cfg);

/// Same as `step` with a given increment (shared-noise coupling).
double step_with(MatrixEnsemble& ens, const Potential& v, const SimConfig& cfg, const std::vector<Matrix>& increment);

cplx empirical_trace(const MatrixEnsemble& ens, const NCPoly& p);
cplx empirical_trace(const MatrixEnsemble& ens, const Word& w);

struct CouplingReport {
    std::vector<double> times;
    /// max_i ‖X_i − Y_i‖ for trajectories started at Z and at 0.
    std::vector<double> distances;
    /// Least-squares slope of log distance against t (NaN when a distance is 0).
    double slope = 0.0;
};

CouplingReport coupling_decay(const Potential& v, const SimConfig& cfg, const std::vector<Matrix>& z, double horizon);

struct ConvexityReport {
    /// Smallest eigenvalue of [DV(X) − DV(Y)].(X − Y) − c(X − Y).(X − Y) seen.
    double min_eigenvalue = 0.0;
    bool pass = true;
    std::size_t samples = 0;
};

/// Random Hermitian pairs with norms ≤ M. A failure refutes (c, M)-convexity;
/// a pass is evidence only.
ConvexityReport convexity_probe(const Potential& v, double c, double radius, std::size_t samples, std::size_t n,
                                std::uint64_t seed);

struct GapParams {
    /// Extreme eigenvalues ignored on each side.
    std::size_t k_edge = 3;
    /// Gap must exceed this multiple of the median bulk spacing ...
    double ratio_threshold = 8.0;
    /// ... and this fraction of the spectral range.
    double abs_fraction = 0.05;
};

struct SpectralReport {
    std::string observable;
    std::vector<double> eigenvalues;
    double gap_location = 0.0;
    double gap_width = 0.0;
    /// gap_width over the median bulk spacing.
    double relative_width = 0.0;
    bool connected = true;
};

/// P must equal its involution (letters self-adjoint).
SpectralReport spectral_report(const MatrixEnsemble& ens, const NCPoly& p, const GapParams& params = {});
/// Gap statistic of an ascending eigenvalue list.
SpectralReport gap_statistic(std::vector<double> eigenvalues, const GapParams& params = {});

/// sup_x |F_n(x) − F(x)| for ascending samples.
double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf);

struct ObservableStats {
    std::string name;
    double mean = 0.0;
    /// Batch-means standard error.
    double standard_error = 0.0;
    /// Least-squares drift per unit time of the batch means, and its t value.
    double drift = 0.0;
    double drift_t = 0.0;
};

struct SimulationResult {
    MatrixEnsemble final_state;
    std::vector<ObservableStats> observables;
    std::size_t samples = 0;
    double max_norm = 0.0;
    double max_hermiticity_defect = 0.0;
    /// Eigenvalues of X_1 pooled over recorded samples (when requested).
    std::vector<double> pooled_spectrum;
};

struct SimulationHooks {
    /// Called for each recorded sample after burn-in: (t, values).
    std::function<void(double, const std::vector<cplx>&)> on_sample;
    /// Pool eigenvalues of X_1 every this many samples (0 = never).
    std::size_t spectrum_every = 0;
};

/// Runs from `start` (or from zero matrices when absent) to t_max, recording
/// the observables every `stride` steps after burn-in.
SimulationResult simulate(const Potential& v, const SimConfig& cfg, const std::vector<NCPoly>& observables,
                          std::optional<MatrixEnsemble> start = std::nullopt, const SimulationHooks& hooks = {});

struct NormRow {
    std::size_t n = 0;
    /// Per seed: time-averaged ‖P(X)‖ over stationary samples.
    std::vector<double> per_seed;
    double median = 0.0;
};

struct NormTable {
    std::vector<NormRow> rows;
    /// Median error against `reference` decreases with N.
    bool monotone = false;
    /// |median(N_k) − median(N_{k−1})| for consecutive rows.
    std::vector<double> cauchy_gaps;
    std::optional<double> reference;
};

/// Stationary operator norm of P(X^N) for each N. The reference is the
/// analytic edge when V is an even one-letter quartic and P = X1.
NormTable norm_stabilization(const Potential& v, const NCPoly& p, SimConfig cfg, const std::vector<std::size_t>& sizes,
                             std::size_t seeds);

/// Edge a(β) for V = ½c x² + βx⁴ with P = x, else nothing.
std::optional<double> analytic_edge(const Potential& v, const NCPoly& p);

void write_checkpoint(std::ostream& os, const MatrixEnsemble& ens);
MatrixEnsemble read_checkpoint(std::istream& is);
void write_checkpoint(const std::string& path, const MatrixEnsemble& ens);
MatrixEnsemble read_checkpoint(const std::string& path);

}  // namespace freedyson
