#pragma once

// Tracial states solving the Schwinger–Dyson relation
//
//     τ⊗τ(∂_i P) = τ(D_i V · P)      for every word P and letter i,
//
// either as a power series in the couplings β_j of V = (w/2)ΣXi² + Σβ_j q_j
// (coefficients are signed planar-map counts when w = 1) or numerically for
// fixed real β by a damped fixed-point iteration.

#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "freedyson/ncpoly.hpp"

namespace freedyson {

/// How words are identified when stored: up to rotation, or up to rotation
/// and reversal (valid for real solutions of self-adjoint problems).
enum class Symmetry { cyclic, dihedral };

/// Canonical representative of the class of `w`.
Word necklace(const Word& w, Symmetry symmetry);

/// Canonical representatives of all unstarred words of exactly `degree`
/// letters over `letters` colors, in word order.
std::vector<Word> necklaces(int letters, std::size_t degree, Symmetry symmetry);

class MomentFunctional {
public:
    MomentFunctional(int letters, std::size_t max_degree, Symmetry symmetry = Symmetry::cyclic);

    int letters() const noexcept { return letters_; }
    std::size_t max_degree() const noexcept { return max_degree_; }
    Symmetry symmetry() const noexcept { return symmetry_; }

    /// τ(w). Words never set read as 0; words above max_degree throw.
    cplx operator()(const Word& w) const;
    cplx operator()(const NCPoly& p) const;
    /// (τ⊗τ)(T).
    cplx pair(const TensorPoly& t) const;

    void set(const Word& w, cplx value);
    std::size_t size() const noexcept { return values_.size(); }
    /// Stored representatives in word order.
    std::vector<std::pair<Word, cplx>> entries() const;

    /// [τ(u* v)] over all words u, v with degree ≤ half_degree.
    Matrix moment_matrix(std::size_t half_degree) const;
    double min_moment_matrix_eigenvalue(std::size_t half_degree) const;
    /// Largest |τ(w)| / R^deg(w) over stored words.
    double max_bound_ratio(double bound) const;
    /// Copy restricted to degree ≤ max_degree.
    MomentFunctional truncated(std::size_t max_degree) const;

    /// CSV rows "word,degree,real,imag" (header included).
    void write_csv(std::ostream& os) const;

private:
    int letters_;
    std::size_t max_degree_;
    Symmetry symmetry_;
    std::unordered_map<Word, cplx, WordHash> values_;
};

/// τ⊗τ(∂_i P) − τ(D_i V · P).
cplx sd_residual(const MomentFunctional& tau, const Potential& v, const Word& p, int i);
/// Largest |sd_residual| over all letters i and all words P with deg P < degree.
double max_sd_residual(const MomentFunctional& tau, const Potential& v, std::size_t degree);

// ---------------------------------------------------------------------------
// Series mode

using MultiIndex = std::vector<int>;

struct SeriesValue {
    cplx value;
    /// Geometric tail bound ρ^{K+1}/(1−ρ) from the fitted per-order rate ρ;
    /// infinite when ρ ≥ 1.
    double tail_estimate;
    double rate;
};

struct SeriesOptions {
    /// Refuse problems whose internal word set exceeds this many words.
    std::size_t max_words = 4'000'000;
};

class BetaSeries {
public:
    const std::vector<Word>& templates() const noexcept { return templates_; }
    int letters() const noexcept { return letters_; }
    double quadratic_weight() const noexcept { return weight_; }
    int order() const noexcept { return order_; }
    std::size_t degree() const noexcept { return degree_; }
    /// Internal degree cap used for stratum |k| = s.
    std::size_t stratum_degree(int s) const;

    /// All k with |k| ≤ order, sorted by |k| then lexicographically.
    const std::vector<MultiIndex>& multi_indices() const noexcept { return indices_; }
    const MomentFunctional& coefficients(const MultiIndex& k) const;
    /// Coefficient of ∏ β_j^{k_j} in τ(P).
    cplx coefficient(const MultiIndex& k, const Word& p) const;
    /// (−1)^{|k|} ∏ k_j! · Re coefficient(k, P); a planar-map count when w = 1.
    double map_certificate(const MultiIndex& k, const Word& p) const;

    SeriesValue evaluate(std::span<const cplx> beta, const Word& p) const;
    /// sup over k ≠ 0 of |coefficient(k, P)|^{1/|k|}.
    double growth_rate(const Word& p) const;

    /// {"templates", "quadratic_weight", "order", "degree",
    ///  "coefficients": {"k1,k2,...": {"word": [re, im], ...}}}
    std::string to_json() const;

private:
    friend BetaSeries solve_series(std::span<const Word>, int, double, int, std::size_t, const SeriesOptions&);

    std::size_t position(const MultiIndex& k) const;

    std::vector<Word> templates_;
    int letters_ = 1;
    double weight_ = 1.0;
    int order_ = 0;
    std::size_t degree_ = 0;
    std::size_t degree_step_ = 0;
    std::vector<MultiIndex> indices_;
    std::vector<MomentFunctional> coefficients_;
};

/// Order-by-order solution in the couplings of V = (w/2)ΣXi² + Σβ_j q_j for
/// words up to `degree` and total order up to `order`.
BetaSeries solve_series(std::span<const Word> templates, int letters, double quadratic_weight, int order,
                        std::size_t degree, const SeriesOptions& options = {});

SeriesValue evaluate_series(const BetaSeries& s, std::span<const cplx> beta, const Word& p);

// ---------------------------------------------------------------------------
// Numeric mode

struct FixedPointOptions {
    /// Residual certificate covers words P with deg P < degree.
    std::size_t degree = 8;
    /// Moment bound R; 0 selects 2/√w + Σ|β_j|·max deg q_j.
    double bound = 0.0;
    double damping = 0.5;
    double tol = 1e-12;
    long max_iter = 100'000;
    /// Cap on the truncated word set used internally. When the next
    /// truncation level would exceed it, the deepest solved level is returned
    /// with its truncation_error if its residual still meets tol.
    std::size_t max_words = 400'000;
};

struct FixedPointResult {
    /// Moments up to degree + max(deg q_j) − 2.
    MomentFunctional tau;
    long iterations = 0;
    double max_residual = 0.0;
    /// Truncation degree of the final internal system.
    std::size_t internal_degree = 0;
    /// Largest change of a reported moment between the last two truncation
    /// levels; below tol unless the word budget stopped the refinement.
    double truncation_error = 0.0;
    double bound = 0.0;
};

FixedPointResult solve_fixed_point(const Potential& v, const FixedPointOptions& options = {});

}  // namespace freedyson
