#include "freedyson/sdsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "freedyson/error.hpp"
#include "freedyson/parallel.hpp"

namespace freedyson {

// ---------------------------------------------------------------------------
// Necklaces

namespace {

// Start of the least rotation of seq (Booth).
std::size_t least_rotation(const std::vector<Letter>& seq) {
    const std::size_t n = seq.size();
    std::vector<long> fail(2 * n, -1);
    std::size_t k = 0;
    for (std::size_t j = 1; j < 2 * n; ++j) {
        const Letter& sj = seq[j % n];
        long i = fail[j - k - 1];
        while (i != -1 && !(sj == seq[(k + static_cast<std::size_t>(i) + 1) % n])) {
            if (sj < seq[(k + static_cast<std::size_t>(i) + 1) % n]) k = j - static_cast<std::size_t>(i) - 1;
            i = fail[static_cast<std::size_t>(i)];
        }
        if (i == -1 && !(sj == seq[(k + static_cast<std::size_t>(i) + 1) % n])) {
            if (sj < seq[(k + static_cast<std::size_t>(i) + 1) % n]) k = j;
            fail[j - k] = -1;
        } else {
            fail[j - k] = i + 1;
        }
    }
    return k;
}

std::vector<Letter> rotate_to(const std::vector<Letter>& seq, std::size_t start) {
    std::vector<Letter> out(seq.size());
    for (std::size_t k = 0; k < seq.size(); ++k) out[k] = seq[(start + k) % seq.size()];
    return out;
}

}  // namespace

Word necklace(const Word& w, Symmetry symmetry) {
    const std::size_t d = w.degree();
    if (d <= 1) return w;
    const auto& letters = w.letters();
    std::vector<Letter> best = rotate_to(letters, least_rotation(letters));
    if (symmetry == Symmetry::dihedral) {
        const std::vector<Letter> rev(letters.rbegin(), letters.rend());
        std::vector<Letter> other = rotate_to(rev, least_rotation(rev));
        if (other < best) best = std::move(other);
    }
    return Word(std::move(best));
}

std::vector<Word> necklaces(int letters, std::size_t degree, Symmetry symmetry) {
    if (degree == 0) return {Word{}};
    // Fredricksen–Kessler–Maiorana: prenecklaces in lexicographic order; the
    // ones whose period divides the length are the necklaces.
    std::vector<Word> out;
    std::vector<int> a(degree + 1, 1);
    auto emit = [&] {
        Word w = Word::of(std::span<const int>(a.data() + 1, degree));
        if (symmetry == Symmetry::dihedral && necklace(w.reversed(), Symmetry::cyclic) < w) return;
        out.push_back(std::move(w));
    };
    emit();
    while (true) {
        std::size_t i = degree;
        while (i > 0 && a[i] == letters) --i;
        if (i == 0) break;
        ++a[i];
        for (std::size_t j = i + 1; j <= degree; ++j) a[j] = a[j - i];
        if (degree % i == 0) emit();
    }
    return out;
}

namespace {

std::size_t words_up_to(int letters, std::size_t degree) {
    double total = 0.0;
    for (std::size_t d = 0; d <= degree; ++d) total += std::pow(static_cast<double>(letters), static_cast<double>(d));
    return total > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(total);
}

// All words of the given degree over `letters` colors, in word order.
std::vector<Word> all_words(int letters, std::size_t degree) {
    std::vector<Word> out;
    std::vector<int> digits(degree, 1);
    while (true) {
        out.push_back(Word::of(std::span<const int>(digits)));
        std::size_t k = degree;
        while (k > 0 && digits[k - 1] == letters) {
            digits[k - 1] = 1;
            --k;
        }
        if (k == 0) break;
        ++digits[k - 1];
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// MomentFunctional

MomentFunctional::MomentFunctional(int letters, std::size_t max_degree, Symmetry symmetry)
    : letters_(letters), max_degree_(max_degree), symmetry_(symmetry) {
    if (letters < 1) throw ValidationError("letter count must be at least 1");
    values_.emplace(Word{}, cplx{1.0, 0.0});
}

cplx MomentFunctional::operator()(const Word& w) const {
    if (w.degree() > max_degree_)
        throw ValidationError("degree overflow: word of degree " + std::to_string(w.degree()) +
                              " exceeds moment cap " + std::to_string(max_degree_));
    if (w.has_star()) throw ValidationError("moment functionals are defined on unstarred words");
    auto it = values_.find(necklace(w, symmetry_));
    return it == values_.end() ? cplx{} : it->second;
}

cplx MomentFunctional::operator()(const NCPoly& p) const {
    cplx sum{};
    for (const auto& [w, c] : p.terms()) sum += c * (*this)(w);
    return sum;
}

cplx MomentFunctional::pair(const TensorPoly& t) const {
    cplx sum{};
    for (const auto& [k, c] : t.terms()) sum += c * (*this)(k.first) * (*this)(k.second);
    return sum;
}

void MomentFunctional::set(const Word& w, cplx value) {
    if (w.degree() > max_degree_) throw ValidationError("degree overflow in MomentFunctional::set");
    if (w.max_index() > letters_) throw ValidationError("letter out of range in " + to_string(w));
    values_[necklace(w, symmetry_)] = value;
}

std::vector<std::pair<Word, cplx>> MomentFunctional::entries() const {
    std::vector<std::pair<Word, cplx>> out(values_.begin(), values_.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

Matrix MomentFunctional::moment_matrix(std::size_t half_degree) const {
    std::vector<Word> basis;
    for (std::size_t d = 0; d <= half_degree; ++d) {
        auto ws = all_words(letters_, d);
        basis.insert(basis.end(), ws.begin(), ws.end());
    }
    const auto n = static_cast<Eigen::Index>(basis.size());
    Matrix m(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            m(a, b) = (*this)(basis[static_cast<std::size_t>(a)].reversed() * basis[static_cast<std::size_t>(b)]);
    return m;
}

double MomentFunctional::min_moment_matrix_eigenvalue(std::size_t half_degree) const {
    Matrix m = moment_matrix(half_degree);
    Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double MomentFunctional::max_bound_ratio(double bound) const {
    double worst = 0.0;
    for (const auto& [w, v] : values_)
        worst = std::max(worst, std::abs(v) / std::pow(bound, static_cast<double>(w.degree())));
    return worst;
}

MomentFunctional MomentFunctional::truncated(std::size_t max_degree) const {
    MomentFunctional out(letters_, max_degree, symmetry_);
    for (const auto& [w, v] : values_)
        if (w.degree() <= max_degree) out.values_[w] = v;
    return out;
}

void MomentFunctional::write_csv(std::ostream& os) const {
    os << "word,degree,real,imag\n";
    os.precision(17);
    for (const auto& [w, v] : entries()) os << to_string(w) << ',' << w.degree() << ',' << v.real() << ',' << v.imag() << '\n';
}

cplx sd_residual(const MomentFunctional& tau, const Potential& v, const Word& p, int i) {
    if (i < 1 || i > v.letters()) throw ValidationError("letter out of range: " + std::to_string(i));
    const NCPoly pp(v.letters(), p);
    const NCPoly grad = cyclic_gradient(v.polynomial(), i);
    return tau.pair(nc_derivative(pp, i)) - tau(grad * pp);
}

double max_sd_residual(const MomentFunctional& tau, const Potential& v, std::size_t degree) {
    double worst = 0.0;
    std::vector<NCPoly> grads = v.gradient();
    for (std::size_t d = 0; d < degree; ++d) {
        for (const Word& p : all_words(v.letters(), d)) {
            const NCPoly pp(v.letters(), p);
            for (int i = 1; i <= v.letters(); ++i) {
                const cplx r = tau.pair(nc_derivative(pp, i)) - tau(grads[static_cast<std::size_t>(i - 1)] * pp);
                worst = std::max(worst, std::abs(r));
            }
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Series mode

namespace {

int total(const MultiIndex& k) { return std::accumulate(k.begin(), k.end(), 0); }

std::vector<MultiIndex> multi_indices_up_to(std::size_t n, int order) {
    std::vector<MultiIndex> out;
    MultiIndex k(n, 0);
    // Enumerate the box [0, order]^n and keep |k| ≤ order.
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
        if (pos == n) {
            out.push_back(k);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            k[pos] = v;
            rec(pos + 1, left - v);
        }
        k[pos] = 0;
    };
    rec(0, order);
    std::sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
        const int ta = total(a), tb = total(b);
        return ta != tb ? ta < tb : a < b;
    });
    return out;
}

std::size_t growth_step(std::span<const Word> templates) {
    std::size_t g = 0;
    for (const auto& q : templates) g = std::max(g, q.degree() > 2 ? q.degree() - 2 : std::size_t{0});
    return g;
}

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

std::string index_key(const MultiIndex& k) {
    std::string s;
    for (std::size_t j = 0; j < k.size(); ++j) s += (j ? "," : "") + std::to_string(k[j]);
    return s;
}

}  // namespace

std::size_t BetaSeries::stratum_degree(int s) const {
    return degree_ + static_cast<std::size_t>(order_ - s) * degree_step_;
}

std::size_t BetaSeries::position(const MultiIndex& k) const {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), k, [](const MultiIndex& a, const MultiIndex& b) {
        const int ta = total(a), tb = total(b);
        return ta != tb ? ta < tb : a < b;
    });
    if (it == indices_.end() || *it != k) throw ValidationError("multi-index outside the computed series");
    return static_cast<std::size_t>(it - indices_.begin());
}

const MomentFunctional& BetaSeries::coefficients(const MultiIndex& k) const { return coefficients_[position(k)]; }

cplx BetaSeries::coefficient(const MultiIndex& k, const Word& p) const {
    const auto& f = coefficients(k);
    if (p.degree() > f.max_degree())
        throw ValidationError("degree overflow: word degree " + std::to_string(p.degree()) +
                              " needs a degree cap of at least " + std::to_string(p.degree()));
    return f(p);
}

double BetaSeries::map_certificate(const MultiIndex& k, const Word& p) const {
    double scale = (total(k) % 2 == 0) ? 1.0 : -1.0;
    for (int kj : k) scale *= factorial(kj);
    return scale * coefficient(k, p).real();
}

SeriesValue BetaSeries::evaluate(std::span<const cplx> beta, const Word& p) const {
    if (beta.size() != templates_.size())
        throw ValidationError("expected " + std::to_string(templates_.size()) + " couplings, got " +
                              std::to_string(beta.size()));
    std::vector<double> per_order(static_cast<std::size_t>(order_) + 1, 0.0);
    cplx value{};
    for (const auto& k : indices_) {
        cplx mono{1.0, 0.0};
        for (std::size_t j = 0; j < k.size(); ++j) mono *= std::pow(beta[j], k[j]);
        const cplx term = coefficient(k, p) * mono;
        value += term;
        per_order[static_cast<std::size_t>(total(k))] += std::abs(term);
    }
    double rate = 0.0;
    for (int s = 1; s <= order_; ++s) rate = std::max(rate, std::pow(per_order[static_cast<std::size_t>(s)], 1.0 / s));
    const double tail = rate < 1.0 ? std::pow(rate, order_ + 1) / (1.0 - rate) : std::numeric_limits<double>::infinity();
    return {value, tail, rate};
}

double BetaSeries::growth_rate(const Word& p) const {
    double rate = 0.0;
    for (const auto& k : indices_) {
        const int s = total(k);
        if (s == 0) continue;
        rate = std::max(rate, std::pow(std::abs(coefficient(k, p)), 1.0 / s));
    }
    return rate;
}

std::string BetaSeries::to_json() const {
    nlohmann::ordered_json j;
    j["templates"] = nlohmann::json::array();
    for (const auto& q : templates_) j["templates"].push_back(to_string(q));
    j["letters"] = letters_;
    j["quadratic_weight"] = weight_;
    j["order"] = order_;
    j["degree"] = degree_;
    nlohmann::ordered_json coeffs = nlohmann::ordered_json::object();
    for (std::size_t a = 0; a < indices_.size(); ++a) {
        nlohmann::ordered_json entry = nlohmann::ordered_json::object();
        for (const auto& [w, v] : coefficients_[a].entries()) {
            if (w.degree() > degree_) continue;
            entry[to_string(w)] = {v.real(), v.imag()};
        }
        coeffs[index_key(indices_[a])] = std::move(entry);
    }
    j["coefficients"] = std::move(coeffs);
    return j.dump(2);
}

BetaSeries solve_series(std::span<const Word> templates, int letters, double quadratic_weight, int order,
                        std::size_t degree, const SeriesOptions& options) {
    if (!(quadratic_weight > 0.0)) throw ValidationError("quadratic weight must be positive");
    if (order < 0) throw ValidationError("order cap must be nonnegative");
    if (letters < 1) throw ValidationError("letter count must be at least 1");
    for (const auto& q : templates) {
        if (q.has_star()) throw ValidationError("series templates must be unstarred monomials");
        if (q.max_index() > letters) throw ValidationError("letter out of range in template " + to_string(q));
    }

    BetaSeries s;
    s.templates_.assign(templates.begin(), templates.end());
    s.letters_ = letters;
    s.weight_ = quadratic_weight;
    s.order_ = order;
    s.degree_ = degree;
    s.degree_step_ = growth_step(templates);
    s.indices_ = multi_indices_up_to(templates.size(), order);

    const std::size_t top = s.stratum_degree(0);
    if (words_up_to(letters, top) > options.max_words)
        throw InfeasibleError("series needs internal degree cap " + std::to_string(top) + " (" +
                              std::to_string(letters) + " letters), above the configured word budget");

    const std::size_t n = templates.size();
    // grad[i-1][j] = D_i q_j
    std::vector<std::vector<NCPoly>> grad(static_cast<std::size_t>(letters));
    for (int i = 1; i <= letters; ++i)
        for (const auto& q : templates) grad[static_cast<std::size_t>(i - 1)].push_back(cyclic_gradient(NCPoly(letters, q), i));

    std::vector<std::vector<Word>> reps(top + 1);
    for (std::size_t d = 1; d <= top; ++d) reps[d] = necklaces(letters, d, Symmetry::cyclic);

    s.coefficients_.reserve(s.indices_.size());
    const double inv_w = 1.0 / quadratic_weight;
    for (const auto& k : s.indices_) {
        const int st = total(k);
        const std::size_t cap = s.stratum_degree(st);
        s.coefficients_.emplace_back(letters, cap, Symmetry::cyclic);
        MomentFunctional& tk = s.coefficients_.back();
        if (st != 0) tk.set(Word{}, 0.0);

        // Splittings k = k' + (k − k').
        std::vector<std::pair<const MomentFunctional*, const MomentFunctional*>> splits;
        for (const auto& kp : s.indices_) {
            bool below = true;
            for (std::size_t j = 0; j < n && below; ++j) below = kp[j] <= k[j];
            if (!below) continue;
            MultiIndex rest(n);
            for (std::size_t j = 0; j < n; ++j) rest[j] = k[j] - kp[j];
            splits.emplace_back(&s.coefficients_[s.position(kp)], &s.coefficients_[s.position(rest)]);
        }
        std::vector<std::pair<std::size_t, const MomentFunctional*>> lowered;
        for (std::size_t j = 0; j < n; ++j) {
            if (k[j] == 0) continue;
            MultiIndex km = k;
            --km[j];
            lowered.emplace_back(j, &s.coefficients_[s.position(km)]);
        }

        for (std::size_t d = 1; d <= cap; ++d) {
            const auto& level = reps[d];
            std::vector<cplx> values(level.size());
            parallel_for(level.size(), [&](std::size_t r) {
                const Word& w = level[r];
                const int i = w[0].index;
                const Word p = w.slice(1, d);
                cplx sum{};
                for (std::size_t t = 0; t < p.degree(); ++t) {
                    if (p[t].index != i) continue;
                    const Word a = p.slice(0, t);
                    const Word b = p.slice(t + 1, p.degree());
                    for (const auto& [left, right] : splits) sum += (*left)(a) * (*right)(b);
                }
                for (const auto& [j, prev] : lowered)
                    for (const auto& [u, c] : grad[static_cast<std::size_t>(i - 1)][j].terms()) sum -= c * (*prev)(u * p);
                values[r] = sum * inv_w;
            });
            for (std::size_t r = 0; r < level.size(); ++r) tk.set(level[r], values[r]);
        }
    }
    return s;
}

SeriesValue evaluate_series(const BetaSeries& s, std::span<const cplx> beta, const Word& p) {
    return s.evaluate(beta, p);
}

// ---------------------------------------------------------------------------
// Numeric mode

namespace {

// The truncated system: one equation per stored representative, solved for
// τ(X_i P) with X_i the first letter of the representative.
struct TruncatedSystem {
    struct Product {
        double coeff;
        std::size_t a, b;
    };
    struct Linear {
        double coeff;
        std::size_t index;
    };

    std::vector<Word> reps;
    std::unordered_map<Word, std::size_t, WordHash> index;
    std::vector<std::vector<Product>> products;
    std::vector<std::vector<Linear>> linear;
    std::size_t degree = 0;

    std::size_t find(const Word& w) const {
        auto it = index.find(necklace(w, Symmetry::dihedral));
        return it == index.end() ? npos : it->second;
    }
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

TruncatedSystem build_system(const Potential& v, std::size_t degree) {
    TruncatedSystem sys;
    sys.degree = degree;
    const int m = v.letters();
    for (std::size_t d = 0; d <= degree; ++d) {
        auto level = d == 0 ? std::vector<Word>{Word{}} : necklaces(m, d, Symmetry::dihedral);
        for (auto& w : level) {
            sys.index.emplace(w, sys.reps.size());
            sys.reps.push_back(std::move(w));
        }
    }
    std::vector<std::vector<NCPoly>> grad(static_cast<std::size_t>(m));
    for (int i = 1; i <= m; ++i)
        for (const auto& c : v.couplings()) grad[static_cast<std::size_t>(i - 1)].push_back(cyclic_gradient(NCPoly(m, c.monomial), i));

    const double inv_w = 1.0 / v.quadratic_weight();
    sys.products.resize(sys.reps.size());
    sys.linear.resize(sys.reps.size());
    for (std::size_t r = 1; r < sys.reps.size(); ++r) {
        const Word& w = sys.reps[r];
        const int i = w[0].index;
        const Word p = w.slice(1, w.degree());
        for (std::size_t t = 0; t < p.degree(); ++t) {
            if (p[t].index != i) continue;
            sys.products[r].push_back({inv_w, sys.find(p.slice(0, t)), sys.find(p.slice(t + 1, p.degree()))});
        }
        std::map<std::size_t, double> lin;
        for (std::size_t j = 0; j < v.couplings().size(); ++j) {
            const double beta = v.couplings()[j].beta.real();
            for (const auto& [u, c] : grad[static_cast<std::size_t>(i - 1)][j].terms()) {
                const Word up = u * p;
                if (up.degree() > degree) continue;  // truncated: reads as 0
                lin[sys.find(up)] -= beta * c.real() * inv_w;
            }
        }
        for (const auto& [idx, c] : lin)
            if (c != 0.0) sys.linear[r].push_back({c, idx});
    }
    return sys;
}

std::string scientific(double x) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << x;
    return os.str();
}

struct IterationOutcome {
    long iterations;
};

IterationOutcome iterate(const TruncatedSystem& sys, std::vector<double>& tau, const FixedPointOptions& opt,
                         double bound, std::size_t reported_degree, long budget) {
    const std::size_t n = sys.reps.size();
    std::vector<double> scale(n), limit(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto d = static_cast<double>(sys.reps[r].degree());
        limit[r] = std::pow(bound, d);
        scale[r] = std::max(1.0, std::pow(bound, d - static_cast<double>(reported_degree)));
    }
    std::vector<double> next(n);
    for (long it = 1; it <= budget; ++it) {
        double worst = 0.0;
        next[0] = 1.0;
        for (std::size_t r = 1; r < n; ++r) {
            double rhs = 0.0;
            for (const auto& pr : sys.products[r]) rhs += pr.coeff * tau[pr.a] * tau[pr.b];
            for (const auto& li : sys.linear[r]) rhs += li.coeff * tau[li.index];
            worst = std::max(worst, std::abs(rhs - tau[r]) / scale[r]);
            next[r] = opt.damping * rhs + (1.0 - opt.damping) * tau[r];
            if (!std::isfinite(next[r]) || std::abs(next[r]) > limit[r])
                throw NumericError("fixed point diverged: |τ(" + to_string(sys.reps[r]) + ")| exceeded R^deg with R = " +
                                   std::to_string(bound) + " (couplings likely outside the convex regime)");
        }
        tau.swap(next);
        if (worst < opt.tol) return {it};
    }
    throw NumericError("fixed point did not converge within max_iter = " + std::to_string(opt.max_iter) + " iterations");
}

}  // namespace

FixedPointResult solve_fixed_point(const Potential& v, const FixedPointOptions& opt) {
    if (!v.self_adjoint_mode()) throw ValidationError("numeric fixed point requires a self-adjoint potential");
    if (!v.has_real_couplings()) throw ValidationError("numeric fixed point requires real couplings");
    if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw ValidationError("damping must lie in (0, 1]");
    if (!(opt.tol > 0.0)) throw ValidationError("tolerance must be positive");

    const std::size_t g = v.max_coupling_degree() - 2;
    const std::size_t reported = opt.degree + g;
    double bound = opt.bound;
    if (bound <= 0.0) {
        double sum = 0.0;
        for (const auto& c : v.couplings()) sum += std::abs(c.beta);
        bound = 2.0 / std::sqrt(v.quadratic_weight()) + sum * static_cast<double>(v.max_coupling_degree());
    }

    const std::size_t step = 2 * std::max<std::size_t>(g, 1);
    std::size_t level = reported + step;
    long used = 0;
    std::vector<double> tau;
    std::optional<TruncatedSystem> prev;
    std::vector<double> prev_tau;

    const int m = v.letters();
    auto finish = [&](const TruncatedSystem& sys, const std::vector<double>& values, double truncation_error) {
        FixedPointResult result{MomentFunctional(m, reported, Symmetry::dihedral)};
        result.iterations = used;
        result.internal_degree = level;
        result.bound = bound;
        result.truncation_error = truncation_error;
        for (std::size_t r = 0; r < sys.reps.size(); ++r)
            if (sys.reps[r].degree() <= reported) result.tau.set(sys.reps[r], values[r]);
        result.max_residual = max_sd_residual(result.tau, v, opt.degree);
        return result;
    };

    double diff = std::numeric_limits<double>::infinity();
    while (true) {
        if (words_up_to(m, level) / std::max<std::size_t>(level, 1) > opt.max_words) {
            if (!prev)
                throw InfeasibleError("fixed point needs internal degree " + std::to_string(level) +
                                      ", above the word budget max_words = " + std::to_string(opt.max_words));
            level -= step;
            auto result = finish(*prev, prev_tau, diff);
            if (!(result.max_residual < opt.tol))
                throw NumericError("word budget reached at internal degree " + std::to_string(level) +
                                   " with residual " + scientific(result.max_residual) + " above tol (truncation change " +
                                   scientific(diff) + "); loosen tol or raise max_words");
            return result;
        }
        TruncatedSystem sys = build_system(v, level);
        std::vector<double> start(sys.reps.size(), 0.0);
        start[0] = 1.0;
        if (prev) {
            for (std::size_t r = 0; r < prev->reps.size(); ++r) start[sys.find(prev->reps[r])] = prev_tau[r];
        }
        tau = std::move(start);
        auto outcome = iterate(sys, tau, opt, bound, reported, opt.max_iter - used);
        used += outcome.iterations;

        if (prev) {
            diff = 0.0;
            for (std::size_t r = 0; r < prev->reps.size(); ++r) {
                if (prev->reps[r].degree() > reported) continue;
                diff = std::max(diff, std::abs(prev_tau[r] - tau[sys.find(prev->reps[r])]));
            }
            if (diff < opt.tol) return finish(sys, tau, diff);
        }
        prev = std::move(sys);
        prev_tau = tau;
        level += step;
    }
}

}  // namespace freedyson
