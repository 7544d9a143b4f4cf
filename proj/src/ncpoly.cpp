#include "freedyson/ncpoly.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "freedyson/error.hpp"

namespace freedyson {

// ---------------------------------------------------------------------------
// Word

Word Word::of(std::initializer_list<int> indices) {
    return of(std::span<const int>(indices.begin(), indices.size()));
}

Word Word::of(std::span<const int> indices) {
    std::vector<Letter> letters;
    letters.reserve(indices.size());
    for (int i : indices) letters.push_back({i, false});
    return Word(std::move(letters));
}

Word Word::power(int index, int power) {
    return Word(std::vector<Letter>(static_cast<std::size_t>(power), Letter{index, false}));
}

Word Word::slice(std::size_t from, std::size_t to) const {
    return Word(std::vector<Letter>(letters_.begin() + static_cast<std::ptrdiff_t>(from),
                                    letters_.begin() + static_cast<std::ptrdiff_t>(to)));
}

Word Word::rotated(std::size_t shift) const {
    if (letters_.empty()) return *this;
    std::vector<Letter> out(letters_);
    std::rotate(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(shift % out.size()), out.end());
    return Word(std::move(out));
}

Word Word::reversed() const { return Word(std::vector<Letter>(letters_.rbegin(), letters_.rend())); }

Word Word::adjoint() const {
    std::vector<Letter> out(letters_.rbegin(), letters_.rend());
    for (auto& l : out) l.starred = !l.starred;
    return Word(std::move(out));
}

bool Word::has_star() const noexcept {
    return std::any_of(letters_.begin(), letters_.end(), [](const Letter& l) { return l.starred; });
}

int Word::max_index() const noexcept {
    int m = 0;
    for (const auto& l : letters_) m = std::max(m, l.index);
    return m;
}

std::size_t Word::count(int index) const noexcept {
    return static_cast<std::size_t>(std::count_if(letters_.begin(), letters_.end(), [&](const Letter& l) {
        return l.index == index && !l.starred;
    }));
}

Word operator*(const Word& a, const Word& b) {
    std::vector<Letter> out;
    out.reserve(a.degree() + b.degree());
    out.insert(out.end(), a.letters_.begin(), a.letters_.end());
    out.insert(out.end(), b.letters_.begin(), b.letters_.end());
    return Word(std::move(out));
}

std::strong_ordering operator<=>(const Word& a, const Word& b) {
    if (auto c = a.degree() <=> b.degree(); c != 0) return c;
    return std::lexicographical_compare_three_way(a.letters_.begin(), a.letters_.end(), b.letters_.begin(),
                                                  b.letters_.end());
}

std::size_t WordHash::operator()(const Word& w) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (const auto& l : w) {
        h ^= static_cast<std::size_t>(l.index * 2 + (l.starred ? 1 : 0));
        h *= 1099511628211ull;
    }
    return h ^ w.degree();
}

namespace {

std::string letter_text(const Letter& l) {
    std::string s = "X" + std::to_string(l.index);
    if (l.starred) s += '*';
    return s;
}

}  // namespace

std::string to_string(const Word& w) {
    if (w.empty()) return "1";
    std::string out;
    for (std::size_t k = 0; k < w.degree();) {
        std::size_t run = 1;
        while (k + run < w.degree() && w[k + run] == w[k]) ++run;
        if (!out.empty()) out += ' ';
        out += letter_text(w[k]);
        if (run > 1) out += "^" + std::to_string(run);
        k += run;
    }
    return out;
}

// ---------------------------------------------------------------------------
// NCPoly

NCPoly::NCPoly(int letters) : letters_(letters) {
    if (letters < 1) throw ValidationError("letter count must be at least 1");
}

NCPoly::NCPoly(int letters, const Word& w, cplx coeff) : NCPoly(letters) {
    if (w.max_index() > letters) throw ValidationError("letter out of range in " + to_string(w));
    add_term(w, coeff);
}

NCPoly NCPoly::constant(int letters, cplx c) { return NCPoly(letters, Word{}, c); }

NCPoly NCPoly::letter(int letters, int index, bool starred) {
    if (index < 1 || index > letters) throw ValidationError("letter out of range");
    return NCPoly(letters, Word({Letter{index, starred}}), 1.0);
}

cplx NCPoly::coefficient(const Word& w) const {
    auto it = terms_.find(w);
    return it == terms_.end() ? cplx{} : it->second;
}

std::size_t NCPoly::degree() const noexcept { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }

bool NCPoly::has_star() const noexcept {
    return std::any_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.has_star(); });
}

void NCPoly::add_term(const Word& w, cplx c) {
    if (c == cplx{}) return;
    auto [it, inserted] = terms_.try_emplace(w, c);
    if (!inserted) {
        it->second += c;
        if (it->second == cplx{}) terms_.erase(it);
    }
}

void NCPoly::check_same(const NCPoly& o) const {
    if (o.letters_ != letters_)
        throw ValidationError("mismatched ambient letter counts (" + std::to_string(letters_) + " vs " +
                              std::to_string(o.letters_) + ")");
}

NCPoly& NCPoly::operator+=(const NCPoly& o) {
    check_same(o);
    for (const auto& [w, c] : o.terms_) add_term(w, c);
    return *this;
}

NCPoly& NCPoly::operator-=(const NCPoly& o) {
    check_same(o);
    for (const auto& [w, c] : o.terms_) add_term(w, -c);
    return *this;
}

NCPoly& NCPoly::operator*=(cplx s) {
    if (s == cplx{}) {
        terms_.clear();
        return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
        it->second *= s;
        it = it->second == cplx{} ? terms_.erase(it) : std::next(it);
    }
    return *this;
}

NCPoly operator*(const NCPoly& a, const NCPoly& b) {
    a.check_same(b);
    NCPoly out(a.letters_);
    for (const auto& [u, cu] : a.terms_)
        for (const auto& [v, cv] : b.terms_) out.add_term(u * v, cu * cv);
    return out;
}

NCPoly NCPoly::pow(int n) const {
    if (n < 0) throw ValidationError("negative power");
    NCPoly out = constant(letters_, 1.0);
    for (int k = 0; k < n; ++k) out = out * *this;
    return out;
}

NCPoly NCPoly::with_letters(int letters) const {
    if (letters < letters_) {
        for (const auto& [w, c] : terms_)
            if (w.max_index() > letters) throw ValidationError("letter out of range in " + to_string(w));
    }
    NCPoly out(letters);
    out.terms_ = terms_;
    return out;
}

NCPoly mul(const NCPoly& p, const NCPoly& q) { return p * q; }

NCPoly involution(const NCPoly& p, bool self_adjoint_letters) {
    NCPoly out(p.letters());
    for (const auto& [w, c] : p.terms()) {
        if (self_adjoint_letters && w.has_star())
            throw ValidationError("starred letters are not allowed with self-adjoint variables");
        out.add_term(self_adjoint_letters ? w.reversed() : w.adjoint(), std::conj(c));
    }
    return out;
}

bool is_self_adjoint(const NCPoly& p, bool self_adjoint_letters) { return involution(p, self_adjoint_letters) == p; }

namespace {

void check_letter(const NCPoly& p, int i) {
    if (i < 1 || i > p.letters())
        throw ValidationError("letter out of range: " + std::to_string(i) + " not in [1, " +
                              std::to_string(p.letters()) + "]");
}

NCPoly cyclic_gradient_impl(const NCPoly& p, int i, bool starred) {
    check_letter(p, i);
    NCPoly out(p.letters());
    const Letter target{i, starred};
    for (const auto& [w, c] : p.terms())
        for (std::size_t k = 0; k < w.degree(); ++k)
            if (w[k] == target) out.add_term(w.slice(k + 1, w.degree()) * w.slice(0, k), c);
    return out;
}

TensorPoly nc_derivative_impl(const NCPoly& p, int i, bool starred) {
    check_letter(p, i);
    TensorPoly out(p.letters());
    const Letter target{i, starred};
    for (const auto& [w, c] : p.terms())
        for (std::size_t k = 0; k < w.degree(); ++k)
            if (w[k] == target) out.add_term(w.slice(0, k), w.slice(k + 1, w.degree()), c);
    return out;
}


}  // namespace

NCPoly cyclic_gradient(const NCPoly& p, int i) { return cyclic_gradient_impl(p, i, false); }
NCPoly starred_cyclic_gradient(const NCPoly& p, int i) { return cyclic_gradient_impl(p, i, true); }
TensorPoly nc_derivative(const NCPoly& p, int i) { return nc_derivative_impl(p, i, false); }
TensorPoly starred_nc_derivative(const NCPoly& p, int i) { return nc_derivative_impl(p, i, true); }

// ---------------------------------------------------------------------------
// TensorPoly

cplx TensorPoly::coefficient(const Word& left, const Word& right) const {
    auto it = terms_.find(Key{left, right});
    return it == terms_.end() ? cplx{} : it->second;
}

void TensorPoly::add_term(const Word& left, const Word& right, cplx c) {
    if (c == cplx{}) return;
    auto [it, inserted] = terms_.try_emplace(Key{left, right}, c);
    if (!inserted) {
        it->second += c;
        if (it->second == cplx{}) terms_.erase(it);
    }
}

TensorPoly& TensorPoly::operator+=(const TensorPoly& o) {
    if (o.letters_ != letters_) throw ValidationError("mismatched ambient letter counts");
    for (const auto& [k, c] : o.terms_) add_term(k.first, k.second, c);
    return *this;
}

TensorPoly& TensorPoly::operator*=(cplx s) {
    TensorPoly out(letters_);
    for (const auto& [k, c] : terms_) out.add_term(k.first, k.second, c * s);
    terms_ = std::move(out.terms_);
    return *this;
}

TensorPoly operator*(const NCPoly& p, const TensorPoly& t) {
    if (p.letters() != t.letters_) throw ValidationError("mismatched ambient letter counts");
    TensorPoly out(t.letters_);
    for (const auto& [u, cu] : p.terms())
        for (const auto& [k, c] : t.terms_) out.add_term(u * k.first, k.second, cu * c);
    return out;
}

TensorPoly operator*(const TensorPoly& t, const NCPoly& q) {
    if (q.letters() != t.letters_) throw ValidationError("mismatched ambient letter counts");
    TensorPoly out(t.letters_);
    for (const auto& [k, c] : t.terms_)
        for (const auto& [v, cv] : q.terms()) out.add_term(k.first, k.second * v, c * cv);
    return out;
}

cplx TensorPoly::pair(const std::function<cplx(const Word&)>& left,
                      const std::function<cplx(const Word&)>& right) const {
    cplx sum{};
    for (const auto& [k, c] : terms_) sum += c * left(k.first) * right(k.second);
    return sum;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

Eigen::Index check_tuple(std::span<const Matrix> tuple, int letters) {
    if (tuple.empty()) throw ValidationError("empty matrix tuple");
    if (static_cast<int>(tuple.size()) < letters)
        throw ValidationError("matrix tuple has " + std::to_string(tuple.size()) + " entries, need " +
                              std::to_string(letters));
    const Eigen::Index n = tuple[0].rows();
    for (const auto& a : tuple)
        if (a.rows() != n || a.cols() != n) throw ValidationError("dimension mismatch in matrix tuple");
    return n;
}

class LetterTable {
public:
    explicit LetterTable(std::span<const Matrix> tuple) : tuple_(tuple), adjoints_(tuple.size()) {}

    const Matrix& get(const Letter& l) {
        if (l.index < 1 || l.index > static_cast<int>(tuple_.size()))
            throw ValidationError("letter out of range during evaluation");
        const auto k = static_cast<std::size_t>(l.index - 1);
        if (!l.starred) return tuple_[k];
        if (adjoints_[k].size() == 0) adjoints_[k] = tuple_[k].adjoint();
        return adjoints_[k];
    }

private:
    std::span<const Matrix> tuple_;
    std::vector<Matrix> adjoints_;
};

bool lex_less(const Word* a, const Word* b) {
    return std::lexicographical_compare(a->begin(), a->end(), b->begin(), b->end());
}

std::size_t common_prefix(const Word& a, const Word& b) {
    std::size_t k = 0;
    while (k < a.degree() && k < b.degree() && a[k] == b[k]) ++k;
    return k;
}

// Walks the terms in lexicographic order, keeping products of shared
// prefixes. `visit(coeff, word, prefix_stack, letters)` sees prefix_stack
// holding products of the first `depth` letters, depth given by `depth_of`.
template <class DepthOf, class Visit>
void walk_prefixes(const NCPoly& p, std::span<const Matrix> tuple, DepthOf depth_of, Visit visit) {
    std::vector<const Word*> words;
    std::vector<cplx> coeffs;
    for (const auto& [w, c] : p.terms()) words.push_back(&w);
    std::sort(words.begin(), words.end(), lex_less);
    LetterTable table(tuple);
    std::vector<Matrix> stack;
    std::size_t max_depth = 0;
    for (const Word* w : words) max_depth = std::max(max_depth, depth_of(*w));
    stack.reserve(max_depth);
    const Word* prev = nullptr;
    for (const Word* w : words) {
        const std::size_t depth = depth_of(*w);
        std::size_t keep = prev ? std::min(common_prefix(*prev, *w), stack.size()) : 0;
        keep = std::min(keep, depth);
        stack.resize(keep);
        for (std::size_t k = keep; k < depth; ++k) {
            if (k == 0)
                stack.push_back(table.get((*w)[0]));
            else {
                const Matrix& rhs = table.get((*w)[k]);
                Matrix next(stack.back().rows(), rhs.cols());
                next.noalias() = stack.back() * rhs;
                stack.push_back(std::move(next));
            }
        }
        visit(p.coefficient(*w), *w, stack, table);
        prev = w;
    }
}

}  // namespace

Matrix evaluate(const Word& w, std::span<const Matrix> tuple) {
    const auto n = check_tuple(tuple, w.max_index());
    LetterTable table(tuple);
    if (w.empty()) return Matrix::Identity(n, n);
    Matrix out = table.get(w[0]);
    for (std::size_t k = 1; k < w.degree(); ++k) out = out * table.get(w[k]);
    return out;
}

Matrix evaluate(const NCPoly& p, std::span<const Matrix> tuple) {
    const auto n = check_tuple(tuple, p.letters());
    Matrix out = Matrix::Zero(n, n);
    walk_prefixes(
        p, tuple, [](const Word& w) { return w.degree(); },
        [&](cplx c, const Word& w, const std::vector<Matrix>& stack, LetterTable&) {
            if (w.empty())
                out.diagonal().array() += c;
            else
                out += c * stack.back();
        });
    return out;
}

namespace {

cplx trace_of_product(const Matrix& a, const Matrix& b) { return a.transpose().cwiseProduct(b).sum(); }

}  // namespace

cplx normalized_trace(const NCPoly& p, std::span<const Matrix> tuple) {
    const auto n = check_tuple(tuple, p.letters());
    cplx sum{};
    walk_prefixes(
        p, tuple, [](const Word& w) { return w.degree() > 0 ? w.degree() - 1 : 0; },
        [&](cplx c, const Word& w, const std::vector<Matrix>& stack, LetterTable& table) {
            if (w.empty())
                sum += c * static_cast<double>(n);
            else if (w.degree() == 1)
                sum += c * table.get(w[0]).trace();
            else
                sum += c * trace_of_product(stack.back(), table.get(w[w.degree() - 1]));
        });
    return sum / static_cast<double>(n);
}

cplx normalized_trace(const Word& w, std::span<const Matrix> tuple) {
    return normalized_trace(NCPoly(std::max(1, w.max_index()), w), tuple);
}

Matrix tensor_sharp(const TensorPoly& t, std::span<const Matrix> tuple, const Matrix& b) {
    const auto n = check_tuple(tuple, t.letters());
    if (b.rows() != n || b.cols() != n) throw ValidationError("dimension mismatch in tensor action");
    Matrix out = Matrix::Zero(n, n);
    for (const auto& [k, c] : t.terms()) out += c * (evaluate(k.first, tuple) * b * evaluate(k.second, tuple));
    return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    NCPoly parse() {
        NCPoly p = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return p;
    }

    int max_index() const { return max_index_; }

    // Polynomials are built over a provisional ambient count and widened at
    // the end.
    static constexpr int kWide = 255;

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool at_factor_start(std::size_t k) const {
        if (k >= s_.size()) return false;
        const char c = s_[k];
        return c == 'X' || c == 'x' || c == '(' || c == '.' || c == 'i' || std::isdigit(static_cast<unsigned char>(c));
    }

    NCPoly expr() {
        skip_ws();
        NCPoly out(kWide);
        bool first = true;
        while (true) {
            skip_ws();
            double sign = 1.0;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
                sign = s_[pos_] == '-' ? -1.0 : 1.0;
                ++pos_;
            } else if (!first) {
                break;
            }
            NCPoly t = term();
            out += sign * t;
            first = false;
            skip_ws();
            if (pos_ >= s_.size() || (s_[pos_] != '+' && s_[pos_] != '-')) break;
        }
        return out;
    }

    NCPoly term() {
        NCPoly out = factor();
        while (true) {
            skip_ws();
            if (pos_ < s_.size() && s_[pos_] == '*') {
                ++pos_;
                skip_ws();
                out = out * factor();
            } else if (at_factor_start(pos_)) {
                out = out * factor();
            } else {
                break;
            }
        }
        return out;
    }

    NCPoly factor() {
        NCPoly base = primary();
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '^') {
            ++pos_;
            skip_ws();
            base = base.pow(integer());
        }
        return base;
    }

    int integer() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("expected integer");
        int v = 0;
        std::from_chars(s_.data() + start, s_.data() + pos_, v);
        return v;
    }

    NCPoly primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NCPoly inner = expr();
            skip_ws();
            if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
            ++pos_;
            return inner;
        }
        if (c == 'X' || c == 'x') return letter();
        if (c == 'i') {
            ++pos_;
            return NCPoly::constant(kWide, cplx{0.0, 1.0});
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    NCPoly number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                digits();
            else
                pos_ = save;
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (ec != std::errc{} || ptr != s_.data() + pos_) {
            pos_ = start;
            fail("malformed number");
        }
        if (pos_ < s_.size() && s_[pos_] == 'i') {
            ++pos_;
            return NCPoly::constant(kWide, cplx{0.0, v});
        }
        return NCPoly::constant(kWide, v);
    }

    NCPoly letter() {
        const bool lower = s_[pos_] == 'x';
        ++pos_;
        int index = 1;
        int power = 1;
        const std::size_t digits_at = pos_;
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            const int v = integer();
            if (lower)
                power = v;
            else
                index = v;
        } else if (!lower) {
            pos_ = digits_at;
            fail("expected letter index after 'X'");
        }
        if (index < 1 || index >= kWide) {
            pos_ = digits_at;
            fail("letter index out of range");
        }
        bool starred = false;
        if (pos_ < s_.size() && s_[pos_] == '*' && !at_factor_start(pos_ + 1)) {
            starred = true;
            ++pos_;
        }
        max_index_ = std::max(max_index_, index);
        return NCPoly(kWide, Word(std::vector<Letter>(static_cast<std::size_t>(power), Letter{index, starred})));
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int max_index_ = 0;
};

}  // namespace

NCPoly parse_poly(std::string_view text, int letters) {
    Parser parser(text);
    NCPoly p = parser.parse();
    const int seen = std::max(1, parser.max_index());
    if (letters > 0 && seen > letters)
        throw ValidationError("letter out of range: X" + std::to_string(seen) + " with " + std::to_string(letters) +
                              " letters");
    return p.with_letters(letters > 0 ? letters : seen);
}

Word parse_word(std::string_view text, int letters) {
    NCPoly p = parse_poly(text, letters);
    if (p.terms().size() != 1 || p.terms().begin()->second != cplx{1.0, 0.0})
        throw ValidationError("expected a single monomial, got '" + std::string(text) + "'");
    return p.terms().begin()->first;
}

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string real_text(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// Returns (negative, magnitude text) so the caller can render " - ".
std::pair<bool, std::string> coefficient_text(cplx c, bool unit_word) {
    if (c.imag() == 0.0) {
        const bool neg = std::signbit(c.real());
        const double mag = std::abs(c.real());
        if (mag == 1.0 && !unit_word) return {neg, ""};
        return {neg, real_text(mag)};
    }
    std::string s = "(" + real_text(c.real());
    s += std::signbit(c.imag()) ? "-" : "+";
    s += real_text(std::abs(c.imag())) + "i)";
    return {false, s};
}

std::string term_text(cplx c, const Word& w, bool first) {
    auto [neg, coeff] = coefficient_text(c, w.empty());
    std::string out;
    if (first)
        out = neg ? "-" : "";
    else
        out = neg ? " - " : " + ";
    out += coeff;
    if (!w.empty()) {
        if (!coeff.empty()) out += ' ';
        out += to_string(w);
    }
    return out;
}

}  // namespace

std::string to_string(const NCPoly& p) {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [w, c] : p.terms()) {
        out += term_text(c, w, first);
        first = false;
    }
    return out;
}

std::string to_string(const TensorPoly& t) {
    if (t.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [k, c] : t.terms()) {
        auto [neg, coeff] = coefficient_text(c, false);
        out += first ? (neg ? "-" : "") : (neg ? " - " : " + ");
        if (!coeff.empty()) out += coeff + " ";
        out += to_string(k.first) + " ⊗ " + to_string(k.second);
        first = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Potential

namespace {

// Words up to rotation; the trace cannot tell rotations apart.
NCPoly cyclic_classes(const NCPoly& p) {
    NCPoly out(p.letters());
    for (const auto& [w, c] : p.terms()) {
        Word best = w;
        for (std::size_t r = 1; r < w.degree(); ++r) best = std::min(best, w.rotated(r));
        out.add_term(best, c);
    }
    return out;
}

bool cyclically_self_adjoint(const NCPoly& p) {
    NCPoly diff = cyclic_classes(p);
    diff -= cyclic_classes(involution(p, true));
    double scale = 0.0;
    for (const auto& [w, c] : p.terms()) scale = std::max(scale, std::abs(c));
    for (const auto& [w, c] : diff.terms())
        if (std::abs(c) > 1e-14 * scale) return false;
    return true;
}

}  // namespace

Potential::Potential(int letters, double quadratic_weight, std::vector<Coupling> couplings, bool self_adjoint_mode)
    : letters_(letters), weight_(quadratic_weight), couplings_(std::move(couplings)), self_adjoint_(self_adjoint_mode) {
    if (letters < 1) throw ValidationError("letter count must be at least 1");
    if (!(quadratic_weight > 0.0) || !std::isfinite(quadratic_weight))
        throw ValidationError("quadratic weight must be positive (c > 0 required)");
    for (const auto& c : couplings_) {
        if (c.monomial.max_index() > letters) throw ValidationError("letter out of range in " + to_string(c.monomial));
        if (self_adjoint_ && c.monomial.has_star())
            throw ValidationError("starred letters are not allowed in self-adjoint mode");
    }
    if (self_adjoint_ && !cyclically_self_adjoint(polynomial()))
        throw ValidationError("potential is not self-adjoint: " + to_string(polynomial()));
}

Potential Potential::from_polynomial(const NCPoly& v, bool self_adjoint_mode) {
    const int m = v.letters();
    double min_sq = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= m; ++i) {
        const cplx c = v.coefficient(Word::power(i, 2));
        min_sq = std::min(min_sq, c.imag() == 0.0 ? c.real() : 0.0);
    }
    if (!(min_sq > 0.0)) throw ValidationError("potential needs a positive quadratic part (1/2)·w·Σ Xi² with w > 0");
    NCPoly rest = v;
    for (int i = 1; i <= m; ++i) rest.add_term(Word::power(i, 2), -min_sq);
    std::vector<Coupling> couplings;
    for (const auto& [w, c] : rest.terms()) couplings.push_back({c, w});
    return Potential(m, 2.0 * min_sq, std::move(couplings), self_adjoint_mode);
}

Potential Potential::parse(std::string_view text, int letters, bool self_adjoint_mode) {
    return from_polynomial(parse_poly(text, letters), self_adjoint_mode);
}

bool Potential::has_real_couplings() const noexcept {
    return std::all_of(couplings_.begin(), couplings_.end(), [](const Coupling& c) { return c.beta.imag() == 0.0; });
}

NCPoly Potential::polynomial() const {
    NCPoly v(letters_);
    for (int i = 1; i <= letters_; ++i) v.add_term(Word::power(i, 2), 0.5 * weight_);
    for (const auto& c : couplings_) v.add_term(c.monomial, c.beta);
    return v;
}

std::vector<NCPoly> Potential::gradient() const {
    const NCPoly v = polynomial();
    std::vector<NCPoly> out;
    for (int i = 1; i <= letters_; ++i) out.push_back(cyclic_gradient(v, i));
    return out;
}

std::size_t Potential::max_coupling_degree() const noexcept {
    std::size_t d = 2;
    for (const auto& c : couplings_) d = std::max(d, c.monomial.degree());
    return d;
}

Potential Potential::with_coupling_scale(double t) const {
    std::vector<Coupling> scaled;
    for (const auto& c : couplings_)
        if (t != 0.0) scaled.push_back({c.beta * t, c.monomial});
    return Potential(letters_, weight_, std::move(scaled), self_adjoint_);
}

}  // namespace freedyson
