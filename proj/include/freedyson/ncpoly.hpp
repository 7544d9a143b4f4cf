#pragma once

// Non-commutative *-polynomials in m letters X1..Xm (and adjoints Xi*).
//
// Words are ordered degree-first, then lexicographically on (index, starred),
// which gives every container in this module a deterministic iteration order.

#include <complex>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace freedyson {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

struct Letter {
    int index = 1;  // 1-based
    bool starred = false;

    friend constexpr auto operator<=>(const Letter&, const Letter&) = default;
};

class Word {
public:
    Word() = default;
    explicit Word(std::vector<Letter> letters) : letters_(std::move(letters)) {}
    /// Unstarred word from 1-based letter indices, e.g. Word::of({1, 2, 1, 2}).
    static Word of(std::initializer_list<int> indices);
    static Word of(std::span<const int> indices);
    /// x^power in letter `index`.
    static Word power(int index, int power);

    std::size_t degree() const noexcept { return letters_.size(); }
    bool empty() const noexcept { return letters_.empty(); }
    const Letter& operator[](std::size_t k) const { return letters_[k]; }
    const std::vector<Letter>& letters() const noexcept { return letters_; }
    auto begin() const noexcept { return letters_.begin(); }
    auto end() const noexcept { return letters_.end(); }

    Word slice(std::size_t from, std::size_t to) const;
    Word rotated(std::size_t shift) const;
    Word reversed() const;
    /// Reversed with every star flag flipped.
    Word adjoint() const;
    bool has_star() const noexcept;
    int max_index() const noexcept;
    /// Number of (unstarred) occurrences of letter `index`.
    std::size_t count(int index) const noexcept;

    friend Word operator*(const Word& a, const Word& b);
    friend bool operator==(const Word&, const Word&) = default;
    friend std::strong_ordering operator<=>(const Word& a, const Word& b);

private:
    std::vector<Letter> letters_;
};

struct WordHash {
    std::size_t operator()(const Word& w) const noexcept;
};

/// Text form used by the printer: "X1 X2* X1", "1" for the unit word.
std::string to_string(const Word& w);

class TensorPoly;

class NCPoly {
public:
    using Terms = std::map<Word, cplx>;

    explicit NCPoly(int letters = 1);
    NCPoly(int letters, const Word& w, cplx coeff = 1.0);
    static NCPoly constant(int letters, cplx c);
    static NCPoly letter(int letters, int index, bool starred = false);

    int letters() const noexcept { return letters_; }
    const Terms& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    cplx coefficient(const Word& w) const;
    std::size_t degree() const noexcept;
    bool has_star() const noexcept;

    /// Adds c·w; removes the entry when the sum is exactly zero.
    void add_term(const Word& w, cplx c);

    NCPoly& operator+=(const NCPoly& o);
    NCPoly& operator-=(const NCPoly& o);
    NCPoly& operator*=(cplx s);
    friend NCPoly operator+(NCPoly a, const NCPoly& b) { return a += b; }
    friend NCPoly operator-(NCPoly a, const NCPoly& b) { return a -= b; }
    friend NCPoly operator-(NCPoly a) { return a *= -1.0; }
    friend NCPoly operator*(cplx s, NCPoly a) { return a *= s; }
    friend NCPoly operator*(const NCPoly& a, const NCPoly& b);
    friend bool operator==(const NCPoly&, const NCPoly&) = default;

    NCPoly pow(int n) const;
    /// Same terms viewed in a larger ambient letter count.
    NCPoly with_letters(int letters) const;

private:
    void check_same(const NCPoly& o) const;

    int letters_;
    Terms terms_;
};

NCPoly mul(const NCPoly& p, const NCPoly& q);
/// Reverses words, flips stars, conjugates coefficients. With
/// `self_adjoint_letters` the letters are their own adjoints (X_i* = X_i), so
/// words are only reversed; starred input is then rejected.
NCPoly involution(const NCPoly& p, bool self_adjoint_letters = false);
bool is_self_adjoint(const NCPoly& p, bool self_adjoint_letters = false);

/// D_i p: each unstarred occurrence p = P1 Xi P2 contributes P2 P1.
NCPoly cyclic_gradient(const NCPoly& p, int i);
/// D_{i,*} p: the same on starred occurrences of letter i.
NCPoly starred_cyclic_gradient(const NCPoly& p, int i);

/// Finite sums of P ⊗ Q.
class TensorPoly {
public:
    using Key = std::pair<Word, Word>;
    using Terms = std::map<Key, cplx>;

    explicit TensorPoly(int letters = 1) : letters_(letters) {}

    int letters() const noexcept { return letters_; }
    const Terms& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    cplx coefficient(const Word& left, const Word& right) const;
    void add_term(const Word& left, const Word& right, cplx c);

    TensorPoly& operator+=(const TensorPoly& o);
    TensorPoly& operator*=(cplx s);
    friend TensorPoly operator+(TensorPoly a, const TensorPoly& b) { return a += b; }
    friend bool operator==(const TensorPoly&, const TensorPoly&) = default;

    /// Bimodule actions: (p ⊗ 1)·T and T·(1 ⊗ q).
    friend TensorPoly operator*(const NCPoly& p, const TensorPoly& t);
    friend TensorPoly operator*(const TensorPoly& t, const NCPoly& q);

    /// Σ c · f(P) · g(Q) for a pair of linear functionals on words.
    cplx pair(const std::function<cplx(const Word&)>& left,
              const std::function<cplx(const Word&)>& right) const;

private:
    int letters_;
    Terms terms_;
};

/// ∂_i p: each unstarred occurrence p = P1 Xi P2 contributes P1 ⊗ P2.
TensorPoly nc_derivative(const NCPoly& p, int i);
/// ∂_{i,*} p on starred occurrences of letter i.
TensorPoly starred_nc_derivative(const NCPoly& p, int i);

// ---------------------------------------------------------------------------
// Evaluation on matrix tuples. Starred letters evaluate to adjoints.

Matrix evaluate(const Word& w, std::span<const Matrix> tuple);
Matrix evaluate(const NCPoly& p, std::span<const Matrix> tuple);
/// (1/N) Tr p(tuple); avoids forming the last product of each word.
cplx normalized_trace(const NCPoly& p, std::span<const Matrix> tuple);
cplx normalized_trace(const Word& w, std::span<const Matrix> tuple);
/// T ♯ B = Σ c · P(A) · B · Q(A).
Matrix tensor_sharp(const TensorPoly& t, std::span<const Matrix> tuple, const Matrix& b);

// ---------------------------------------------------------------------------
// Text form. Letters X1..Xm, trailing '*' for the adjoint, '+ - * ( ) ^',
// real and imaginary literals ("2.5", "3i", "1e-3"). Lower-case x is X1 and
// digits glued to it are a power: "x4" == "X1^4".
// A '*' right after a letter is the adjoint unless a factor follows it
// directly, so "X1*X2" is a product and "X1* X2" is X1^* X2.

/// Parses `text`. The ambient letter count is `letters`, or the largest
/// index seen when `letters` is 0.
NCPoly parse_poly(std::string_view text, int letters = 0);
/// Parses a single monomial with coefficient 1 ("X1X2X1X2", "x4").
/// Throws if the text is not a single word.
Word parse_word(std::string_view text, int letters = 0);
/// Canonical text form; parse_poly(to_string(p)) == p exactly.
std::string to_string(const NCPoly& p);
std::string to_string(const TensorPoly& t);

// ---------------------------------------------------------------------------

struct Coupling {
    cplx beta;
    Word monomial;
};

/// V = (w/2) Σ Xi² + Σ βj qj.
class Potential {
public:
    Potential(int letters, double quadratic_weight, std::vector<Coupling> couplings,
              bool self_adjoint_mode = true);

    /// Splits a polynomial into its quadratic part and couplings. The
    /// quadratic weight is 2·min_i coeff(Xi²); any excess on Xi² stays a
    /// coupling.
    static Potential from_polynomial(const NCPoly& v, bool self_adjoint_mode = true);
    static Potential parse(std::string_view text, int letters = 0, bool self_adjoint_mode = true);

    int letters() const noexcept { return letters_; }
    double quadratic_weight() const noexcept { return weight_; }
    const std::vector<Coupling>& couplings() const noexcept { return couplings_; }
    bool self_adjoint_mode() const noexcept { return self_adjoint_; }
    bool has_real_couplings() const noexcept;

    NCPoly polynomial() const;
    /// D_i V for i = 1..m.
    std::vector<NCPoly> gradient() const;
    /// max_j deg(q_j), 2 when there are no couplings.
    std::size_t max_coupling_degree() const noexcept;
    /// Same couplings scaled by t.
    Potential with_coupling_scale(double t) const;

private:
    int letters_;
    double weight_;
    std::vector<Coupling> couplings_;
    bool self_adjoint_;
};

}  // namespace freedyson
