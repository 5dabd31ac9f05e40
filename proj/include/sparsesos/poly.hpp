///
/// \file poly.hpp
///
/// Sparse multivariate polynomials, clique-structured sums of polynomials and
/// the combinatorial diagnostics built on them (csp graph, running
/// intersection, Newton half-supports).
///
/// Variables are 0-based internally. The text grammar and the JSON schema use
/// the 1-based names `x1, x2, ...`.
///
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace sparsesos
{

/// Raised on malformed input (text polynomials, JSON, invalid arguments).
class InputError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the polynomial parser; carries the 0-based character offset.
class ParseError : public InputError
{
public:
    ParseError(const std::string& what, std::size_t position)
        : InputError(what + " at position " + std::to_string(position)),
          m_detail(what),
          m_position(position)
    {
    }
    std::size_t position() const noexcept { return m_position; }
    const std::string& detail() const noexcept { return m_detail; }

private:
    std::string m_detail;
    std::size_t m_position;
};

///
/// Monomial exponent in sparse canonical form: sorted (variable, power) pairs
/// with strictly positive powers.
///
class Exponent
{
public:
    using Entry = std::pair<int, int>;

    Exponent() = default;
    /// From arbitrary pairs; zero powers are dropped and repeated variables
    /// are accumulated.
    explicit Exponent(std::vector<Entry> entries);

    static Exponent unit(int var, int power = 1);
    static Exponent from_dense(std::span<const int> powers);

    const std::vector<Entry>& entries() const noexcept { return m_entries; }
    bool is_zero() const noexcept { return m_entries.empty(); }
    int degree() const noexcept { return m_degree; }
    int power(int var) const noexcept;
    std::vector<int> support() const;
    std::vector<int> dense(int n) const;
    /// Every power even (x^alpha is a square monomial).
    bool is_even() const noexcept;
    bool supported_in(std::span<const int> sorted_vars) const;

    Exponent operator+(const Exponent& other) const;
    bool operator==(const Exponent& other) const noexcept
    {
        return m_entries == other.m_entries;
    }

    /// x1^2*x3 style; "1" for the zero exponent.
    std::string to_string() const;

private:
    std::vector<Entry> m_entries;
    int m_degree = 0;
};

/// Graded lexicographic order: lower total degree first; within a degree,
/// a larger power of the lowest-index variable first, so that
/// m_2(x1,x2) = [1, x1, x2, x1^2, x1*x2, x2^2].
struct GradedLex
{
    bool operator()(const Exponent& a, const Exponent& b) const noexcept;
};

/// Sorted, duplicate-free list of 0-based variable indices.
using Clique = std::vector<int>;

/// Normalizes (sorts, dedups) and validates a clique against n variables.
Clique make_clique(std::vector<int> vars, int n);

class Polynomial
{
public:
    using TermMap = std::map<Exponent, double, GradedLex>;

    Polynomial() = default;
    explicit Polynomial(int n) : m_n(n) {}

    static Polynomial constant(int n, double c);
    static Polynomial variable(int n, int var);
    static Polynomial monomial(int n, const Exponent& e, double c = 1.0);

    int num_vars() const noexcept { return m_n; }
    const TermMap& terms() const noexcept { return m_terms; }
    std::size_t size() const noexcept { return m_terms.size(); }
    bool is_zero() const noexcept { return m_terms.empty(); }
    /// Degree of the zero polynomial is 0.
    int degree() const noexcept;
    double coefficient(const Exponent& e) const;
    /// Max absolute coefficient.
    double max_abs_coefficient() const noexcept;
    std::vector<int> variables() const;

    /// Adds c to the coefficient of x^e, dropping it when it cancels to 0.
    void add_term(const Exponent& e, double c);

    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator-=(const Polynomial& other);
    Polynomial& operator*=(double s);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    Polynomial pow(int k) const;

    bool operator==(const Polynomial& other) const = default;

    double evaluate(std::span<const double> x) const;
    /// Partial derivative with respect to var.
    Polynomial derivative(int var) const;
    /// Substitutes variable i by images[i]; images all share the output
    /// variable count.
    Polynomial compose(std::span<const Polynomial> images) const;
    /// Same polynomial viewed in a space with n variables (n must cover every
    /// used variable).
    Polynomial with_num_vars(int n) const;

    /// Canonical text: graded-lex order, shortest round-trip coefficients.
    std::string to_string() const;

private:
    int m_n = 0;
    TermMap m_terms;
};

///
/// Parses `c*x1^a1*...*xk^ak` terms joined by `+`/`-`.
///
/// \throw ParseError on syntax errors or a variable index outside [1, n].
///
Polynomial parse_polynomial(std::string_view text, int n);

struct Summand
{
    Clique clique;
    Polynomial poly;
};

///
/// f(x) = sum_i f_i(x_{Delta_i}). Summands have even degree and are supported
/// on their cliques; both are checked at construction.
///
class SparseSum
{
public:
    SparseSum() = default;
    SparseSum(int n, std::vector<Summand> summands);

    int num_vars() const noexcept { return m_n; }
    const std::vector<Summand>& summands() const noexcept { return m_summands; }
    std::size_t size() const noexcept { return m_summands.size(); }
    std::vector<Clique> cliques() const;

    int half_degree(std::size_t i) const;
    /// max_i d_i (0 when every summand is constant).
    int half_degree() const noexcept { return m_d; }
    /// ||Delta|| = max_i |Delta_i|.
    std::size_t delta_norm() const noexcept;

    /// sum_i f_i(x_{Delta_i}), evaluated summand by summand.
    double evaluate(std::span<const double> x) const;

    nlohmann::json to_json() const;
    /// Schema: { "n": int, "summands": [ { "clique": [1-based...], "poly": text } ] }
    static SparseSum from_json(const nlohmann::json& j);

private:
    int m_n = 0;
    std::vector<Summand> m_summands;
    int m_d = 0;
};

Polynomial expand_total(const SparseSum& s);

///
/// Splits a polynomial into a sum of small polynomials. Square monomials
/// (all powers even) are grouped by support; every other monomial joins the
/// lexicographically smallest square-monomial clique covering its support,
/// or a new summand on its own support when no such clique exists.
///
/// \throw InputError if deg(p) is odd, if the top-degree form has no square
///        monomial (p is then unbounded below), or if a created summand would
///        have odd degree.
///
SparseSum monomial_decompose(const Polynomial& p);

struct CspGraph
{
    int n = 0;
    /// Pairs (i, j), i < j, sorted.
    std::vector<std::pair<int, int>> edges;

    bool has_edge(int i, int j) const;
};

CspGraph csp_graph(const SparseSum& s);

struct RipResult
{
    /// A witness ordering exists under the displayed strict-inclusion rule.
    bool strict = false;
    /// A witness ordering exists under plain inclusion.
    bool nonstrict = false;
    /// False when the bounded search gave up (only possible for > 8 cliques).
    bool determined = true;
    /// Witness permutation (indices into the input) for the strongest variant
    /// that holds; empty if neither holds.
    std::vector<std::size_t> order;
};

/// Running-intersection check: exhaustive for up to 8 cliques, greedy
/// max-overlap with bounded backtracking above that.
RipResult rip_check(std::span<const Clique> cliques);

///
/// Lattice points of conv{ alpha : 2*alpha in supp(f) } restricted to the
/// clique coordinates, in graded-lex order.
///
/// \throw InputError on the zero polynomial or odd degree.
///
std::vector<Exponent> newton_half_support(const Polynomial& f, const Clique& clique);

/// Same lattice enumeration for an explicit generator set.
std::vector<Exponent> hull_lattice_points(std::span<const Exponent> generators,
                                          const Clique& clique);

/// All monomials in the given variables of total degree <= d, graded-lex.
std::vector<Exponent> monomials_up_to(std::span<const int> vars, int d);

/// Binomial coefficient as size_t (small arguments only).
std::size_t binomial(int n, int k);

namespace detail
{
/// True iff point lies in the convex hull of the generators (LP feasibility,
/// violation tolerance 1e-9).
bool hull_contains(std::span<const std::vector<double>> generators,
                   std::span<const double> point);
} // namespace detail

} // namespace sparsesos
