#include <sparsesos/apps.hpp>
#include <sparsesos/poly.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"

using namespace sparsesos;

namespace
{

Polynomial P(const char* text, int n)
{
    return parse_polynomial(text, n);
}

oracle::DensePoly to_dense(const Polynomial& p)
{
    oracle::DensePoly d;
    for (const auto& [e, c] : p.terms())
    {
        d[e.dense(p.num_vars())] = c;
    }
    return d;
}

Polynomial random_poly(std::mt19937_64& rng, int n, int deg, int terms)
{
    std::uniform_int_distribution<int> var(0, n - 1);
    std::uniform_int_distribution<int> pw(0, deg);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    Polynomial p(n);
    for (int t = 0; t < terms; ++t)
    {
        std::vector<Exponent::Entry> es;
        int left = pw(rng);
        while (left > 0)
        {
            const int k = std::uniform_int_distribution<int>(1, left)(rng);
            es.emplace_back(var(rng), k);
            left -= k;
        }
        p.add_term(Exponent(es), std::round(coef(rng) * 8.0) / 8.0 + 0.125);
    }
    return p;
}

SparseSum ripnotsuf()
{
    return SparseSum(3, {{{0, 1}, P("x1^4 + x1^2*x2^2 - 2*x1*x2 + 1", 3)},
                         {{1, 2}, P("x2^2*x3^2 + x3^4 - 2*x3^2 + 1", 3)}});
}

} // namespace

TEST(Parse, QuarticUnivariate)
{
    const auto p = P("x1^4 - 2*x1^2 + 1", 1);
    EXPECT_EQ(p.size(), 3u);
    EXPECT_EQ(p.degree(), 4);
    EXPECT_EQ(p.coefficient(Exponent::unit(0, 2)), -2.0);
}

TEST(Parse, ZeroTermsDropped)
{
    const auto p = P("0*x1 + 5", 1);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p.coefficient(Exponent{}), 5.0);
}

TEST(Parse, MatchesOracleExpansion)
{
    const auto p = P("x1^2*x2^2 - 2*x1*x2 + 1 + x1^4", 2);
    EXPECT_EQ(p.size(), 4u);
    const auto x1 = oracle::var(2, 0);
    const auto x2 = oracle::var(2, 1);
    const auto q = oracle::add(oracle::power(x1, 4),
                               oracle::power(oracle::add(oracle::multiply(x1, x2), oracle::constant(2, 1.0), -1.0), 2));
    EXPECT_EQ(to_dense(p), q);
}

TEST(Parse, LikeTermsMerge)
{
    const auto p = P("x1*x2 + x2*x1 - 3 + 1.5 - x1*x2", 2);
    EXPECT_EQ(p.coefficient(Exponent({{0, 1}, {1, 1}})), 1.0);
    EXPECT_EQ(p.coefficient(Exponent{}), -1.5);
    EXPECT_EQ(P("x1^2*x1", 1).coefficient(Exponent::unit(0, 3)), 1.0);
}

TEST(Parse, ErrorsCarryPosition)
{
    try
    {
        P("x1 + * 2", 1);
        FAIL();
    }
    catch (const ParseError& e)
    {
        EXPECT_EQ(e.position(), 5u);
    }
    EXPECT_THROW(P("x3", 2), ParseError);
    EXPECT_THROW(P("x0", 2), ParseError);
    EXPECT_THROW(P("", 2), ParseError);
    EXPECT_THROW(P("2 x1", 2), ParseError);
    EXPECT_THROW(P("x1^", 2), ParseError);
}

TEST(Parse, PrintRoundTrip)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto p = random_poly(rng, 4, 5, 6);
        const auto text = p.to_string();
        EXPECT_EQ(P(text.c_str(), 4), p) << text;
        EXPECT_EQ(P(text.c_str(), 4).to_string(), text);
    }
}

TEST(Evaluate, AmGmEqualityCase)
{
    const auto p = P("x1^4 + x2^4 + x3^4 + x4^4 - 4*x1*x2*x3*x4", 4);
    const std::vector<double> ones{1, 1, 1, 1};
    EXPECT_EQ(p.evaluate(ones), 0.0);
}

TEST(Evaluate, Constant)
{
    const auto p = Polynomial::constant(3, 7.0);
    const std::vector<double> x{0.3, -2.0, 11.0};
    EXPECT_EQ(p.evaluate(x), 7.0);
}

TEST(Evaluate, FourthPowerOfDifference)
{
    const auto p = (Polynomial::variable(2, 0) - Polynomial::variable(2, 1)).pow(4);
    const std::vector<double> x{2.0, 0.0};
    EXPECT_EQ(p.evaluate(x), 16.0);
}

TEST(Evaluate, DimensionMismatch)
{
    const auto p = P("x1 + x2", 2);
    const std::vector<double> x{1.0};
    EXPECT_THROW(p.evaluate(x), InputError);
}

TEST(Evaluate, AgreesWithOracle)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto p = random_poly(rng, 3, 6, 8);
        std::vector<double> x{u(rng), u(rng), u(rng)};
        const double ref = oracle::eval(to_dense(p), x);
        EXPECT_NEAR(p.evaluate(x), ref, 1e-12 * (1.0 + std::abs(ref)));
    }
}

TEST(Arithmetic, DerivativeAndCompose)
{
    const auto p = P("x1^3*x2 - x2^2 + 4", 2);
    EXPECT_EQ(p.derivative(0), P("3*x1^2*x2", 2));
    EXPECT_EQ(p.derivative(1), P("x1^3 - 2*x2", 2));
    // x1 -> x1 + 1, x2 -> 2
    const std::vector<Polynomial> images{P("x1 + 1", 1), Polynomial::constant(1, 2.0)};
    EXPECT_EQ(p.compose(images), P("2*x1^3 + 6*x1^2 + 6*x1 + 2", 1));
}

TEST(Exponent, GradedLexOrder)
{
    const std::vector<int> vars{0, 1};
    const auto m = monomials_up_to(vars, 2);
    ASSERT_EQ(m.size(), 6u);
    EXPECT_EQ(m[1], Exponent::unit(0));
    EXPECT_EQ(m[2], Exponent::unit(1));
    EXPECT_EQ(m[3], Exponent::unit(0, 2));
    EXPECT_EQ(m[4], Exponent({{0, 1}, {1, 1}}));
    EXPECT_EQ(m[5], Exponent::unit(1, 2));
    EXPECT_EQ(binomial(5, 2), 10u);
}

TEST(SparseSumTest, RejectsOddSummandAndForeignVariable)
{
    EXPECT_THROW(SparseSum(2, {{{0}, P("x1^3", 2)}}), InputError);
    EXPECT_THROW(SparseSum(2, {{{0}, P("x1^2 + x2^2", 2)}}), InputError);
    EXPECT_THROW(SparseSum(2, {{{2}, P("x1^2", 2)}}), InputError);
}

TEST(SparseSumTest, JsonRoundTrip)
{
    const auto s = ripnotsuf();
    const auto back = SparseSum::from_json(s.to_json());
    ASSERT_EQ(back.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        EXPECT_EQ(back.summands()[i].clique, s.summands()[i].clique);
        EXPECT_EQ(back.summands()[i].poly, s.summands()[i].poly);
    }
    EXPECT_EQ(s.to_json()["summands"][1]["clique"], nlohmann::json({2, 3}));
    EXPECT_THROW(SparseSum::from_json(nlohmann::json::parse(R"({"n": 2})")), InputError);
}

TEST(ExpandTotal, Cancellation)
{
    const SparseSum s(1, {{{0}, P("x1^2", 1)}, {{0}, P("-x1^2", 1)}});
    EXPECT_TRUE(expand_total(s).is_zero());
}

TEST(ExpandTotal, RipNotSufficientExample)
{
    const auto f = expand_total(ripnotsuf());
    EXPECT_EQ(f.size(), 7u); // the two constants merge
    EXPECT_EQ(f.degree(), 4);
    const auto x1 = oracle::var(3, 0);
    const auto x2 = oracle::var(3, 1);
    const auto x3 = oracle::var(3, 2);
    const auto one = oracle::constant(3, 1.0);
    auto ref = oracle::power(x1, 4);
    ref = oracle::add(ref, oracle::power(oracle::add(oracle::multiply(x1, x2), one, -1.0), 2));
    ref = oracle::add(ref, oracle::power(oracle::multiply(x2, x3), 2));
    ref = oracle::add(ref, oracle::power(oracle::add(oracle::power(x3, 2), one, -1.0), 2));
    EXPECT_EQ(to_dense(f), ref);
}

TEST(ExpandTotal, EvaluationMatchesSummands)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
        const auto s = random_clique_instance(6, 5, 2, 3, seed);
        const auto f = expand_total(s);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int k = 0; k < 100; ++k)
        {
            std::vector<double> x(6);
            for (auto& v : x)
            {
                v = u(rng);
            }
            double direct = 0.0;
            for (const auto& sm : s.summands())
            {
                direct += sm.poly.evaluate(x);
            }
            EXPECT_NEAR(f.evaluate(x), direct, 1e-12 * std::max(1.0, std::abs(direct)));
            EXPECT_NEAR(s.evaluate(x), direct, 1e-12 * std::max(1.0, std::abs(direct)));
        }
    }
}

TEST(ExpandTotal, SupportInsideCliqueMonomials)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
        const auto s = random_clique_instance(7, 4, 2, 3, seed);
        const auto f = expand_total(s);
        for (const auto& [e, c] : f.terms())
        {
            bool covered = false;
            for (const auto& cl : s.cliques())
            {
                covered = covered || (e.supported_in(cl) && e.degree() <= 2 * s.half_degree());
            }
            EXPECT_TRUE(covered) << e.to_string();
        }
    }
}

TEST(MonomialDecompose, SeparableQuartic)
{
    const auto s = monomial_decompose(P("x1^4 + x2^4", 2));
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.summands()[0].clique, Clique{0});
    EXPECT_EQ(s.summands()[1].clique, Clique{1});
}

TEST(MonomialDecompose, DenseQuarticCliquesBounded)
{
    const auto p = random_dense_instance(4, 2, 3);
    const auto s = monomial_decompose(p);
    EXPECT_LE(s.delta_norm(), 4u);
    EXPECT_EQ(expand_total(s), p);
}

TEST(MonomialDecompose, LoneOddTermRejectedMergedAccepted)
{
    EXPECT_THROW(monomial_decompose(P("-4*x1*x2*x3*x4", 4)), InputError);
    const auto amgm = P("x1^4 + x2^4 + x3^4 + x4^4 - 4*x1*x2*x3*x4", 4);
    const auto s = monomial_decompose(amgm);
    EXPECT_EQ(expand_total(s), amgm);
    EXPECT_THROW(monomial_decompose(P("x1^3 + x2^2", 2)), InputError);
}

TEST(MonomialDecompose, RoundTripRandom)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial)
    {
        auto p = random_poly(rng, 4, 3, 6);
        for (int k = 0; k < 4; ++k)
        {
            p.add_term(Exponent::unit(k, 4), 1.0);
        }
        const auto s = monomial_decompose(p);
        EXPECT_EQ(expand_total(s), p);
        for (const auto& sm : s.summands())
        {
            EXPECT_EQ(sm.poly.degree() % 2, 0);
        }
    }
}

TEST(Csp, RosenbrockIsPath)
{
    const auto g = csp_graph(benchmark({Family::GenRosenbrock, 4}));
    const std::vector<std::pair<int, int>> path{{0, 1}, {1, 2}, {2, 3}};
    EXPECT_EQ(g.edges, path);
}

TEST(Csp, CyclicPolynomialIsCycle)
{
    const int n = 5;
    std::vector<Summand> sm;
    for (int i = 0; i < n; ++i)
    {
        const int j = (i + 1) % n;
        const auto t = Polynomial::variable(n, i).pow(2) + Polynomial::variable(n, j).pow(2) - Polynomial::constant(n, 1.0);
        sm.push_back({make_clique({i, j}, n), t.pow(2)});
    }
    const auto g = csp_graph(SparseSum(n, sm));
    EXPECT_EQ(g.edges.size(), 5u);
    for (int i = 0; i < n; ++i)
    {
        EXPECT_TRUE(g.has_edge(i, (i + 1) % n));
        EXPECT_TRUE(g.has_edge((i + 1) % n, i));
    }
    EXPECT_FALSE(g.has_edge(0, 2));
}

TEST(Csp, UnivariateEdgeless)
{
    const auto g = csp_graph(SparseSum(1, {{{0}, P("x1^4 - x1", 1)}}));
    EXPECT_TRUE(g.edges.empty());
}

TEST(Csp, EdgeOnlyWhenMonomialSharesVariables)
{
    // clique {1,2} but no mixed monomial
    const auto g = csp_graph(SparseSum(2, {{{0, 1}, P("x1^2 + x2^2", 2)}}));
    EXPECT_TRUE(g.edges.empty());
}

TEST(Rip, Chain)
{
    const std::vector<Clique> c{{0, 1}, {1, 2}, {2, 3}};
    const auto r = rip_check(c);
    EXPECT_TRUE(r.strict);
    EXPECT_TRUE(r.nonstrict);
    EXPECT_EQ(r.order.size(), 3u);
}

TEST(Rip, TriangleFails)
{
    const std::vector<Clique> c{{0, 1}, {1, 2}, {0, 2}};
    const auto r = rip_check(c);
    EXPECT_FALSE(r.strict);
    EXPECT_FALSE(r.nonstrict);
    EXPECT_TRUE(r.determined);
}

TEST(Rip, SingleClique)
{
    const std::vector<Clique> c{{0, 1, 2}};
    EXPECT_TRUE(rip_check(c).strict);
}

TEST(Rip, ShuffledChainsOfAnyLength)
{
    std::mt19937_64 rng(3);
    for (int m = 2; m <= 14; ++m)
    {
        std::vector<Clique> c;
        for (int i = 0; i < m; ++i)
        {
            c.push_back({i, i + 1});
        }
        std::shuffle(c.begin(), c.end(), rng);
        const auto r = rip_check(c);
        EXPECT_TRUE(r.strict) << m;
        // replay the witness with the displayed condition
        std::set<int> seen(c[r.order[0]].begin(), c[r.order[0]].end());
        for (std::size_t i = 1; i < r.order.size(); ++i)
        {
            const auto& next = c[r.order[i]];
            std::vector<int> inter;
            for (int v : next)
            {
                if (seen.count(v))
                {
                    inter.push_back(v);
                }
            }
            bool inside = false;
            for (std::size_t k = 0; k < i; ++k)
            {
                const auto& prev = c[r.order[k]];
                inside = inside || std::includes(prev.begin(), prev.end(), inter.begin(), inter.end());
            }
            EXPECT_TRUE(inside);
            seen.insert(next.begin(), next.end());
        }
    }
}

TEST(Rip, CycleOfFourFails)
{
    const std::vector<Clique> c{{0, 1}, {1, 2}, {2, 3}, {0, 3}};
    EXPECT_FALSE(rip_check(c).nonstrict);
}

TEST(NewtonHalfSupport, Segment)
{
    const auto g = newton_half_support(P("x1^4 - 2*x1^2 + 1", 1), {0});
    const std::vector<Exponent> ref{Exponent{}, Exponent::unit(0), Exponent::unit(0, 2)};
    EXPECT_EQ(g, ref);
}

TEST(NewtonHalfSupport, RipExampleFirstSummand)
{
    const auto g = newton_half_support(P("x1^4 + x1^2*x2^2 - 2*x1*x2 + 1", 2), {0, 1});
    const std::vector<Exponent> ref{Exponent{}, Exponent::unit(0), Exponent::unit(0, 2), Exponent({{0, 1}, {1, 1}})};
    EXPECT_EQ(g, ref);
}

TEST(NewtonHalfSupport, Constant)
{
    const auto g = newton_half_support(Polynomial::constant(2, 1.0), {0, 1});
    ASSERT_EQ(g.size(), 1u);
    EXPECT_TRUE(g[0].is_zero());
    EXPECT_THROW(newton_half_support(Polynomial(2), {0, 1}), InputError);
}

TEST(NewtonHalfSupport, CoversSupport)
{
    for (const auto& fam : {Family::BroydenTridiagonal, Family::BroydenBanded, Family::DiscreteBoundaryValue,
                            Family::ChainedWood})
    {
        const auto s = benchmark({fam, 8});
        for (const auto& sm : s.summands())
        {
            const auto g = newton_half_support(sm.poly, sm.clique);
            std::set<std::vector<int>> sums;
            for (const auto& a : g)
            {
                for (const auto& b : g)
                {
                    sums.insert((a + b).dense(s.num_vars()));
                }
            }
            for (const auto& [e, c] : sm.poly.terms())
            {
                EXPECT_TRUE(sums.count(e.dense(s.num_vars())));
            }
        }
    }
}

TEST(NewtonHalfSupport, PlanarHullAgreesWithCrossProductOracle)
{
    // Independent membership test: point inside a planar polygon iff it is
    // inside some triangle of generators.
    auto in_triangle = [](const std::array<double, 2>& p, const std::array<double, 2>& a, const std::array<double, 2>& b,
                          const std::array<double, 2>& c) {
        auto cross = [](auto o, auto u, auto v) { return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0]); };
        if (std::abs(cross(a, b, c)) < 1e-12)
        {
            for (int k = 0; k < 2; ++k)
            {
                if (p[k] < std::min({a[k], b[k], c[k]}) || p[k] > std::max({a[k], b[k], c[k]}))
                {
                    return false;
                }
            }
            return std::abs(cross(a, b, p)) < 1e-12 && std::abs(cross(a, c, p)) < 1e-12 &&
                   std::abs(cross(b, c, p)) < 1e-12;
        }
        const double d1 = cross(a, b, p), d2 = cross(b, c, p), d3 = cross(c, a, p);
        const bool neg = d1 < -1e-12 || d2 < -1e-12 || d3 < -1e-12;
        const bool pos = d1 > 1e-12 || d2 > 1e-12 || d3 > 1e-12;
        return !(neg && pos);
    };
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> coord(0, 4);
    for (int trial = 0; trial < 40; ++trial)
    {
        std::vector<Exponent> gens;
        std::vector<std::array<double, 2>> pts;
        for (int k = 0; k < 4; ++k)
        {
            const int a = coord(rng), b = coord(rng);
            gens.push_back(Exponent({{0, a}, {1, b}}));
            pts.push_back({double(a), double(b)});
        }
        const auto lattice = hull_lattice_points(gens, {0, 1});
        std::set<std::vector<int>> got;
        for (const auto& e : lattice)
        {
            got.insert(e.dense(2));
        }
        for (int a = 0; a <= 4; ++a)
        {
            for (int b = 0; b <= 4; ++b)
            {
                bool inside = false;
                for (std::size_t i = 0; i < pts.size(); ++i)
                {
                    for (std::size_t j = i; j < pts.size(); ++j)
                    {
                        for (std::size_t k = j; k < pts.size(); ++k)
                        {
                            inside = inside || in_triangle({double(a), double(b)}, pts[i], pts[j], pts[k]);
                        }
                    }
                }
                EXPECT_EQ(inside, got.count({a, b}) == 1) << a << "," << b;
            }
        }
    }
}
