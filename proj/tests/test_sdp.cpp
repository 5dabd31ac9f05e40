#include <sparsesos/relax.hpp>
#include <sparsesos/sdp.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "regression_sdps.hpp"

using namespace sparsesos;

namespace
{

LmiSdp unit_disc()
{
    return regression::cases()[0].sdp;
}

SparseSum triangle()
{
    const int n = 3;
    std::vector<Summand> sm;
    for (auto [i, j] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{0, 2}})
    {
        const auto xi = Polynomial::variable(n, i);
        const auto xj = Polynomial::variable(n, j);
        sm.push_back({make_clique({i, j}, n), 0.5 * (xi * xi + xj * xj) + 2.0 * xi * xj});
    }
    return SparseSum(n, sm);
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b)
{
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

TEST(Solve, UnitDisc)
{
    const auto sol = solve(unit_disc());
    ASSERT_EQ(sol.status, SolveStatus::Optimal);
    EXPECT_NEAR(sol.objective, -1.0, 1e-7);
    EXPECT_NEAR(sol.y[1], -1.0, 1e-7);
    EXPECT_EQ(sol.y[0], 1.0);
}

TEST(Solve, MomentSdpOfSquare)
{
    LmiSdp p;
    p.add_moment_block("m", {Exponent{}, Exponent::unit(0)});
    p.set_objective(p.find_variable(Exponent::unit(0, 2)), 1.0);
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, SolveStatus::Optimal);
    EXPECT_NEAR(sol.objective, 0.0, 1e-7);
    EXPECT_NEAR(sol.moment(p, Exponent::unit(0)), 0.0, 1e-4);
    EXPECT_NEAR(sol.moment(p, Exponent::unit(0, 2)), 0.0, 1e-7);
}

TEST(Solve, TriangleIsDualUnbounded)
{
    const auto r = build_sparse(triangle());
    const auto sol = solve(r.sdp);
    EXPECT_EQ(sol.status, SolveStatus::DualUnbounded);
}

TEST(Solve, ModelValidation)
{
    LmiSdp empty;
    EXPECT_THROW(solve(empty), InputError);
    LmiSdp bad;
    bad.add_block(LmiBlock{"b", 2, {}, {{0, {{0, 0, 1.0}, {1, 1, 1.0}}}, {7, {{0, 1, 1.0}}}}});
    EXPECT_THROW(bad.validate(), InputError);
    LmiSdp lower;
    const int v = lower.variable(Exponent::unit(0));
    lower.add_block(LmiBlock{"b", 2, {}, {{0, {{0, 0, 1.0}, {1, 1, 1.0}}}, {v, {{1, 0, 1.0}}}}});
    EXPECT_THROW(lower.validate(), InputError);
    LmiSdp free_var;
    const int u = free_var.variable(Exponent::unit(0));
    free_var.add_block(LmiBlock{"b", 1, {}, {{0, {{0, 0, 1.0}}}}});
    free_var.set_objective(u, 1.0);
    EXPECT_THROW(free_var.validate(), InputError);
    SolverConfig cfg;
    cfg.tol_gap = 0.0;
    EXPECT_THROW(cfg.validate(), InputError);
    cfg = {};
    cfg.max_iters = 0;
    EXPECT_THROW(cfg.validate(), InputError);
}

TEST(Solve, StatusNames)
{
    for (auto s : {SolveStatus::Optimal, SolveStatus::DualUnbounded, SolveStatus::PrimalInfeasible, SolveStatus::IterLimit,
                   SolveStatus::NumericalTrouble})
    {
        EXPECT_EQ(status_from_string(to_string(s)), s);
    }
}

TEST(Residuals, ExactOptimumHasNoGap)
{
    const auto p = unit_disc();
    SdpSolution sol;
    sol.y = {1.0, -1.0};
    Matrix w(2, 2);
    w << 0.5, 0.5, 0.5, 0.5;
    sol.gram = {w};
    const auto m = residuals(p, sol);
    EXPECT_LE(m.rel_gap, 1e-12);
    EXPECT_LE(m.primal_residual, 1e-12);
    EXPECT_LE(m.dual_residual, 1e-12);
}

TEST(Residuals, InteriorPointGapAgainstCertificate)
{
    const auto p = unit_disc();
    SdpSolution sol;
    sol.y = {1.0, -0.9};
    Matrix w(2, 2);
    w << 0.5, 0.5, 0.5, 0.5;
    sol.gram = {w};
    const auto m = residuals(p, sol);
    EXPECT_EQ(m.dual_residual, 0.0);
    EXPECT_NEAR(m.abs_gap, 0.1, 1e-15);
}

TEST(Residuals, PsdVerdictMatchesJacobi)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    const auto c = regression::cases()[4]; // elliptope
    for (int trial = 0; trial < 300; ++trial)
    {
        std::vector<double> y{1.0, u(rng), u(rng), u(rng)};
        const std::vector<double> free(y.begin() + 1, y.end());
        const double ref = oracle::min_eig(c.block(free));
        const double got = min_eigenvalue(c.sdp.block_matrix(0, y));
        EXPECT_NEAR(got, ref, 1e-12);
        SdpSolution sol;
        sol.y = y;
        sol.gram = {Matrix::Zero(3, 3)};
        EXPECT_EQ(residuals(c.sdp, sol).dual_residual > 0.0, ref < 0.0);
    }
}

TEST(Regression, GapAndEllipsoidOracle)
{
    for (const auto& c : regression::cases())
    {
        const auto sol = solve(c.sdp);
        ASSERT_EQ(sol.status, SolveStatus::Optimal) << c.name;
        EXPECT_LE(sol.metrics.rel_gap, 1e-8) << c.name;
        const auto [ref, arg] = oracle::ellipsoid_minimum(c.dim, -3.0, 3.0, c.objective, c.block);
        EXPECT_NEAR(sol.objective, ref, 1e-5) << c.name;
        if (!std::isnan(c.exact))
        {
            EXPECT_NEAR(ref, c.exact, 1e-5) << c.name;
        }
    }
}

TEST(Regression, BitwiseDeterministic)
{
    for (const auto& c : regression::cases())
    {
        const auto a = solve(c.sdp);
        const auto b = solve(c.sdp);
        EXPECT_TRUE(bitwise_equal(a.y, b.y)) << c.name;
        ASSERT_EQ(a.history.size(), b.history.size());
        for (std::size_t k = 0; k < a.history.size(); ++k)
        {
            EXPECT_EQ(std::memcmp(&a.history[k], &b.history[k], sizeof(IterationRecord)), 0);
        }
    }
}

TEST(Invariants, WeakDualityAndGapDecay)
{
    std::vector<LmiSdp> models;
    for (const auto& c : regression::cases())
    {
        models.push_back(c.sdp);
    }
    const auto amgm = parse_polynomial("x1^4 + x2^4 + x3^4 + x4^4 - 4*x1*x2*x3*x4", 4);
    models.push_back(build_dense(amgm).sdp);
    for (const auto& p : models)
    {
        const auto sol = solve(p);
        ASSERT_EQ(sol.status, SolveStatus::Optimal);
        // objective - gram_bound = <Z, W> + r^T y with r the coefficient
        // residual of W, so only the residual can push the bound above.
        double cmax = 0.0;
        double ynorm = 0.0;
        for (std::size_t v = 1; v < sol.y.size(); ++v)
        {
            cmax = std::max(cmax, std::abs(p.objective()[v]));
            ynorm += std::abs(sol.y[v]);
        }
        const double slack = sol.metrics.primal_residual * (1.0 + cmax) * ynorm;
        EXPECT_LE(sol.gram_bound, sol.objective + slack + 1e-12);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& it : sol.history)
        {
            EXPECT_LE(it.rel_gap, 10.0 * best + 1e-12);
            best = std::min(best, it.rel_gap);
        }
    }
}

TEST(Invariants, OptimalBlocksArePsd)
{
    for (const auto& c : regression::cases())
    {
        const auto sol = solve(c.sdp);
        ASSERT_EQ(sol.status, SolveStatus::Optimal);
        for (std::size_t i = 0; i < c.sdp.blocks().size(); ++i)
        {
            EXPECT_GE(min_eigenvalue(c.sdp.block_matrix(i, sol.y)), -10.0 * 1e-8);
            EXPECT_GE(min_eigenvalue(sol.gram[i]), -1e-8);
        }
    }
}

TEST(GaussianStart, Moments)
{
    EXPECT_EQ(gaussian_moment(Exponent{}), 1.0);
    EXPECT_EQ(gaussian_moment(Exponent::unit(0)), 0.0);
    EXPECT_EQ(gaussian_moment(Exponent::unit(0, 2)), 0.5);
    EXPECT_EQ(gaussian_moment(Exponent::unit(0, 4)), 0.75);
    EXPECT_EQ(gaussian_moment(Exponent({{0, 2}, {1, 2}})), 0.25);
}

TEST(Sdpa, UnitDiscLayout)
{
    const auto text = export_sdpa(unit_disc());
    std::istringstream in(text);
    std::string l1, l2, l3, l4;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    std::getline(in, l4);
    EXPECT_EQ(l1, "1");
    EXPECT_EQ(l2, "1");
    EXPECT_EQ(l3, "2");
    EXPECT_EQ(l4, "1");
    // F_0 = -I on the diagonal, F_1 on the off-diagonal
    std::set<std::pair<int, int>> f0, f1;
    int mat, blk, i, j;
    double v;
    while (in >> mat >> blk >> i >> j >> v)
    {
        EXPECT_EQ(blk, 1);
        EXPECT_LE(i, j);
        (mat == 0 ? f0 : f1).insert({i, j});
        if (mat == 0)
        {
            EXPECT_EQ(v, -1.0);
        }
    }
    EXPECT_EQ(f0, (std::set<std::pair<int, int>>{{1, 1}, {2, 2}}));
    EXPECT_EQ(f1, (std::set<std::pair<int, int>>{{1, 2}}));
}

TEST(Sdpa, MomentSdpOfSquareHeader)
{
    LmiSdp p;
    p.add_moment_block("m", {Exponent{}, Exponent::unit(0)});
    p.set_objective(p.find_variable(Exponent::unit(0, 2)), 1.0);
    const auto text = export_sdpa(p);
    EXPECT_EQ(text.substr(0, text.find("\n", text.find("\n", text.find("\n") + 1) + 1)), "2\n1\n2");
    EXPECT_EQ(export_sdpa(p), text);
}
