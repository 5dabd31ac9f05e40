// Phase-one simplex for convex-hull membership of small point sets.
#include <sparsesos/poly.hpp>

#include <cmath>
#include <limits>

namespace sparsesos::detail
{

namespace
{

constexpr double kPivotTol = 1e-12;
constexpr double kViolationTol = 1e-9;

} // namespace

bool hull_contains(std::span<const std::vector<double>> generators, std::span<const double> point)
{
    const std::size_t k = generators.size();
    const std::size_t dim = point.size();
    if (k == 0)
    {
        return false;
    }
    // Rows: dim coordinate equations + the convexity row. Columns: k lambdas,
    // then one artificial per row, then the right-hand side.
    const std::size_t rows = dim + 1;
    const std::size_t cols = k + rows + 1;
    std::vector<std::vector<double>> t(rows, std::vector<double>(cols, 0.0));
    for (std::size_t r = 0; r < rows; ++r)
    {
        double rhs = (r < dim) ? point[r] : 1.0;
        for (std::size_t j = 0; j < k; ++j)
        {
            t[r][j] = (r < dim) ? generators[j][r] : 1.0;
        }
        if (rhs < 0.0)
        {
            for (std::size_t j = 0; j < k; ++j)
            {
                t[r][j] = -t[r][j];
            }
            rhs = -rhs;
        }
        t[r][k + r] = 1.0;
        t[r][cols - 1] = rhs;
    }
    std::vector<std::size_t> basis(rows);
    for (std::size_t r = 0; r < rows; ++r)
    {
        basis[r] = k + r;
    }
    // Objective: minimize sum of artificials; reduced costs for lambdas.
    std::vector<double> cost(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
    {
        for (std::size_t j = 0; j < cols; ++j)
        {
            if (j < k || j == cols - 1)
            {
                cost[j] -= t[r][j];
            }
        }
    }
    // Bland's rule terminates; the iteration cap only guards round-off cycling.
    for (int iter = 0; iter < 10000; ++iter)
    {
        std::size_t enter = cols;
        for (std::size_t j = 0; j + 1 < cols; ++j)
        {
            if (cost[j] < -kPivotTol)
            {
                enter = j;
                break;
            }
        }
        if (enter == cols)
        {
            break;
        }
        std::size_t leave = rows;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < rows; ++r)
        {
            if (t[r][enter] > kPivotTol)
            {
                const double ratio = t[r][cols - 1] / t[r][enter];
                if (ratio < best - kPivotTol ||
                    (std::abs(ratio - best) <= kPivotTol && leave < rows && basis[r] < basis[leave]))
                {
                    best = ratio;
                    leave = r;
                }
            }
        }
        if (leave == rows)
        {
            break; // unbounded direction cannot occur in phase one
        }
        const double piv = t[leave][enter];
        for (double& v : t[leave])
        {
            v /= piv;
        }
        for (std::size_t r = 0; r < rows; ++r)
        {
            if (r != leave && t[r][enter] != 0.0)
            {
                const double f = t[r][enter];
                for (std::size_t j = 0; j < cols; ++j)
                {
                    t[r][j] -= f * t[leave][j];
                }
            }
        }
        const double f = cost[enter];
        for (std::size_t j = 0; j < cols; ++j)
        {
            cost[j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }
    // Phase-one optimum equals -cost[rhs].
    return -cost[cols - 1] <= kViolationTol;
}

} // namespace sparsesos::detail
