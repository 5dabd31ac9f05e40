// Independent reference computations for the test suites. Nothing here
// calls into the solver, the relaxation builders or the extraction code.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <vector>

namespace oracle
{

/// Dense-exponent polynomial: exponent vector -> coefficient.
using DensePoly = std::map<std::vector<int>, double>;

inline DensePoly multiply(const DensePoly& a, const DensePoly& b)
{
    DensePoly out;
    for (const auto& [ea, ca] : a)
    {
        for (const auto& [eb, cb] : b)
        {
            std::vector<int> e(ea.size());
            for (std::size_t k = 0; k < e.size(); ++k)
            {
                e[k] = ea[k] + eb[k];
            }
            out[e] += ca * cb;
        }
    }
    std::erase_if(out, [](const auto& kv) { return kv.second == 0.0; });
    return out;
}

inline DensePoly add(DensePoly a, const DensePoly& b, double scale = 1.0)
{
    for (const auto& [e, c] : b)
    {
        a[e] += scale * c;
    }
    std::erase_if(a, [](const auto& kv) { return kv.second == 0.0; });
    return a;
}

inline DensePoly var(int n, int k)
{
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(k)] = 1;
    return {{e, 1.0}};
}

inline DensePoly constant(int n, double c)
{
    return {{std::vector<int>(static_cast<std::size_t>(n), 0), c}};
}

inline DensePoly power(const DensePoly& p, int k)
{
    DensePoly out = constant(static_cast<int>(p.begin()->first.size()), 1.0);
    for (int i = 0; i < k; ++i)
    {
        out = multiply(out, p);
    }
    return out;
}

inline double eval(const DensePoly& p, const std::vector<double>& x)
{
    double s = 0.0;
    for (const auto& [e, c] : p)
    {
        double t = c;
        for (std::size_t k = 0; k < e.size(); ++k)
        {
            t *= std::pow(x[k], e[k]);
        }
        s += t;
    }
    return s;
}

/// Symmetric matrix stored row-major.
struct Sym
{
    int n = 0;
    std::vector<double> a;
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
};

/// Cyclic Jacobi; slow and simple. Columns of *vecs are the eigenvectors in
/// the returned (ascending) order.
inline std::vector<double> jacobi_eigenvalues(Sym m, std::vector<std::vector<double>>* vecs = nullptr)
{
    const int n = m.n;
    Sym v{n, std::vector<double>(static_cast<std::size_t>(n * n), 0.0)};
    for (int i = 0; i < n; ++i)
    {
        v(i, i) = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep)
    {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
        {
            for (int q = p + 1; q < n; ++q)
            {
                off += m(p, q) * m(p, q);
            }
        }
        if (off < 1e-30)
        {
            break;
        }
        for (int p = 0; p < n; ++p)
        {
            for (int q = p + 1; q < n; ++q)
            {
                if (std::abs(m(p, q)) < 1e-300)
                {
                    continue;
                }
                const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k)
                {
                    const double mkp = m(k, p);
                    const double mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
                for (int k = 0; k < n; ++k)
                {
                    const double mpk = m(p, k);
                    const double mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
    {
        order[static_cast<std::size_t>(i)] = i;
    }
    std::sort(order.begin(), order.end(), [&](int i, int j) { return m(i, i) < m(j, j); });
    std::vector<double> ev;
    if (vecs)
    {
        vecs->clear();
    }
    for (int i : order)
    {
        ev.push_back(m(i, i));
        if (vecs)
        {
            std::vector<double> col(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k)
            {
                col[static_cast<std::size_t>(k)] = v(k, i);
            }
            vecs->push_back(std::move(col));
        }
    }
    return ev;
}

inline double min_eig(const Sym& m)
{
    return jacobi_eigenvalues(m).front();
}

/// Grid search over a box for min c.y subject to psd(build(y)).
/// Returns +inf when no grid point is feasible.
inline double grid_minimum(int dim, double lo, double hi, int steps, const std::function<double(const std::vector<double>&)>& obj,
                           const std::function<Sym(const std::vector<double>&)>& build, double psd_tol = 0.0)
{
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    std::vector<double> y(static_cast<std::size_t>(dim));
    while (true)
    {
        for (int k = 0; k < dim; ++k)
        {
            y[static_cast<std::size_t>(k)] = lo + (hi - lo) * idx[static_cast<std::size_t>(k)] / steps;
        }
        if (min_eig(build(y)) >= -psd_tol)
        {
            best = std::min(best, obj(y));
        }
        int k = 0;
        while (k < dim && ++idx[static_cast<std::size_t>(k)] > steps)
        {
            idx[static_cast<std::size_t>(k)] = 0;
            ++k;
        }
        if (k == dim)
        {
            break;
        }
    }
    return best;
}

/// Repeated grid search: each round scans a (2*half+1)^dim grid centred on the
/// best feasible point so far and then shrinks the box. Linear objective over
/// a convex feasible set, so the best value only improves.
/// Minimum of a linear objective over {y : build(y) >= 0} by the central-cut
/// ellipsoid method, started from the ball around the centre of [lo, hi]^dim.
/// Infeasible centres are cut with the eigenvector of the most negative
/// eigenvalue. Returns the best feasible value and point.
inline std::pair<double, std::vector<double>> ellipsoid_minimum(
    int dim, double lo, double hi, const std::function<double(const std::vector<double>&)>& obj,
    const std::function<Sym(const std::vector<double>&)>& build, int iters = 4000)
{
    const std::size_t n = static_cast<std::size_t>(dim);
    const double nd = static_cast<double>(dim);
    std::vector<double> x(n, 0.5 * (lo + hi));
    const double r2 = 0.25 * (hi - lo) * (hi - lo) * nd;
    std::vector<double> P(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        P[i * n + i] = r2;
    }
    auto affine_grad = [&](const std::function<double(const std::vector<double>&)>& h) {
        std::vector<double> g(n);
        std::vector<double> e(n, 0.0);
        const double h0 = h(e);
        for (std::size_t k = 0; k < n; ++k)
        {
            e[k] = 1.0;
            g[k] = h(e) - h0;
            e[k] = 0.0;
        }
        return g;
    };
    const auto c = affine_grad(obj);
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> arg;
    for (int it = 0; it < iters; ++it)
    {
        const Sym m = build(x);
        std::vector<std::vector<double>> vecs;
        const auto ev = jacobi_eigenvalues(m, &vecs);
        std::vector<double> g;
        if (ev.front() >= 0.0)
        {
            const double v = obj(x);
            if (v < best)
            {
                best = v;
                arg = x;
            }
            g = c;
        }
        else
        {
            // keep u^T B(y) u >= 0, an affine constraint violated at x
            const auto& u = vecs.front();
            const auto quad = [&](const std::vector<double>& y) {
                const Sym b = build(y);
                double s = 0.0;
                for (int i = 0; i < b.n; ++i)
                {
                    for (int j = 0; j < b.n; ++j)
                    {
                        s += u[static_cast<std::size_t>(i)] * b(i, j) * u[static_cast<std::size_t>(j)];
                    }
                }
                return s;
            };
            g = affine_grad(quad);
            for (double& gi : g)
            {
                gi = -gi;
            }
        }
        std::vector<double> pg(n, 0.0);
        double gpg = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t j = 0; j < n; ++j)
            {
                pg[i] += P[i * n + j] * g[j];
            }
            gpg += g[i] * pg[i];
        }
        if (!(gpg > 1e-40))
        {
            break;
        }
        const double sq = std::sqrt(gpg);
        if (dim == 1)
        {
            x[0] -= 0.5 * pg[0] / sq;
            P[0] *= 0.25;
            continue;
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            x[i] -= pg[i] / (sq * (nd + 1.0));
        }
        const double f = nd * nd / (nd * nd - 1.0);
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t j = 0; j < n; ++j)
            {
                P[i * n + j] = f * (P[i * n + j] - 2.0 / (nd + 1.0) * pg[i] * pg[j] / gpg);
            }
        }
    }
    return {best, arg};
}

/// Nelder-Mead from x0.
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                       double scale, int max_evals = 20000)
{
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> s(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i)
    {
        s[i + 1][i] += scale;
    }
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
    {
        fs[i] = f(s[i]);
    }
    int evals = static_cast<int>(n + 1);
    while (evals < max_evals)
    {
        std::vector<std::size_t> ord(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
        {
            ord[i] = i;
        }
        std::sort(ord.begin(), ord.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (auto i : ord)
        {
            s2.push_back(s[i]);
            f2.push_back(fs[i]);
        }
        s = std::move(s2);
        fs = std::move(f2);
        if (std::abs(fs[n] - fs[0]) < 1e-15 * (1.0 + std::abs(fs[0])))
        {
            double spread = 0.0;
            for (std::size_t i = 1; i <= n; ++i)
            {
                for (std::size_t k = 0; k < n; ++k)
                {
                    spread = std::max(spread, std::abs(s[i][k] - s[0][k]));
                }
            }
            if (spread < 1e-10)
            {
                break;
            }
        }
        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t k = 0; k < n; ++k)
            {
                c[k] += s[i][k] / static_cast<double>(n);
            }
        }
        auto along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k)
            {
                p[k] = c[k] + t * (s[n][k] - c[k]);
            }
            return p;
        };
        const auto xr = along(-1.0);
        const double fr = f(xr);
        ++evals;
        if (fr < fs[0])
        {
            const auto xe = along(-2.0);
            const double fe = f(xe);
            ++evals;
            if (fe < fr)
            {
                s[n] = xe;
                fs[n] = fe;
            }
            else
            {
                s[n] = xr;
                fs[n] = fr;
            }
        }
        else if (fr < fs[n - 1])
        {
            s[n] = xr;
            fs[n] = fr;
        }
        else
        {
            const bool outside = fr < fs[n];
            const auto xc = along(outside ? -0.5 : 0.5);
            const double fc = f(xc);
            ++evals;
            if (fc < std::min(fr, fs[n]))
            {
                s[n] = xc;
                fs[n] = fc;
            }
            else
            {
                for (std::size_t i = 1; i <= n; ++i)
                {
                    for (std::size_t k = 0; k < n; ++k)
                    {
                        s[i][k] = s[0][k] + 0.5 * (s[i][k] - s[0][k]);
                    }
                    fs[i] = f(s[i]);
                    ++evals;
                }
            }
        }
    }
    return s[static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin())];
}

/// Best value of f over `starts` Nelder-Mead runs from uniform points in
/// [-radius, radius]^n, each restarted once from its own endpoint.
inline double multistart_minimum(const std::function<double(const std::vector<double>&)>& f, int n, int starts,
                                 double radius, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < starts; ++s)
    {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (auto& v : x)
        {
            v = u(rng);
        }
        x = nelder_mead(f, x, 0.5);
        x = nelder_mead(f, x, 0.05);
        best = std::min(best, f(x));
    }
    return best;
}

/// Moments of a finite atomic measure on R^k: sum_l w_l u_l^alpha.
inline double atomic_moment(const std::vector<std::vector<double>>& atoms, const std::vector<double>& w,
                            const std::vector<int>& alpha)
{
    double s = 0.0;
    for (std::size_t l = 0; l < atoms.size(); ++l)
    {
        double t = w[l];
        for (std::size_t k = 0; k < alpha.size(); ++k)
        {
            t *= std::pow(atoms[l][k], alpha[k]);
        }
        s += t;
    }
    return s;
}

/// Published four-digit solution of the cubic-forcing BVP at N = 30.
inline const std::array<double, 30>& cubic_forcing_n30()
{
    static const std::array<double, 30> v{
        -0.0159, -0.0312, -0.0459, -0.0600, -0.0735, -0.0864, -0.0985, -0.1099, -0.1205, -0.1302,
        -0.1391, -0.1470, -0.1540, -0.1599, -0.1646, -0.1682, -0.1705, -0.1715, -0.1710, -0.1689,
        -0.1651, -0.1596, -0.1521, -0.1425, -0.1307, -0.1164, -0.0995, -0.0796, -0.0567, -0.0302};
    return v;
}

} // namespace oracle
