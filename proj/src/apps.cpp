#include <sparsesos/apps.hpp>
#include <sparsesos/random.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sparsesos
{

namespace
{

constexpr std::array<std::pair<Family, const char*>, 6> kFamilies{{
    {Family::ChainedSingular, "chained-singular"},
    {Family::ChainedWood, "chained-wood"},
    {Family::GenRosenbrock, "gen-rosenbrock"},
    {Family::BroydenTridiagonal, "broyden-tridiagonal"},
    {Family::BroydenBanded, "broyden-banded"},
    {Family::DiscreteBoundaryValue, "discrete-boundary-value"},
}};

/// Builds summands from polynomials, using each polynomial's own variables
/// as its clique.
class SumBuilder
{
public:
    explicit SumBuilder(int n) : m_n(n) {}

    Polynomial x(int i) const { return Polynomial::variable(m_n, i); }
    Polynomial c(double v) const { return Polynomial::constant(m_n, v); }

    void add(const Polynomial& p) { add(p, p.variables()); }
    void add(const Polynomial& p, Clique clique)
    {
        if (clique.empty())
        {
            clique = {0};
        }
        m_summands.push_back({std::move(clique), p});
    }

    SparseSum build() { return SparseSum(m_n, std::move(m_summands)); }

private:
    int m_n;
    std::vector<Summand> m_summands;
};

Clique window(int lo, int hi, int n)
{
    Clique c;
    for (int v = std::max(lo, 0); v <= std::min(hi, n - 1); ++v)
    {
        c.push_back(v);
    }
    return c;
}

/// Random subset of [0, n) of the given size, sorted.
Clique random_subset(Rng& rng, int n, int size)
{
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < size; ++i)
    {
        const int j = uniform_int(rng, i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    Clique c(pool.begin(), pool.begin() + size);
    std::sort(c.begin(), c.end());
    return c;
}

/// m_d^T (n I + B B^T) m_d + b^T m_{2d-1} on the given variables.
Polynomial random_form(Rng& rng, int nvars, const Clique& vars, int d, double diag)
{
    const auto md = monomials_up_to(vars, d);
    const auto mb = monomials_up_to(vars, 2 * d - 1);
    const std::size_t N = md.size();
    std::vector<double> B(N * N);
    for (auto& v : B)
    {
        v = uniform01(rng);
    }
    Polynomial f(nvars);
    for (std::size_t r = 0; r < N; ++r)
    {
        for (std::size_t c = 0; c < N; ++c)
        {
            double a = (r == c) ? diag : 0.0;
            for (std::size_t k = 0; k < N; ++k)
            {
                a += B[r * N + k] * B[c * N + k];
            }
            f.add_term(md[r] + md[c], a);
        }
    }
    for (const auto& e : mb)
    {
        f.add_term(e, uniform01(rng));
    }
    return f;
}

} // namespace

std::string to_string(Family f)
{
    for (const auto& [fam, name] : kFamilies)
    {
        if (fam == f)
        {
            return name;
        }
    }
    return "gen-rosenbrock";
}

Family family_from_string(const std::string& s)
{
    for (const auto& [fam, name] : kFamilies)
    {
        if (s == name)
        {
            return fam;
        }
    }
    throw InputError("unknown benchmark family '" + s + "'");
}

nlohmann::json BenchmarkSpec::to_json() const
{
    return {{"family", to_string(family)}, {"n", n}};
}

BenchmarkSpec BenchmarkSpec::from_json(const nlohmann::json& j)
{
    BenchmarkSpec s;
    s.family = family_from_string(j.at("family").get<std::string>());
    s.n = j.at("n").get<int>();
    return s;
}

SparseSum benchmark(const BenchmarkSpec& spec)
{
    const int n = spec.n;
    SumBuilder sb(n);
    auto x = [&](int i) { return sb.x(i - 1); }; // 1-based, as in the usual statements
    auto one = sb.c(1.0);
    switch (spec.family)
    {
    case Family::ChainedSingular:
    case Family::ChainedWood:
        if (n < 4 || n % 4 != 0)
        {
            throw InputError(to_string(spec.family) + " needs n to be a positive multiple of 4");
        }
        for (int i = 1; i <= n - 3; i += 2)
        {
            if (spec.family == Family::ChainedSingular)
            {
                const double s = 1e-5;
                sb.add(s * (x(i) + 10.0 * x(i + 1)).pow(2));
                sb.add(s * 5.0 * (x(i + 2) - x(i + 3)).pow(2));
                sb.add(s * (x(i + 1) - 2.0 * x(i + 2)).pow(4));
                sb.add(s * 10.0 * (x(i) - 10.0 * x(i + 3)).pow(4));
            }
            else
            {
                sb.add(100.0 * (x(i + 1) - x(i).pow(2)).pow(2));
                sb.add((one - x(i)).pow(2));
                sb.add(90.0 * (x(i + 3) - x(i + 2).pow(2)).pow(2));
                sb.add((one - x(i + 2)).pow(2));
                sb.add(10.0 * (x(i + 1) + x(i + 3) - 2.0 * one).pow(2));
                sb.add(0.1 * (x(i + 1) - x(i + 3)).pow(2));
            }
        }
        break;
    case Family::GenRosenbrock:
        if (n < 2)
        {
            throw InputError("gen-rosenbrock needs n >= 2");
        }
        for (int i = 2; i <= n; ++i)
        {
            sb.add(100.0 * (x(i) - x(i - 1).pow(2)).pow(2));
            sb.add((one - x(i)).pow(2));
        }
        break;
    case Family::BroydenTridiagonal:
        if (n < 1)
        {
            throw InputError("broyden-tridiagonal needs n >= 1");
        }
        for (int i = 1; i <= n; ++i)
        {
            Polynomial g = (3.0 * one - 2.0 * x(i)) * x(i) + one;
            if (i > 1)
            {
                g -= x(i - 1);
            }
            if (i < n)
            {
                g -= 2.0 * x(i + 1);
            }
            sb.add(g.pow(2), window(i - 2, i, n));
        }
        break;
    case Family::BroydenBanded:
        if (n < 1)
        {
            throw InputError("broyden-banded needs n >= 1");
        }
        for (int i = 1; i <= n; ++i)
        {
            Polynomial g = x(i) * (2.0 * one + 10.0 * x(i).pow(2)) + one;
            for (int j = std::max(1, i - 5); j <= std::min(n, i + 1); ++j)
            {
                if (j != i)
                {
                    g -= (one + x(j)) * x(j);
                }
            }
            sb.add(g.pow(2), window(i - 6, i, n));
        }
        break;
    case Family::DiscreteBoundaryValue:
    {
        if (n < 1)
        {
            throw InputError("discrete-boundary-value needs n >= 1");
        }
        const double h = 1.0 / (n + 1);
        for (int i = 1; i <= n; ++i)
        {
            const double t = i * h;
            Polynomial g = 2.0 * x(i) + 0.5 * h * h * (x(i) + (t + 1.0) * one).pow(3);
            if (i > 1)
            {
                g -= x(i - 1);
            }
            if (i < n)
            {
                g -= x(i + 1);
            }
            sb.add(g.pow(2), window(i - 2, i, n));
        }
        break;
    }
    }
    return sb.build();
}

SparseSum random_clique_instance(int n, int m, int d, int dmax, std::uint64_t seed)
{
    if (n < 1 || m < 1 || d < 1 || dmax < 1 || dmax > n)
    {
        throw InputError("random_clique_instance needs n, m, d >= 1 and 1 <= dmax <= n");
    }
    Rng rng(seed);
    std::vector<Summand> summands;
    for (int i = 0; i < m; ++i)
    {
        const int size = uniform_int(rng, 1, dmax);
        Clique c = random_subset(rng, n, size);
        Polynomial f = random_form(rng, n, c, d, static_cast<double>(n));
        summands.push_back({std::move(c), std::move(f)});
    }
    return SparseSum(n, std::move(summands));
}

Polynomial random_dense_instance(int n, int d, std::uint64_t seed)
{
    if (n < 1 || d < 1)
    {
        throw InputError("random_dense_instance needs n, d >= 1");
    }
    Rng rng(seed);
    Clique all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    return random_form(rng, n, all, d, static_cast<double>(n));
}

SparseSum random_chain_instance(int n, int width, std::uint64_t seed)
{
    if (width < 1 || n < width)
    {
        throw InputError("random_chain_instance needs 1 <= width <= n");
    }
    Rng rng(seed);
    std::vector<Summand> summands;
    std::vector<double> hess(static_cast<std::size_t>(n * n), 0.0);
    for (int s = 0; s + width <= n; ++s)
    {
        const Clique c = window(s, s + width - 1, n);
        Polynomial f(n);
        for (std::size_t a = 0; a < c.size(); ++a)
        {
            for (std::size_t b = a; b < c.size(); ++b)
            {
                const double q = uniform(rng, -1.0, 1.0);
                f.add_term(Exponent::unit(c[a]) + Exponent::unit(c[b]), q);
                hess[static_cast<std::size_t>(c[a] * n + c[b])] += (a == b) ? 2.0 * q : q;
                if (a != b)
                {
                    hess[static_cast<std::size_t>(c[b] * n + c[a])] += q;
                }
            }
            f.add_term(Exponent::unit(c[a]), uniform(rng, -1.0, 1.0));
        }
        f.add_term(Exponent{}, uniform(rng, -1.0, 1.0));
        summands.push_back({c, std::move(f)});
    }
    // Gershgorin shift so the total Hessian is positive definite with margin 1.
    double shift = 0.0;
    for (int r = 0; r < n; ++r)
    {
        double off = 0.0;
        for (int c = 0; c < n; ++c)
        {
            if (c != r)
            {
                off += std::abs(hess[static_cast<std::size_t>(r * n + c)]);
            }
        }
        shift = std::max(shift, off - hess[static_cast<std::size_t>(r * n + r)] + 1.0);
    }
    for (int k = 0; k < n; ++k)
    {
        for (auto& s : summands)
        {
            if (std::binary_search(s.clique.begin(), s.clique.end(), k))
            {
                s.poly.add_term(Exponent::unit(k, 2), 0.5 * shift);
                break;
            }
        }
    }
    return SparseSum(n, std::move(summands));
}

SparseSum nls_from_system(const PolynomialSystem& system)
{
    if (system.empty())
    {
        throw InputError("empty polynomial system");
    }
    const int n = system.front().first.num_vars();
    std::vector<Summand> summands;
    for (const auto& [g, c] : system)
    {
        if (g.num_vars() != n)
        {
            throw InputError("system polynomials disagree on the variable count");
        }
        for (int v : g.variables())
        {
            if (!std::binary_search(c.begin(), c.end(), v))
            {
                throw InputError("equation uses x" + std::to_string(v + 1) + " outside its clique");
            }
        }
        summands.push_back({c, g.pow(2)});
    }
    return SparseSum(n, std::move(summands));
}

PolynomialSystem chain_system(int n)
{
    if (n < 2)
    {
        throw InputError("chain_system needs n >= 2");
    }
    PolynomialSystem sys;
    auto x = [&](int i) { return Polynomial::variable(n, i - 1); };
    const auto one = Polynomial::constant(n, 1.0);
    for (int i = 1; i <= n; ++i)
    {
        Polynomial g = 2.0 * x(i).pow(2) - 3.0 * x(i) - one;
        if (i > 1)
        {
            g += x(i - 1);
        }
        if (i < n)
        {
            g += 2.0 * x(i + 1);
        }
        sys.emplace_back(std::move(g), window(i - 2, i, n));
    }
    return sys;
}

double residual_norm_inf(const PolynomialSystem& system, std::span<const double> x)
{
    double r = 0.0;
    for (const auto& [g, c] : system)
    {
        r = std::max(r, std::abs(g.evaluate(x)));
    }
    return r;
}

nlohmann::json BvpSpec::to_json() const
{
    return {{"name", name}, {"residual", residual.to_string()}, {"a", a}, {"b", b},
            {"alpha", alpha}, {"beta", beta}, {"N", N}};
}

BvpSpec BvpSpec::from_json(const nlohmann::json& j)
{
    BvpSpec s;
    s.name = j.value("name", std::string{});
    s.residual = parse_polynomial(j.at("residual").get<std::string>(), 4);
    s.a = j.value("a", 0.0);
    s.b = j.value("b", 1.0);
    s.alpha = j.at("alpha").get<double>();
    s.beta = j.at("beta").get<double>();
    s.N = j.at("N").get<int>();
    if (s.N < 1 || !(s.b > s.a))
    {
        throw InputError("BVP needs N >= 1 and b > a");
    }
    return s;
}

BvpSpec bvp_template(const std::string& name, int N)
{
    if (N < 1)
    {
        throw InputError("BVP needs N >= 1");
    }
    BvpSpec s;
    s.name = name;
    s.N = N;
    if (name == "basic")
    {
        s.residual = parse_polynomial("x4 - 2*x2^3", 4);
        s.alpha = 0.5;
        s.beta = 1.0 / 3.0;
    }
    else if (name == "cubic-forcing")
    {
        // x'' = (x + t + 1)^3 / 2
        const auto t = Polynomial::variable(4, 0);
        const auto x = Polynomial::variable(4, 1);
        s.residual = Polynomial::variable(4, 3) - 0.5 * (x + t + Polynomial::constant(4, 1.0)).pow(3);
        s.alpha = 0.0;
        s.beta = 0.0;
    }
    else
    {
        throw InputError("unknown BVP template '" + name + "' (expected basic or cubic-forcing)");
    }
    return s;
}

std::optional<double> bvp_exact(const BvpSpec& spec, double t)
{
    if (spec.name == "basic")
    {
        return 1.0 / (t + 2.0);
    }
    return std::nullopt;
}

BvpSystem bvp_discretize(const BvpSpec& spec)
{
    if (spec.N < 1)
    {
        throw InputError("BVP needs N >= 1");
    }
    if (spec.residual.num_vars() != 4)
    {
        throw InputError("BVP residual must be a polynomial in 4 symbols");
    }
    const int N = spec.N;
    const double h = spec.h();
    auto node = [&](int k) {
        if (k == 0)
        {
            return Polynomial::constant(N, spec.alpha);
        }
        if (k == N + 1)
        {
            return Polynomial::constant(N, spec.beta);
        }
        return Polynomial::variable(N, k - 1);
    };
    BvpSystem out;
    for (int k = 1; k <= N; ++k)
    {
        const std::array<Polynomial, 4> images{
            Polynomial::constant(N, spec.t(k)),
            node(k),
            (node(k + 1) - node(k - 1)) * (1.0 / (2.0 * h)),
            (node(k - 1) - 2.0 * node(k) + node(k + 1)) * (1.0 / (h * h)),
        };
        Polynomial g = spec.residual.compose(images) * (h * h);
        out.system.emplace_back(std::move(g), window(k - 2, k, N));
    }
    out.objective = nls_from_system(out.system);
    return out;
}

nlohmann::json SnlInstance::to_json() const
{
    nlohmann::json j;
    j["seed"] = seed;
    j["sensors"] = sensors;
    j["anchors"] = anchors;
    auto se = nlohmann::json::array();
    for (const auto& [i, k, d2] : sensor_edges)
    {
        se.push_back({i + 1, k + 1, d2});
    }
    auto ae = nlohmann::json::array();
    for (const auto& [i, k, d2] : anchor_edges)
    {
        ae.push_back({i + 1, k + 1, d2});
    }
    j["sensor_edges"] = se;
    j["anchor_edges"] = ae;
    return j;
}

SnlInstance SnlInstance::from_json(const nlohmann::json& j)
{
    SnlInstance s;
    s.seed = j.value("seed", std::uint64_t{0});
    s.sensors = j.at("sensors").get<std::vector<Point>>();
    s.anchors = j.at("anchors").get<std::vector<Point>>();
    const int n = s.size();
    const int m = static_cast<int>(s.anchors.size());
    for (const auto& e : j.at("sensor_edges"))
    {
        const int a = e.at(0).get<int>() - 1;
        const int b = e.at(1).get<int>() - 1;
        if (a < 0 || b <= a || b >= n)
        {
            throw InputError("sensor edge out of range");
        }
        s.sensor_edges.emplace_back(a, b, e.at(2).get<double>());
    }
    for (const auto& e : j.at("anchor_edges"))
    {
        const int a = e.at(0).get<int>() - 1;
        const int k = e.at(1).get<int>() - 1;
        if (a < 0 || a >= n || k < 0 || k >= m)
        {
            throw InputError("anchor edge out of range");
        }
        s.anchor_edges.emplace_back(a, k, e.at(2).get<double>());
    }
    return s;
}

namespace
{

double dist2(const SnlInstance::Point& p, const SnlInstance::Point& q)
{
    const double dx = p[0] - q[0];
    const double dy = p[1] - q[1];
    return dx * dx + dy * dy;
}

} // namespace

SnlInstance snl_generate(int n, std::uint64_t seed, double radius, int max_degree)
{
    if (n < 1)
    {
        throw InputError("snl needs n >= 1");
    }
    SnlInstance s;
    s.seed = seed;
    Rng rng(seed);
    for (int i = 0; i < n; ++i)
    {
        const double px = uniform(rng, -0.5, 0.5);
        const double py = uniform(rng, -0.5, 0.5);
        s.sensors.push_back({px, py});
    }
    s.anchors = {{{-0.45, -0.45}}, {{0.45, -0.45}}, {{-0.45, 0.45}}, {{0.45, 0.45}}};
    const double r2 = radius * radius;
    for (int i = 0; i < n; ++i)
    {
        std::vector<std::pair<double, int>> near;
        for (int j = i + 1; j < n; ++j)
        {
            const double d2 = dist2(s.sensors[static_cast<std::size_t>(i)], s.sensors[static_cast<std::size_t>(j)]);
            if (d2 <= r2)
            {
                near.emplace_back(d2, j);
            }
        }
        std::sort(near.begin(), near.end());
        if (static_cast<int>(near.size()) > max_degree)
        {
            near.resize(static_cast<std::size_t>(max_degree));
        }
        std::sort(near.begin(), near.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
        for (const auto& [d2, j] : near)
        {
            s.sensor_edges.emplace_back(i, j, d2);
        }
        for (int k = 0; k < static_cast<int>(s.anchors.size()); ++k)
        {
            const double d2 = dist2(s.sensors[static_cast<std::size_t>(i)], s.anchors[static_cast<std::size_t>(k)]);
            if (d2 <= r2)
            {
                s.anchor_edges.emplace_back(i, k, d2);
            }
        }
    }
    return s;
}

SparseSum snl_objective(const SnlInstance& inst)
{
    const int nv = 2 * inst.size();
    std::vector<Summand> summands;
    auto v = [&](int i) { return Polynomial::variable(nv, i); };
    auto c = [&](double x) { return Polynomial::constant(nv, x); };
    for (const auto& [i, j, d2] : inst.sensor_edges)
    {
        const Polynomial q = (v(2 * i) - v(2 * j)).pow(2) + (v(2 * i + 1) - v(2 * j + 1)).pow(2) - c(d2);
        summands.push_back({make_clique({2 * i, 2 * i + 1, 2 * j, 2 * j + 1}, nv), q.pow(2)});
    }
    for (const auto& [i, k, e2] : inst.anchor_edges)
    {
        const auto& a = inst.anchors[static_cast<std::size_t>(k)];
        const Polynomial q = (v(2 * i) - c(a[0])).pow(2) + (v(2 * i + 1) - c(a[1])).pow(2) - c(e2);
        summands.push_back({make_clique({2 * i, 2 * i + 1}, nv), q.pow(2)});
    }
    if (summands.empty())
    {
        throw InputError("sensor network has no edges");
    }
    return SparseSum(nv, std::move(summands));
}

std::vector<double> snl_truth(const SnlInstance& inst)
{
    std::vector<double> x;
    for (const auto& p : inst.sensors)
    {
        x.push_back(p[0]);
        x.push_back(p[1]);
    }
    return x;
}

double rmsd(std::span<const double> estimate, std::span<const double> truth)
{
    if (estimate.size() != truth.size() || truth.size() % 2 != 0 || truth.empty())
    {
        throw InputError("rmsd needs two flat planar point lists of equal length");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k)
    {
        const double d = estimate[k] - truth[k];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(truth.size() / 2));
}

} // namespace sparsesos
