///
/// \file apps.hpp
///
/// Instance generators: the classical sparse test functions, seeded random
/// families, nonlinear least squares from sparse systems, discretized
/// two-point boundary value problems and planar sensor network
/// localization.
///
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include <sparsesos/poly.hpp>

namespace sparsesos
{

enum class Family
{
    ChainedSingular,
    ChainedWood,
    GenRosenbrock,
    BroydenTridiagonal,
    BroydenBanded,
    DiscreteBoundaryValue
};

/// Kebab-case names: chained-singular, chained-wood, gen-rosenbrock,
/// broyden-tridiagonal, broyden-banded, discrete-boundary-value.
std::string to_string(Family f);
Family family_from_string(const std::string& s);

struct BenchmarkSpec
{
    Family family = Family::GenRosenbrock;
    int n = 0;

    nlohmann::json to_json() const;
    static BenchmarkSpec from_json(const nlohmann::json& j);
};

/// One summand per additive term, on the variables that term uses.
/// \throw InputError for an invalid n (multiple of 4 for the chained
///        families, n >= 2 for Rosenbrock, n >= 1 otherwise).
SparseSum benchmark(const BenchmarkSpec& spec);

/// f_i = m_d(x_Di)^T A_i m_d(x_Di) + b_i^T m_{2d-1}(x_Di), A_i = n I + B B^T,
/// B and b_i uniform on [0, 1], clique sizes uniform on [1, dmax].
SparseSum random_clique_instance(int n, int m, int d, int dmax, std::uint64_t seed);

/// f = m_d(x)^T A m_d(x) + b^T m_{2d-1}(x) with the same distributions.
Polynomial random_dense_instance(int n, int d, std::uint64_t seed);

/// Quadratic summands on the chain cliques {i, ..., i+width-1}. The
/// summands are individually indefinite; diagonal terms added to the first
/// clique of each variable make the total strictly convex.
SparseSum random_chain_instance(int n, int width, std::uint64_t seed);

using PolynomialSystem = std::vector<std::pair<Polynomial, Clique>>;

/// Summands g_i^2 on the given cliques.
/// \throw InputError if some g_i uses a variable outside its clique.
SparseSum nls_from_system(const PolynomialSystem& system);

/// 2x1^2 - 3x1 + 2x2 - 1, 2xi^2 + x(i-1) - 3xi + 2x(i+1) - 1, ...,
/// 2xn^2 + x(n-1) - 3xn - 1.
PolynomialSystem chain_system(int n);

/// max_i |g_i(x)|
double residual_norm_inf(const PolynomialSystem& system, std::span<const double> x);

struct BvpSpec
{
    /// F(t, x, x', x'') with t = x1, x = x2, x' = x3, x'' = x4.
    Polynomial residual{4};
    double a = 0.0;
    double b = 1.0;
    double alpha = 0.0;
    double beta = 0.0;
    int N = 1;
    std::string name;

    double h() const noexcept { return (b - a) / (N + 1); }
    double t(int k) const noexcept { return a + h() * k; }

    nlohmann::json to_json() const;
    static BvpSpec from_json(const nlohmann::json& j);
};

/// Built-in templates: "basic" (x'' - 2x^3, x(0) = 1/2, x(1) = 1/3) and
/// "cubic-forcing" (x'' = (x + t + 1)^3 / 2, x(0) = x(1) = 0).
BvpSpec bvp_template(const std::string& name, int N);

/// Exact solution for templates that have one.
std::optional<double> bvp_exact(const BvpSpec& spec, double t);

struct BvpSystem
{
    PolynomialSystem system;
    SparseSum objective;
};

/// Residual k is h^2 F(t_k, x_k, (x_{k+1}-x_{k-1})/2h, (x_{k-1}-2x_k+x_{k+1})/h^2)
/// on the clique {k-1, k, k+1} intersected with [N].
BvpSystem bvp_discretize(const BvpSpec& spec);

struct SnlInstance
{
    using Point = std::array<double, 2>;

    std::vector<Point> sensors;
    std::vector<Point> anchors;
    /// (i, j, d_ij^2), i < j, 0-based sensors.
    std::vector<std::tuple<int, int, double>> sensor_edges;
    /// (i, k, e_ik^2), sensor i, anchor k.
    std::vector<std::tuple<int, int, double>> anchor_edges;
    std::uint64_t seed = 0;

    int size() const noexcept { return static_cast<int>(sensors.size()); }

    nlohmann::json to_json() const;
    static SnlInstance from_json(const nlohmann::json& j);
};

/// Sensors uniform on [-0.5, 0.5]^2, anchors (+-0.45, +-0.45), radius 0.3,
/// at most 10 forward neighbours per sensor chosen nearest first.
SnlInstance snl_generate(int n, std::uint64_t seed, double radius = 0.3, int max_degree = 10);

/// Sensor i owns variables 2i and 2i+1.
SparseSum snl_objective(const SnlInstance& inst);

/// Planted positions flattened like the objective's variables.
std::vector<double> snl_truth(const SnlInstance& inst);

/// sqrt(1/n sum_i |xhat_i - x_i|^2) over planar points stored flat.
double rmsd(std::span<const double> estimate, std::span<const double> truth);

} // namespace sparsesos
