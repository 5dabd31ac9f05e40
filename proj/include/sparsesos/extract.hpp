///
/// \file extract.hpp
///
/// Minimizer extraction from optimal moment vectors: numerical ranks, flat
/// extension tests, atomic measures via multiplication matrices, per-variable
/// candidate sets and the assembly of full points from per-clique solutions.
///
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include <sparsesos/poly.hpp>
#include <sparsesos/relax.hpp>
#include <sparsesos/sdp.hpp>

namespace sparsesos
{

using MomentMap = std::map<Exponent, double, GradedLex>;

/// Moment vector of a solved model keyed by exponent.
MomentMap moment_map(const LmiSdp& p, const std::vector<double>& y);

/// Moment matrix over a label set: entry (a, b) = y_{labels[a] + labels[b]}.
struct MomentMatrixView
{
    std::vector<Exponent> labels;
    Matrix values;
    int order = 0;
    Clique clique;

    /// M_order(y) on the clique. \throw InputError if a moment is missing.
    static MomentMatrixView build(const MomentMap& y, const Clique& clique, int order);
    /// Largest order <= max_order whose moments are all present, or -1.
    static int available_order(const MomentMap& y, const Clique& clique, int max_order);
};

struct AtomicMeasure
{
    /// atoms[l][j] is coordinate j (in clique order) of atom l.
    std::vector<std::vector<double>> atoms;
    std::vector<double> weights;
    int rank = 0;
    /// ||sum_l w_l m(u_l) m(u_l)^T - M||_F / ||M||_F
    double reconstruction_error = 0.0;
    bool ok = false;
};

/// Count of singular values above rank_tol * max(sigma_1, 1e-300).
int numerical_rank(const Matrix& m, double rank_tol);

struct FlatExtension
{
    bool flat = false;
    /// Common rank rank M_k = rank M_{k+1} (0 if not flat).
    int rank = 0;
    int k = -1;
    /// rank M_0, ..., rank M_d.
    std::vector<int> ranks;
};

/// Smallest k in [0, d-1] with rank M_k = rank M_{k+1} on the clique.
FlatExtension flat_extension_check(const MomentMap& y, const Clique& clique, int d, double rank_tol);

/// Henrion-Lasserre extraction. Failure is reported through ok = false.
AtomicMeasure atomic_support(const MomentMatrixView& m, double rank_tol, std::uint64_t seed = 20090601);

/// Atoms of the univariate Hankel matrix of x_k (sorted); empty if the flat
/// extension test fails or no moments are available.
std::vector<double> variable_candidates(const MomentMap& y, int k, int d, double rank_tol,
                                        std::uint64_t seed = 20090601);

/// All points whose clique restrictions match some tuple of X (within
/// match_tol) and whose coordinates lie in V. X[i] empty-optional means the
/// clique was not extracted. order lists clique indices to visit first.
/// If every V_k is a singleton the concatenation is returned and X ignored.
/// Singleton V_k and single-tuple X_i only fill coordinates that no
/// multi-tuple clique decided: near-coincident atoms can collapse into one
/// at a coarse order.
std::vector<std::vector<double>> assemble_minimizers(
    const std::vector<std::vector<double>>& V,
    const std::vector<std::optional<std::vector<std::vector<double>>>>& X,
    const std::vector<Clique>& cliques, double match_tol, const std::vector<std::size_t>& order = {});

/// |f(x) - fhat| / max(1, |f(x)|)
double accuracy(const SparseSum& f, std::span<const double> x, double fhat);
double accuracy(const Polynomial& f, std::span<const double> x, double fhat);

struct ExtractConfig
{
    double rank_tol = 1e-6;
    double match_tol = 1e-4;
    std::uint64_t seed = 20090601;
};

struct ExtractionResult
{
    std::vector<std::vector<double>> V;
    std::vector<std::optional<std::vector<std::vector<double>>>> X;
    std::vector<std::vector<double>> minimizers;
    std::vector<double> err;
    /// Numerical rank and flat-extension verdict per block.
    std::vector<int> block_ranks;
    std::vector<bool> block_flat;
    /// "rank-one", "flat-extension" or "heuristic".
    std::string method;
    bool certified = false;
    std::string message;

    nlohmann::json to_json() const;
};

ExtractionResult extract_minimizers(const SparseSum& f, const Relaxation& r, const SdpSolution& sol,
                                    const ExtractConfig& cfg = {});

} // namespace sparsesos
