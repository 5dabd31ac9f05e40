///
/// \file report.hpp
///
/// Build -> solve -> extract pipelines behind the command-line front end and
/// the JSON report they produce.
///
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <sparsesos/apps.hpp>
#include <sparsesos/extract.hpp>
#include <sparsesos/relax.hpp>
#include <sparsesos/sdp.hpp>

namespace sparsesos
{

struct PipelineConfig
{
    RelaxationKind kind = RelaxationKind::SparseClique;
    SolverConfig solver;
    ExtractConfig extract;
    /// Write the SDP in SDPA sparse format here before solving.
    std::optional<std::string> export_sdpa;
    /// Re-extract from the clique relaxation when a support-sparse
    /// extraction is not certified.
    bool sparse_fallback = true;

    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
};

struct Report
{
    std::string command;
    /// Descriptor of the instance (family, n, seed, ...) plus the objective
    /// itself under "problem".
    nlohmann::json instance;
    RelaxationKind kind = RelaxationKind::SparseClique;
    std::vector<int> block_sizes;
    std::size_t support_size = 0;
    SolveStatus status = SolveStatus::NumericalTrouble;
    double bound = 0.0;
    double gram_bound = 0.0;
    SolveMetrics metrics;
    std::vector<std::vector<double>> minimizers;
    std::vector<double> err;
    std::vector<int> block_ranks;
    std::vector<bool> block_flat;
    std::string extraction_method;
    /// Relaxation the minimizers were read from; differs from kind after a
    /// fallback.
    RelaxationKind extraction_kind = RelaxationKind::SparseClique;
    bool certified = false;
    std::string message;
    double wall_time = 0.0;
    PipelineConfig config;
    /// Command-specific columns (equation error, RMSD, ...).
    nlohmann::json extra = nlohmann::json::object();

    /// Objective stored in instance["problem"].
    SparseSum problem() const;
    /// err_i = accuracy(problem, minimizers[i], bound).
    void recompute_err();
    double best_err() const;
    /// Index of the minimizer with the smallest err.
    std::optional<std::size_t> best_minimizer() const;

    int exit_code() const;
    /// accu. and wall time columns, padded for terminal tables.
    std::string table_row() const;
    static std::string table_header();

    nlohmann::json to_json() const;
    static Report from_json(const nlohmann::json& j);
};

/// 0 Optimal, 2 DualUnbounded, 3 otherwise. Input errors map to 1 at the
/// call site.
int exit_code(SolveStatus s);

Report run_pipeline(const SparseSum& f, const PipelineConfig& cfg, nlohmann::json descriptor,
                    std::string command = "solve");

/// \throw InputError or ParseError on unreadable input.
Report cmd_solve(const std::string& path, const PipelineConfig& cfg);
Report cmd_bench(const BenchmarkSpec& spec, const PipelineConfig& cfg);
/// extra: eqn_error, max_error and ratio (= max_error / h^2) when an exact
/// solution is registered, plus the solution vector.
Report cmd_bvp(const BvpSpec& spec, const PipelineConfig& cfg);
/// extra: objective_at_estimate, rmsd and planted_objective.
Report cmd_snl(int n, std::uint64_t seed, const PipelineConfig& cfg);
Report cmd_snl(const SnlInstance& inst, const PipelineConfig& cfg);

} // namespace sparsesos
