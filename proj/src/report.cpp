#include <sparsesos/report.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace sparsesos
{

namespace
{

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_or_inf(const std::vector<double>& v)
{
    if (v.empty())
    {
        return std::numeric_limits<double>::infinity();
    }
    return *std::max_element(v.begin(), v.end());
}

// JSON has no infinity; large values are written as null and read back as inf.
nlohmann::json finite_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double null_as_inf(const nlohmann::json& j)
{
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

} // namespace

nlohmann::json PipelineConfig::to_json() const
{
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["tol_gap"] = solver.tol_gap;
    j["tol_feas"] = solver.tol_feas;
    j["max_iters"] = solver.max_iters;
    j["rank_tol"] = extract.rank_tol;
    j["match_tol"] = extract.match_tol;
    j["seed"] = extract.seed;
    j["sparse_fallback"] = sparse_fallback;
    if (export_sdpa)
    {
        j["export_sdpa"] = *export_sdpa;
    }
    return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j)
{
    PipelineConfig c;
    c.kind = relaxation_kind_from_string(j.at("kind").get<std::string>());
    c.solver.tol_gap = j.at("tol_gap").get<double>();
    c.solver.tol_feas = j.at("tol_feas").get<double>();
    c.solver.max_iters = j.at("max_iters").get<int>();
    c.extract.rank_tol = j.at("rank_tol").get<double>();
    c.solver.rank_tol = c.extract.rank_tol;
    c.extract.match_tol = j.at("match_tol").get<double>();
    c.extract.seed = j.at("seed").get<std::uint64_t>();
    c.sparse_fallback = j.value("sparse_fallback", true);
    if (j.contains("export_sdpa"))
    {
        c.export_sdpa = j["export_sdpa"].get<std::string>();
    }
    return c;
}

int exit_code(SolveStatus s)
{
    switch (s)
    {
    case SolveStatus::Optimal:
        return 0;
    case SolveStatus::DualUnbounded:
        return 2;
    default:
        return 3;
    }
}

SparseSum Report::problem() const
{
    return SparseSum::from_json(instance.at("problem"));
}

void Report::recompute_err()
{
    const SparseSum f = problem();
    err.clear();
    for (const auto& x : minimizers)
    {
        err.push_back(accuracy(f, x, bound));
    }
}

double Report::best_err() const
{
    if (err.empty())
    {
        return std::numeric_limits<double>::infinity();
    }
    return *std::min_element(err.begin(), err.end());
}

std::optional<std::size_t> Report::best_minimizer() const
{
    if (err.empty())
    {
        return std::nullopt;
    }
    return static_cast<std::size_t>(std::min_element(err.begin(), err.end()) - err.begin());
}

int Report::exit_code() const
{
    return sparsesos::exit_code(status);
}

std::string Report::table_header()
{
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-26s %6s %-15s %-17s %12s %10s %9s", "instance", "n", "kind", "status", "bound",
                  "accu.", "time[s]");
    return buf;
}

std::string Report::table_row() const
{
    std::string name = instance.value("family", instance.value("name", command));
    const int n = instance.contains("problem") ? instance["problem"].value("n", 0) : 0;
    char acc[32];
    if (err.empty())
    {
        std::snprintf(acc, sizeof(acc), "%10s", "-");
    }
    else
    {
        std::snprintf(acc, sizeof(acc), "%10.1e", best_err());
    }
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%-26s %6d %-15s %-17s %12.4e %s %9.2f", name.c_str(), n, to_string(kind).c_str(),
                  to_string(status).c_str(), bound, acc, wall_time);
    return buf;
}

nlohmann::json Report::to_json() const
{
    nlohmann::json j;
    j["command"] = command;
    j["instance"] = instance;
    j["kind"] = to_string(kind);
    j["block_sizes"] = block_sizes;
    j["support_size"] = support_size;
    j["status"] = to_string(status);
    j["bound"] = bound;
    j["gram_bound"] = gram_bound;
    j["metrics"] = {{"primal_residual", metrics.primal_residual},
                    {"dual_residual", metrics.dual_residual},
                    {"rel_gap", metrics.rel_gap},
                    {"abs_gap", metrics.abs_gap},
                    {"iterations", metrics.iterations}};
    j["minimizers"] = minimizers;
    auto e = nlohmann::json::array();
    for (double v : err)
    {
        e.push_back(finite_or_null(v));
    }
    j["err"] = e;
    j["block_ranks"] = block_ranks;
    j["block_flat"] = block_flat;
    j["extraction"] = {{"method", extraction_method}, {"kind", to_string(extraction_kind)}, {"certified", certified}};
    if (!message.empty())
    {
        j["message"] = message;
    }
    j["wall_time"] = wall_time;
    j["wall_time_note"] = "wall-clock seconds on this machine; not comparable to published CPU times";
    j["config"] = config.to_json();
    j["extra"] = extra;
    return j;
}

Report Report::from_json(const nlohmann::json& j)
{
    Report r;
    r.command = j.at("command").get<std::string>();
    r.instance = j.at("instance");
    r.kind = relaxation_kind_from_string(j.at("kind").get<std::string>());
    r.block_sizes = j.at("block_sizes").get<std::vector<int>>();
    r.support_size = j.at("support_size").get<std::size_t>();
    r.status = status_from_string(j.at("status").get<std::string>());
    r.bound = j.at("bound").get<double>();
    r.gram_bound = j.at("gram_bound").get<double>();
    const auto& m = j.at("metrics");
    r.metrics.primal_residual = m.at("primal_residual").get<double>();
    r.metrics.dual_residual = m.at("dual_residual").get<double>();
    r.metrics.rel_gap = m.at("rel_gap").get<double>();
    r.metrics.abs_gap = m.at("abs_gap").get<double>();
    r.metrics.iterations = m.at("iterations").get<int>();
    r.minimizers = j.at("minimizers").get<std::vector<std::vector<double>>>();
    for (const auto& v : j.at("err"))
    {
        r.err.push_back(null_as_inf(v));
    }
    r.block_ranks = j.at("block_ranks").get<std::vector<int>>();
    r.block_flat = j.at("block_flat").get<std::vector<bool>>();
    const auto& ex = j.at("extraction");
    r.extraction_method = ex.at("method").get<std::string>();
    r.extraction_kind = relaxation_kind_from_string(ex.at("kind").get<std::string>());
    r.certified = ex.at("certified").get<bool>();
    r.message = j.value("message", std::string{});
    r.wall_time = j.at("wall_time").get<double>();
    r.config = PipelineConfig::from_json(j.at("config"));
    r.extra = j.value("extra", nlohmann::json::object());
    return r;
}

namespace
{

struct Attempt
{
    Relaxation relax;
    SdpSolution sol;
    ExtractionResult ex;
};

Attempt solve_and_extract(const SparseSum& f, RelaxationKind kind, const PipelineConfig& cfg, bool export_now)
{
    Attempt a{build(f, kind), {}, {}};
    if (export_now && cfg.export_sdpa)
    {
        std::ofstream out(*cfg.export_sdpa);
        if (!out)
        {
            throw InputError("cannot write " + *cfg.export_sdpa);
        }
        out << export_sdpa(a.relax.sdp);
    }
    a.sol = solve(a.relax.sdp, cfg.solver);
    a.ex = extract_minimizers(f, a.relax, a.sol, cfg.extract);
    return a;
}

} // namespace

Report run_pipeline(const SparseSum& f, const PipelineConfig& cfg_in, nlohmann::json descriptor, std::string command)
{
    PipelineConfig cfg = cfg_in;
    cfg.solver.rank_tol = cfg.extract.rank_tol;
    cfg.solver.validate();
    const auto t0 = std::chrono::steady_clock::now();

    Report rep;
    rep.command = std::move(command);
    rep.instance = std::move(descriptor);
    if (!rep.instance.is_object())
    {
        rep.instance = nlohmann::json::object();
    }
    rep.instance["problem"] = f.to_json();
    rep.kind = cfg.kind;
    rep.config = cfg;

    Attempt primary = solve_and_extract(f, cfg.kind, cfg, true);
    rep.block_sizes = primary.relax.info.block_sizes();
    rep.support_size = primary.relax.info.F.size();
    rep.status = primary.sol.status;
    rep.bound = primary.sol.objective;
    rep.gram_bound = primary.sol.gram_bound;
    rep.metrics = primary.sol.metrics;
    rep.block_ranks = primary.ex.block_ranks;
    rep.block_flat = primary.ex.block_flat;
    rep.extraction_method = primary.ex.method;
    rep.extraction_kind = cfg.kind;
    rep.certified = primary.ex.certified;
    rep.message = primary.ex.message;
    rep.minimizers = primary.ex.minimizers;
    rep.recompute_err();

    // Moments near degenerate zeros converge slowly, leaving small spurious
    // eigenvalues; coarser rank thresholds are tried on the same solution.
    double used_tol = cfg.extract.rank_tol;
    for (double tol = cfg.extract.rank_tol * 10.0;
         tol <= 1e-3 * (1.0 + 1e-9) && rep.status != SolveStatus::DualUnbounded &&
         (!rep.certified || max_or_inf(rep.err) > 1e-6);
         tol *= 10.0)
    {
        ExtractConfig ec = cfg.extract;
        ec.rank_tol = tol;
        const auto ex = extract_minimizers(f, primary.relax, primary.sol, ec);
        std::vector<double> e;
        for (const auto& x : ex.minimizers)
        {
            e.push_back(accuracy(f, x, rep.bound));
        }
        if (ex.certified && max_or_inf(e) < max_or_inf(rep.err))
        {
            rep.minimizers = ex.minimizers;
            rep.err = e;
            rep.block_ranks = ex.block_ranks;
            rep.block_flat = ex.block_flat;
            rep.extraction_method = ex.method;
            rep.certified = true;
            rep.message = ex.message;
            used_tol = tol;
        }
    }
    rep.extra["rank_tol_used"] = used_tol;

    const bool weak = !rep.certified || max_or_inf(rep.err) > 1e-6;
    if (cfg.kind == RelaxationKind::SparserSupport && cfg.sparse_fallback && weak &&
        rep.status != SolveStatus::DualUnbounded)
    {
        Attempt alt = solve_and_extract(f, RelaxationKind::SparseClique, cfg, false);
        std::vector<double> alt_err;
        for (const auto& x : alt.ex.minimizers)
        {
            alt_err.push_back(accuracy(f, x, rep.bound));
        }
        const double alt_best = alt_err.empty() ? std::numeric_limits<double>::infinity()
                                                : *std::min_element(alt_err.begin(), alt_err.end());
        if (alt.ex.certified && alt_best < rep.best_err())
        {
            rep.minimizers = alt.ex.minimizers;
            rep.err = alt_err;
            rep.extraction_method = alt.ex.method;
            rep.extraction_kind = RelaxationKind::SparseClique;
            rep.certified = true;
            rep.message = "support-sparse extraction failed; minimizers from the clique relaxation";
            rep.extra["fallback_bound"] = alt.sol.objective;
            rep.extra["fallback_block_ranks"] = alt.ex.block_ranks;
        }
    }
    rep.wall_time = seconds_since(t0);
    return rep;
}

Report cmd_solve(const std::string& path, const PipelineConfig& cfg)
{
    std::ifstream in(path);
    if (!in)
    {
        throw InputError("cannot open " + path);
    }
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw InputError(path + ": " + e.what());
    }
    SparseSum f;
    try
    {
        f = SparseSum::from_json(j);
    }
    catch (const ParseError& e)
    {
        throw ParseError(path + ": " + e.detail(), e.position());
    }
    catch (const InputError& e)
    {
        throw InputError(path + ": " + e.what());
    }
    return run_pipeline(f, cfg, {{"file", path}}, "solve");
}

Report cmd_bench(const BenchmarkSpec& spec, const PipelineConfig& cfg)
{
    return run_pipeline(benchmark(spec), cfg, spec.to_json(), "bench");
}

Report cmd_bvp(const BvpSpec& spec, const PipelineConfig& cfg)
{
    const BvpSystem sys = bvp_discretize(spec);
    Report rep = run_pipeline(sys.objective, cfg, spec.to_json(), "bvp");
    const auto best = rep.best_minimizer();
    if (!best)
    {
        return rep;
    }
    const auto& x = rep.minimizers[*best];
    rep.extra["solution"] = x;
    rep.extra["eqn_error"] = residual_norm_inf(sys.system, x);
    const double h = spec.h();
    rep.extra["h"] = h;
    if (bvp_exact(spec, spec.a))
    {
        double worst = 0.0;
        for (int k = 1; k <= spec.N; ++k)
        {
            worst = std::max(worst, std::abs(x[static_cast<std::size_t>(k - 1)] - *bvp_exact(spec, spec.t(k))));
        }
        rep.extra["max_error"] = worst;
        rep.extra["ratio"] = worst / (h * h);
    }
    return rep;
}

Report cmd_snl(const SnlInstance& inst, const PipelineConfig& cfg)
{
    const SparseSum f = snl_objective(inst);
    nlohmann::json desc = {{"name", "snl"}, {"sensors", inst.size()}, {"seed", inst.seed}, {"network", inst.to_json()}};
    Report rep = run_pipeline(f, cfg, std::move(desc), "snl");
    const auto truth = snl_truth(inst);
    rep.extra["planted_objective"] = f.evaluate(truth);
    const auto best = rep.best_minimizer();
    if (best)
    {
        const auto& x = rep.minimizers[*best];
        rep.extra["objective_at_estimate"] = f.evaluate(x);
        rep.extra["rmsd"] = rmsd(x, truth);
    }
    rep.extra["all_rank_one"] =
        std::all_of(rep.block_ranks.begin(), rep.block_ranks.end(), [](int r) { return r == 1; });
    return rep;
}

Report cmd_snl(int n, std::uint64_t seed, const PipelineConfig& cfg)
{
    return cmd_snl(snl_generate(n, seed), cfg);
}

} // namespace sparsesos
