// sparsesos: sparse SOS relaxations from the command line.
#include <sparsesos/report.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

using namespace sparsesos;

namespace
{

struct Common
{
    std::string kind;
    double tol_gap = 1e-8;
    double tol_feas = 1e-8;
    int max_iters = 100;
    double rank_tol = 1e-6;
    double match_tol = 1e-4;
    std::uint64_t seed = 20090601;
    std::string export_sdpa;
    bool json = false;
    int jobs = 1;
    bool no_fallback = false;

    PipelineConfig config(RelaxationKind default_kind) const
    {
        PipelineConfig c;
        c.kind = kind.empty() ? default_kind : relaxation_kind_from_string(kind);
        c.solver.tol_gap = tol_gap;
        c.solver.tol_feas = tol_feas;
        c.solver.max_iters = max_iters;
        c.solver.rank_tol = rank_tol;
        c.extract.rank_tol = rank_tol;
        c.extract.match_tol = match_tol;
        c.extract.seed = seed;
        c.sparse_fallback = !no_fallback;
        if (!export_sdpa.empty())
        {
            c.export_sdpa = export_sdpa;
        }
        return c;
    }
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--kind", c.kind, "Relaxation: dense, sparse or sparser");
    sub->add_option("--tol-gap", c.tol_gap, "Relative duality gap tolerance")->capture_default_str();
    sub->add_option("--tol-feas", c.tol_feas, "Feasibility tolerance")->capture_default_str();
    sub->add_option("--max-iters", c.max_iters, "Interior-point iteration limit")->capture_default_str();
    sub->add_option("--rank-tol", c.rank_tol, "Relative numerical rank threshold")->capture_default_str();
    sub->add_option("--match-tol", c.match_tol, "Coordinate matching tolerance across cliques")->capture_default_str();
    sub->add_option("--seed", c.seed, "Seed for the extraction's random combination")->capture_default_str();
    sub->add_option("--export-sdpa", c.export_sdpa, "Write the SDP in SDPA sparse format (single instance)");
    sub->add_flag("--json", c.json, "Print JSON reports instead of a table");
    sub->add_option("--jobs", c.jobs, "Instances solved in parallel in batch mode")->check(CLI::PositiveNumber);
    sub->add_flag("--no-fallback", c.no_fallback, "Do not re-extract from the clique relaxation");
}

/// Runs the tasks on up to `jobs` threads; results keep the task order.
std::vector<Report> run_batch(const std::vector<std::function<Report()>>& tasks, int jobs)
{
    std::vector<Report> out(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++)
        {
            try
            {
                out[i] = tasks[i]();
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t)
    {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool)
    {
        th.join();
    }
    for (auto& e : errors)
    {
        if (e)
        {
            std::rethrow_exception(e);
        }
    }
    return out;
}

std::string extra_columns(const Report& r)
{
    std::string s;
    char buf[96];
    for (const char* key : {"eqn_error", "max_error", "ratio", "objective_at_estimate", "rmsd"})
    {
        if (r.extra.contains(key))
        {
            std::snprintf(buf, sizeof(buf), "  %s=%.3e", key, r.extra[key].get<double>());
            s += buf;
        }
    }
    if (r.extraction_kind != r.kind && !r.minimizers.empty())
    {
        s += "  (minimizers via " + to_string(r.extraction_kind) + ")";
    }
    return s;
}

int emit(const std::vector<Report>& reports, bool json)
{
    int code = 0;
    for (const auto& r : reports)
    {
        code = std::max(code, r.exit_code());
    }
    if (json)
    {
        if (reports.size() == 1)
        {
            std::cout << reports.front().to_json().dump(2) << "\n";
        }
        else
        {
            auto arr = nlohmann::json::array();
            for (const auto& r : reports)
            {
                arr.push_back(r.to_json());
            }
            std::cout << arr.dump(2) << "\n";
        }
        return code;
    }
    std::cout << Report::table_header() << "\n";
    for (const auto& r : reports)
    {
        std::cout << r.table_row() << extra_columns(r) << "\n";
    }
    if (reports.size() == 1)
    {
        const auto& r = reports.front();
        for (std::size_t i = 0; i < r.minimizers.size() && i < 8; ++i)
        {
            std::cout << "x[" << i << "] err=" << r.err[i] << " :";
            for (double v : r.minimizers[i])
            {
                std::printf(" %.6g", v);
            }
            std::cout << std::flush;
            std::printf("\n");
        }
        if (r.minimizers.size() > 8)
        {
            std::cout << "... " << r.minimizers.size() - 8 << " more\n";
        }
        if (!r.message.empty())
        {
            std::cout << r.message << "\n";
        }
    }
    return code;
}

void single_export_only(const Common& c, std::size_t count)
{
    if (!c.export_sdpa.empty() && count != 1)
    {
        throw InputError("--export-sdpa needs exactly one instance");
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sparse SOS relaxations for sums of small polynomials"};
    app.require_subcommand(1);

    Common solve_opts;
    std::vector<std::string> files;
    auto* solve_cmd = app.add_subcommand("solve", "Solve SparseSum JSON files");
    solve_cmd->add_option("files", files, "SparseSum JSON files")->required();
    add_common(solve_cmd, solve_opts);

    Common bench_opts;
    std::string family;
    std::vector<int> sizes;
    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark family");
    bench_cmd->add_option("family", family, "chained-singular, chained-wood, gen-rosenbrock, broyden-tridiagonal, "
                                            "broyden-banded or discrete-boundary-value")
        ->required();
    bench_cmd->add_option("n", sizes, "Problem sizes")->required();
    add_common(bench_cmd, bench_opts);

    Common bvp_opts;
    std::string bvp_name;
    std::vector<int> bvp_sizes;
    auto* bvp_cmd = app.add_subcommand("bvp", "Discretized two-point boundary value problem");
    bvp_cmd->add_option("template", bvp_name, "basic, cubic-forcing or a BvpSpec JSON file")->required();
    bvp_cmd->add_option("N", bvp_sizes, "Interior grid sizes (default: the file's N)");
    add_common(bvp_cmd, bvp_opts);

    Common snl_opts;
    int snl_n = 0;
    std::vector<std::uint64_t> snl_seeds;
    std::string snl_file;
    auto* snl_cmd = app.add_subcommand("snl", "Planar sensor network localization");
    snl_cmd->add_option("n", snl_n, "Number of sensors")->check(CLI::PositiveNumber);
    snl_cmd->add_option("seeds", snl_seeds, "Instance seeds");
    snl_cmd->add_option("--instance", snl_file, "Read an SnlInstance JSON file instead of generating");
    add_common(snl_cmd, snl_opts);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*solve_cmd)
        {
            single_export_only(solve_opts, files.size());
            const auto cfg = solve_opts.config(RelaxationKind::SparseClique);
            std::vector<std::function<Report()>> tasks;
            for (const auto& f : files)
            {
                tasks.push_back([f, cfg] { return cmd_solve(f, cfg); });
            }
            return emit(run_batch(tasks, solve_opts.jobs), solve_opts.json);
        }
        if (*bench_cmd)
        {
            single_export_only(bench_opts, sizes.size());
            const auto fam = family_from_string(family);
            const auto cfg = bench_opts.config(RelaxationKind::SparseClique);
            std::vector<std::function<Report()>> tasks;
            for (int n : sizes)
            {
                BenchmarkSpec spec{fam, n};
                benchmark(spec); // validate n before spawning work
                tasks.push_back([spec, cfg] { return cmd_bench(spec, cfg); });
            }
            return emit(run_batch(tasks, bench_opts.jobs), bench_opts.json);
        }
        if (*bvp_cmd)
        {
            const auto cfg = bvp_opts.config(RelaxationKind::SparserSupport);
            std::vector<BvpSpec> specs;
            if (std::filesystem::exists(bvp_name))
            {
                std::ifstream in(bvp_name);
                BvpSpec base;
                try
                {
                    base = BvpSpec::from_json(nlohmann::json::parse(in));
                }
                catch (const nlohmann::json::exception& e)
                {
                    throw InputError(bvp_name + ": " + e.what());
                }
                if (bvp_sizes.empty())
                {
                    specs.push_back(base);
                }
                for (int N : bvp_sizes)
                {
                    specs.push_back(base);
                    specs.back().N = N;
                }
            }
            else
            {
                if (bvp_sizes.empty())
                {
                    throw InputError("bvp needs at least one N with a built-in template");
                }
                for (int N : bvp_sizes)
                {
                    specs.push_back(bvp_template(bvp_name, N));
                }
            }
            single_export_only(bvp_opts, specs.size());
            std::vector<std::function<Report()>> tasks;
            for (const auto& s : specs)
            {
                tasks.push_back([s, cfg] { return cmd_bvp(s, cfg); });
            }
            return emit(run_batch(tasks, bvp_opts.jobs), bvp_opts.json);
        }
        if (*snl_cmd)
        {
            const auto cfg = snl_opts.config(RelaxationKind::SparseClique);
            std::vector<std::function<Report()>> tasks;
            if (!snl_file.empty())
            {
                std::ifstream in(snl_file);
                if (!in)
                {
                    throw InputError("cannot open " + snl_file);
                }
                SnlInstance inst;
                try
                {
                    inst = SnlInstance::from_json(nlohmann::json::parse(in));
                }
                catch (const nlohmann::json::exception& e)
                {
                    throw InputError(snl_file + ": " + e.what());
                }
                tasks.push_back([inst, cfg] { return cmd_snl(inst, cfg); });
            }
            else
            {
                if (snl_n < 1 || snl_seeds.empty())
                {
                    throw InputError("snl needs n and at least one seed, or --instance FILE");
                }
                for (auto seed : snl_seeds)
                {
                    tasks.push_back([n = snl_n, seed, cfg] { return cmd_snl(n, seed, cfg); });
                }
            }
            single_export_only(snl_opts, tasks.size());
            return emit(run_batch(tasks, snl_opts.jobs), snl_opts.json);
        }
    }
    catch (const InputError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
