#include <sparsesos/relax.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace sparsesos
{

std::string to_string(RelaxationKind k)
{
    switch (k)
    {
    case RelaxationKind::Dense:
        return "Dense";
    case RelaxationKind::SparseClique:
        return "SparseClique";
    case RelaxationKind::SparserSupport:
        return "SparserSupport";
    }
    return "Dense";
}

RelaxationKind relaxation_kind_from_string(const std::string& s)
{
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "dense")
    {
        return RelaxationKind::Dense;
    }
    if (l == "sparse" || l == "sparseclique")
    {
        return RelaxationKind::SparseClique;
    }
    if (l == "sparser" || l == "sparsersupport")
    {
        return RelaxationKind::SparserSupport;
    }
    throw InputError("unknown relaxation kind '" + s + "'");
}

std::vector<int> RelaxationInfo::block_sizes() const
{
    std::vector<int> s;
    for (const auto& b : block_labels)
    {
        s.push_back(static_cast<int>(b.size()));
    }
    return s;
}

nlohmann::json RelaxationInfo::to_json() const
{
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["d"] = d;
    j["num_moments"] = F.size();
    j["block_sizes"] = block_sizes();
    auto cl = nlohmann::json::array();
    for (const auto& c : cliques)
    {
        auto one = nlohmann::json::array();
        for (int v : c)
        {
            one.push_back(v + 1);
        }
        cl.push_back(one);
    }
    j["cliques"] = cl;
    return j;
}

namespace
{

void set_objective(LmiSdp& sdp, const Polynomial& f)
{
    for (const auto& [e, c] : f.terms())
    {
        const int v = sdp.find_variable(e);
        if (v < 0)
        {
            throw InputError("monomial " + e.to_string() +
                             " of the objective is not covered by any block");
        }
        sdp.add_objective(v, c);
    }
}

void finish(Relaxation& r)
{
    r.info.F = r.sdp.variables();
    for (const auto& b : r.sdp.blocks())
    {
        r.info.block_labels.push_back(b.rows);
    }
}

std::vector<Exponent> sparser_labels(const Summand& s)
{
    std::vector<Exponent> gens{Exponent{}};
    for (const auto& [e, c] : s.poly.terms())
    {
        if (!e.is_even())
        {
            continue;
        }
        std::vector<Exponent::Entry> half;
        for (auto [v, p] : e.entries())
        {
            half.emplace_back(v, p / 2);
        }
        gens.emplace_back(std::move(half));
    }
    return hull_lattice_points(gens, s.clique);
}

} // namespace

Relaxation build_dense(const Polynomial& f)
{
    if (f.degree() % 2 != 0)
    {
        throw InputError("polynomial has odd degree " + std::to_string(f.degree()));
    }
    const int n = f.num_vars();
    if (n < 1)
    {
        throw InputError("polynomial has no variables");
    }
    Relaxation r;
    r.info.kind = RelaxationKind::Dense;
    r.info.d = f.degree() / 2;
    r.info.n = n;
    Clique all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    r.sdp.add_moment_block("dense", monomials_up_to(all, r.info.d));
    r.info.cliques.push_back(all);
    set_objective(r.sdp, f);
    finish(r);
    return r;
}

Relaxation build_sparse(const SparseSum& s)
{
    Relaxation r;
    r.info.kind = RelaxationKind::SparseClique;
    r.info.d = s.half_degree();
    r.info.n = s.num_vars();
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        const auto& c = s.summands()[i].clique;
        r.sdp.add_moment_block("clique " + std::to_string(i + 1), monomials_up_to(c, r.info.d));
        r.info.cliques.push_back(c);
    }
    set_objective(r.sdp, expand_total(s));
    finish(r);
    return r;
}

Relaxation build_sparser(const SparseSum& s)
{
    Relaxation r;
    r.info.kind = RelaxationKind::SparserSupport;
    r.info.d = s.half_degree();
    r.info.n = s.num_vars();
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        const auto& sm = s.summands()[i];
        r.sdp.add_moment_block("support " + std::to_string(i + 1), sparser_labels(sm));
        r.info.cliques.push_back(sm.clique);
    }
    set_objective(r.sdp, expand_total(s));
    finish(r);
    return r;
}

Relaxation build(const SparseSum& s, RelaxationKind kind)
{
    switch (kind)
    {
    case RelaxationKind::Dense:
        return build_dense(expand_total(s));
    case RelaxationKind::SparseClique:
        return build_sparse(s);
    case RelaxationKind::SparserSupport:
        return build_sparser(s);
    }
    return build_sparse(s);
}

double verify_sos_certificate(const Polynomial& f, double bound, const std::vector<Matrix>& gram,
                              const RelaxationInfo& info)
{
    if (gram.size() != info.block_labels.size())
    {
        throw InputError("certificate has " + std::to_string(gram.size()) + " blocks, expected " +
                         std::to_string(info.block_labels.size()));
    }
    Polynomial::TermMap expansion;
    expansion[Exponent{}] += bound;
    for (std::size_t b = 0; b < gram.size(); ++b)
    {
        const auto& labels = info.block_labels[b];
        const auto s = static_cast<Eigen::Index>(labels.size());
        if (gram[b].rows() != s || gram[b].cols() != s)
        {
            throw InputError("certificate block " + std::to_string(b + 1) + " has the wrong shape");
        }
        for (Eigen::Index r = 0; r < s; ++r)
        {
            for (Eigen::Index c = 0; c < s; ++c)
            {
                expansion[labels[static_cast<std::size_t>(r)] + labels[static_cast<std::size_t>(c)]] +=
                    gram[b](r, c);
            }
        }
    }
    double err = 0.0;
    for (const auto& [e, c] : f.terms())
    {
        auto it = expansion.find(e);
        err = std::max(err, std::abs(c - (it == expansion.end() ? 0.0 : it->second)));
    }
    for (const auto& [e, v] : expansion)
    {
        if (f.terms().find(e) == f.terms().end())
        {
            err = std::max(err, std::abs(v));
        }
    }
    return err;
}

double verify_sos_certificate(const SparseSum& f, double bound, const std::vector<Matrix>& gram,
                              const RelaxationInfo& info)
{
    return verify_sos_certificate(expand_total(f), bound, gram, info);
}

} // namespace sparsesos
