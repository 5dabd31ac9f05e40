#include <sparsesos/extract.hpp>
#include <sparsesos/random.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

namespace sparsesos
{

MomentMap moment_map(const LmiSdp& p, const std::vector<double>& y)
{
    if (y.size() != p.num_variables())
    {
        throw InputError("moment vector length does not match the model");
    }
    MomentMap out;
    for (std::size_t i = 0; i < y.size(); ++i)
    {
        out.emplace(p.variables()[i], y[i]);
    }
    return out;
}

MomentMatrixView MomentMatrixView::build(const MomentMap& y, const Clique& clique, int order)
{
    MomentMatrixView v;
    v.labels = monomials_up_to(clique, order);
    v.order = order;
    v.clique = clique;
    const auto s = static_cast<Eigen::Index>(v.labels.size());
    v.values.resize(s, s);
    for (Eigen::Index a = 0; a < s; ++a)
    {
        for (Eigen::Index b = a; b < s; ++b)
        {
            const Exponent e = v.labels[static_cast<std::size_t>(a)] + v.labels[static_cast<std::size_t>(b)];
            auto it = y.find(e);
            if (it == y.end())
            {
                throw InputError("moment " + e.to_string() + " is not available");
            }
            v.values(a, b) = v.values(b, a) = it->second;
        }
    }
    return v;
}

int MomentMatrixView::available_order(const MomentMap& y, const Clique& clique, int max_order)
{
    int best = -1;
    for (int k = 0; k <= max_order; ++k)
    {
        for (const auto& e : monomials_up_to(clique, 2 * k))
        {
            if (y.find(e) == y.end())
            {
                return best;
            }
        }
        best = k;
    }
    return best;
}

int numerical_rank(const Matrix& m, double rank_tol)
{
    if (m.size() == 0)
    {
        return 0;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const Vector sv = es.eigenvalues().cwiseAbs();
    const double cut = rank_tol * std::max(sv.maxCoeff(), 1e-300);
    return static_cast<int>((sv.array() > cut).count());
}

namespace
{

/// Principal submatrix on the labels of degree <= deg.
Matrix truncate(const MomentMatrixView& v, int deg)
{
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < v.labels.size(); ++i)
    {
        if (v.labels[i].degree() <= deg)
        {
            idx.push_back(static_cast<Eigen::Index>(i));
        }
    }
    Matrix out(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
    {
        for (std::size_t b = 0; b < idx.size(); ++b)
        {
            out(a, b) = v.values(idx[a], idx[b]);
        }
    }
    return out;
}

MomentMatrixView sub_view(const MomentMatrixView& v, int deg)
{
    MomentMatrixView out;
    out.clique = v.clique;
    out.order = deg;
    for (const auto& l : v.labels)
    {
        if (l.degree() <= deg)
        {
            out.labels.push_back(l);
        }
    }
    out.values = truncate(v, deg);
    return out;
}

FlatExtension flat_on_view(const MomentMatrixView& v, double rank_tol)
{
    FlatExtension fe;
    int top = 0;
    for (const auto& l : v.labels)
    {
        top = std::max(top, l.degree());
    }
    for (int j = 0; j <= top; ++j)
    {
        fe.ranks.push_back(numerical_rank(truncate(v, j), rank_tol));
    }
    for (int k = 0; k + 1 <= top; ++k)
    {
        if (fe.ranks[static_cast<std::size_t>(k)] == fe.ranks[static_cast<std::size_t>(k) + 1])
        {
            fe.flat = true;
            fe.k = k;
            fe.rank = fe.ranks[static_cast<std::size_t>(k)];
            break;
        }
    }
    return fe;
}

double eval_monomial(const Exponent& e, const Clique& clique, const std::vector<double>& u)
{
    double v = 1.0;
    for (auto [var, pw] : e.entries())
    {
        auto it = std::lower_bound(clique.begin(), clique.end(), var);
        const double base = u[static_cast<std::size_t>(it - clique.begin())];
        for (int t = 0; t < pw; ++t)
        {
            v *= base;
        }
    }
    return v;
}

/// d/du_j of the monomial e at u (u indexed like clique).
double monomial_partial(const Exponent& e, const Clique& clique, const std::vector<double>& u, std::size_t j)
{
    const int pj = e.power(clique[j]);
    if (pj == 0)
    {
        return 0.0;
    }
    double v = pj;
    for (auto [var, pw] : e.entries())
    {
        auto it = std::lower_bound(clique.begin(), clique.end(), var);
        const auto k = static_cast<std::size_t>(it - clique.begin());
        const int p = (k == j) ? pw - 1 : pw;
        for (int t = 0; t < p; ++t)
        {
            v *= u[k];
        }
    }
    return v;
}

struct AtomFit
{
    std::vector<std::vector<double>> atoms;
    Vector weights;
    double error = 0.0;
};

Matrix atom_matrix(const MomentMatrixView& mv, const std::vector<std::vector<double>>& atoms)
{
    Matrix P(static_cast<Eigen::Index>(mv.labels.size()), static_cast<Eigen::Index>(atoms.size()));
    for (Eigen::Index i = 0; i < P.rows(); ++i)
    {
        for (Eigen::Index l = 0; l < P.cols(); ++l)
        {
            P(i, l) = eval_monomial(mv.labels[static_cast<std::size_t>(i)], mv.clique,
                                    atoms[static_cast<std::size_t>(l)]);
        }
    }
    return P;
}

double fit_error(const MomentMatrixView& mv, const std::vector<std::vector<double>>& atoms, const Vector& w)
{
    const Matrix P = atom_matrix(mv, atoms);
    return (P * w.asDiagonal() * P.transpose() - mv.values).norm() / std::max(mv.values.norm(), 1e-300);
}

/// Weights by least squares over every entry of M.
Vector fit_weights(const MomentMatrixView& mv, const std::vector<std::vector<double>>& atoms)
{
    const Matrix P = atom_matrix(mv, atoms);
    const Eigen::Index s = P.rows();
    Matrix K(s * s, P.cols());
    for (Eigen::Index l = 0; l < P.cols(); ++l)
    {
        const Matrix outer = P.col(l) * P.col(l).transpose();
        K.col(l) = outer.reshaped();
    }
    return K.colPivHouseholderQr().solve(mv.values.reshaped());
}

/// Levenberg-Marquardt on |sum_l w_l m(u_l) m(u_l)^T - M|_F over atoms and
/// weights; close atoms make the eigenvector route lose digits.
AtomFit polish_atoms(const MomentMatrixView& mv, AtomFit fit)
{
    const auto s = static_cast<Eigen::Index>(mv.labels.size());
    const auto r = static_cast<Eigen::Index>(fit.atoms.size());
    const auto nv = static_cast<Eigen::Index>(mv.clique.size());
    const Eigen::Index np = r * (nv + 1);
    double lambda = 1e-6;
    for (int it = 0; it < 30; ++it)
    {
        const Matrix P = atom_matrix(mv, fit.atoms);
        const Matrix res = P * fit.weights.asDiagonal() * P.transpose() - mv.values;
        Matrix J(s * s, np);
        for (Eigen::Index l = 0; l < r; ++l)
        {
            const auto& u = fit.atoms[static_cast<std::size_t>(l)];
            const Matrix outer = P.col(l) * P.col(l).transpose();
            J.col(l * (nv + 1)) = outer.reshaped();
            for (Eigen::Index j = 0; j < nv; ++j)
            {
                Vector dp(s);
                for (Eigen::Index i = 0; i < s; ++i)
                {
                    dp(i) = monomial_partial(mv.labels[static_cast<std::size_t>(i)], mv.clique, u,
                                             static_cast<std::size_t>(j));
                }
                const Matrix d = fit.weights(l) * (dp * P.col(l).transpose() + P.col(l) * dp.transpose());
                J.col(l * (nv + 1) + 1 + j) = d.reshaped();
            }
        }
        const Matrix JtJ = J.transpose() * J;
        const Vector g = J.transpose() * res.reshaped();
        bool improved = false;
        for (int tries = 0; tries < 8 && !improved; ++tries)
        {
            Matrix A = JtJ;
            A.diagonal() += lambda * (JtJ.diagonal().array() + 1e-300).matrix();
            const Vector step = A.ldlt().solve(-g);
            AtomFit trial = fit;
            for (Eigen::Index l = 0; l < r; ++l)
            {
                trial.weights(l) += step(l * (nv + 1));
                for (Eigen::Index j = 0; j < nv; ++j)
                {
                    trial.atoms[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)] += step(l * (nv + 1) + 1 + j);
                }
            }
            trial.error = fit_error(mv, trial.atoms, trial.weights);
            if (std::isfinite(trial.error) && trial.error < fit.error)
            {
                improved = true;
                const bool stalled = trial.error > 0.999 * fit.error;
                fit = std::move(trial);
                lambda = std::max(lambda * 0.1, 1e-12);
                if (stalled)
                {
                    return fit;
                }
            }
            else
            {
                lambda *= 10.0;
            }
        }
        if (!improved)
        {
            break;
        }
    }
    return fit;
}

/// Greedy row basis of V, lowest degree first and largest residual first
/// within a degree.
std::vector<Eigen::Index> row_basis(const Matrix& V, const std::vector<Exponent>& labels, int max_deg)
{
    const Eigen::Index r = V.cols();
    std::vector<Eigen::Index> basis;
    Matrix q(r, 0);
    double scale = 0.0;
    for (Eigen::Index i = 0; i < V.rows(); ++i)
    {
        scale = std::max(scale, V.row(i).norm());
    }
    for (int deg = 0; deg <= max_deg && static_cast<Eigen::Index>(basis.size()) < r; ++deg)
    {
        for (;;)
        {
            Eigen::Index pick = -1;
            double best = 1e-8 * scale;
            Vector best_res;
            for (Eigen::Index i = 0; i < V.rows(); ++i)
            {
                if (labels[static_cast<std::size_t>(i)].degree() != deg ||
                    std::find(basis.begin(), basis.end(), i) != basis.end())
                {
                    continue;
                }
                Vector res = V.row(i).transpose();
                if (q.cols() > 0)
                {
                    res -= q * (q.transpose() * res);
                    res -= q * (q.transpose() * res);
                }
                if (res.norm() > best)
                {
                    best = res.norm();
                    pick = i;
                    best_res = res;
                }
            }
            if (pick < 0)
            {
                break;
            }
            basis.push_back(pick);
            q.conservativeResize(r, q.cols() + 1);
            q.col(q.cols() - 1) = best_res / best_res.norm();
            if (static_cast<Eigen::Index>(basis.size()) == r)
            {
                break;
            }
        }
    }
    return basis;
}

} // namespace

FlatExtension flat_extension_check(const MomentMap& y, const Clique& clique, int d, double rank_tol)
{
    return flat_on_view(MomentMatrixView::build(y, clique, d), rank_tol);
}

AtomicMeasure atomic_support(const MomentMatrixView& mv, double rank_tol, std::uint64_t seed)
{
    AtomicMeasure out;
    const Matrix& M = mv.values;
    const Eigen::Index s = M.rows();
    if (s == 0)
    {
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    const int r = numerical_rank(M, rank_tol);
    out.rank = r;
    if (r == 0)
    {
        return out;
    }
    // M ~ V V^T from the r largest eigenpairs.
    Matrix V(s, r);
    for (int j = 0; j < r; ++j)
    {
        const Eigen::Index col = s - 1 - j;
        V.col(j) = es.eigenvectors().col(col) * std::sqrt(std::max(0.0, es.eigenvalues()(col)));
    }
    int max_deg = 0;
    for (const auto& l : mv.labels)
    {
        max_deg = std::max(max_deg, l.degree());
    }
    const auto basis = row_basis(V, mv.labels, max_deg);
    if (static_cast<int>(basis.size()) < r)
    {
        return out;
    }
    Matrix vb(r, r);
    for (int t = 0; t < r; ++t)
    {
        vb.row(t) = V.row(basis[static_cast<std::size_t>(t)]);
    }
    // U = V VB^{-1}; rows of U at the basis form the identity.
    const Matrix U = vb.transpose().partialPivLu().solve(V.transpose()).transpose();

    std::map<Exponent, Eigen::Index, GradedLex> where;
    for (std::size_t i = 0; i < mv.labels.size(); ++i)
    {
        where.emplace(mv.labels[i], static_cast<Eigen::Index>(i));
    }
    const std::size_t nv = mv.clique.size();
    std::vector<Matrix> mult(nv, Matrix(r, r));
    for (std::size_t j = 0; j < nv; ++j)
    {
        for (int t = 0; t < r; ++t)
        {
            const Exponent prod = mv.labels[static_cast<std::size_t>(basis[static_cast<std::size_t>(t)])] +
                                  Exponent::unit(mv.clique[j]);
            auto it = where.find(prod);
            if (it == where.end())
            {
                return out;
            }
            mult[j].row(t) = U.row(it->second);
        }
    }

    std::vector<std::vector<double>> atoms;
    for (int attempt = 0; attempt < 6 && atoms.empty(); ++attempt)
    {
        Rng rng(seed + static_cast<std::uint64_t>(attempt));
        std::vector<double> coef(nv);
        double total = 0.0;
        for (auto& c : coef)
        {
            c = uniform01(rng) + 1e-3;
            total += c;
        }
        Matrix N = Matrix::Zero(r, r);
        for (std::size_t j = 0; j < nv; ++j)
        {
            N += (coef[j] / total) * mult[j];
        }
        Eigen::RealSchur<Matrix> schur(N);
        const Matrix& T = schur.matrixT();
        const Matrix& Q = schur.matrixU();
        double tscale = 1.0;
        for (int i = 0; i < r; ++i)
        {
            tscale = std::max(tscale, std::abs(T(i, i)));
        }
        bool bad = false;
        for (int i = 0; i + 1 < r && !bad; ++i)
        {
            bad = std::abs(T(i + 1, i)) > 1e-10 * tscale;
        }
        for (int i = 0; i < r && !bad; ++i)
        {
            for (int k = i + 1; k < r && !bad; ++k)
            {
                bad = std::abs(T(i, i) - T(k, k)) < 1e-8 * tscale;
            }
        }
        if (bad)
        {
            continue;
        }
        for (int l = 0; l < r; ++l)
        {
            std::vector<double> u(nv);
            for (std::size_t j = 0; j < nv; ++j)
            {
                u[j] = Q.col(l).dot(mult[j] * Q.col(l));
            }
            atoms.push_back(std::move(u));
        }
    }
    if (atoms.empty())
    {
        return out;
    }
    std::sort(atoms.begin(), atoms.end());

    AtomFit fit{atoms, fit_weights(mv, atoms), 0.0};
    fit.error = fit_error(mv, fit.atoms, fit.weights);
    if (fit.error > 1e-12)
    {
        fit = polish_atoms(mv, std::move(fit));
        std::sort(fit.atoms.begin(), fit.atoms.end());
        fit.weights = fit_weights(mv, fit.atoms);
        fit.error = fit_error(mv, fit.atoms, fit.weights);
    }
    const Vector& w = fit.weights;
    out.reconstruction_error = fit.error;
    out.atoms = std::move(fit.atoms);
    out.weights.assign(w.data(), w.data() + w.size());
    out.ok = out.reconstruction_error <= std::max(1e-6, rank_tol) && w.minCoeff() > 0.0;
    return out;
}

std::vector<double> variable_candidates(const MomentMap& y, int k, int d, double rank_tol, std::uint64_t seed)
{
    const Clique c{k};
    const int ord = MomentMatrixView::available_order(y, c, d);
    if (ord < 1)
    {
        return {};
    }
    const auto view = MomentMatrixView::build(y, c, ord);
    const auto fe = flat_on_view(view, rank_tol);
    if (!fe.flat)
    {
        return {};
    }
    const auto am = atomic_support(sub_view(view, fe.k + 1), rank_tol, seed);
    if (!am.ok)
    {
        return {};
    }
    std::vector<double> v;
    for (const auto& a : am.atoms)
    {
        v.push_back(a[0]);
    }
    std::sort(v.begin(), v.end());
    return v;
}

namespace
{

struct Assembler
{
    const std::vector<std::vector<double>>& V;
    const std::vector<std::optional<std::vector<std::vector<double>>>>& X;
    const std::vector<Clique>& cliques;
    double tol;
    std::vector<std::size_t> visit;
    std::vector<double> x;
    std::vector<bool> set;
    /// Values from single-atom cliques, used where nothing else decided.
    std::vector<std::optional<double>> fallback;
    std::vector<std::vector<double>> found;
    static constexpr std::size_t kMaxPoints = 4096;

    bool in_v(int var, double val) const
    {
        const auto& cand = V[static_cast<std::size_t>(var)];
        // A single candidate may be a collapsed cluster; the clique atoms win.
        if (cand.size() <= 1)
        {
            return true;
        }
        return std::any_of(cand.begin(), cand.end(), [&](double c) { return std::abs(c - val) <= tol; });
    }

    void finalize(std::size_t var)
    {
        if (found.size() >= kMaxPoints)
        {
            return;
        }
        if (var == x.size())
        {
            found.push_back(x);
            return;
        }
        if (set[var])
        {
            finalize(var + 1);
            return;
        }
        if (fallback[var] && V[var].size() <= 1)
        {
            x[var] = *fallback[var];
            finalize(var + 1);
            return;
        }
        if (V[var].empty())
        {
            x[var] = 0.0;
            finalize(var + 1);
            return;
        }
        for (double v : V[var])
        {
            x[var] = v;
            finalize(var + 1);
        }
    }

    void dfs(std::size_t pos)
    {
        if (found.size() >= kMaxPoints)
        {
            return;
        }
        if (pos == visit.size())
        {
            const auto saved = x;
            finalize(0);
            x = saved;
            return;
        }
        const std::size_t i = visit[pos];
        const auto& c = cliques[i];
        for (const auto& t : *X[i])
        {
            bool fits = t.size() == c.size();
            for (std::size_t j = 0; j < c.size() && fits; ++j)
            {
                const auto v = static_cast<std::size_t>(c[j]);
                fits = in_v(c[j], t[j]) && (!set[v] || std::abs(x[v] - t[j]) <= tol);
            }
            if (!fits)
            {
                continue;
            }
            std::vector<std::size_t> assigned;
            for (std::size_t j = 0; j < c.size(); ++j)
            {
                const auto v = static_cast<std::size_t>(c[j]);
                if (!set[v])
                {
                    set[v] = true;
                    x[v] = t[j];
                    assigned.push_back(v);
                }
            }
            dfs(pos + 1);
            for (auto v : assigned)
            {
                set[v] = false;
            }
        }
    }
};

} // namespace

std::vector<std::vector<double>> assemble_minimizers(
    const std::vector<std::vector<double>>& V,
    const std::vector<std::optional<std::vector<std::vector<double>>>>& X,
    const std::vector<Clique>& cliques, double match_tol, const std::vector<std::size_t>& order)
{
    if (X.size() != cliques.size())
    {
        throw InputError("one candidate set per clique is required");
    }
    Assembler a{V, X, cliques, match_tol, {}, std::vector<double>(V.size(), 0.0),
                std::vector<bool>(V.size(), false), std::vector<std::optional<double>>(V.size()), {}};
    for (std::size_t i = 0; i < cliques.size(); ++i)
    {
        if (X[i] && X[i]->size() == 1 && X[i]->front().size() == cliques[i].size())
        {
            for (std::size_t j = 0; j < cliques[i].size(); ++j)
            {
                auto& slot = a.fallback[static_cast<std::size_t>(cliques[i][j])];
                if (!slot)
                {
                    slot = X[i]->front()[j];
                }
            }
        }
    }
    const bool all_single = std::all_of(V.begin(), V.end(), [](const auto& v) { return v.size() == 1; });
    if (all_single)
    {
        std::vector<double> x;
        for (const auto& v : V)
        {
            x.push_back(v.front());
        }
        return {x};
    }
    std::vector<bool> seen(cliques.size(), false);
    auto push = [&](std::size_t i) {
        if (i < cliques.size() && !seen[i] && X[i].has_value() && X[i]->size() != 1)
        {
            seen[i] = true;
            a.visit.push_back(i);
        }
    };
    for (auto i : order)
    {
        push(i);
    }
    for (std::size_t i = 0; i < cliques.size(); ++i)
    {
        push(i);
    }
    a.dfs(0);

    std::vector<std::vector<double>> out;
    for (auto& p : a.found)
    {
        const bool dup = std::any_of(out.begin(), out.end(), [&](const auto& q) {
            for (std::size_t k = 0; k < p.size(); ++k)
            {
                if (std::abs(p[k] - q[k]) > match_tol)
                {
                    return false;
                }
            }
            return true;
        });
        if (!dup)
        {
            out.push_back(std::move(p));
        }
    }
    return out;
}

double accuracy(const SparseSum& f, std::span<const double> x, double fhat)
{
    const double fx = f.evaluate(x);
    return std::abs(fx - fhat) / std::max(1.0, std::abs(fx));
}

double accuracy(const Polynomial& f, std::span<const double> x, double fhat)
{
    const double fx = f.evaluate(x);
    return std::abs(fx - fhat) / std::max(1.0, std::abs(fx));
}

nlohmann::json ExtractionResult::to_json() const
{
    nlohmann::json j;
    j["method"] = method;
    j["certified"] = certified;
    j["minimizers"] = minimizers;
    j["err"] = err;
    j["block_ranks"] = block_ranks;
    j["block_flat"] = block_flat;
    j["candidates"] = V;
    if (!message.empty())
    {
        j["message"] = message;
    }
    return j;
}

namespace
{

MomentMatrixView block_view(const LmiSdp& p, std::size_t b, const std::vector<double>& y, const Clique& clique)
{
    MomentMatrixView v;
    v.labels = p.blocks()[b].rows;
    v.values = p.block_matrix(b, y);
    v.clique = clique;
    for (const auto& l : v.labels)
    {
        v.order = std::max(v.order, l.degree());
    }
    return v;
}

/// Atoms of one clique, preferring the full moment matrix of order d and
/// falling back to the block's own label set.
std::optional<std::vector<std::vector<double>>> clique_atoms(const MomentMap& y, const LmiSdp& p, std::size_t b,
                                                             const std::vector<double>& yv, const Clique& clique,
                                                             int d, const ExtractConfig& cfg)
{
    const int ord = MomentMatrixView::available_order(y, clique, d);
    MomentMatrixView view;
    if (ord == d && d >= 1)
    {
        view = MomentMatrixView::build(y, clique, d);
    }
    else if (!p.blocks()[b].rows.empty())
    {
        view = block_view(p, b, yv, clique);
    }
    else
    {
        return std::nullopt;
    }
    const auto fe = flat_on_view(view, cfg.rank_tol);
    if (!fe.flat)
    {
        return std::nullopt;
    }
    const auto am = atomic_support(sub_view(view, fe.k + 1), cfg.rank_tol, cfg.seed);
    if (!am.ok)
    {
        return std::nullopt;
    }
    return am.atoms;
}

} // namespace

ExtractionResult extract_minimizers(const SparseSum& f, const Relaxation& r, const SdpSolution& sol,
                                    const ExtractConfig& cfg)
{
    ExtractionResult res;
    if (sol.status == SolveStatus::DualUnbounded)
    {
        res.method = "none";
        res.message = "relaxation is unbounded; nothing to extract";
        return res;
    }
    const LmiSdp& p = r.sdp;
    const int n = f.num_vars();
    const auto y = moment_map(p, sol.y);
    const auto& cliques = r.info.cliques;
    const int d = r.info.d;

    bool all_rank_one = true;
    for (std::size_t b = 0; b < p.blocks().size(); ++b)
    {
        const auto view = block_view(p, b, sol.y, cliques[b]);
        const int rk = numerical_rank(view.values, cfg.rank_tol);
        res.block_ranks.push_back(rk);
        res.block_flat.push_back(flat_on_view(view, cfg.rank_tol).flat);
        all_rank_one = all_rank_one && rk == 1;
    }

    auto first_moment = [&](int k) {
        auto it = y.find(Exponent::unit(k));
        return it == y.end() ? 0.0 : it->second;
    };
    std::vector<bool> covered(static_cast<std::size_t>(n), false);
    for (const auto& s : f.summands())
    {
        for (int v : s.clique)
        {
            covered[static_cast<std::size_t>(v)] = true;
        }
    }

    const bool optimal = sol.status == SolveStatus::Optimal;
    if (all_rank_one)
    {
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
        {
            x[static_cast<std::size_t>(k)] = first_moment(k);
        }
        res.V.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
        {
            if (covered[static_cast<std::size_t>(k)])
            {
                res.V[static_cast<std::size_t>(k)] = {x[static_cast<std::size_t>(k)]};
            }
        }
        res.minimizers.push_back(std::move(x));
        res.method = "rank-one";
        res.certified = optimal;
    }
    else
    {
        bool certified = optimal;
        res.V.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
        {
            if (!covered[static_cast<std::size_t>(k)])
            {
                continue;
            }
            auto v = variable_candidates(y, k, d, cfg.rank_tol, cfg.seed);
            if (v.empty())
            {
                certified = false;
                v.push_back(first_moment(k));
            }
            res.V[static_cast<std::size_t>(k)] = std::move(v);
        }
        res.X.resize(cliques.size());
        for (std::size_t i = 0; i < cliques.size(); ++i)
        {
            const bool needed = res.block_ranks[i] > 1 ||
                                std::any_of(cliques[i].begin(), cliques[i].end(),
                                            [&](int v) { return res.V[static_cast<std::size_t>(v)].size() > 1; });
            if (!needed)
            {
                continue;
            }
            res.X[i] = clique_atoms(y, p, i, sol.y, cliques[i], d, cfg);
            certified = certified && res.X[i].has_value();
        }
        std::vector<std::size_t> order;
        if (cliques.size() > 1)
        {
            const auto rip = rip_check(cliques);
            order = rip.order;
        }
        res.minimizers = assemble_minimizers(res.V, res.X, cliques, cfg.match_tol, order);
        res.method = "flat-extension";
        if (res.minimizers.empty())
        {
            std::vector<double> x(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k)
            {
                x[static_cast<std::size_t>(k)] = first_moment(k);
            }
            res.minimizers.push_back(std::move(x));
            res.method = "heuristic";
            res.message = "no consistent assembly across cliques";
            certified = false;
        }
        res.certified = certified;
    }
    for (const auto& x : res.minimizers)
    {
        res.err.push_back(accuracy(f, x, sol.objective));
    }
    return res;
}

} // namespace sparsesos
