#include <sparsesos/sdp.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace sparsesos
{

//------------------------------------------------------------------------------
// LmiSdp
//------------------------------------------------------------------------------

LmiSdp::LmiSdp()
{
    m_vars.emplace_back();
    m_index.emplace(Exponent{}, 0);
    m_objective.push_back(0.0);
}

int LmiSdp::variable(const Exponent& e)
{
    auto [it, inserted] = m_index.try_emplace(e, static_cast<int>(m_vars.size()));
    if (inserted)
    {
        m_vars.push_back(e);
        m_objective.push_back(0.0);
    }
    return it->second;
}

int LmiSdp::find_variable(const Exponent& e) const
{
    auto it = m_index.find(e);
    return it == m_index.end() ? -1 : it->second;
}

void LmiSdp::set_objective(int var, double c)
{
    m_objective.at(static_cast<std::size_t>(var)) = c;
}

void LmiSdp::add_objective(int var, double c)
{
    m_objective.at(static_cast<std::size_t>(var)) += c;
}

void LmiSdp::add_moment_block(std::string label, std::vector<Exponent> rows)
{
    LmiBlock b;
    b.label = std::move(label);
    b.size = static_cast<int>(rows.size());
    std::map<int, std::vector<BlockEntry>> by_var;
    for (int r = 0; r < b.size; ++r)
    {
        for (int c = r; c < b.size; ++c)
        {
            const int v = variable(rows[static_cast<std::size_t>(r)] + rows[static_cast<std::size_t>(c)]);
            by_var[v].push_back({r, c, 1.0});
        }
    }
    b.terms.assign(by_var.begin(), by_var.end());
    b.rows = std::move(rows);
    m_blocks.push_back(std::move(b));
}

void LmiSdp::add_block(LmiBlock block)
{
    std::sort(block.terms.begin(), block.terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    m_blocks.push_back(std::move(block));
}

std::vector<int> LmiSdp::block_sizes() const
{
    std::vector<int> s;
    for (const auto& b : m_blocks)
    {
        s.push_back(b.size);
    }
    return s;
}

Matrix LmiSdp::block_matrix(std::size_t i, const std::vector<double>& y) const
{
    const auto& b = m_blocks.at(i);
    Matrix m = Matrix::Zero(b.size, b.size);
    for (const auto& [var, entries] : b.terms)
    {
        const double v = y[static_cast<std::size_t>(var)];
        for (const auto& e : entries)
        {
            m(e.row, e.col) += e.coeff * v;
            if (e.row != e.col)
            {
                m(e.col, e.row) += e.coeff * v;
            }
        }
    }
    return m;
}

double LmiSdp::constraint_value(int var, const std::vector<Matrix>& gram) const
{
    double s = 0.0;
    for (std::size_t i = 0; i < m_blocks.size(); ++i)
    {
        for (const auto& [v, entries] : m_blocks[i].terms)
        {
            if (v != var)
            {
                continue;
            }
            for (const auto& e : entries)
            {
                s += e.coeff * gram[i](e.row, e.col) * (e.row == e.col ? 1.0 : 2.0);
            }
        }
    }
    return s;
}

void LmiSdp::validate() const
{
    if (m_blocks.empty())
    {
        throw InputError("LMI model has no blocks");
    }
    std::vector<bool> used(m_vars.size(), false);
    for (const auto& b : m_blocks)
    {
        if (b.size < 1)
        {
            throw InputError("block '" + b.label + "' is empty");
        }
        for (const auto& [var, entries] : b.terms)
        {
            if (var < 0 || static_cast<std::size_t>(var) >= m_vars.size())
            {
                throw InputError("block '" + b.label + "' references an unknown variable");
            }
            for (const auto& e : entries)
            {
                if (e.row < 0 || e.col < e.row || e.col >= b.size)
                {
                    throw InputError("block '" + b.label + "' has an entry outside its upper triangle");
                }
            }
            used[static_cast<std::size_t>(var)] = true;
        }
    }
    for (std::size_t v = 1; v < m_vars.size(); ++v)
    {
        if (!used[v] && m_objective[v] != 0.0)
        {
            throw InputError("moment " + m_vars[v].to_string() +
                             " appears in the objective but in no block");
        }
    }
}

std::string to_string(SolveStatus s)
{
    switch (s)
    {
    case SolveStatus::Optimal:
        return "Optimal";
    case SolveStatus::DualUnbounded:
        return "DualUnbounded";
    case SolveStatus::PrimalInfeasible:
        return "PrimalInfeasible";
    case SolveStatus::IterLimit:
        return "IterLimit";
    case SolveStatus::NumericalTrouble:
        return "NumericalTrouble";
    }
    return "NumericalTrouble";
}

SolveStatus status_from_string(const std::string& s)
{
    for (auto st : {SolveStatus::Optimal, SolveStatus::DualUnbounded, SolveStatus::PrimalInfeasible,
                    SolveStatus::IterLimit, SolveStatus::NumericalTrouble})
    {
        if (to_string(st) == s)
        {
            return st;
        }
    }
    throw InputError("unknown solve status '" + s + "'");
}

void SolverConfig::validate() const
{
    if (!(tol_gap > 0.0) || !(tol_feas > 0.0) || !(rank_tol > 0.0))
    {
        throw InputError("solver tolerances must be positive");
    }
    if (max_iters < 1)
    {
        throw InputError("max_iters must be at least 1");
    }
    if (!(step_fraction > 0.0 && step_fraction < 1.0))
    {
        throw InputError("step_fraction must lie in (0, 1)");
    }
}

double SdpSolution::moment(const LmiSdp& p, const Exponent& e) const
{
    const int v = p.find_variable(e);
    if (v < 0)
    {
        throw InputError("moment " + e.to_string() + " is not a variable of this model");
    }
    return y.at(static_cast<std::size_t>(v));
}

double min_eigenvalue(const Matrix& m)
{
    if (m.size() == 0)
    {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double gaussian_moment(const Exponent& e)
{
    double v = 1.0;
    for (const auto& [var, pw] : e.entries())
    {
        if (pw % 2 != 0)
        {
            return 0.0;
        }
        // (2j-1)!! / 2^j
        for (int k = 1; k < pw; k += 2)
        {
            v *= 0.5 * k;
        }
    }
    return v;
}

//------------------------------------------------------------------------------
// Solver
//------------------------------------------------------------------------------

namespace
{

struct SymEntry
{
    int p;
    int q;
    double a;
};

/// Per-block data with free variables renumbered 0..m-1 (model variable - 1).
struct BlockData
{
    int size = 0;
    Matrix a0;
    std::vector<int> vars;
    /// Full symmetric expansion of each local coefficient matrix.
    std::vector<std::vector<SymEntry>> entries;
};

std::vector<BlockData> prepare_blocks(const LmiSdp& p)
{
    std::vector<BlockData> out;
    for (const auto& b : p.blocks())
    {
        BlockData bd;
        bd.size = b.size;
        bd.a0 = Matrix::Zero(b.size, b.size);
        for (const auto& [var, entries] : b.terms)
        {
            if (var == 0)
            {
                for (const auto& e : entries)
                {
                    bd.a0(e.row, e.col) += e.coeff;
                    if (e.row != e.col)
                    {
                        bd.a0(e.col, e.row) += e.coeff;
                    }
                }
                continue;
            }
            std::vector<SymEntry> full;
            for (const auto& e : entries)
            {
                full.push_back({e.row, e.col, e.coeff});
                if (e.row != e.col)
                {
                    full.push_back({e.col, e.row, e.coeff});
                }
            }
            bd.vars.push_back(var - 1);
            bd.entries.push_back(std::move(full));
        }
        out.push_back(std::move(bd));
    }
    return out;
}

double inner(const std::vector<SymEntry>& a, const Matrix& x)
{
    double s = 0.0;
    for (const auto& e : a)
    {
        s += e.a * x(e.p, e.q);
    }
    return s;
}

/// Z_b = A_0 + sum_j y_j A_j on every block.
std::vector<Matrix> moment_blocks(const std::vector<BlockData>& blocks, const Vector& y)
{
    std::vector<Matrix> z;
    z.reserve(blocks.size());
    for (const auto& b : blocks)
    {
        Matrix m = b.a0;
        for (std::size_t u = 0; u < b.vars.size(); ++u)
        {
            const double v = y(b.vars[u]);
            for (const auto& e : b.entries[u])
            {
                m(e.p, e.q) += e.a * v;
            }
        }
        z.push_back(std::move(m));
    }
    return z;
}

/// sum_j dy_j A_j per block (no constant part).
std::vector<Matrix> direction_blocks(const std::vector<BlockData>& blocks, const Vector& dy)
{
    std::vector<Matrix> z;
    z.reserve(blocks.size());
    for (const auto& b : blocks)
    {
        Matrix m = Matrix::Zero(b.size, b.size);
        for (std::size_t u = 0; u < b.vars.size(); ++u)
        {
            const double v = dy(b.vars[u]);
            for (const auto& e : b.entries[u])
            {
                m(e.p, e.q) += e.a * v;
            }
        }
        z.push_back(std::move(m));
    }
    return z;
}

/// <A_j, X> for every free variable j.
Vector adjoint(const std::vector<BlockData>& blocks, const std::vector<Matrix>& x, Eigen::Index m)
{
    Vector r = Vector::Zero(m);
    for (std::size_t b = 0; b < blocks.size(); ++b)
    {
        for (std::size_t u = 0; u < blocks[b].vars.size(); ++u)
        {
            r(blocks[b].vars[u]) += inner(blocks[b].entries[u], x[b]);
        }
    }
    return r;
}

/// Largest alpha with X + alpha dX >= 0 (infinity if unrestricted, 0 if X is
/// not positive definite).
double max_step(const Matrix& x, const Matrix& dx)
{
    Eigen::LLT<Matrix> llt(x);
    if (llt.info() != Eigen::Success)
    {
        return 0.0;
    }
    Matrix t = llt.matrixL().solve(dx);
    Matrix s = llt.matrixL().solve(t.transpose());
    s = 0.5 * (s + s.transpose());
    const double lmin = min_eigenvalue(s);
    if (lmin >= 0.0)
    {
        return std::numeric_limits<double>::infinity();
    }
    return -1.0 / lmin;
}

struct NtScaling
{
    Matrix g;     // W = G Lambda G^T, G^T Z G = Lambda
    Matrix g_inv; // G^{-1}
    Matrix s;     // G G^T, satisfies S Z S = W
    Vector lambda;
};

bool nt_scaling(const Matrix& w, const Matrix& z, NtScaling& out)
{
    Eigen::LLT<Matrix> lw(w);
    Eigen::LLT<Matrix> lz(z);
    if (lw.info() != Eigen::Success || lz.info() != Eigen::Success)
    {
        return false;
    }
    const Matrix l = lw.matrixL();
    const Matrix r = lz.matrixL();
    Eigen::JacobiSVD<Matrix> svd(r.transpose() * l, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();
    if (sv.minCoeff() <= 0.0)
    {
        return false;
    }
    const Vector isq = sv.cwiseSqrt().cwiseInverse();
    out.lambda = sv;
    out.g = l * svd.matrixV() * isq.asDiagonal();
    // G^{-1} = Lambda^{1/2} V^T L^{-1}
    Matrix vt = svd.matrixV().transpose();
    Matrix linv_t = lw.matrixL().solve(Matrix::Identity(w.rows(), w.cols()));
    out.g_inv = sv.cwiseSqrt().asDiagonal() * vt * linv_t;
    out.s = out.g * out.g.transpose();
    return true;
}

/// Dense or sparse Cholesky of the Schur complement with diagonal shifts on
/// breakdown.
class SchurSolver
{
public:
    explicit SchurSolver(Eigen::Index m) : m_m(m), m_dense(m <= kDenseLimit) {}

    void assemble(const std::vector<BlockData>& blocks, const std::vector<NtScaling>& nt)
    {
        if (m_dense)
        {
            m_mat = Matrix::Zero(m_m, m_m);
        }
        else
        {
            m_triplets.clear();
        }
        for (std::size_t b = 0; b < blocks.size(); ++b)
        {
            const auto& bd = blocks[b];
            const Matrix& s = nt[b].s;
            const std::size_t k = bd.vars.size();
            Matrix t(bd.size, bd.size);
            for (std::size_t u = 0; u < k; ++u)
            {
                // T = S A_u S
                t.setZero();
                for (const auto& e : bd.entries[u])
                {
                    t.noalias() += e.a * s.col(e.p) * s.row(e.q);
                }
                for (std::size_t v = u; v < k; ++v)
                {
                    double val = 0.0;
                    for (const auto& e : bd.entries[v])
                    {
                        val += e.a * t(e.q, e.p);
                    }
                    add(bd.vars[u], bd.vars[v], val);
                }
            }
        }
        if (!m_dense)
        {
            m_sparse.resize(m_m, m_m);
            m_sparse.setFromTriplets(m_triplets.begin(), m_triplets.end());
        }
    }

    bool factorize()
    {
        if (m_dense)
        {
            const Matrix full = m_mat.selfadjointView<Eigen::Upper>();
            m_mat = full;
            m_use_ldlt = false;
            const double scale = std::max(1e-300, m_mat.diagonal().cwiseAbs().maxCoeff());
            double shift = 0.0;
            for (int attempt = 0; attempt < 8; ++attempt)
            {
                Matrix a = m_mat;
                a.diagonal().array() += shift;
                m_llt.compute(a);
                if (m_llt.info() == Eigen::Success)
                {
                    return true;
                }
                shift = (shift == 0.0) ? 1e-14 * scale : shift * 100.0;
            }
            m_ldlt.compute(m_mat);
            m_use_ldlt = true;
            return m_ldlt.info() == Eigen::Success;
        }
        double scale = 1e-300;
        for (int k = 0; k < m_sparse.outerSize(); ++k)
        {
            for (Eigen::SparseMatrix<double>::InnerIterator it(m_sparse, k); it; ++it)
            {
                if (it.row() == it.col())
                {
                    scale = std::max(scale, std::abs(it.value()));
                }
            }
        }
        double shift = 0.0;
        for (int attempt = 0; attempt < 8; ++attempt)
        {
            m_sllt.setShift(shift);
            m_sllt.compute(m_sparse);
            if (m_sllt.info() == Eigen::Success)
            {
                return true;
            }
            shift = (shift == 0.0) ? 1e-14 * scale : shift * 100.0;
        }
        return false;
    }

    /// Factor solve followed by a few steps of iterative refinement against
    /// the unshifted matrix.
    Vector solve(const Vector& rhs) const
    {
        Vector x = solve_once(rhs);
        const double rn = rhs.cwiseAbs().maxCoeff();
        for (int k = 0; k < 3 && rn > 0.0; ++k)
        {
            const Vector r = rhs - multiply(x);
            if (r.cwiseAbs().maxCoeff() <= 1e-15 * rn)
            {
                break;
            }
            x += solve_once(r);
        }
        return x;
    }

private:
    static constexpr Eigen::Index kDenseLimit = 1500;

    Vector solve_once(const Vector& rhs) const
    {
        if (m_dense)
        {
            return m_use_ldlt ? Vector(m_ldlt.solve(rhs)) : Vector(m_llt.solve(rhs));
        }
        return m_sllt.solve(rhs);
    }

    Vector multiply(const Vector& x) const
    {
        if (m_dense)
        {
            return m_mat * x;
        }
        return m_sparse.selfadjointView<Eigen::Lower>() * x;
    }

    void add(int i, int j, double v)
    {
        if (m_dense)
        {
            const int a = std::min(i, j);
            const int b = std::max(i, j);
            m_mat(a, b) += v;
        }
        else
        {
            // Store the upper triangle only; SimplicialLLT reads Lower by default,
            // so the triplets are mirrored.
            m_triplets.emplace_back(std::max(i, j), std::min(i, j), v);
        }
    }

    Eigen::Index m_m;
    bool m_dense;
    bool m_use_ldlt = false;
    Matrix m_mat;
    Eigen::LLT<Matrix> m_llt;
    Eigen::LDLT<Matrix> m_ldlt;
    std::vector<Eigen::Triplet<double>> m_triplets;
    Eigen::SparseMatrix<double> m_sparse;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower> m_sllt;
};

double frob_inner(const Matrix& a, const Matrix& b)
{
    return (a.array() * b.array()).sum();
}

struct Direction
{
    Vector dy;
    std::vector<Matrix> dz;
    std::vector<Matrix> dw;
};

} // namespace

SdpSolution solve(const LmiSdp& p, const SolverConfig& cfg)
{
    cfg.validate();
    p.validate();

    SdpSolution sol;
    const auto blocks = prepare_blocks(p);
    const Eigen::Index m = static_cast<Eigen::Index>(p.num_variables()) - 1;
    const auto& obj = p.objective();
    const double c0 = obj[0];
    Vector c(m);
    for (Eigen::Index j = 0; j < m; ++j)
    {
        c(j) = obj[static_cast<std::size_t>(j) + 1];
    }
    const double cmax = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
    const double cnorm = std::max(std::abs(c0), cmax);
    int total_size = 0;
    for (const auto& b : blocks)
    {
        total_size += b.size;
    }

    auto pack = [&](const Vector& yv) {
        std::vector<double> y(static_cast<std::size_t>(m) + 1);
        y[0] = 1.0;
        for (Eigen::Index j = 0; j < m; ++j)
        {
            y[static_cast<std::size_t>(j) + 1] = yv(j);
        }
        return y;
    };

    if (m == 0)
    {
        // Only the pinned moment: nothing to optimize.
        sol.status = SolveStatus::Optimal;
        sol.message = "no free moments";
        sol.objective = sol.gram_bound = c0;
        sol.y = pack(Vector());
        for (const auto& b : blocks)
        {
            sol.gram.push_back(Matrix::Zero(b.size, b.size));
        }
        const auto met = residuals(p, sol);
        sol.metrics.primal_residual = met.primal_residual;
        sol.metrics.dual_residual = met.dual_residual;
        sol.metrics.rel_gap = met.rel_gap;
        sol.metrics.abs_gap = met.abs_gap;
        return sol;
    }

    // Strictly feasible moment start: Gaussian moments, then the zero vector.
    Vector y(m);
    for (Eigen::Index j = 0; j < m; ++j)
    {
        y(j) = gaussian_moment(p.variables()[static_cast<std::size_t>(j) + 1]);
    }
    auto z = moment_blocks(blocks, y);
    auto interior = [](const std::vector<Matrix>& zs) {
        return std::all_of(zs.begin(), zs.end(), [](const Matrix& zb) {
            Eigen::LLT<Matrix> l(zb);
            return l.info() == Eigen::Success;
        });
    };
    if (!interior(z))
    {
        y.setZero();
        z = moment_blocks(blocks, y);
        if (!interior(z))
        {
            sol.status = SolveStatus::NumericalTrouble;
            sol.message = "no strictly feasible moment start";
            sol.y = pack(y);
            return sol;
        }
    }
    std::vector<Matrix> w;
    for (const auto& b : blocks)
    {
        w.push_back(std::max(1.0, cnorm) * Matrix::Identity(b.size, b.size));
    }

    SchurSolver schur(m);
    std::vector<NtScaling> nt(blocks.size());
    Vector coef_norm2 = Vector::Zero(m);
    for (const auto& b : blocks)
    {
        for (std::size_t u = 0; u < b.vars.size(); ++u)
        {
            for (const auto& e : b.entries[u])
            {
                coef_norm2(b.vars[u]) += e.a * e.a;
            }
        }
    }
    sol.status = SolveStatus::IterLimit;
    Vector last_dy = Vector::Zero(m);

    auto finish = [&](SolveStatus st, std::string msg) {
        sol.status = st;
        sol.message = std::move(msg);
    };

    struct Best
    {
        double score = std::numeric_limits<double>::infinity();
        Vector y;
        std::vector<Matrix> w;
        double mobj = 0.0;
        double gbound = 0.0;
    } best;

    std::optional<Best> converged;
    int converged_it = 0;
    int first_converged_it = 0;
    int it = 0;
    for (;; ++it)
    {
        const Vector aw = adjoint(blocks, w, m);
        const Vector rp = c - aw;
        double a0w = 0.0;
        for (std::size_t b = 0; b < blocks.size(); ++b)
        {
            a0w += frob_inner(blocks[b].a0, w[b]);
        }
        const double mobj = c0 + c.dot(y);
        const double gbound = c0 - a0w;
        double comp = 0.0;
        for (std::size_t b = 0; b < blocks.size(); ++b)
        {
            comp += frob_inner(w[b], z[b]);
        }
        const double mu = comp / total_size;
        const double pinf = (rp.size() ? rp.cwiseAbs().maxCoeff() : 0.0) / (1.0 + cmax);
        const double rgap = std::abs(mobj - gbound) / (1.0 + std::abs(mobj) + std::abs(gbound));

        sol.objective = mobj;
        sol.gram_bound = gbound;
        sol.metrics.iterations = it;
        const double score = std::max(rgap / cfg.tol_gap, pinf / cfg.tol_feas);
        if (score < best.score)
        {
            best = {score, y, w, mobj, gbound};
        }

        if (pinf <= cfg.tol_feas && rgap <= cfg.tol_gap)
        {
            // A few more steps drive the Gram residual down so the bound is
            // certified, not just within tolerance.
            if (!converged)
            {
                first_converged_it = it;
            }
            if (!converged || score < converged->score)
            {
                converged = Best{score, y, w, mobj, gbound};
                converged_it = it;
            }
            if (pinf <= 1e-3 * cfg.tol_feas || it - first_converged_it >= 5)
            {
                finish(SolveStatus::Optimal, "converged");
                break;
            }
        }
        else if (converged)
        {
            finish(SolveStatus::Optimal, "converged");
            break;
        }
        if (mobj < cfg.unbounded_threshold)
        {
            finish(SolveStatus::DualUnbounded, "moment objective below the unboundedness threshold");
            break;
        }
        if (it >= cfg.max_iters)
        {
            finish(SolveStatus::IterLimit, "iteration limit reached");
            break;
        }

        bool ok = true;
        for (std::size_t b = 0; b < blocks.size() && ok; ++b)
        {
            ok = nt_scaling(w[b], z[b], nt[b]);
        }
        if (!ok)
        {
            finish(SolveStatus::NumericalTrouble, "Cholesky breakdown in the scaling step");
            break;
        }
        schur.assemble(blocks, nt);
        if (!schur.factorize())
        {
            finish(SolveStatus::NumericalTrouble, "Schur complement factorization failed");
            break;
        }

        auto compute_direction = [&](const std::vector<Matrix>& h_scaled) {
            Direction d;
            std::vector<Matrix> ht(blocks.size());
            for (std::size_t b = 0; b < blocks.size(); ++b)
            {
                ht[b] = nt[b].g * h_scaled[b] * nt[b].g.transpose();
            }
            const Vector rhs = adjoint(blocks, ht, m) - rp;
            d.dy = schur.solve(rhs);
            d.dz = direction_blocks(blocks, d.dy);
            d.dw.resize(blocks.size());
            for (std::size_t b = 0; b < blocks.size(); ++b)
            {
                Matrix dw = ht[b] - nt[b].s * d.dz[b] * nt[b].s;
                d.dw[b] = 0.5 * (dw + dw.transpose());
            }
            if (converged)
            {
                // ht - S dz S cancels badly once S is large; while polishing,
                // pull dW back onto A(dW) = rp.
                for (int pass = 0; pass < 2; ++pass)
                {
                    const Vector res = rp - adjoint(blocks, d.dw, m);
                    for (std::size_t b = 0; b < blocks.size(); ++b)
                    {
                        for (std::size_t u = 0; u < blocks[b].vars.size(); ++u)
                        {
                            const double t = res(blocks[b].vars[u]) / coef_norm2(blocks[b].vars[u]);
                            for (const auto& e : blocks[b].entries[u])
                            {
                                d.dw[b](e.p, e.q) += e.a * t;
                            }
                        }
                    }
                }
            }
            return d;
        };
        auto step_lengths = [&](const Direction& d, double frac) {
            double ap = std::numeric_limits<double>::infinity();
            double ad = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < blocks.size(); ++b)
            {
                ap = std::min(ap, max_step(w[b], d.dw[b]));
                ad = std::min(ad, max_step(z[b], d.dz[b]));
            }
            return std::make_pair(std::min(1.0, frac * ap), std::min(1.0, frac * ad));
        };

        // Predictor.
        std::vector<Matrix> h(blocks.size());
        for (std::size_t b = 0; b < blocks.size(); ++b)
        {
            h[b] = -Matrix(nt[b].lambda.asDiagonal());
        }
        const Direction pred = compute_direction(h);
        const auto [ap_a, ad_a] = step_lengths(pred, 1.0);
        double comp_aff = 0.0;
        for (std::size_t b = 0; b < blocks.size(); ++b)
        {
            comp_aff += frob_inner(w[b] + ap_a * pred.dw[b], z[b] + ad_a * pred.dz[b]);
        }
        const double mu_aff = std::max(0.0, comp_aff / total_size);
        const double sigma = std::min(1.0, std::pow(mu_aff / mu, 3.0));

        // Corrector with the second-order term.
        for (std::size_t b = 0; b < blocks.size(); ++b)
        {
            const Matrix dws = nt[b].g_inv * pred.dw[b] * nt[b].g_inv.transpose();
            const Matrix dzs = nt[b].g.transpose() * pred.dz[b] * nt[b].g;
            Matrix rc = -0.5 * (dws * dzs + dzs * dws);
            const Vector& lam = nt[b].lambda;
            rc.diagonal().array() += sigma * mu - lam.array().square();
            for (Eigen::Index i = 0; i < rc.rows(); ++i)
            {
                for (Eigen::Index j = 0; j < rc.cols(); ++j)
                {
                    rc(i, j) *= 2.0 / (lam(i) + lam(j));
                }
            }
            h[b] = 0.5 * (rc + rc.transpose());
        }
        const Direction corr = compute_direction(h);
        const auto [ap, ad] = step_lengths(corr, cfg.step_fraction);

        // Homogeneous certificate: a direction with A^T d >= 0 and c^T d < 0
        // proves the moment objective is unbounded below.
        {
            const double cd = c.dot(corr.dy);
            const double dn = corr.dy.norm();
            if (dn > 0.0 && cd < -1e-10 * std::max(1.0, c.norm()) * dn)
            {
                double worst = 0.0;
                double scale = 0.0;
                for (const auto& dzb : corr.dz)
                {
                    worst = std::max(worst, -min_eigenvalue(dzb));
                    scale = std::max(scale, dzb.norm());
                }
                const double descent = -cd / (std::max(1.0, c.norm()) * dn);
                const double violation = scale > 0.0 ? worst / scale : 0.0;
                if (descent > 1e8 * std::max(violation, 1e-300) && violation < 1e-12)
                {
                    last_dy = corr.dy / corr.dy.cwiseAbs().maxCoeff();
                    finish(SolveStatus::DualUnbounded, "recession direction of the moment objective found");
                    sol.history.push_back({mobj, gbound, rgap, pinf, mu, ap, ad});
                    y = last_dy;
                    break;
                }
            }
        }

        sol.history.push_back({mobj, gbound, rgap, pinf, mu, ap, ad});
        if (ap < 1e-14 && ad < 1e-14)
        {
            finish(SolveStatus::NumericalTrouble, "step length collapsed");
            break;
        }
        y += ad * corr.dy;
        z = moment_blocks(blocks, y);
        for (std::size_t b = 0; b < blocks.size(); ++b)
        {
            w[b] += ap * corr.dw[b];
            w[b] = 0.5 * (w[b] + w[b].transpose());
        }
        // ht - S dz S cancels badly once S is large and the coefficient
        // residual drifts; pull W back with the Euclidean projection where
        // that keeps it positive definite.
        {
            const Vector res = c - adjoint(blocks, w, m);
            for (std::size_t b = 0; b < blocks.size(); ++b)
            {
                Matrix fixed = w[b];
                for (std::size_t u = 0; u < blocks[b].vars.size(); ++u)
                {
                    const int v = blocks[b].vars[u];
                    const double t = res(v) / coef_norm2(v);
                    for (const auto& e : blocks[b].entries[u])
                    {
                        fixed(e.p, e.q) += e.a * t;
                    }
                }
                if (Eigen::LLT<Matrix>(fixed).info() == Eigen::Success)
                {
                    w[b] = fixed;
                }
            }
        }
        last_dy = corr.dy;
    }

    if (converged)
    {
        y = converged->y;
        w = converged->w;
        sol.objective = converged->mobj;
        sol.gram_bound = converged->gbound;
        sol.metrics.iterations = converged_it;
        finish(SolveStatus::Optimal, "converged");
    }
    else if ((sol.status == SolveStatus::IterLimit || sol.status == SolveStatus::NumericalTrouble) &&
             std::isfinite(best.score))
    {
        // Report the most accurate iterate seen rather than the last one.
        y = best.y;
        w = best.w;
        sol.objective = best.mobj;
        sol.gram_bound = best.gbound;
    }
    sol.y = pack(y);
    if (sol.status == SolveStatus::DualUnbounded && !sol.history.empty() &&
        sol.message.rfind("recession", 0) == 0)
    {
        sol.y[0] = 0.0; // ray, not a moment vector
    }
    sol.gram = std::move(w);
    const auto met = residuals(p, sol);
    sol.metrics.primal_residual = met.primal_residual;
    sol.metrics.dual_residual = met.dual_residual;
    sol.metrics.rel_gap = met.rel_gap;
    sol.metrics.abs_gap = met.abs_gap;
    return sol;
}

SolveMetrics residuals(const LmiSdp& p, const SdpSolution& sol)
{
    SolveMetrics met;
    met.iterations = sol.metrics.iterations;
    const auto& obj = p.objective();
    const std::size_t nv = p.num_variables();
    if (sol.y.size() != nv || sol.gram.size() != p.blocks().size())
    {
        throw InputError("solution shape does not match the model");
    }
    // Moment side.
    double dres = std::abs(sol.y[0] - 1.0);
    for (std::size_t b = 0; b < p.blocks().size(); ++b)
    {
        dres = std::max(dres, std::max(0.0, -min_eigenvalue(p.block_matrix(b, sol.y))));
    }
    met.dual_residual = dres;
    // SOS side: per-variable <A_a, W>.
    std::vector<double> aw(nv, 0.0);
    for (std::size_t b = 0; b < p.blocks().size(); ++b)
    {
        const auto& blk = p.blocks()[b];
        for (const auto& [var, entries] : blk.terms)
        {
            for (const auto& e : entries)
            {
                aw[static_cast<std::size_t>(var)] +=
                    e.coeff * sol.gram[b](e.row, e.col) * (e.row == e.col ? 1.0 : 2.0);
            }
        }
    }
    double cmax = 0.0;
    double rmax = 0.0;
    double mobj = 0.0;
    for (std::size_t v = 0; v < nv; ++v)
    {
        mobj += obj[v] * sol.y[v];
        if (v == 0)
        {
            continue;
        }
        cmax = std::max(cmax, std::abs(obj[v]));
        rmax = std::max(rmax, std::abs(obj[v] - aw[v]));
    }
    const double gbound = obj[0] - aw[0];
    met.primal_residual = rmax / (1.0 + cmax);
    met.abs_gap = mobj - gbound;
    met.rel_gap = std::abs(met.abs_gap) / (1.0 + std::abs(mobj) + std::abs(gbound));
    return met;
}

} // namespace sparsesos
