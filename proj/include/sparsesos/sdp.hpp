///
/// \file sdp.hpp
///
/// Block-diagonal linear matrix inequalities over moment variables and the
/// embedded primal-dual interior-point solver.
///
/// The moment side is
///
///     minimize   sum_a c_a y_a
///     subject to B_i(y) = sum_a y_a A_{i,a}  >= 0   for every block i,
///                y_0 = 1,
///
/// and its dual (the SOS side) is
///
///     maximize   c_0 - sum_i <A_{i,0}, W_i>
///     subject to sum_i <A_{i,a}, W_i> = c_a   (a != 0),   W_i >= 0.
///
/// The solver follows a path-following scheme with Nesterov-Todd scaling and
/// Mehrotra's predictor-corrector. The moment iterate is kept exactly
/// feasible from the Gaussian-moment start; the Gram matrices start
/// infeasible.
///
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <sparsesos/poly.hpp>

namespace sparsesos
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One (row, col, coefficient) entry of a coefficient matrix; row <= col.
struct BlockEntry
{
    int row;
    int col;
    double coeff;
};

struct LmiBlock
{
    std::string label;
    int size = 0;
    /// Row/column monomials for moment blocks (entry (r,c) = y_{rows[r]+rows[c]}).
    /// Empty for hand-built blocks.
    std::vector<Exponent> rows;
    /// (variable index, upper-triangle entries of A_{i,var}) sorted by variable.
    std::vector<std::pair<int, std::vector<BlockEntry>>> terms;
};

///
/// Linear-matrix-inequality model over moment variables. Variable 0 is the
/// zero exponent and is pinned to 1.
///
class LmiSdp
{
public:
    LmiSdp();

    /// Index of the variable labelled e, creating it if needed.
    int variable(const Exponent& e);
    /// Index of e or -1.
    int find_variable(const Exponent& e) const;

    void set_objective(int var, double c);
    void add_objective(int var, double c);

    /// Moment block with entry (r,c) = y_{rows[r]+rows[c]}; creates variables.
    void add_moment_block(std::string label, std::vector<Exponent> rows);
    /// Generic block; entries must reference existing variables.
    void add_block(LmiBlock block);

    std::size_t num_variables() const noexcept { return m_vars.size(); }
    const std::vector<Exponent>& variables() const noexcept { return m_vars; }
    const std::vector<double>& objective() const noexcept { return m_objective; }
    const std::vector<LmiBlock>& blocks() const noexcept { return m_blocks; }
    std::vector<int> block_sizes() const;

    /// B_i(y) for block i; y indexed like variables().
    Matrix block_matrix(std::size_t i, const std::vector<double>& y) const;
    /// <A_{i,var}, W> summed over blocks.
    double constraint_value(int var, const std::vector<Matrix>& gram) const;

    /// Throws InputError if the model is empty, references unknown
    /// variables, has entries outside a block or has a variable with a
    /// nonzero objective coefficient that appears in no block.
    void validate() const;

private:
    std::vector<Exponent> m_vars;
    std::map<Exponent, int, GradedLex> m_index;
    std::vector<double> m_objective;
    std::vector<LmiBlock> m_blocks;
};

enum class SolveStatus
{
    Optimal,
    DualUnbounded,
    PrimalInfeasible,
    IterLimit,
    NumericalTrouble
};

std::string to_string(SolveStatus s);
SolveStatus status_from_string(const std::string& s);

struct SolverConfig
{
    double tol_gap = 1e-8;
    double tol_feas = 1e-8;
    int max_iters = 100;
    double unbounded_threshold = -1e10;
    /// Forwarded to extraction.
    double rank_tol = 1e-6;
    double step_fraction = 0.98;

    void validate() const;
};

struct SolveMetrics
{
    /// max_a |c_a - <A_a, W>| / (1 + max_a |c_a|)
    double primal_residual = 0.0;
    /// Moment-side violation: max(0, -lambda_min(B_i(y))) and |y_0 - 1|.
    double dual_residual = 0.0;
    /// |moment objective - Gram bound| / (1 + |moment| + |Gram|)
    double rel_gap = 0.0;
    /// moment objective - Gram bound
    double abs_gap = 0.0;
    int iterations = 0;
};

struct IterationRecord
{
    double moment_objective;
    double gram_bound;
    double rel_gap;
    double primal_residual;
    double mu;
    double step_primal;
    double step_dual;
};

struct SdpSolution
{
    SolveStatus status = SolveStatus::NumericalTrouble;
    /// Moment objective sum_a c_a y_a at the returned iterate.
    double objective = 0.0;
    /// c_0 - sum_i <A_{i,0}, W_i>; a certified lower bound when W is feasible.
    double gram_bound = 0.0;
    /// Indexed like LmiSdp::variables(); y[0] == 1. A ray when DualUnbounded.
    std::vector<double> y;
    std::vector<Matrix> gram;
    SolveMetrics metrics;
    std::vector<IterationRecord> history;
    std::string message;

    double moment(const LmiSdp& p, const Exponent& e) const;
};

SdpSolution solve(const LmiSdp& p, const SolverConfig& cfg = {});

/// Recomputes residuals, gap and objectives from (y, gram) alone.
SolveMetrics residuals(const LmiSdp& p, const SdpSolution& sol);

/// Minimum eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);

/// Moment of the measure proportional to exp(-|x|^2): prod_k E[x^{a_k}] with
/// E[x^{2j}] = (2j-1)!! / 2^j.
double gaussian_moment(const Exponent& e);

///
/// SDPA sparse text: the moment side is written as the SDPA primal
/// `min c^T x  s.t.  sum_a F_a x_a - F_0 >= 0` with F_0 = -A_0, so the pinned
/// y_0 disappears and the constant c_0 is dropped.
///
std::string export_sdpa(const LmiSdp& p);

} // namespace sparsesos
