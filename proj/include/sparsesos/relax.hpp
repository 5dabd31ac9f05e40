///
/// \file relax.hpp
///
/// Dense, clique-sparse and support-sparse moment relaxations of
/// f = sum_i f_i(x_{Delta_i}), and coefficient-wise checks of the resulting
/// SOS certificates.
///
#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <sparsesos/poly.hpp>
#include <sparsesos/sdp.hpp>

namespace sparsesos
{

enum class RelaxationKind
{
    Dense,
    SparseClique,
    SparserSupport
};

std::string to_string(RelaxationKind k);
/// Accepts "dense", "sparse", "sparser" as well as the enumerator names.
RelaxationKind relaxation_kind_from_string(const std::string& s);

struct RelaxationInfo
{
    RelaxationKind kind = RelaxationKind::Dense;
    /// Row labels of every block.
    std::vector<std::vector<Exponent>> block_labels;
    /// Moment index set, excluding nothing (F[0] is the zero exponent).
    std::vector<Exponent> F;
    int d = 0;
    /// Clique of the summand owning each block (all variables for Dense).
    std::vector<Clique> cliques;
    int n = 0;

    std::vector<int> block_sizes() const;
    nlohmann::json to_json() const;
};

struct Relaxation
{
    LmiSdp sdp;
    RelaxationInfo info;
};

/// \throw InputError on odd degree.
Relaxation build_dense(const Polynomial& f);

Relaxation build_sparse(const SparseSum& s);

/// Blocks indexed by the Newton half-supports of the summands, with the
/// origin added so the constant has a home.
/// \throw InputError if supp(f) is not covered by the blocks.
Relaxation build_sparser(const SparseSum& s);

Relaxation build(const SparseSum& s, RelaxationKind kind);

/// max_alpha |f_alpha - (bound + sum_i m_i^T W_i m_i)_alpha|.
/// \throw InputError when the Gram blocks do not match info.
double verify_sos_certificate(const Polynomial& f, double bound, const std::vector<Matrix>& gram,
                              const RelaxationInfo& info);
double verify_sos_certificate(const SparseSum& f, double bound, const std::vector<Matrix>& gram,
                              const RelaxationInfo& info);

} // namespace sparsesos
