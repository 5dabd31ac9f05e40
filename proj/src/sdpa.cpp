#include <sparsesos/sdp.hpp>

#include <algorithm>
#include <charconv>
#include <sstream>
#include <tuple>

namespace sparsesos
{

namespace
{

std::string fmt(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string export_sdpa(const LmiSdp& p)
{
    p.validate();
    const auto& obj = p.objective();
    const std::size_t m = p.num_variables() - 1;
    std::ostringstream out;
    out << m << "\n" << p.blocks().size() << "\n";
    const auto sizes = p.block_sizes();
    for (std::size_t i = 0; i < sizes.size(); ++i)
    {
        out << (i ? " " : "") << sizes[i];
    }
    out << "\n";
    for (std::size_t j = 1; j <= m; ++j)
    {
        out << (j > 1 ? " " : "") << fmt(obj[j]);
    }
    out << "\n";

    // (matno, blkno, i, j) -> value; duplicates are summed.
    std::map<std::tuple<int, int, int, int>, double> entries;
    for (std::size_t b = 0; b < p.blocks().size(); ++b)
    {
        for (const auto& [var, list] : p.blocks()[b].terms)
        {
            const double sign = var == 0 ? -1.0 : 1.0;
            for (const auto& e : list)
            {
                entries[{var, static_cast<int>(b) + 1, e.row + 1, e.col + 1}] += sign * e.coeff;
            }
        }
    }
    for (const auto& [key, v] : entries)
    {
        if (v == 0.0)
        {
            continue;
        }
        const auto& [mat, blk, i, j] = key;
        out << mat << " " << blk << " " << i << " " << j << " " << fmt(v) << "\n";
    }
    return out.str();
}

} // namespace sparsesos
