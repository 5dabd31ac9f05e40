///
/// \file random.hpp
///
/// Portable uniform sampling on top of std::mt19937_64. The standard
/// distributions are implementation-defined, so seeded instances would
/// differ between standard libraries.
///
#pragma once

#include <cstdint>
#include <random>

namespace sparsesos
{

using Rng = std::mt19937_64;

/// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi)
{
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(rng() % span);
}

} // namespace sparsesos
