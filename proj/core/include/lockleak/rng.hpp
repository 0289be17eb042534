#pragma once

#include <cstdint>
#include <random>

namespace lockleak {

// std::uniform_int_distribution is implementation-defined, so seeded artifacts would
// differ between standard libraries. These helpers only rely on the engine output,
// which the standard pins down for mt19937_64.
using Rng = std::mt19937_64;

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    return draw % bound;
}

inline bool coin(Rng& rng) { return (rng() >> 63) != 0; }

} // namespace lockleak
