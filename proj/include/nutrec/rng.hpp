#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace nutrec {

// std::mt19937 output is fully specified by the standard; the distribution
// classes are not. These helpers keep every seeded draw bit-reproducible
// across compilers.

inline std::uint32_t draw_u32(std::mt19937& rng) { return rng(); }

// Unbiased draw in [0, bound) by rejection.
inline std::uint32_t draw_below(std::mt19937& rng, std::uint32_t bound) {
    const std::uint32_t limit = UINT32_MAX - UINT32_MAX % bound;
    std::uint32_t v = rng();
    while (v >= limit) v = rng();
    return v % bound;
}

// Uniform in [0, 1).
inline double draw_unit(std::mt19937& rng) {
    return rng() * (1.0 / 4294967296.0);
}

inline double draw_range(std::mt19937& rng, double lo, double hi) {
    return lo + (hi - lo) * draw_unit(rng);
}

// In-place Fisher-Yates with the unbiased bounded draw above.
template <typename T>
void shuffle_deterministic(std::span<T> items, std::mt19937& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::uint32_t j = draw_below(rng, static_cast<std::uint32_t>(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace nutrec
