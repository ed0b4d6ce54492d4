#pragma once

#include <cstdint>
#include <random>

namespace drt {

// SplitMix64 step; used only to derive seed material for substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Engine for substream `index` of a master seed. The mapping depends only on
// (seed, index), so results are independent of how work is split over threads.
inline std::mt19937_64 substream_engine(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (index + 1));
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    const std::uint64_t c = splitmix64(s);
    const std::uint64_t d = splitmix64(s);
    std::seed_seq seq{
        static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
        static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
        static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
        static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(d >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace drt
