#pragma once

#include <cstdint>
#include <random>

namespace normest {

/// Engine used for every random draw in the library.
using Rng = std::mt19937_64;

/// One splitmix64 finalizer step; used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for stream `index` under `master`. Trials, blocks of work, and
/// sub-components all draw from streams keyed this way so results do not
/// depend on how work is split across threads.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
    return Rng(derive_seed(master, index));
}

}  // namespace normest
