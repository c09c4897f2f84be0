#pragma once

#include <cstdint>
#include <random>

namespace ces {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent child seed for (master, stream, index). Streams separate unrelated
/// consumers (roster draws, clusterer runs, repetitions) of one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) noexcept {
    return splitmix64(splitmix64(splitmix64(master) ^ (stream * 0x2545f4914f6cdd1dULL)) ^ index);
}

namespace stream {
inline constexpr std::uint64_t roster = 1;
inline constexpr std::uint64_t clusterer = 2;
inline constexpr std::uint64_t repetition = 3;
inline constexpr std::uint64_t perturbation = 4;
inline constexpr std::uint64_t candidate_k = 5;
}  // namespace stream

}  // namespace ces
