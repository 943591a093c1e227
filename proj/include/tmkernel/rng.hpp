#pragma once

#include <cstdint>
#include <random>

namespace tmkernel {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Key of the independent stream addressed by (seed, a, b). The key is a pure
/// function of its arguments, so streams can be created in any order on any thread.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
    return mix64(mix64(mix64(seed) ^ a) ^ (b * 0xd1342543de82ef95ULL + 1));
}

inline Engine make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(stream_key(seed, a, b)),
                      static_cast<std::uint32_t>(stream_key(seed, a, b) >> 32)};
    return Engine(seq);
}

// Stream-family tags so unrelated consumers of one master seed never share a stream.
namespace stream_tag {
inline constexpr std::uint64_t bursts = 0x4255525354ULL;
inline constexpr std::uint64_t test_points = 0x504f494e54ULL;
inline constexpr std::uint64_t features = 0x46454154ULL;
inline constexpr std::uint64_t trajectory = 0x5452414aULL;
}  // namespace stream_tag

}  // namespace tmkernel
