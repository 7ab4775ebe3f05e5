#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sidelattice {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stream tags keep independent uses of one master seed apart.
enum class StreamTag : std::uint64_t {
    generator = 1,
    dither = 2,
    message = 3,
    noise = 4,
    verify = 5,
};

/// Engine for the stream identified by (seed, tag, indices...). Every
/// (receiver, trial) unit gets its own stream so parallel runs replay exactly.
inline Engine make_stream(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> indices = {}) {
    std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(tag)));
    for (auto i : indices) h = mix64(h ^ mix64(i + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Engine(seq);
}

}  // namespace sidelattice
