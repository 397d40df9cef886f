#ifndef NIDSP_NUMKIT_RNG_HPP
#define NIDSP_NUMKIT_RNG_HPP

#include <cstdint>
#include <random>

namespace nidsp {

/// Independent, reproducible generator for (seed, stream) pairs. Every random
/// quantity in the library is drawn from one of these; nothing reads OS entropy.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6e69u};
    return std::mt19937_64(seq);
}

namespace stream {
inline constexpr std::uint64_t kSyncX = 1;
inline constexpr std::uint64_t kSyncY = 2;
inline constexpr std::uint64_t kPilots = 3;
inline constexpr std::uint64_t kPhaseNoise = 10;
inline constexpr std::uint64_t kAwgn = 11;
inline constexpr std::uint64_t kPayloadBits = 20;
inline constexpr std::uint64_t kPadding = 21;
} // namespace stream

} // namespace nidsp

#endif // NIDSP_NUMKIT_RNG_HPP
