#ifndef NIDSP_FRAMEGEN_QAM16_HPP
#define NIDSP_FRAMEGEN_QAM16_HPP

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "nidsp/numkit/complex_buf.hpp"

namespace nidsp {

using Bits = std::vector<std::uint8_t>;

namespace detail {
// Gray code per rail: 00 -> +1, 01 -> +3, 11 -> -3, 10 -> -1.
inline constexpr std::array<double, 4> kRailLevel{+1.0, +3.0, -1.0, -3.0};
inline const double kQamScale = 1.0 / std::sqrt(10.0);

inline int rail_bits(double v) {
    // nearest of {-3,-1,+1,+3} in normalized units
    if (v >= 2.0) return 1;  // 01
    if (v >= 0.0) return 0;  // 00
    if (v >= -2.0) return 2; // 10
    return 3;                // 11
}
} // namespace detail

/// Gray-mapped square 16QAM at unit mean power. Four bits per symbol: the
/// first pair selects the in-phase rail, the second the quadrature rail.
inline cvec map_16qam(std::span<const std::uint8_t> bits) {
    if (bits.size() % 4 != 0) throw std::invalid_argument("map_16qam: bit count must be divisible by 4");
    cvec out(bits.size() / 4);
    for (std::size_t s = 0; s < out.size(); ++s) {
        const auto* b = &bits[4 * s];
        const int i_idx = (b[0] & 1) << 1 | (b[1] & 1);
        const int q_idx = (b[2] & 1) << 1 | (b[3] & 1);
        out[s] = cplx{detail::kRailLevel[i_idx], detail::kRailLevel[q_idx]} * detail::kQamScale;
    }
    return out;
}

/// Nearest constellation point.
inline cplx decide_16qam(cplx y) {
    auto snap = [](double v) {
        v /= detail::kQamScale;
        const double l = v >= 2.0 ? 3.0 : v >= 0.0 ? 1.0 : v >= -2.0 ? -1.0 : -3.0;
        return l * detail::kQamScale;
    };
    return {snap(y.real()), snap(y.imag())};
}

/// Hard-decision demapping (inverse of map_16qam on noiseless input).
inline Bits demap_16qam(std::span<const cplx> symbols) {
    Bits out(symbols.size() * 4);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        const int i_idx = detail::rail_bits(symbols[s].real() / detail::kQamScale);
        const int q_idx = detail::rail_bits(symbols[s].imag() / detail::kQamScale);
        out[4 * s + 0] = static_cast<std::uint8_t>(i_idx >> 1 & 1);
        out[4 * s + 1] = static_cast<std::uint8_t>(i_idx & 1);
        out[4 * s + 2] = static_cast<std::uint8_t>(q_idx >> 1 & 1);
        out[4 * s + 3] = static_cast<std::uint8_t>(q_idx & 1);
    }
    return out;
}

} // namespace nidsp

#endif // NIDSP_FRAMEGEN_QAM16_HPP
