#ifndef NIDSP_NUMKIT_RRC_HPP
#define NIDSP_NUMKIT_RRC_HPP

#include <cmath>
#include <stdexcept>

#include "nidsp/numkit/complex_buf.hpp"

namespace nidsp {

/// Continuous root-raised-cosine impulse response, unit symbol period.
/// The removable singularities at t = 0 and |t| = 1/(4β) use their limits.
inline double rrc_impulse(double t, double beta) {
    if (beta == 0.0) {
        return t == 0.0 ? 1.0 : std::sin(kPi * t) / (kPi * t);
    }
    if (t == 0.0) return 1.0 - beta + 4.0 * beta / kPi;
    const double x = 4.0 * beta * t;
    if (std::abs(std::abs(x) - 1.0) < 1e-12) {
        const double a = kPi / (4.0 * beta);
        return beta / std::sqrt(2.0) * ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    }
    const double num = std::sin(kPi * t * (1.0 - beta)) + x * std::cos(kPi * t * (1.0 + beta));
    return num / (kPi * t * (1.0 - x * x));
}

/// Raised-cosine frequency response magnitude (unit symbol rate); the RRC is its square root.
inline double raised_cosine_spectrum(double f, double beta) {
    const double af = std::abs(f);
    const double f1 = (1.0 - beta) / 2.0;
    const double f2 = (1.0 + beta) / 2.0;
    if (af <= f1) return 1.0;
    if (af > f2) return 0.0;
    return 0.5 * (1.0 + std::cos(kPi / beta * (af - f1)));
}

/// Odd-length, symmetric, unit-energy RRC taps sampled at `sps` samples per
/// symbol over ±span_symbols/2.
inline rvec rrc_taps(double beta, Rational sps, int span_symbols) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("rrc_taps: roll-off must lie in [0, 1]");
    if (span_symbols <= 0 || span_symbols % 2 != 0) {
        throw std::invalid_argument("rrc_taps: span_symbols must be a positive even integer");
    }
    if (sps.num() < sps.den()) throw std::invalid_argument("rrc_taps: sps must be >= 1");
    const auto half = (static_cast<std::int64_t>(span_symbols) / 2 * sps.num()) / sps.den();
    rvec taps(static_cast<std::size_t>(2 * half + 1));
    double energy = 0.0;
    for (std::int64_t i = -half; i <= half; ++i) {
        // t = i * M / K in symbols, formed from integers so |4βt| = 1 is hit exactly when it exists
        const double t = static_cast<double>(i * sps.den()) / static_cast<double>(sps.num());
        const double v = rrc_impulse(t, beta);
        taps[static_cast<std::size_t>(i + half)] = v;
        energy += v * v;
    }
    const double g = 1.0 / std::sqrt(energy);
    for (auto& v : taps) v *= g;
    // exact symmetry regardless of floating-point evaluation order
    for (std::size_t i = 0; i < taps.size() / 2; ++i) taps[taps.size() - 1 - i] = taps[i];
    return taps;
}

} // namespace nidsp

#endif // NIDSP_NUMKIT_RRC_HPP
