#ifndef NIDSP_TESTS_ORACLES_HPP
#define NIDSP_TESTS_ORACLES_HPP

#include <random>

#include "nidsp/numkit/complex_buf.hpp"

namespace nidsp::testing {

inline cvec random_cvec(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    cvec v(n);
    for (auto& s : v) s = {g(rng), g(rng)};
    return v;
}

// Direct O(N^2) summation in long double, independent of any plan.
inline cvec direct_dft(const cvec& x, bool inverse) {
    const auto n = x.size();
    cvec out(n);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        long double re = 0, im = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const long double ang = sign * 2.0L * 3.141592653589793238462643383279L *
                                    static_cast<long double>((k * t) % n) / static_cast<long double>(n);
            re += x[t].real() * std::cos(ang) - x[t].imag() * std::sin(ang);
            im += x[t].real() * std::sin(ang) + x[t].imag() * std::cos(ang);
        }
        out[k] = {static_cast<double>(re), static_cast<double>(im)};
        if (inverse) out[k] /= static_cast<double>(n);
    }
    return out;
}

/// y[g] = Σ_i h[i]·x[g − (i − center)], zero outside x.
inline cvec direct_convolution(const cvec& x, const cvec& h, std::int64_t center) {
    cvec y(x.size());
    for (std::size_t g = 0; g < x.size(); ++g) {
        cplx acc{};
        for (std::size_t i = 0; i < h.size(); ++i) {
            acc += h[i] * at_or_zero(x, static_cast<std::int64_t>(g) - (static_cast<std::int64_t>(i) - center));
        }
        y[g] = acc;
    }
    return y;
}

/// Phase of filter `taps` (centred, 2L+1) at normalized frequency f, minus the
/// ideal delay of `delay` samples.
inline double delay_phase_error(std::span<const double> taps, double f, double delay) {
    const auto l = static_cast<int>(taps.size() / 2);
    cplx h{};
    for (int i = -l; i <= l; ++i) h += taps[static_cast<std::size_t>(i + l)] * std::polar(1.0, 2.0 * 3.141592653589793 * f * i);
    return std::arg(h * std::polar(1.0, -2.0 * 3.141592653589793 * f * delay));
}

} // namespace nidsp::testing

#endif // NIDSP_TESTS_ORACLES_HPP
