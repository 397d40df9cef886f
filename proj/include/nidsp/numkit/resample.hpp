#ifndef NIDSP_NUMKIT_RESAMPLE_HPP
#define NIDSP_NUMKIT_RESAMPLE_HPP

#include <stdexcept>

#include "nidsp/numkit/complex_buf.hpp"
#include "nidsp/numkit/window.hpp"

namespace nidsp {

/// Design knobs for the rational resampler's anti-alias / anti-image filter.
struct ResampleDesign {
    int zero_crossings{64}; ///< half-length in units of the narrower Nyquist zone's sinc period
    double kaiser_beta{10.0};
};

/// Windowed-sinc lowpass prototype at the upsampled rate, centered, gain `up`.
inline rvec resample_prototype(std::int64_t up, std::int64_t down, const ResampleDesign& d = {}) {
    const auto r = std::max(up, down);
    const auto half = static_cast<std::int64_t>(d.zero_crossings) * r;
    rvec h(static_cast<std::size_t>(2 * half + 1));
    for (std::int64_t i = -half; i <= half; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(r);
        h[static_cast<std::size_t>(i + half)] = static_cast<double>(up) / static_cast<double>(r) * sinc(t) *
                                                kaiser(static_cast<double>(i) / static_cast<double>(half),
                                                       d.kaiser_beta);
    }
    return h;
}

/// Rational-rate conversion by up/down with a zero-phase polyphase FIR.
///
/// Output sample m sits at input time m·down/up, so sample 0 stays aligned
/// with input sample 0. Output length is floor(len·up/down) and the rate tag
/// is multiplied by up/down.
inline ComplexBuf resample_rational(const ComplexBuf& x, std::int64_t up, std::int64_t down,
                                    const ResampleDesign& design = {}) {
    if (up <= 0 || down <= 0) throw std::invalid_argument("resample_rational: up and down must be positive");
    const Rational ratio(up, down);
    up = ratio.num();
    down = ratio.den();
    ComplexBuf y;
    y.rate_sps = x.rate_sps * ratio;
    if (up == 1 && down == 1) {
        y.data = x.data;
        return y;
    }
    const auto h = resample_prototype(up, down, design);
    const auto half = static_cast<std::int64_t>(h.size() / 2);
    const auto len = static_cast<std::int64_t>(x.size());
    const auto out_len = (len * up) / down;
    y.data.assign(static_cast<std::size_t>(out_len), cplx{});
    for (std::int64_t m = 0; m < out_len; ++m) {
        const auto t = m * down; // position on the upsampled grid
        const auto n_lo = std::max<std::int64_t>(0, floor_div(t - half + up - 1, up));
        const auto n_hi = std::min<std::int64_t>(len - 1, floor_div(t + half, up));
        cplx acc{};
        for (auto n = n_lo; n <= n_hi; ++n) {
            acc += x.data[static_cast<std::size_t>(n)] * h[static_cast<std::size_t>(t - n * up + half)];
        }
        y.data[static_cast<std::size_t>(m)] = acc;
    }
    return y;
}

inline DualPolBlock resample_rational(const DualPolBlock& x, std::int64_t up, std::int64_t down,
                                      const ResampleDesign& design = {}) {
    auto rx = resample_rational(ComplexBuf{x.x, x.rate_sps}, up, down, design);
    auto ry = resample_rational(ComplexBuf{x.y, x.rate_sps}, up, down, design);
    return {std::move(rx.data), std::move(ry.data), rx.rate_sps};
}

/// Band-limited evaluation of x at fractional time t (samples) with a
/// Kaiser-windowed sinc of ±half_width taps. Outside the signal reads zero.
inline cplx bandlimited_sample(std::span<const cplx> x, double t, int half_width = 32, double beta = 9.0) {
    const auto base = static_cast<std::int64_t>(std::floor(t));
    cplx acc{};
    for (std::int64_t n = base - half_width + 1; n <= base + half_width; ++n) {
        const double d = t - static_cast<double>(n);
        acc += at_or_zero(x, n) * (sinc(d) * kaiser(d / half_width, beta));
    }
    return acc;
}

/// Tabulated version of bandlimited_sample: taps for `phases` uniformly spaced
/// fractional positions, linearly interpolated between neighbours.
class FractionalSampler {
public:
    explicit FractionalSampler(int half_width = 32, double beta = 9.0, int phases = 1024)
        : hw_(half_width), phases_(phases), table_(static_cast<std::size_t>((phases + 1) * 2 * half_width)) {
        for (int p = 0; p <= phases; ++p) {
            const double frac = static_cast<double>(p) / phases;
            for (int i = 0; i < 2 * hw_; ++i) {
                const double d = frac + hw_ - 1 - i; // tap i reads x[base − hw + 1 + i]
                table_[idx(p, i)] = sinc(d) * kaiser(d / hw_, beta);
            }
        }
    }

    [[nodiscard]] cplx operator()(std::span<const cplx> x, double t) const {
        const double fl = std::floor(t);
        const auto base = static_cast<std::int64_t>(fl);
        const double pos = (t - fl) * phases_;
        const int p = std::min(static_cast<int>(pos), phases_ - 1);
        const double w = pos - p;
        cplx acc{};
        for (int i = 0; i < 2 * hw_; ++i) {
            const double c = (1.0 - w) * table_[idx(p, i)] + w * table_[idx(p + 1, i)];
            acc += at_or_zero(x, base - hw_ + 1 + i) * c;
        }
        return acc;
    }

private:
    [[nodiscard]] std::size_t idx(int p, int i) const noexcept {
        return static_cast<std::size_t>(p) * static_cast<std::size_t>(2 * hw_) + static_cast<std::size_t>(i);
    }
    int hw_;
    int phases_;
    rvec table_;
};

/// x delayed by a constant `delay` samples (band-limited), same length.
inline cvec fractional_delay(std::span<const cplx> x, double delay, int half_width = 32, double beta = 9.0) {
    const double fl = std::floor(-delay);
    const double frac = -delay - fl;
    const auto shift = static_cast<std::int64_t>(fl);
    rvec h(static_cast<std::size_t>(2 * half_width));
    for (int i = 0; i < 2 * half_width; ++i) {
        const double d = frac + half_width - 1 - i;
        h[static_cast<std::size_t>(i)] = sinc(d) * kaiser(d / half_width, beta);
    }
    cvec y(x.size());
    for (std::size_t m = 0; m < x.size(); ++m) {
        const auto base = static_cast<std::int64_t>(m) + shift;
        cplx acc{};
        for (int i = 0; i < 2 * half_width; ++i) acc += at_or_zero(x, base - half_width + 1 + i) * h[static_cast<std::size_t>(i)];
        y[m] = acc;
    }
    return y;
}

} // namespace nidsp

#endif // NIDSP_NUMKIT_RESAMPLE_HPP
