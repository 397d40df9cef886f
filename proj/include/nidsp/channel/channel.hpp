#ifndef NIDSP_CHANNEL_CHANNEL_HPP
#define NIDSP_CHANNEL_CHANNEL_HPP

#include <array>
#include <limits>
#include <stdexcept>
#include <string>

#include "nidsp/numkit/dft.hpp"
#include "nidsp/numkit/resample.hpp"
#include "nidsp/numkit/rng.hpp"

namespace nidsp {

using Jones = std::array<std::array<cplx, 2>, 2>;

inline Jones jones_identity() { return {{{cplx{1, 0}, cplx{0, 0}}, {cplx{0, 0}, cplx{1, 0}}}}; }

/// Rotation by θ combined with a differential phase φ between the axes.
inline Jones jones_rotation(double theta, double phi = 0.0) {
    const double c = std::cos(theta), s = std::sin(theta);
    const cplx e = std::polar(1.0, phi);
    return {{{cplx{c, 0} * e, cplx{-s, 0}}, {cplx{s, 0}, cplx{c, 0} * std::conj(e)}}};
}

inline Jones jones_swap() { return {{{cplx{0, 0}, cplx{1, 0}}, {cplx{1, 0}, cplx{0, 0}}}}; }

inline Jones jones_product(const Jones& a, const Jones& b) {
    Jones r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return r;
}

/// Frobenius norm of J·J† − I.
inline double unitarity_error(const Jones& j) {
    double acc = 0.0;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const cplx v = j[r][0] * std::conj(j[c][0]) + j[r][1] * std::conj(j[c][1]) - (r == c ? 1.0 : 0.0);
            acc += std::norm(v);
        }
    }
    return std::sqrt(acc);
}

struct ChannelParams {
    double cfo_hz{0.0};
    double clock_ppm{0.0};
    double clock_phase{0.0}; ///< static sampling delay in symbols, [0, 1)
    Jones jones{jones_identity()};
    double cd_ps_per_nm{0.0}; ///< accumulated dispersion; 20 km × 17 ps/nm/km = 340
    double wavelength_nm{1545.123};
    double linewidth_hz{0.0};
    double snr_db{std::numeric_limits<double>::infinity()}; ///< Es/N0 per polarization; +inf disables noise
    std::uint64_t seed{0};

    void validate() const {
        auto fail = [](const std::string& m) { throw std::invalid_argument("ChannelParams: " + m); };
        if (unitarity_error(jones) >= 1e-12) fail("Jones matrix is not unitary");
        if (!(linewidth_hz >= 0)) fail("linewidth must be >= 0");
        if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) fail("snr_db must be finite or +inf");
        if (!(clock_phase >= 0.0 && clock_phase < 1.0)) fail("clock_phase must lie in [0, 1)");
        if (!std::isfinite(cfo_hz) || !std::isfinite(clock_ppm) || !std::isfinite(cd_ps_per_nm)) {
            fail("non-finite impairment value");
        }
    }
};

/// Laser phase as a Wiener process: φ(0) = 0, i.i.d. Gaussian increments of
/// variance 2π·linewidth/fs.
inline rvec wiener_phase(std::size_t n, double linewidth_hz, double fs, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("wiener_phase: n must be >= 1");
    if (!(linewidth_hz >= 0)) throw std::invalid_argument("wiener_phase: linewidth must be >= 0");
    rvec phi(n, 0.0);
    if (linewidth_hz == 0.0) return phi;
    auto rng = make_rng(seed, stream::kPhaseNoise);
    std::normal_distribution<double> g(0.0, std::sqrt(kTwoPi * linewidth_hz / fs));
    for (std::size_t i = 1; i < n; ++i) phi[i] = phi[i - 1] + g(rng);
    return phi;
}

namespace detail {

/// Circular all-pass over the whole block, so energy is preserved exactly;
/// callers pad the signal when block edges matter.
inline void apply_dispersion(DualPolBlock& b, double cd_ps_per_nm, double wavelength_nm, double fs) {
    constexpr double c = 299792458.0;
    const double lambda = wavelength_nm * 1e-9;
    const double d_total = cd_ps_per_nm * 1e-3; // ps/nm -> s/m
    const std::size_t n = b.size();
    const DftPlan plan(n);
    cvec h(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = static_cast<double>(signed_bin(k, n)) * fs / static_cast<double>(n);
        h[k] = std::polar(1.0, -kPi * lambda * lambda * d_total * f * f / c);
    }
    for (int p = 0; p < 2; ++p) {
        auto spec = plan.forward(b.pol(p));
        for (std::size_t k = 0; k < n; ++k) spec[k] *= h[k];
        b.pol(p) = plan.inverse(spec);
    }
}

inline void apply_jones(DualPolBlock& b, const Jones& j) {
    for (std::size_t n = 0; n < b.size(); ++n) {
        const cplx x = b.x[n], y = b.y[n];
        b.x[n] = j[0][0] * x + j[0][1] * y;
        b.y[n] = j[1][0] * x + j[1][1] * y;
    }
}

/// Output sample m reads the input at t = m(1 + ppm·1e-6) − delay.
inline void apply_clock(DualPolBlock& b, double ppm, double delay_samples) {
    if (ppm == 0.0) {
        b.x = fractional_delay(b.x, delay_samples);
        b.y = fractional_delay(b.y, delay_samples);
        return;
    }
    const double scale = 1.0 + ppm * 1e-6;
    const FractionalSampler sample;
    DualPolBlock out{cvec(b.size()), cvec(b.size()), b.rate_sps};
    for (std::size_t m = 0; m < b.size(); ++m) {
        const double t = static_cast<double>(m) * scale - delay_samples;
        out.x[m] = sample(b.x, t);
        out.y[m] = sample(b.y, t);
    }
    b = std::move(out);
}

} // namespace detail

/// Applies, in order: chromatic dispersion (all-pass), Jones mixing, sampling
/// clock offset and delay, carrier frequency offset with laser phase noise,
/// and complex AWGN. Noise variance per sample is P·sps/SNR, i.e. snr_db is
/// Es/N0 per polarization for a signal of mean per-sample power P.
inline DualPolBlock apply_impairments(const DualPolBlock& in, const ChannelParams& p, double fs) {
    p.validate();
    if (!(fs > 0)) throw std::invalid_argument("apply_impairments: fs must be positive");
    if (in.x.size() != in.y.size()) throw std::invalid_argument("apply_impairments: polarization length mismatch");
    DualPolBlock b = in;
    const double sps = b.rate_sps.value();
    if (p.cd_ps_per_nm != 0.0) detail::apply_dispersion(b, p.cd_ps_per_nm, p.wavelength_nm, fs);
    if (p.jones != jones_identity()) detail::apply_jones(b, p.jones);
    if (p.clock_ppm != 0.0 || p.clock_phase != 0.0) detail::apply_clock(b, p.clock_ppm, p.clock_phase * sps);
    if (p.cfo_hz != 0.0 || p.linewidth_hz > 0.0) {
        const auto phi = wiener_phase(b.size(), p.linewidth_hz, fs, p.seed);
        const double f_norm = p.cfo_hz / fs;
        for (std::size_t n = 0; n < b.size(); ++n) {
            const double cyc = std::fmod(f_norm * static_cast<double>(n), 1.0);
            const cplx rot = std::polar(1.0, kTwoPi * cyc + phi[n]);
            b.x[n] *= rot;
            b.y[n] *= rot;
        }
    }
    if (std::isfinite(p.snr_db)) {
        const double ps = 0.5 * (mean_power(b.x) + mean_power(b.y));
        const double var = ps * sps / std::pow(10.0, p.snr_db / 10.0);
        auto rng = make_rng(p.seed, stream::kAwgn);
        std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
        for (int pol = 0; pol < 2; ++pol) {
            for (auto& s : b.pol(pol)) s += cplx{g(rng), g(rng)};
        }
    }
    return b;
}

} // namespace nidsp

#endif // NIDSP_CHANNEL_CHANNEL_HPP
