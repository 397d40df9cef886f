#include <gtest/gtest.h>

#include "nidsp/channel/channel.hpp"
#include "nidsp/framegen/dscm.hpp"
#include "nidsp/numkit/dft.hpp"

using namespace nidsp;

namespace {

DualPolBlock random_block(std::size_t n, std::uint64_t seed, Rational sps = Rational::integer(1)) {
    const auto bx = random_bits(4 * n, seed, 1);
    const auto by = random_bits(4 * n, seed, 2);
    return {map_16qam(bx), map_16qam(by), sps};
}

long peak_bin(const cvec& x) {
    const auto s = DftPlan(x.size()).forward(x);
    std::size_t best = 0;
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (std::norm(s[k]) > std::norm(s[best])) best = k;
    }
    return signed_bin(best, s.size());
}

} // namespace

TEST(Channel, AllOffIsIdentity) {
    const auto in = random_block(4096, 1);
    ChannelParams p;
    const auto out = apply_impairments(in, p, 8e9);
    EXPECT_EQ(out.x, in.x);
    EXPECT_EQ(out.y, in.y);
}

TEST(Channel, CfoShiftsTone) {
    const std::size_t n = 8000;
    const double fs = 16e9; // bin width 2 MHz
    cvec tone(n);
    for (std::size_t i = 0; i < n; ++i) tone[i] = std::polar(1.0, kTwoPi * 40.0 * static_cast<double>(i) / static_cast<double>(n));
    DualPolBlock b{tone, tone, Rational::integer(2)};
    ChannelParams p;
    p.cfo_hz = 1e8;
    const auto out = apply_impairments(b, p, fs);
    EXPECT_EQ(peak_bin(out.x), 40 + 50);
    // exact modulation: out·conj(in) is a pure 1e8 Hz phasor
    for (std::size_t i = 0; i < n; i += 997) {
        const cplx r = out.x[i] * std::conj(tone[i]);
        const double expect = kTwoPi * 1e8 * static_cast<double>(i) / fs;
        EXPECT_NEAR(std::arg(r * std::polar(1.0, -expect)), 0.0, 1e-9);
    }
}

TEST(Channel, NoisePowerMatchesSnr) {
    const std::size_t n = 200000;
    DualPolBlock b{cvec(n, cplx{1, 0}), cvec(n, cplx{0, 1}), Rational::integer(1)};
    ChannelParams p;
    p.snr_db = 20;
    p.seed = 4;
    const auto out = apply_impairments(b, p, 8e9);
    for (int pol = 0; pol < 2; ++pol) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += std::norm(out.pol(pol)[i] - b.pol(pol)[i]);
        EXPECT_NEAR(acc / static_cast<double>(n), 1e-2, 3e-4);
    }
}

TEST(Channel, NoiseScalesWithOversampling) {
    // Es/N0 convention: at 2 sps the per-sample noise doubles
    const std::size_t n = 200000;
    DualPolBlock b{cvec(n, cplx{1, 0}), cvec(n, cplx{1, 0}), Rational::integer(2)};
    ChannelParams p;
    p.snr_db = 20;
    const auto out = apply_impairments(b, p, 16e9);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::norm(out.x[i] - b.x[i]);
    EXPECT_NEAR(acc / static_cast<double>(n), 2e-2, 6e-4);
}

TEST(Wiener, ZeroLinewidthAndIncrementVariance) {
    const auto z = wiener_phase(1000, 0.0, 8e9, 1);
    for (double v : z) EXPECT_EQ(v, 0.0);
    const std::size_t n = 1'000'000;
    const double lw = 1e5, fs = 9e9;
    const auto phi = wiener_phase(n, lw, fs, 9);
    EXPECT_EQ(phi[0], 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i < n; ++i) acc += (phi[i] - phi[i - 1]) * (phi[i] - phi[i - 1]);
    const double expect = kTwoPi * lw / fs;
    EXPECT_NEAR(acc / static_cast<double>(n - 1), expect, 0.02 * expect);
    EXPECT_EQ(phi, wiener_phase(n, lw, fs, 9));
    EXPECT_THROW(wiener_phase(0, lw, fs, 1), std::invalid_argument);
    EXPECT_THROW(wiener_phase(10, -1.0, fs, 1), std::invalid_argument);
}

TEST(Channel, DeterministicAcrossRuns) {
    const auto in = random_block(2048, 2, Rational::integer(2));
    ChannelParams p;
    p.cfo_hz = 2e8;
    p.clock_ppm = 20;
    p.clock_phase = 0.3;
    p.jones = jones_rotation(0.4, 0.2);
    p.cd_ps_per_nm = 340;
    p.linewidth_hz = 1e5;
    p.snr_db = 15;
    p.seed = 77;
    const auto a = apply_impairments(in, p, 16e9);
    const auto b = apply_impairments(in, p, 16e9);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.y, b.y);
    p.seed = 78;
    EXPECT_NE(apply_impairments(in, p, 16e9).x, a.x);
}

TEST(Jones, RotationThenInverseIsIdentity) {
    const auto in = random_block(1024, 3);
    ChannelParams p;
    p.jones = jones_rotation(0.7, 0.3);
    const auto mid = apply_impairments(in, p, 8e9);
    p.jones = jones_rotation(-0.7, 0.3);
    // R(θ,φ)^{-1} is not R(−θ,φ) in general; use the conjugate transpose.
    const auto j = jones_rotation(0.7, 0.3);
    p.jones = {{{std::conj(j[0][0]), std::conj(j[1][0])}, {std::conj(j[0][1]), std::conj(j[1][1])}}};
    const auto back = apply_impairments(mid, p, 8e9);
    EXPECT_LT(rms_error(back.x, in.x), 1e-9);
    EXPECT_LT(rms_error(back.y, in.y), 1e-9);
    // plain rotations compose by angle
    const auto r = jones_product(jones_rotation(0.7), jones_rotation(-0.7));
    EXPECT_LT(unitarity_error(r), 1e-12);
    EXPECT_NEAR(std::abs(r[0][0] - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(r[0][1]), 0.0, 1e-12);
}

TEST(Channel, CdAndJonesPreservePower) {
    const auto sym = random_block(4096, 4);
    const auto in = shape_single(sym, 0.1, Rational::integer(2));
    ChannelParams p;
    p.cd_ps_per_nm = 340;
    p.jones = jones_rotation(1.1, -0.4);
    const auto out = apply_impairments(in, p, 16e9);
    const double pin = mean_power(in.x) + mean_power(in.y);
    const double pout = mean_power(out.x) + mean_power(out.y);
    EXPECT_NEAR(pout / pin, 1.0, 1e-9);
}

TEST(Channel, CdIsAllPassAndInvertible) {
    const auto in = shape_single(random_block(4096, 5), 0.1, Rational::integer(2));
    ChannelParams p;
    p.cd_ps_per_nm = 340;
    const auto mid = apply_impairments(in, p, 16e9);
    EXPECT_GT(rms_error(mid.x, in.x), 1e-3);
    p.cd_ps_per_nm = -340;
    const auto back = apply_impairments(mid, p, 16e9);
    EXPECT_LT(rms_error(back.x, in.x), 1e-9);
}

TEST(Channel, ValidationErrors) {
    ChannelParams p;
    p.jones = {{{cplx{1.0, 0}, cplx{0.1, 0}}, {cplx{0, 0}, cplx{1.0, 0}}}};
    EXPECT_THROW(p.validate(), std::invalid_argument);
    ChannelParams q;
    q.linewidth_hz = -1;
    EXPECT_THROW(q.validate(), std::invalid_argument);
    ChannelParams r;
    r.snr_db = std::nan("");
    EXPECT_THROW(r.validate(), std::invalid_argument);
    ChannelParams s;
    s.clock_phase = 1.0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    const auto in = random_block(64, 1);
    EXPECT_THROW(apply_impairments(in, p, 8e9), std::invalid_argument);
}

TEST(Channel, ClockPhaseDelaysBandlimitedSignal) {
    const auto sym = random_block(2048, 6);
    const auto in = shape_single(sym, 0.1, Rational::integer(2));
    ChannelParams p;
    p.clock_phase = 0.25; // half a sample at 2 sps
    const auto out = apply_impairments(in, p, 16e9);
    // oracle: frequency-domain delay of half a sample, compared away from edges
    const std::size_t n = in.size();
    const DftPlan plan(n);
    auto s = plan.forward(in.x);
    for (std::size_t k = 0; k < n; ++k) {
        s[k] *= std::polar(1.0, -kTwoPi * static_cast<double>(signed_bin(k, n)) * 0.5 / static_cast<double>(n));
    }
    const auto ref = plan.inverse(s);
    double err = 0.0, pw = 0.0;
    for (std::size_t i = 200; i + 200 < n; ++i) {
        err += std::norm(out.x[i] - ref[i]);
        pw += std::norm(ref[i]);
    }
    EXPECT_LT(10 * std::log10(err / pw), -50.0);
}
