#ifndef NIDSP_TESTS_FIXTURES_HPP
#define NIDSP_TESTS_FIXTURES_HPP

#include <random>

#include "nidsp/bench/metrics.hpp"
#include "nidsp/bench/scenario.hpp"

namespace nidsp::testing {

/// Random unit-power QPSK on both polarizations, RRC-shaped at the profile rate.
inline DualPolBlock shaped_qpsk(const DspProfile& prof, std::size_t nsym, std::uint64_t seed) {
    auto rng = make_rng(seed, 90);
    const double a = std::sqrt(0.5);
    DualPolBlock s{cvec(nsym), cvec(nsym), Rational::integer(1)};
    for (int p = 0; p < 2; ++p) {
        for (auto& v : s.pol(p)) v = {(rng() & 1U) ? a : -a, (rng() & 1U) ? a : -a};
    }
    return shape_single(s, prof.beta, prof.sps());
}

/// Godard detector output at an injected delay of `tau` symbols, averaged
/// over `trials` matched-filtered QPSK blocks on both polarizations.
///
/// With `periodic` each trial repeats one block of N·M/K symbols, so the
/// analysed N samples are exactly one period and the DFT sees no window
/// leakage. Otherwise the blocks are cut from one long aperiodic stream, as
/// in the receiver.
inline double ted_at_delay(const DspProfile& prof, double tau, int trials, std::uint64_t seed, bool periodic = true) {
    const auto n = static_cast<std::size_t>(prof.N);
    const auto per = static_cast<std::size_t>(prof.symbol_rate_bins());
    const double d = tau * prof.sps().value();
    const DftPlan plan(n);
    auto analyse = [&](const DualPolBlock& sym, std::size_t first, int blocks) {
        const auto sh = shape_single(sym, prof.beta, prof.sps());
        DualPolBlock x{fractional_delay(sh.x, d), fractional_delay(sh.y, d), sh.rate_sps};
        const auto y = matched_filter(x, prof);
        double acc = 0.0;
        for (int b = 0; b < blocks; ++b) {
            for (int p = 0; p < 2; ++p) {
                acc += godard_ted(plan.forward(std::span(y.pol(p)).subspan(first + static_cast<std::size_t>(b) * n, n)), prof);
            }
        }
        return acc;
    };
    auto rng = make_rng(seed, 90);
    const double a = std::sqrt(0.5);
    auto qpsk = [&] { return cplx{(rng() & 1U) ? a : -a, (rng() & 1U) ? a : -a}; };
    double acc = 0.0;
    if (periodic) {
        const std::size_t reps = 12;
        for (int t = 0; t < trials; ++t) {
            DualPolBlock sym{cvec(per), cvec(per), Rational::integer(1)};
            for (int p = 0; p < 2; ++p) {
                for (auto& v : sym.pol(p)) v = qpsk();
            }
            DualPolBlock rep{{}, {}, Rational::integer(1)};
            for (std::size_t r = 0; r < reps; ++r) {
                for (int p = 0; p < 2; ++p) rep.pol(p).insert(rep.pol(p).end(), sym.pol(p).begin(), sym.pol(p).end());
            }
            acc += analyse(rep, reps / 2 * n, 1);
        }
    } else {
        const std::size_t nsym = (static_cast<std::size_t>(trials) + 8) * per;
        DualPolBlock sym{cvec(nsym), cvec(nsym), Rational::integer(1)};
        for (int p = 0; p < 2; ++p) {
            for (auto& v : sym.pol(p)) v = qpsk();
        }
        acc += analyse(sym, 4 * n, trials);
    }
    return acc / trials;
}

struct SCurve {
    rvec taus;
    rvec values;
    double peak{0.0};
    double even_part{0.0}; ///< max |S(τ) + S(−τ)|/2 relative to peak
    double zero{0.0};      ///< NaN unless exactly one sign change
};

/// S-curve on a symmetric grid of 2·half+1 delays spanning (−T/4, T/4).
inline SCurve ted_s_curve(const DspProfile& prof, int half, int trials, std::uint64_t seed, bool periodic = true);

/// Delay of the sign change in an S-curve sampled on `taus`, by linear
/// interpolation. NaN if the curve does not change sign exactly once.
inline double s_curve_zero(std::span<const double> taus, std::span<const double> s) {
    double zero = std::numeric_limits<double>::quiet_NaN();
    int crossings = 0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i] == 0.0) {
            ++crossings;
            zero = taus[i];
        } else if ((s[i] > 0) != (s[i + 1] > 0) && s[i + 1] != 0.0) {
            ++crossings;
            zero = taus[i] + (taus[i + 1] - taus[i]) * s[i] / (s[i] - s[i + 1]);
        }
    }
    return crossings == 1 ? zero : std::numeric_limits<double>::quiet_NaN();
}

inline SCurve ted_s_curve(const DspProfile& prof, int half, int trials, std::uint64_t seed, bool periodic) {
    SCurve c;
    for (int i = -half; i <= half; ++i) {
        const double tau = 0.24 * i / half;
        c.taus.push_back(tau);
        c.values.push_back(ted_at_delay(prof, tau, trials, seed, periodic));
    }
    for (double v : c.values) c.peak = std::max(c.peak, std::abs(v));
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        c.even_part = std::max(c.even_part, std::abs(c.values[i] + c.values[c.values.size() - 1 - i]) / 2 / c.peak);
    }
    c.zero = s_curve_zero(c.taus, c.values);
    return c;
}

/// Channel used by the timing experiments: static delay plus the usual link.
inline ChannelParams timing_channel(double delay, double snr_db) {
    auto c = full_impairments(snr_db);
    c.clock_phase = delay;
    return c;
}

struct TimingTrial {
    rvec trace_init;
    rvec trace_plain;
};

/// Timing-loop traces with and without sampling-phase initialization for one seed.
inline TimingTrial timing_trial(const DspProfile& prof, double delay, double snr_db, std::uint64_t seed) {
    Scenario sc;
    sc.prof = prof;
    sc.seed = seed;
    sc.channel = timing_channel(delay, snr_db);
    SymbolFrame f;
    std::int64_t off = 0;
    const auto x = scenario_input(sc, f, off);
    const auto det = detect_tones(x, prof);
    const auto shift = tone_pair_shift(x, prof, det);
    return {fd_frontend(x, prof, shift, det, true).phase_trace, fd_frontend(x, prof, shift, det, false).phase_trace};
}

/// Ensemble-mean training-mode MSE trace (`len` symbols) at `snr_db`.
inline rvec training_mse(const DspProfile& prof, double snr_db, int len, int seeds) {
    rvec avg(static_cast<std::size_t>(len), 0.0);
    for (int s = 1; s <= seeds; ++s) {
        Scenario sc;
        sc.prof = prof;
        sc.seed = static_cast<std::uint64_t>(s);
        sc.channel = full_impairments(snr_db);
        sc.train_symbols = len;
        const auto r = run_scenario(sc);
        for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += r.rx.mse_trace[i] / seeds;
    }
    return avg;
}

} // namespace nidsp::testing

#endif // NIDSP_TESTS_FIXTURES_HPP
