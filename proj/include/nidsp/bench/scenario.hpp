#ifndef NIDSP_BENCH_SCENARIO_HPP
#define NIDSP_BENCH_SCENARIO_HPP

#include "nidsp/channel/channel.hpp"
#include "nidsp/framegen/dscm.hpp"
#include "nidsp/rxchain/receiver.hpp"

namespace nidsp {

/// One TX → channel → RX trial on a single subcarrier.
struct Scenario {
    DspProfile prof{profile_9_8()};
    FrameLayout layout{};
    ChannelParams channel{};
    bool channel_on{true};
    double rs{8e9};
    std::uint64_t seed{1};
    int guard_symbols{300}; ///< random symbols before and after the frame (plus a seeded jitter)
    int guard_jitter{64};
    bool tr_init{true};
    int train_symbols{256};
    bool count_ops{false};
};

struct ScenarioResult {
    SymbolFrame frame;
    std::int64_t frame_offset{0}; ///< TX symbol index of the first frame symbol
    RxReport rx;
};

inline const Rational kTxRate = Rational::integer(2);

/// Payload bits and frame for a seed.
inline SymbolFrame make_frame(const FrameLayout& layout, std::uint64_t seed) {
    const auto bits = random_bits(static_cast<std::size_t>(8 * layout.payload_len()), seed);
    return build_frame(layout, bits, seed);
}

/// 1-sps symbol stream [guard | frame | guard] with random 16QAM guards.
inline DualPolBlock frame_with_guards(const SymbolFrame& f, int guard, int jitter, std::uint64_t seed,
                                      std::int64_t* offset = nullptr) {
    auto rng = make_rng(seed, stream::kPadding);
    const int pre = guard + (jitter > 0 ? static_cast<int>(rng() % static_cast<std::uint64_t>(jitter)) : 0);
    const int post = guard;
    auto pad = [&](int n, std::uint64_t s) { return map_16qam(random_bits(4 * static_cast<std::size_t>(n), seed, s)); };
    DualPolBlock out{{}, {}, Rational::integer(1)};
    for (int p = 0; p < 2; ++p) {
        auto& v = out.pol(p);
        const auto a = pad(pre, stream::kPadding + 1 + static_cast<std::uint64_t>(p));
        const auto b = pad(post, stream::kPadding + 3 + static_cast<std::uint64_t>(p));
        v.insert(v.end(), a.begin(), a.end());
        v.insert(v.end(), f.pol(p).begin(), f.pol(p).end());
        v.insert(v.end(), b.begin(), b.end());
    }
    if (offset != nullptr) *offset = pre;
    return out;
}

/// Builds the scenario input at the receiver rate without running the receiver.
inline DualPolBlock scenario_input(const Scenario& sc, SymbolFrame& frame, std::int64_t& offset) {
    frame = make_frame(sc.layout, sc.seed);
    const auto sym = frame_with_guards(frame, sc.guard_symbols, sc.guard_jitter, sc.seed, &offset);
    auto tx = shape_single(sym, sc.prof.beta, kTxRate);
    if (sc.channel_on) {
        auto ch = sc.channel;
        ch.seed = sc.seed;
        tx = apply_impairments(tx, ch, kTxRate.value() * sc.rs);
    }
    return resample_rational(tx, sc.prof.K, 2 * sc.prof.M);
}

inline ScenarioResult run_scenario(const Scenario& sc) {
    ScenarioResult r;
    const auto x = scenario_input(sc, r.frame, r.frame_offset);
    RxOptions opt;
    opt.tr_init = sc.tr_init;
    opt.train_symbols = sc.train_symbols;
    opt.count_ops = sc.count_ops;
    opt.truth = &r.frame;
    opt.frame_seed = sc.seed;
    r.rx = run_receiver(x, sc.prof, sc.layout, sc.rs, opt);
    return r;
}

/// Default link: 20 km of dispersion, 100 kHz linewidth, no other impairment.
inline ChannelParams default_channel() {
    ChannelParams c;
    c.cd_ps_per_nm = 340;
    c.linewidth_hz = 1e5;
    return c;
}

/// Full impairment set used for the parity runs.
inline ChannelParams full_impairments(double snr_db) {
    auto c = default_channel();
    c.cfo_hz = 200e6;
    c.clock_phase = 0.3;
    c.jones = jones_rotation(0.6, 0.9);
    c.snr_db = snr_db;
    return c;
}

} // namespace nidsp

#endif // NIDSP_BENCH_SCENARIO_HPP
