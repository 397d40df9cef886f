#ifndef NIDSP_RXCHAIN_RECEIVER_HPP
#define NIDSP_RXCHAIN_RECEIVER_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "nidsp/numkit/resample.hpp"
#include "nidsp/rxchain/cpr.hpp"
#include "nidsp/rxchain/equalizer.hpp"
#include "nidsp/rxchain/frame_sync.hpp"
#include "nidsp/rxchain/matched_filter.hpp"
#include "nidsp/rxchain/timing.hpp"

namespace nidsp {

/// Stage keys used for operation counters, in chain order.
inline const std::array<std::string, 7>& stage_keys() {
    static const std::array<std::string, 7> k{"dft_idft", "match_filter", "timing_recovery", "frame_sync",
                                              "fine_foe", "mimo_eq",      "cpr"};
    return k;
}

struct RxOptions {
    bool tr_init{true};
    /// LMS training length in symbols from the sync block on. Beyond the sync
    /// TS the known frame (`truth`) is used; without it training stops at the
    /// end of the sync TS.
    int train_symbols{256};
    bool count_ops{false};
    const SymbolFrame* truth{nullptr};
    std::uint64_t frame_seed{0}; ///< regenerates the training sequences and pilots
};

struct RxReport {
    std::string profile;
    Bits bits; ///< X payload bits then Y
    double ber{std::numeric_limits<double>::quiet_NaN()};
    std::size_t bit_errors{0};
    std::size_t n_bits{0};
    rvec mse_trace;
    int train_len{0};
    double foe_coarse_hz{0.0};
    double foe_fine_hz{0.0};
    std::int64_t coarse_shift_bins{0};
    SyncResult sync;
    std::int64_t tone_end{0};
    rvec phase_trace;
    rvec ted_trace;
    double tau_init{0.0};
    DualPolBlock symbols; ///< carrier-recovered 1-sps output from the sync block to the frame end
    bool counters_enabled{false};
    std::map<std::string, OpCount> ops;
    double fd_symbols{0.0}; ///< symbols per polarization through the FD front end
    double eq_symbols{0.0}; ///< equalized symbols per polarization
    int frame_symbols{0};

    [[nodiscard]] double foe_total_hz() const noexcept { return foe_coarse_hz + foe_fine_hz; }
};

struct FdFrontEnd {
    DualPolBlock y;
    rvec phase_trace;
    rvec ted_trace;
    double tau_init{0.0};
};

/// Coarse frequency correction, matched filtering and timing recovery inside
/// one overlap-save pass. Counters go to dft (DFT+IDFT), mf and tr.
inline FdFrontEnd fd_frontend(const DualPolBlock& x, const DspProfile& prof, std::int64_t shift,
                              const ToneDetection& det, bool tr_init, OpCount* dft = nullptr, OpCount* mf = nullptr,
                              OpCount* tr = nullptr) {
    const OverlapSaveEngine eng(prof.os_config());
    const auto n = static_cast<std::int64_t>(prof.N);
    const auto h = matched_filter_response(prof);
    FdFrontEnd fe;
    fe.y = DualPolBlock{cvec(x.size()), cvec(x.size()), x.rate_sps};
    cvec raw(static_cast<std::size_t>(n)), sx(raw.size()), sy(raw.size());

    auto front = [&](std::size_t b, OpCount* d, OpCount* m) {
        const auto start = eng.block_start(b);
        const cplx rot = std::polar(1.0, -kTwoPi * static_cast<double>(floor_mod(shift * start, n)) / static_cast<double>(n));
        for (int p = 0; p < 2; ++p) {
            auto& s = p == 0 ? sx : sy;
            eng.load(x.pol(p), b, raw, d);
            for (std::int64_t k = 0; k < n; ++k) {
                const auto u = static_cast<std::size_t>(k);
                s[u] = raw[static_cast<std::size_t>(floor_mod(k + shift, n))] * rot * h[u];
            }
            tally(m, static_cast<double>(n), 0);
        }
    };

    if (tr_init) {
        cplx acc{};
        for (auto b = det.first_block; b <= det.last_block; ++b) {
            front(b, nullptr, nullptr);
            acc += detail::godard_correlation(sx, sy, prof).first;
        }
        fe.tau_init = ted_phase_estimate(acc);
    }
    TimingLoop loop(prof, fe.tau_init);
    detail::DivergenceGuard guard(prof);
    for (std::size_t b = 0; b < eng.block_count(x.size()); ++b) {
        front(b, dft, mf);
        fe.phase_trace.push_back(loop.tau());
        loop.correct(sx, tr);
        loop.correct(sy, tr);
        eng.store(sx, b, fe.y.x, dft);
        eng.store(sy, b, fe.y.y, dft);
        fe.ted_trace.push_back(loop.update(sx, sy, tr));
        guard.check(loop.tau(), b);
    }
    return fe;
}

/// Full receiver: frame detection, coarse FOE, matched filter and timing
/// recovery in the frequency domain; frame sync, fine FOE, equalization and
/// carrier recovery in the time domain.
inline RxReport run_receiver(const DualPolBlock& x, const DspProfile& prof, const FrameLayout& layout, double rs,
                             const RxOptions& opt = {}) {
    prof.validate();
    layout.validate();
    if (!(rs > 0)) throw std::invalid_argument("run_receiver: symbol rate must be positive");
    if (x.rate_sps != prof.sps()) {
        throw std::invalid_argument("run_receiver: input rate " + x.rate_sps.str() + " != profile rate " +
                                    prof.sps().str());
    }
    RxReport rep;
    rep.profile = prof.name;
    rep.frame_symbols = layout.total_symbols;
    rep.counters_enabled = opt.count_ops;
    for (const auto& k : stage_keys()) rep.ops[k] = {};
    auto counter = [&](const char* k) { return opt.count_ops ? &rep.ops[k] : nullptr; };
    const double fs = prof.sps().value() * rs;

    const auto det = detect_tones(x, prof);
    rep.coarse_shift_bins = tone_pair_shift(x, prof, det);
    rep.foe_coarse_hz = static_cast<double>(rep.coarse_shift_bins) * fs / prof.N;
    auto fe = fd_frontend(x, prof, rep.coarse_shift_bins, det, opt.tr_init, counter("dft_idft"),
                          counter("match_filter"), counter("timing_recovery"));
    rep.phase_trace = std::move(fe.phase_trace);
    rep.ted_trace = std::move(fe.ted_trace);
    rep.tau_init = fe.tau_init;
    rep.fd_symbols = static_cast<double>(x.size()) * prof.M / prof.K;

    const auto ref = frame_reference(layout, opt.frame_seed);
    const auto y1 = resample_rational(fe.y, prof.M, prof.K);
    rep.tone_end = locate_tone_end(y1);
    rep.sync = frame_sync(y1, ref, layout, prof, rep.tone_end, counter("frame_sync"));
    const auto p1 = static_cast<std::size_t>(std::max<std::int64_t>(rep.sync.p1, 0));

    const int ls = layout.ts_sync_period;
    const auto need = p1 + static_cast<std::size_t>(3 * ls);
    if (need > y1.size()) throw SyncFailure("sync block runs past the end of the signal");
    rep.foe_fine_hz = fine_foe(std::span(y1.x).subspan(p1, static_cast<std::size_t>(3 * ls)),
                               std::span(y1.y).subspan(p1, static_cast<std::size_t>(3 * ls)), ls, rs);
    tally(counter("fine_foe"), 2.0 * (4 * ls + 1), 2.0 * (4 * ls - 1));
    remove_frequency(fe.y, rep.foe_fine_hz, fs);
    tally(counter("fine_foe"), static_cast<double>(fe.y.size()), 0);

    // slots from the sync block to the frame end
    const int n_out = layout.sync_len() + layout.region_len();
    if (rep.sync.p1 < 0 || rep.sync.p1 + n_out > equalizer_slot_count(fe.y.size(), prof)) {
        throw SyncFailure("frame at " + std::to_string(rep.sync.p1) + " is truncated by the end of the capture");
    }
    const auto n = static_cast<std::size_t>(n_out);
    auto frame_index = [&](std::size_t j) { return static_cast<std::size_t>(layout.sync_start()) + j; };

    int train = std::clamp(opt.train_symbols, 1, n_out);
    if (opt.truth == nullptr) train = std::min(train, layout.sync_len());
    rep.train_len = train;
    EqReference tr_ref;
    tr_ref.mode = EqMode::training;
    for (int j = 0; j < train; ++j) {
        const auto u = static_cast<std::size_t>(j);
        if (j < layout.sync_len()) {
            tr_ref.known_x.push_back(ref.sync_x[u]);
            tr_ref.known_y.push_back(ref.sync_y[u]);
        } else {
            tr_ref.known_x.push_back(opt.truth->x_pol[frame_index(u)]);
            tr_ref.known_y.push_back(opt.truth->y_pol[frame_index(u)]);
        }
    }
    auto st = EqualizerState::init(prof);
    (void)mimo_equalize(fe.y, rep.sync.p1, static_cast<std::size_t>(train), st, tr_ref, prof,
                                      counter("mimo_eq"));

    // pilot positions relative to the sync block
    std::vector<std::int64_t> ppos;
    for (int j = 0; j < layout.pilot_count; ++j) ppos.push_back(layout.pilot_position(j) - layout.sync_start());

    // first pass: frozen taps, phase estimate for the decision-directed pass
    auto frozen = st;
    const auto pass1 = mimo_equalize(fe.y, rep.sync.p1, n, frozen, EqReference{EqMode::frozen, {}, {}, {}, {}, {}},
                                     prof);
    const auto c1x = cpr(pass1.out.x, ppos, ref.pilots_x, prof.Q);
    const auto c1y = cpr(pass1.out.y, ppos, ref.pilots_y, prof.Q);

    EqReference dd;
    dd.mode = EqMode::decision_directed;
    const auto rest = n - static_cast<std::size_t>(train);
    dd.known_x.assign(rest, cplx{});
    dd.known_y.assign(rest, cplx{});
    dd.known.assign(rest, 0);
    for (std::size_t j = 0; j < rest; ++j) {
        const auto i = static_cast<std::size_t>(train) + j;
        dd.phase_x.push_back(c1x.state.total(i));
        dd.phase_y.push_back(c1y.state.total(i));
    }
    for (int j = 0; j < layout.pilot_count; ++j) {
        const auto i = static_cast<std::int64_t>(ppos[static_cast<std::size_t>(j)]) - train;
        if (i >= 0) {
            dd.known[static_cast<std::size_t>(i)] = 1;
            dd.known_x[static_cast<std::size_t>(i)] = ref.pilots_x[static_cast<std::size_t>(j)];
            dd.known_y[static_cast<std::size_t>(i)] = ref.pilots_y[static_cast<std::size_t>(j)];
        }
    }
    for (std::size_t j = 0; j < rest; ++j) {
        const auto f = frame_index(static_cast<std::size_t>(train) + j);
        if (f < static_cast<std::size_t>(layout.ts_total)) {
            dd.known[j] = 1;
            dd.known_x[j] = ref.sync_x[f - static_cast<std::size_t>(layout.sync_start())];
            dd.known_y[j] = ref.sync_y[f - static_cast<std::size_t>(layout.sync_start())];
        }
    }
    const auto pass2 = mimo_equalize(fe.y, rep.sync.p1 + train, rest, st, dd, prof, counter("mimo_eq"));
    rep.mse_trace = st.mse_trace;
    rep.eq_symbols = static_cast<double>(n);

    DualPolBlock eq{cvec(n), cvec(n), Rational::integer(1)};
    for (std::size_t j = 0; j < n; ++j) {
        const bool t = j < static_cast<std::size_t>(train);
        // the training span is re-read with the converged taps
        eq.x[j] = t ? pass1.out.x[j] : pass2.out.x[j - static_cast<std::size_t>(train)];
        eq.y[j] = t ? pass1.out.y[j] : pass2.out.y[j - static_cast<std::size_t>(train)];
    }
    const auto cx = cpr(eq.x, ppos, ref.pilots_x, prof.Q, counter("cpr"));
    const auto cy = cpr(eq.y, ppos, ref.pilots_y, prof.Q, counter("cpr"));
    rep.symbols = DualPolBlock{cx.symbols, cy.symbols, Rational::integer(1)};
    // remove the MMSE amplitude bias before fixed-threshold decisions
    for (int p = 0; p < 2; ++p) {
        auto& s = rep.symbols.pol(p);
        const auto& pv = p == 0 ? ref.pilots_x : ref.pilots_y;
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < ppos.size(); ++j) {
            num += std::real(s[static_cast<std::size_t>(ppos[j])] * std::conj(pv[j]));
            den += std::norm(pv[j]);
        }
        if (num > 0) {
            for (auto& v : s) v *= den / num;
        }
    }

    for (int p = 0; p < 2; ++p) {
        cvec payload;
        const auto& s = rep.symbols.pol(p);
        for (std::size_t j = 0; j < n; ++j) {
            const auto f = static_cast<int>(frame_index(j));
            if (f >= layout.region_start() && !layout.is_pilot(f)) payload.push_back(s[j]);
        }
        const auto b = demap_16qam(payload);
        rep.bits.insert(rep.bits.end(), b.begin(), b.end());
    }
    if (opt.truth != nullptr) {
        const auto& tb = opt.truth->bit_payload;
        if (tb.size() != rep.bits.size()) throw std::invalid_argument("run_receiver: reference bit count mismatch");
        for (std::size_t i = 0; i < tb.size(); ++i) rep.bit_errors += tb[i] != rep.bits[i];
        rep.n_bits = tb.size();
        rep.ber = static_cast<double>(rep.bit_errors) / static_cast<double>(rep.n_bits);
    }
    return rep;
}

/// Key-value summary of a report.
inline std::string report_summary(const RxReport& r) {
    std::ostringstream os;
    os.precision(12);
    os << "profile=" << r.profile << '\n'
       << "ber=" << r.ber << '\n'
       << "bit_errors=" << r.bit_errors << '\n'
       << "n_bits=" << r.n_bits << '\n'
       << "foe_coarse_hz=" << r.foe_coarse_hz << '\n'
       << "foe_fine_hz=" << r.foe_fine_hz << '\n'
       << "coarse_shift_bins=" << r.coarse_shift_bins << '\n'
       << "sync.p1=" << r.sync.p1 << '\n'
       << "sync.p=" << r.sync.p << '\n'
       << "sync.D=" << r.sync.d_num << '/' << r.sync.M << '\n'
       << "sync.peak=" << r.sync.peak << '\n'
       << "tr.tau_init=" << r.tau_init << '\n'
       << "train_len=" << r.train_len << '\n'
       << "mse_final=" << (r.mse_trace.empty() ? 0.0 : r.mse_trace.back()) << '\n';
    return os.str();
}

/// Writes report.txt plus CSV traces into dir.
inline void write_rx_report(const RxReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream os(dir / name);
        if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
        os.precision(12);
        return os;
    };
    {
        auto os = open("report.txt");
        os << report_summary(r);
    }
    {
        auto os = open("mse_trace.csv");
        os << "# schema=1\nsymbol,mse\n";
        for (std::size_t i = 0; i < r.mse_trace.size(); ++i) os << i << ',' << r.mse_trace[i] << '\n';
    }
    {
        auto os = open("phase_trace.csv");
        os << "# schema=1\nblock,tau_symbols,ted\n";
        for (std::size_t i = 0; i < r.phase_trace.size(); ++i) {
            os << i << ',' << r.phase_trace[i] << ',' << r.ted_trace[i] << '\n';
        }
    }
    {
        auto os = open("sync_metric.csv");
        os << "# schema=1\ncandidate,metric\n";
        for (std::size_t i = 0; i < r.sync.metric.size(); ++i) {
            os << r.sync.search_start + static_cast<std::int64_t>(i) << ',' << r.sync.metric[i] << '\n';
        }
    }
}

} // namespace nidsp

#endif // NIDSP_RXCHAIN_RECEIVER_HPP
