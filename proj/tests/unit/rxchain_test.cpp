#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"

using namespace nidsp;
using namespace nidsp::testing;

namespace {

const std::vector<std::string> kProfiles{"9/8", "5/4", "2"};

Scenario clean_scenario(const std::string& name, std::uint64_t seed = 1) {
    Scenario sc;
    sc.prof = profile_by_name(name);
    sc.seed = seed;
    sc.channel_on = false;
    return sc;
}

} // namespace

TEST(Profile, MinimumOversampling) {
    EXPECT_DOUBLE_EQ(min_oversampling(0.1), 1.1);
    EXPECT_DOUBLE_EQ(min_oversampling(0.0), 1.0);
    EXPECT_LT(min_oversampling(0.1), profile_9_8().sps().value());
}

TEST(Profile, ReferenceProfilesAreValid) {
    for (const auto& n : kProfiles) {
        const auto p = profile_by_name(n);
        EXPECT_NO_THROW(p.validate()) << n;
        EXPECT_EQ(p.N * p.M % p.K, 0) << n;
        EXPECT_EQ((p.N - p.overlap) * p.M % p.K, 0) << n;
        EXPECT_GT(p.eta().value(), 1.0) << n;
    }
    EXPECT_EQ(profile_by_name("2/1").K, 2);
    EXPECT_THROW(profile_by_name("3/2"), std::invalid_argument);
}

TEST(Profile, GodardBoundsFor54) {
    const auto p = profile_5_4();
    EXPECT_EQ(p.ted_lower(), 90);
    EXPECT_EQ(p.ted_upper(), 109);
    EXPECT_EQ(p.ted_shift(), 50);
}

TEST(Profile, RejectsInconsistentGrid) {
    auto p = profile_9_8();
    p.N = 250; // N·M/K not an integer
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = profile_9_8();
    p.L1 = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(CoarseFoe, Accuracy) {
    EXPECT_NEAR(coarse_foe_accuracy(profile_9_8(), 8e9), 35.714285714e6, 1.0);
    EXPECT_NEAR(coarse_foe_accuracy(profile_9_8(), 8e9) / 2, 17.857e6, 1e3);
}

TEST(CoarseFoe, ZeroOffsetGivesZeroShift) {
    auto sc = clean_scenario("9/8");
    SymbolFrame f;
    std::int64_t off = 0;
    const auto x = scenario_input(sc, f, off);
    const auto r = coarse_foe(x, sc.prof, sc.rs);
    EXPECT_EQ(r.shift_bins, 0);
    EXPECT_EQ(r.cfo_hz, 0.0);
    EXPECT_LT(rms_error(r.corrected.x, x.x), 1e-9);
}

TEST(CoarseFoe, ResidualWithinHalfResolution) {
    const auto prof = profile_9_8();
    const double half_res = coarse_foe_accuracy(prof, 8e9) / 2;
    for (double f : {-500e6, -123e6, 17e6, 250e6, 500e6}) {
        Scenario sc;
        sc.prof = prof;
        sc.channel = ChannelParams{};
        sc.channel.cfo_hz = f;
        sc.channel.snr_db = 15;
        SymbolFrame fr;
        std::int64_t off = 0;
        const auto x = scenario_input(sc, fr, off);
        const auto r = coarse_foe(x, prof, sc.rs);
        EXPECT_LE(std::abs(f - r.cfo_hz), half_res * (1 + 1e-9)) << f;
    }
}

TEST(CoarseFoe, NoiseOnlyFailsDetection) {
    const auto prof = profile_9_8();
    auto rng = make_rng(3, 0);
    std::normal_distribution<double> g;
    DualPolBlock x{cvec(20000), cvec(20000), prof.sps()};
    for (int p = 0; p < 2; ++p) {
        for (auto& v : x.pol(p)) v = {g(rng), g(rng)};
    }
    try {
        coarse_foe(x, prof, 8e9);
        FAIL() << "expected DetectionFailure";
    } catch (const DetectionFailure& e) {
        EXPECT_EQ(e.stage(), Stage::frame_detection);
    }
}

TEST(CoarseFoe, BinShiftEqualsTimeDomainMixing) {
    const auto prof = profile_9_8();
    const auto x = shaped_qpsk(prof, 3000, 4);
    const std::int64_t s = 7;
    const auto y = shift_bins(x, prof, s);
    cvec ref(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        ref[n] = x.x[n] * std::polar(1.0, -kTwoPi * static_cast<double>((static_cast<std::int64_t>(n) * s) % prof.N) / prof.N);
    }
    EXPECT_LT(rms_error(std::span(y.x).subspan(300, 2000), std::span<const cplx>(ref).subspan(300, 2000)), 1e-9);
}

TEST(MatchedFilter, EqualsDirectConvolution) {
    for (const auto& n : kProfiles) {
        const auto prof = profile_by_name(n);
        const auto x = shaped_qpsk(prof, 2000, 5);
        const auto y = matched_filter(x, prof);
        const auto h = matched_filter_taps(prof);
        const auto c = static_cast<std::int64_t>(h.size() / 2);
        cvec ref(x.size());
        for (std::int64_t m = 0; m < static_cast<std::int64_t>(x.size()); ++m) {
            cplx acc{};
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(h.size()); ++i) {
                acc += h[static_cast<std::size_t>(i)] * at_or_zero(x.x, m - i + c);
            }
            ref[static_cast<std::size_t>(m)] = acc;
        }
        EXPECT_LT(rms_error(std::span(y.x).subspan(100, 1500), std::span<const cplx>(ref).subspan(100, 1500)), 1e-9) << n;
    }
}

TEST(MatchedFilter, NyquistCascade) {
    for (const auto& n : kProfiles) {
        const auto prof = profile_by_name(n);
        auto rng = make_rng(6, 0);
        DualPolBlock sym{cvec(3000), cvec(3000), Rational::integer(1)};
        const double a = std::sqrt(0.5);
        for (int p = 0; p < 2; ++p) {
            for (auto& v : sym.pol(p)) v = {(rng() & 1U) ? a : -a, (rng() & 1U) ? a : -a};
        }
        const auto y = matched_filter(shape_single(sym, prof.beta, prof.sps()), prof);
        cvec v, ref;
        for (std::size_t k = 500; k < 2500; ++k) {
            v.push_back(bandlimited_sample(y.x, static_cast<double>(k) * prof.sps().value()));
            ref.push_back(sym.x[k]);
        }
        cplx num{};
        double den = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            num += v[i] * std::conj(ref[i]);
            den += std::norm(ref[i]);
        }
        const cplx gain = num / den;
        double err = 0.0, sig = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            err += std::norm(v[i] - gain * ref[i]);
            sig += std::norm(gain * ref[i]);
        }
        // MF truncation limits the cascade; −25 dB keeps 16QAM decisions clean
        EXPECT_LT(10 * std::log10(err / sig), -25.0) << n;
    }
}

TEST(Ted, SCurveIsOddWithZeroAtOrigin) {
    for (const auto& n : kProfiles) {
        const auto c = ted_s_curve(profile_by_name(n), 3, 10, 8);
        EXPECT_LT(c.even_part, 0.02) << n;
        EXPECT_LT(std::abs(c.zero), 0.01) << n;
        EXPECT_LT(c.values.back(), 0.0) << n; // late sampling → negative detector output
    }
}

TEST(Ted, RejectsWrongSpectrumSize) {
    EXPECT_THROW(godard_ted(cvec(10), profile_9_8()), std::invalid_argument);
}

TEST(TimingRecovery, LocksToStaticOffset) {
    const auto t = timing_trial(profile_9_8(), 0.3, 15, 2);
    EXPECT_NEAR(lock_value(t.trace_init), 0.3, 0.02);
    EXPECT_NEAR(lock_value(t.trace_plain), 0.3, 0.02);
    EXPECT_NEAR(t.trace_init.front(), lock_value(t.trace_init), 0.1 * std::abs(lock_value(t.trace_init)));
    EXPECT_LE(blocks_to_lock(t.trace_init), blocks_to_lock(t.trace_plain));
}

TEST(TimingRecovery, StandaloneLoopProducesTrace) {
    auto sc = clean_scenario("5/4");
    sc.channel_on = true;
    sc.channel.clock_phase = 0.2;
    SymbolFrame f;
    std::int64_t off = 0;
    const auto x = scenario_input(sc, f, off);
    const auto r = tr_loop(x, sc.prof, true);
    EXPECT_EQ(r.y.size(), x.size());
    EXPECT_EQ(r.phase_trace.size(), OverlapSaveEngine(sc.prof.os_config()).block_count(x.size()));
    EXPECT_NEAR(lock_value(r.phase_trace), 0.2, 0.02);
}

TEST(FrameSync, PositionArithmetic) {
    const auto s = make_sync_result(1000, 9, 8);
    EXPECT_EQ(s.p, 1125);
    EXPECT_EQ(s.d_num, -1);
    EXPECT_DOUBLE_EQ(s.D(), -0.125);
}

TEST(FrameSync, LoopbackPositionExactAllProfiles) {
    for (const auto& n : kProfiles) {
        const auto r = run_scenario(clean_scenario(n, 3));
        EXPECT_EQ(r.rx.sync.p1, r.frame_offset + r.frame.layout.sync_start()) << n;
    }
}

TEST(FrameSync, StackedMetricPeaksEveryPeriod) {
    auto sc = clean_scenario("9/8", 4);
    SymbolFrame f;
    std::int64_t off = 0;
    const auto x = scenario_input(sc, f, off);
    const auto y1 = resample_rational(x, sc.prof.M, sc.prof.K);
    const auto ref = frame_reference(sc.layout, sc.seed);
    const int ls = sc.layout.ts_sync_period;
    const auto p1 = off + sc.layout.sync_start();
    const auto first = p1 - 3 * ls;
    const auto m = stacked_timing_metric(y1, std::span(ref.sync_x).first(ls), std::span(ref.sync_y).first(ls), ls,
                                         sc.layout.ts_sync_repeats, first, 6 * ls + 1);
    std::vector<std::int64_t> peaks;
    for (std::size_t i = 1; i + 1 < m.size(); ++i) {
        if (m[i] > 0.15 && m[i] >= m[i - 1] && m[i] >= m[i + 1]) peaks.push_back(first + static_cast<std::int64_t>(i));
    }
    ASSERT_GE(peaks.size(), 3U);
    for (std::size_t i = 1; i < peaks.size(); ++i) EXPECT_EQ(peaks[i] - peaks[i - 1], ls);
    const auto gmax = first + (std::max_element(m.begin(), m.end()) - m.begin());
    EXPECT_EQ(gmax, p1);
    int near_max = 0;
    for (double v : m) near_max += v > 0.9 * *std::max_element(m.begin(), m.end());
    EXPECT_EQ(near_max, 1);
}

TEST(FrameSync, NoiseOnlyFails) {
    const auto prof = profile_9_8();
    const FrameLayout layout;
    auto rng = make_rng(9, 0);
    std::normal_distribution<double> g;
    DualPolBlock y{cvec(4000), cvec(4000), Rational::integer(1)};
    for (int p = 0; p < 2; ++p) {
        for (auto& v : y.pol(p)) v = {g(rng), g(rng)};
    }
    EXPECT_THROW(frame_sync(y, frame_reference(layout, 1), layout, prof, 2000), SyncFailure);
}

TEST(FineFoe, ZeroAndKnownOffsets) {
    const int ls = 64;
    const double rs = 8e9;
    const auto ts = gen_sync_ts(ls, 3, 11);
    EXPECT_EQ(fine_foe(ts, ls, rs), 0.0);
    auto rng = make_rng(12, 0);
    std::normal_distribution<double> g;
    const double sigma = std::sqrt(std::pow(10.0, -1.5) / 2);
    for (double f : {10e6, -25e6, 40e6}) {
        cvec r(ts.size());
        for (std::size_t n = 0; n < r.size(); ++n) {
            r[n] = ts[n] * std::polar(1.0, kTwoPi * f * static_cast<double>(n) / rs + 0.7) + cplx{sigma * g(rng), sigma * g(rng)};
        }
        EXPECT_NEAR(fine_foe(r, ls, rs), f, 1e6) << f;
    }
}

TEST(FineFoe, DualPolMatchesSingleOnEqualInputs) {
    const auto ts = gen_sync_ts(64, 3, 13);
    cvec r(ts.size());
    for (std::size_t n = 0; n < r.size(); ++n) r[n] = ts[n] * std::polar(1.0, kTwoPi * 5e6 * static_cast<double>(n) / 8e9);
    EXPECT_NEAR(fine_foe(r, r, 64, 8e9), fine_foe(r, 64, 8e9), 1e-3);
    EXPECT_THROW(fine_foe(std::span(r).first(100), 64, 8e9), std::invalid_argument);
}

TEST(Polyphase, BankStructure) {
    const auto id = polyphase_bank(0, 1);
    ASSERT_EQ(id.size(), 1U);
    EXPECT_EQ(id[0], rvec{1.0});
    EXPECT_THROW(polyphase_bank(0, 8), std::invalid_argument);
    for (auto [l, m] : {std::pair{14, 8}, {7, 4}}) {
        const auto bank = polyphase_bank(l, m);
        ASSERT_EQ(bank.size(), static_cast<std::size_t>(m));
        for (int i = -l; i <= l; ++i) EXPECT_DOUBLE_EQ(bank[0][static_cast<std::size_t>(i + l)], i == 0 ? 1.0 : 0.0);
        for (const auto& f : bank) {
            double s = 0.0;
            for (double c : f) s += c;
            EXPECT_NEAR(s, 1.0, 1e-9);
        }
    }
}

TEST(Polyphase, DelaysToneWithinTolerance) {
    const int l = 14, m = 8;
    const auto bank = polyphase_bank(l, m);
    const double f = 0.3 * 0.5;
    for (int k = 0; k < m; ++k) {
        cplx h{};
        for (int i = -l; i <= l; ++i) h += bank[static_cast<std::size_t>(k)][static_cast<std::size_t>(i + l)] * std::polar(1.0, kTwoPi * f * i);
        const double err = std::arg(h * std::polar(1.0, -kTwoPi * f * k / m));
        EXPECT_LT(std::abs(err), 0.01) << k;
    }
}

TEST(Polyphase, PhaseErrorDecreasesWithOrder) {
    const auto prof = profile_9_8();
    const double fmax = (1 + prof.beta) / 2 / prof.sps().value();
    auto worst = [&](int l) {
        const auto bank = polyphase_bank(l, prof.M);
        double w = 0.0;
        for (int k = 0; k < prof.M; ++k) {
            for (int fi = 0; fi <= 100; ++fi) {
                const double f = fmax * fi / 100;
                cplx h{};
                for (int i = -l; i <= l; ++i) h += bank[static_cast<std::size_t>(k)][static_cast<std::size_t>(i + l)] * std::polar(1.0, kTwoPi * f * i);
                w = std::max(w, std::abs(std::arg(h * std::polar(1.0, -kTwoPi * f * k / prof.M))));
            }
        }
        return w;
    };
    EXPECT_GT(worst(2), worst(7));
    EXPECT_GT(worst(7), worst(14));
}

TEST(Equalizer, IdentityAtIntegerRate) {
    const auto prof = profile_2();
    const auto x = shaped_qpsk(prof, 400, 14);
    auto st = EqualizerState::init(prof);
    const auto out = mimo_equalize(x, 20, 300, st, EqReference{EqMode::frozen, {}, {}, {}, {}, {}}, prof);
    ASSERT_EQ(out.out.size(), 300U);
    for (std::size_t j = 0; j < 300; ++j) {
        EXPECT_EQ(out.out.x[j], x.x[2 * (20 + j)]);
        EXPECT_EQ(out.out.y[j], x.y[2 * (20 + j)]);
    }
}

TEST(Equalizer, InitialStateIsCentreSpike) {
    const auto st = EqualizerState::init(profile_9_8());
    EXPECT_EQ(st.taps(), 9);
    EXPECT_EQ(st.H[0][4], cplx(1.0));
    EXPECT_EQ(st.H[1][4], cplx(0.0));
    EXPECT_NO_THROW(st.validate());
    EXPECT_EQ(st.bank.size(), 8U);
}

TEST(Equalizer, PolarizationSwapNoiseless) {
    for (const auto& n : kProfiles) {
        Scenario sc;
        sc.prof = profile_by_name(n);
        sc.seed = 5;
        sc.channel.jones = jones_swap();
        sc.train_symbols = 512; // the taps must migrate fully onto the cross paths
        const auto r = run_scenario(sc);
        EXPECT_EQ(r.rx.bit_errors, 0U) << n;
    }
}

TEST(Equalizer, TrainingNeedsEnoughReference) {
    const auto prof = profile_9_8();
    const auto x = shaped_qpsk(prof, 400, 15);
    auto st = EqualizerState::init(prof);
    EqReference ref;
    ref.known_x.assign(10, cplx{});
    ref.known_y.assign(10, cplx{});
    EXPECT_THROW(mimo_equalize(x, 0, 20, st, ref, prof), std::invalid_argument);
}

TEST(Cpr, IdentityAndConstantRotation) {
    const FrameLayout layout;
    const auto f = make_frame(layout, 3);
    const auto& sym = f.x_pol;
    std::vector<std::int64_t> pos;
    cvec val;
    for (int j = 0; j < layout.pilot_count; ++j) {
        pos.push_back(layout.pilot_position(j));
        val.push_back(f.pilots_x[static_cast<std::size_t>(j)]);
    }
    const auto a = cpr(sym, pos, val, 7);
    EXPECT_LT(rms_error(std::span(a.symbols).subspan(layout.ts_total), std::span(sym).subspan(layout.ts_total)), 1e-12);
    cvec rot(sym.size());
    for (std::size_t i = 0; i < sym.size(); ++i) rot[i] = sym[i] * std::polar(1.0, kPi / 8);
    const auto b = cpr(rot, pos, val, 7);
    EXPECT_LT(rms_error(std::span(b.symbols).subspan(layout.ts_total), std::span(sym).subspan(layout.ts_total)), 1e-9);
    EXPECT_NEAR(b.state.total(5000), kPi / 8, 1e-9);
}

TEST(Cpr, TracksWienerPhase) {
    const FrameLayout layout;
    const auto f = make_frame(layout, 4);
    const auto& sym = f.x_pol;
    const auto phase = wiener_phase(sym.size(), 1e5, 8e9, 21);
    auto rng = make_rng(22, 0);
    std::normal_distribution<double> g;
    const double sigma = std::sqrt(std::pow(10.0, -2.0) / 2);
    cvec rx(sym.size());
    for (std::size_t i = 0; i < sym.size(); ++i) rx[i] = sym[i] * std::polar(1.0, phase[i] + 2.0) + cplx{sigma * g(rng), sigma * g(rng)};
    std::vector<std::int64_t> pos;
    cvec val;
    for (int j = 0; j < layout.pilot_count; ++j) {
        pos.push_back(layout.pilot_position(j));
        val.push_back(f.pilots_x[static_cast<std::size_t>(j)]);
    }
    const auto r = cpr(rx, pos, val, 7);
    double acc = 0.0;
    std::size_t cnt = 0;
    for (auto i = static_cast<std::size_t>(layout.ts_total); i < sym.size(); ++i, ++cnt) {
        const double e = std::remainder(r.state.total(i) - phase[i] - 2.0, kTwoPi);
        acc += e * e;
    }
    EXPECT_LT(std::sqrt(acc / static_cast<double>(cnt)), 0.05);
}

TEST(Cpr, RejectsBadPilots) {
    const cvec out(100);
    const std::vector<std::int64_t> pos{10, 5};
    const cvec val(2, cplx{1, 0});
    EXPECT_THROW(cpr(out, pos, val, 7), std::invalid_argument);
    EXPECT_THROW(cpr(out, std::vector<std::int64_t>{}, cvec{}, 7), std::invalid_argument);
}

TEST(Receiver, LoopbackIsErrorFree) {
    for (const auto& n : kProfiles) {
        const auto r = run_scenario(clean_scenario(n, 2));
        EXPECT_EQ(r.rx.bit_errors, 0U) << n;
        EXPECT_EQ(r.rx.n_bits, 2U * 4U * static_cast<std::size_t>(r.frame.layout.payload_len())) << n;
        EXPECT_EQ(r.rx.ber, 0.0) << n;
    }
}

TEST(Receiver, FullImpairmentsHighSnr) {
    Scenario sc;
    sc.seed = 6;
    sc.channel = full_impairments(24);
    auto r = run_scenario(sc);
    EXPECT_LT(r.rx.ber, 1e-4);
    // laser phase noise limits the fine estimate; CPR absorbs the remainder
    EXPECT_LT(std::abs(r.rx.foe_total_hz() - sc.channel.cfo_hz), 3e6);
    sc.channel.linewidth_hz = 0;
    r = run_scenario(sc);
    EXPECT_LT(std::abs(r.rx.foe_total_hz() - sc.channel.cfo_hz), 1e6);
}

TEST(Receiver, Deterministic) {
    Scenario sc;
    sc.seed = 7;
    sc.channel = full_impairments(16);
    const auto a = run_scenario(sc);
    const auto b = run_scenario(sc);
    EXPECT_EQ(a.rx.bits, b.rx.bits);
    EXPECT_EQ(a.rx.mse_trace, b.rx.mse_trace);
    EXPECT_EQ(a.rx.phase_trace, b.rx.phase_trace);
    EXPECT_EQ(report_summary(a.rx), report_summary(b.rx));
}

TEST(Receiver, RejectsRateMismatch) {
    auto sc = clean_scenario("9/8");
    SymbolFrame f;
    std::int64_t off = 0;
    const auto x = scenario_input(sc, f, off);
    EXPECT_THROW(run_receiver(x, profile_5_4(), sc.layout, sc.rs), std::invalid_argument);
}

TEST(Receiver, StageErrorsCarryStage) {
    const auto prof = profile_9_8();
    DualPolBlock x{cvec(30000), cvec(30000), prof.sps()};
    try {
        run_receiver(x, prof, FrameLayout{}, 8e9);
        FAIL() << "expected a stage error";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), Stage::frame_detection);
        EXPECT_STREQ(stage_name(e.stage()), "frame_detection");
    }
}

TEST(Receiver, WritesReport) {
    const auto r = run_scenario(clean_scenario("9/8", 8));
    const auto dir = std::filesystem::temp_directory_path() / "nidsp_rx_report_test";
    std::filesystem::remove_all(dir);
    write_rx_report(r.rx, dir);
    std::ifstream rep(dir / "report.txt");
    std::stringstream text;
    text << rep.rdbuf();
    EXPECT_NE(text.str().find("ber=0\n"), std::string::npos);
    EXPECT_NE(text.str().find("sync.p1="), std::string::npos);
    for (const char* f : {"mse_trace.csv", "phase_trace.csv", "sync_metric.csv"}) {
        std::ifstream is(dir / f);
        ASSERT_TRUE(is.good()) << f;
        std::string first;
        std::getline(is, first);
        EXPECT_EQ(first, "# schema=1") << f;
    }
    std::filesystem::remove_all(dir);
}
