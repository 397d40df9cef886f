#ifndef NIDSP_RXCHAIN_PROFILE_HPP
#define NIDSP_RXCHAIN_PROFILE_HPP

#include <numeric>
#include <stdexcept>
#include <string>

#include "nidsp/numkit/overlap_save.hpp"

namespace nidsp {

/// Oversampling configuration shared by every receiver stage.
struct DspProfile {
    std::string name{"custom"};
    int K{9};
    int M{8};
    int N{252};
    int overlap{54};
    double beta{0.1};
    int L{14};  ///< polyphase half-tap length (0: no interpolation)
    int L1{9};  ///< MIMO taps per butterfly branch
    int Q{7};   ///< CPR average filter half-length
    int Lf{100}; ///< frame-sync search span, symbols
    double mu_train{0.012};
    double mu_dd{0.001};
    double tr_kp{0.08};
    double tr_ki{0.002};
    double tone_ratio_threshold{0.25};
    double sync_threshold{0.5};

    [[nodiscard]] Rational sps() const { return {K, M}; }
    [[nodiscard]] OverlapSaveConfig os_config() const {
        return {static_cast<std::size_t>(N), static_cast<std::size_t>(overlap)};
    }
    [[nodiscard]] Rational eta() const { return os_config().overlap_rate(); }
    /// Bins spanned by one symbol rate: N·M/K.
    [[nodiscard]] int symbol_rate_bins() const { return N * M / K; }
    /// Godard lower bound, round((1−β)·M·N/(2K)).
    [[nodiscard]] int ted_lower() const { return static_cast<int>(std::lround((1.0 - beta) * M * N / (2.0 * K))); }
    /// Godard upper bound, round((1+β)·M·N/(2K)) − 1.
    [[nodiscard]] int ted_upper() const {
        return static_cast<int>(std::lround((1.0 + beta) * M * N / (2.0 * K))) - 1;
    }
    /// (1 − M/K)·N, the Godard pairing offset in bins.
    [[nodiscard]] int ted_shift() const { return N - symbol_rate_bins(); }

    /// Largest even RRC span whose taps fit inside the overlap-save margin,
    /// keeping a few samples spare.
    [[nodiscard]] int matched_filter_span() const {
        const int lead = overlap / 2;
        const int max_half = lead - 4;
        int span = 2;
        while ((static_cast<long>(span + 2) / 2 * K) / M <= max_half) span += 2;
        return span;
    }

    void validate() const {
        auto fail = [this](const std::string& m) {
            throw std::invalid_argument("DspProfile '" + name + "': " + m);
        };
        if (M < 1 || K <= M) fail("need K > M >= 1");
        if (std::gcd(K, M) != 1) fail("K and M must be coprime");
        if (!(beta >= 0 && beta <= 1)) fail("roll-off must lie in [0, 1]");
        if (static_cast<double>(K) / M < 1.0 + beta - 1e-12) fail("K/M below the minimum oversampling 1+β");
        if (N <= 2 * overlap || overlap <= 0) fail("need N > 2·overlap > 0");
        if ((N * M) % K != 0) fail("N·M/K must be an integer (symbol-aligned DFT blocks)");
        if (((N - overlap) * M) % K != 0) fail("block advance must span a whole number of symbols");
        if (((overlap / 2) * M) % K != 0) fail("block lead must span a whole number of symbols");
        if (symbol_rate_bins() % 2 != 0) fail("N·M/K must be even");
        if (L < 0 || L1 < 1 || Q < 0 || Lf < 1) fail("tap lengths must be positive");
        if (ted_lower() > ted_upper()) fail("empty Godard band");
        if (!(mu_train > 0) || !(mu_dd >= 0)) fail("LMS steps must be positive");
    }
};

inline DspProfile profile_9_8() {
    DspProfile p;
    p.name = "9/8";
    p.K = 9;
    p.M = 8;
    p.N = 252;
    p.overlap = 54;
    p.L = 14;
    p.L1 = 9;
    return p;
}

inline DspProfile profile_5_4() {
    DspProfile p;
    p.name = "5/4";
    p.K = 5;
    p.M = 4;
    p.N = 250;
    p.overlap = 50;
    p.L = 7;
    p.L1 = 9;
    return p;
}

inline DspProfile profile_2() {
    DspProfile p;
    p.name = "2";
    p.K = 2;
    p.M = 1;
    p.N = 256;
    p.overlap = 64;
    p.L = 0;
    p.L1 = 11;
    p.mu_train = 0.009;
    return p;
}

inline DspProfile profile_by_name(const std::string& name) {
    if (name == "9/8") return profile_9_8();
    if (name == "5/4") return profile_5_4();
    if (name == "2" || name == "2/1") return profile_2();
    throw std::invalid_argument("unknown profile '" + name + "' (expected 9/8, 5/4 or 2)");
}

/// Minimum oversampling rate without penalty for roll-off β: 1 + β.
inline double min_oversampling(double beta) {
    if (!(beta >= 0 && beta <= 1)) throw std::invalid_argument("min_oversampling: β must lie in [0, 1]");
    return 1.0 + beta;
}

} // namespace nidsp

#endif // NIDSP_RXCHAIN_PROFILE_HPP
