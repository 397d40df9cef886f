#ifndef NIDSP_RXCHAIN_FRAME_SYNC_HPP
#define NIDSP_RXCHAIN_FRAME_SYNC_HPP

#include <algorithm>
#include <span>

#include "nidsp/framegen/frame.hpp"
#include "nidsp/rxchain/errors.hpp"
#include "nidsp/rxchain/profile.hpp"

namespace nidsp {

/// Synchronization position at 1 sps (p1), at K/M sps (p) and the fractional
/// delay D in units of one symbol, D = (mod(p, K) − 1)/M.
struct SyncResult {
    std::int64_t p1{0};
    std::int64_t p{0};
    std::int64_t d_num{0}; ///< D·M
    int M{1};
    rvec metric;              ///< stacked metric over the searched candidates
    std::int64_t search_start{0};
    double peak{0.0};

    [[nodiscard]] double D() const noexcept { return static_cast<double>(d_num) / M; }
};

inline SyncResult make_sync_result(std::int64_t p1, int K, int M) {
    SyncResult s;
    s.p1 = p1;
    s.p = floor_div(p1 * K, M);
    s.d_num = floor_mod(s.p, K) - 1;
    s.M = M;
    return s;
}

/// Start index of the symbols following the tone TS in 1-sps samples y1,
/// from a sliding alternation metric of width w.
inline std::int64_t locate_tone_end(const DualPolBlock& y1, int w = 32) {
    const auto n = static_cast<std::int64_t>(y1.size());
    if (n < 2 * w) throw DetectionFailure(Stage::frame_detection, "signal shorter than the detection window");
    // A(i) = Σ_pol |Σ_k (−1)^k y(i+k)|² / (w Σ_pol Σ_k |y(i+k)|²), running sums
    rvec a(static_cast<std::size_t>(n - w + 1));
    for (std::int64_t i = 0; i + w <= n; ++i) {
        double num = 0.0, den = 0.0;
        for (int p = 0; p < 2; ++p) {
            cplx acc{};
            const auto& v = y1.pol(p);
            for (int k = 0; k < w; ++k) {
                const cplx s = v[static_cast<std::size_t>(i + k)];
                acc += (k % 2 == 0) ? s : -s;
                den += std::norm(s);
            }
            num += std::norm(acc);
        }
        a[static_cast<std::size_t>(i)] = den > 0 ? num / (w * den) : 0.0;
    }
    // longest run above one half
    std::int64_t best_end = -1, best_len = 0, run = 0;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(a.size()); ++i) {
        run = a[static_cast<std::size_t>(i)] >= 0.5 ? run + 1 : 0;
        if (run > best_len) {
            best_len = run;
            best_end = i;
        }
    }
    if (best_len < w / 2) throw DetectionFailure(Stage::frame_detection, "tone training sequence not found in time domain");
    // In the falling edge A ≈ ((E − i)/w)², so A = 1/2 at i = E − w/√2.
    return best_end + static_cast<std::int64_t>(std::lround(w / std::sqrt(2.0)));
}

/// Stacked timing metric for candidates d in [first, first + count):
/// Σ_rep Σ_pol Σ_t |⟨y_pol[d + rep·Ls ..], S_t⟩|² / (Σ_rep Σ_pol ‖y‖² · ‖S‖²),
/// with S_t the base blocks of both polarizations. Invariant to a unitary
/// polarization mix and to a carrier phase per block; ideal value 1.
inline rvec stacked_timing_metric(const DualPolBlock& y1, std::span<const cplx> sx, std::span<const cplx> sy, int ls,
                                  int repeats, std::int64_t first, std::int64_t count, OpCount* ops = nullptr) {
    if (sx.size() < static_cast<std::size_t>(ls) || sy.size() < static_cast<std::size_t>(ls)) {
        throw std::invalid_argument("stacked_timing_metric: reference shorter than Ls");
    }
    double es = 0.0;
    for (int k = 0; k < ls; ++k) es += std::norm(sx[static_cast<std::size_t>(k)]);
    rvec m(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)), 0.0);
    for (std::int64_t c = 0; c < count; ++c) {
        const auto d = first + c;
        double num = 0.0, den = 0.0;
        for (int r = 0; r < repeats; ++r) {
            for (int p = 0; p < 2; ++p) {
                const auto& v = y1.pol(p);
                cplx cx{}, cy{};
                for (int k = 0; k < ls; ++k) {
                    const cplx s = at_or_zero(v, d + r * ls + k);
                    cx += s * std::conj(sx[static_cast<std::size_t>(k)]);
                    cy += s * std::conj(sy[static_cast<std::size_t>(k)]);
                    den += std::norm(s);
                }
                num += std::norm(cx) + std::norm(cy);
            }
        }
        tally(ops, 2.0 * repeats * (3.0 * ls + 2), 2.0 * repeats * (3.0 * ls + 1));
        m[static_cast<std::size_t>(c)] = den > 0 ? num / (den * es) : 0.0;
    }
    return m;
}

/// Searches Lf candidates centred on `center` (the coarse frame position) for
/// the start of the repeated sync block.
inline SyncResult frame_sync(const DualPolBlock& y1, const FrameReference& ref, const FrameLayout& layout,
                             const DspProfile& prof, std::int64_t center, OpCount* ops = nullptr) {
    const int ls = layout.ts_sync_period;
    const std::int64_t first = center - prof.Lf / 2;
    const auto metric = stacked_timing_metric(y1, std::span(ref.sync_x).first(static_cast<std::size_t>(ls)),
                                              std::span(ref.sync_y).first(static_cast<std::size_t>(ls)), ls,
                                              layout.ts_sync_repeats, first, prof.Lf, ops);
    const auto it = std::max_element(metric.begin(), metric.end());
    auto s = make_sync_result(first + (it - metric.begin()), prof.K, prof.M);
    s.metric = metric;
    s.search_start = first;
    s.peak = *it;
    if (s.peak < prof.sync_threshold) {
        throw SyncFailure("stacked metric peak " + std::to_string(s.peak) + " below threshold " +
                          std::to_string(prof.sync_threshold));
    }
    return s;
}

} // namespace nidsp

#endif // NIDSP_RXCHAIN_FRAME_SYNC_HPP
