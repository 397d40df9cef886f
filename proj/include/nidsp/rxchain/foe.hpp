#ifndef NIDSP_RXCHAIN_FOE_HPP
#define NIDSP_RXCHAIN_FOE_HPP

#include <algorithm>
#include <span>

#include "nidsp/numkit/overlap_save.hpp"
#include "nidsp/rxchain/errors.hpp"
#include "nidsp/rxchain/profile.hpp"

namespace nidsp {

/// Per-block tone-pair energy ratio and the block run holding the tone TS.
struct ToneDetection {
    rvec block_ratio;        ///< max over tone pairs of pair energy / block energy
    std::size_t first_block{0};
    std::size_t last_block{0}; ///< inclusive
    double peak_ratio{0.0};
};

namespace detail {

/// |X_k|² + |Y_k|² for block b.
inline rvec block_power(const OverlapSaveEngine& eng, const DualPolBlock& x, std::size_t b, OpCount* ops) {
    const auto n = eng.config().dft_size;
    cvec sx(n), sy(n);
    eng.load(x.x, b, sx, ops);
    eng.load(x.y, b, sy, ops);
    rvec p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = std::norm(sx[k]) + std::norm(sy[k]);
    return p;
}

/// Energy of the bin pair (a, a+sep), each widened by one bin either side.
inline double pair_energy(const rvec& p, std::size_t a, std::size_t sep) {
    const auto n = p.size();
    double e = 0.0;
    for (std::size_t d = n - 1; d != n + 2; ++d) {
        e += p[(a + d) % n] + p[(a + sep + d) % n];
    }
    return e;
}

} // namespace detail

/// Sliding ratio test for the ±Rs/2 tone pair, one value per overlap-save
/// block. The pair sits Rs apart, i.e. N·M/K bins, whatever the offset.
inline ToneDetection detect_tones(const DualPolBlock& x, const DspProfile& prof) {
    prof.validate();
    const OverlapSaveEngine eng(prof.os_config());
    const auto n = static_cast<std::size_t>(prof.N);
    const auto sep = static_cast<std::size_t>(prof.symbol_rate_bins());
    ToneDetection det;
    const auto nb = eng.block_count(x.size());
    det.block_ratio.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        const auto p = detail::block_power(eng, x, b, nullptr);
        double tot = 0.0;
        for (double v : p) tot += v;
        double best = 0.0;
        for (std::size_t a = 0; a < n; ++a) best = std::max(best, detail::pair_energy(p, a, sep));
        det.block_ratio[b] = tot > 0 ? best / tot : 0.0;
    }
    const auto it = std::max_element(det.block_ratio.begin(), det.block_ratio.end());
    det.peak_ratio = it == det.block_ratio.end() ? 0.0 : *it;
    if (det.peak_ratio < prof.tone_ratio_threshold) {
        throw DetectionFailure(Stage::frame_detection, "tone pair not found (peak ratio " +
                                                           std::to_string(det.peak_ratio) + " below threshold " +
                                                           std::to_string(prof.tone_ratio_threshold) + ")");
    }
    auto lo = static_cast<std::size_t>(it - det.block_ratio.begin());
    auto hi = lo;
    while (lo > 0 && det.block_ratio[lo - 1] >= prof.tone_ratio_threshold) --lo;
    while (hi + 1 < nb && det.block_ratio[hi + 1] >= prof.tone_ratio_threshold) ++hi;
    det.first_block = lo;
    det.last_block = hi;
    return det;
}

struct CoarseFoeResult {
    double cfo_hz{0.0};
    std::int64_t shift_bins{0};
    ToneDetection detection;
    DualPolBlock corrected;
};

/// Cyclic shift of every overlap-save block spectrum by s bins, with the
/// per-block phase that makes it equal to mixing by e^{-j2π s g/N}.
inline DualPolBlock shift_bins(const DualPolBlock& x, const DspProfile& prof, std::int64_t s, OpCount* ops = nullptr) {
    if (s == 0) return x;
    const OverlapSaveEngine eng(prof.os_config());
    const auto n = static_cast<std::int64_t>(prof.N);
    DualPolBlock y{cvec(x.size()), cvec(x.size()), x.rate_sps};
    cvec spec(static_cast<std::size_t>(n)), shifted(static_cast<std::size_t>(n));
    for (std::size_t b = 0; b < eng.block_count(x.size()); ++b) {
        const auto start = eng.block_start(b);
        const cplx rot = std::polar(1.0, -kTwoPi * static_cast<double>(floor_mod(s * start, n)) / static_cast<double>(n));
        for (int p = 0; p < 2; ++p) {
            eng.load(x.pol(p), b, spec, ops);
            for (std::int64_t k = 0; k < n; ++k) {
                shifted[static_cast<std::size_t>(k)] = spec[static_cast<std::size_t>(floor_mod(k + s, n))] * rot;
            }
            tally(ops, static_cast<double>(n), 0);
            eng.store(shifted, b, y.pol(p), ops);
        }
    }
    return y;
}

/// Bin shift from the tone blocks: the ordered pair (a, a + N·M/K) with the
/// most energy is the lower and upper tone, the offset is their midpoint. At
/// 2 sps both orderings pick the same pair; the smaller offset wins.
inline std::int64_t tone_pair_shift(const DualPolBlock& x, const DspProfile& prof, const ToneDetection& det) {
    const OverlapSaveEngine eng(prof.os_config());
    const auto n = static_cast<std::size_t>(prof.N);
    const auto sep = static_cast<std::size_t>(prof.symbol_rate_bins());
    rvec acc(n, 0.0);
    for (auto b = det.first_block; b <= det.last_block; ++b) {
        const auto p = detail::block_power(eng, x, b, nullptr);
        for (std::size_t k = 0; k < n; ++k) acc[k] += p[k];
    }
    std::int64_t best_shift = 0;
    double best_e = -1.0;
    for (std::size_t a = 0; a < n; ++a) {
        const double e = acc[a] + acc[(a + sep) % n];
        const auto shift = signed_bin((a + sep / 2) % n, n);
        if (e > best_e || (e == best_e && std::abs(shift) < std::abs(best_shift))) {
            best_e = e;
            best_shift = shift;
        }
    }
    return best_shift;
}

/// Tone-pair frequency offset estimate at bin resolution (K/M)·Rs/N and its
/// compensation by a cyclic bin shift.
inline CoarseFoeResult coarse_foe(const DualPolBlock& x, const DspProfile& prof, double rs) {
    if (!(rs > 0)) throw std::invalid_argument("coarse_foe: symbol rate must be positive");
    CoarseFoeResult r;
    r.detection = detect_tones(x, prof);
    r.shift_bins = tone_pair_shift(x, prof, r.detection);
    const double fs = prof.sps().value() * rs;
    r.cfo_hz = static_cast<double>(r.shift_bins) * fs / static_cast<double>(prof.N);
    r.corrected = shift_bins(x, prof, r.shift_bins);
    return r;
}

/// Coarse estimation accuracy (K/M)·Rs/N; residual after correction is at
/// most half of it.
inline double coarse_foe_accuracy(const DspProfile& prof, double rs) {
    return prof.sps().value() * rs / static_cast<double>(prof.N);
}

/// Fine offset from the lag-Ls phase increments of the repeated sync block:
/// Rs/(2π·Ls²) · Σ_k arg[R2(k)R1*(k) + R3(k)R2*(k)], with r[0] the start of
/// R1. Unambiguous for |Δf| < Rs/(2Ls).
inline double fine_foe(std::span<const cplx> r, int ls, double rs) {
    if (ls < 1 || r.size() < static_cast<std::size_t>(3 * ls)) {
        throw std::invalid_argument("fine_foe: need three periods of the sync block");
    }
    const auto l = static_cast<std::size_t>(ls);
    double acc = 0.0;
    for (std::size_t k = 0; k < l; ++k) {
        acc += std::arg(r[l + k] * std::conj(r[k]) + r[2 * l + k] * std::conj(r[l + k]));
    }
    return rs / (kTwoPi * ls * ls) * acc;
}

/// Both polarizations: the two lag products are summed before taking arg.
inline double fine_foe(std::span<const cplx> rx, std::span<const cplx> ry, int ls, double rs) {
    if (ls < 1 || rx.size() < static_cast<std::size_t>(3 * ls) || ry.size() < static_cast<std::size_t>(3 * ls)) {
        throw std::invalid_argument("fine_foe: need three periods of the sync block");
    }
    const auto l = static_cast<std::size_t>(ls);
    double acc = 0.0;
    for (std::size_t k = 0; k < l; ++k) {
        const cplx z = rx[l + k] * std::conj(rx[k]) + rx[2 * l + k] * std::conj(rx[l + k]) +
                       ry[l + k] * std::conj(ry[k]) + ry[2 * l + k] * std::conj(ry[l + k]);
        acc += std::arg(z);
    }
    return rs / (kTwoPi * ls * ls) * acc;
}

/// Mixes x by e^{-j2π f n / fs}.
inline void remove_frequency(DualPolBlock& x, double f_hz, double fs) {
    if (f_hz == 0.0) return;
    const double fn = f_hz / fs;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const cplx rot = std::polar(1.0, -kTwoPi * std::fmod(fn * static_cast<double>(n), 1.0));
        x.x[n] *= rot;
        x.y[n] *= rot;
    }
}

} // namespace nidsp

#endif // NIDSP_RXCHAIN_FOE_HPP
