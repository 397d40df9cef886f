#ifndef NIDSP_FRAMEGEN_FRAME_HPP
#define NIDSP_FRAMEGEN_FRAME_HPP

#include <stdexcept>
#include <string>

#include "nidsp/framegen/qam16.hpp"
#include "nidsp/numkit/rng.hpp"

namespace nidsp {

/// Symbol positions inside one frame:
/// [tone TS | sync TS × repeats | payload region with evenly interleaved pilots].
struct FrameLayout {
    int total_symbols{9137};
    int ts_tone_len{224};
    int ts_sync_period{64};
    int ts_sync_repeats{3};
    int ts_total{416};
    int pilot_count{273};

    [[nodiscard]] int payload_len() const noexcept { return total_symbols - ts_total - pilot_count; }
    /// Pilots plus data symbols after the training sequence.
    [[nodiscard]] int region_len() const noexcept { return payload_len() + pilot_count; }
    [[nodiscard]] int pilot_spacing() const noexcept {
        return pilot_count > 0 ? region_len() / pilot_count : 0;
    }
    [[nodiscard]] int sync_start() const noexcept { return ts_tone_len; }
    [[nodiscard]] int sync_len() const noexcept { return ts_sync_period * ts_sync_repeats; }
    [[nodiscard]] int region_start() const noexcept { return ts_total; }

    /// Frame index of pilot j.
    [[nodiscard]] int pilot_position(int j) const noexcept { return ts_total + j * pilot_spacing(); }
    [[nodiscard]] bool is_pilot(int frame_index) const noexcept {
        const int r = frame_index - ts_total;
        return pilot_count > 0 && r >= 0 && r % pilot_spacing() == 0 && r / pilot_spacing() < pilot_count;
    }

    void validate() const {
        auto fail = [](const std::string& m) { throw std::invalid_argument("FrameLayout: " + m); };
        if (ts_tone_len <= 0 || ts_tone_len % 2 != 0) fail("tone TS length must be positive and even");
        if (ts_sync_period < 16) fail("sync period must be >= 16");
        if (ts_sync_repeats < 3) fail("sync repeats must be >= 3");
        if (ts_sync_repeats * ts_sync_period > ts_total) fail("sync repeats x period exceeds TS total");
        if (ts_tone_len + sync_len() != ts_total) fail("tone TS + sync TS must equal TS total");
        if (pilot_count < 0) fail("pilot count must be non-negative");
        if (payload_len() <= 0) fail("no room for payload symbols");
    }
};

/// Constant-modulus sequence with its energy at ±1/2 of the symbol rate:
/// (1+j)/√2 · (-1)^n.
inline cvec gen_tone_ts(int len) {
    if (len <= 0 || len % 2 != 0) throw std::invalid_argument("gen_tone_ts: length must be positive and even");
    cvec out(static_cast<std::size_t>(len));
    const cplx a{std::sqrt(0.5), std::sqrt(0.5)};
    for (int n = 0; n < len; ++n) out[static_cast<std::size_t>(n)] = (n % 2 == 0) ? a : -a;
    return out;
}

/// Largest off-peak autocorrelation magnitude of s, over both aperiodic and
/// periodic (cyclic) lags, relative to the zero-lag peak.
inline double max_sidelobe(std::span<const cplx> s) {
    const auto n = s.size();
    double peak = 0.0;
    for (const auto& v : s) peak += std::norm(v);
    double worst = 0.0;
    for (std::size_t lag = 1; lag < n; ++lag) {
        cplx ap{}, cy{};
        for (std::size_t k = 0; k < n; ++k) {
            const auto prod = s[(k + lag) % n] * std::conj(s[k]);
            cy += prod;
            if (k + lag < n) ap += prod;
        }
        worst = std::max({worst, std::abs(ap), std::abs(cy)});
    }
    return worst / peak;
}

inline constexpr double kSyncSidelobeLimit = 0.3;

/// Pseudorandom unit-modulus QPSK block S of length Ls, repeated `repeats`
/// times. Candidate blocks whose autocorrelation sidelobes reach 0.3 of the
/// peak are rejected, so the result is a deterministic function of
/// (Ls, repeats, seed, stream).
inline cvec gen_sync_ts(int ls, int repeats, std::uint64_t seed, std::uint64_t stream_id = stream::kSyncX) {
    if (ls < 16) throw std::invalid_argument("gen_sync_ts: Ls must be >= 16");
    if (repeats < 3) throw std::invalid_argument("gen_sync_ts: repeats must be >= 3");
    auto rng = make_rng(seed, stream_id);
    const double a = std::sqrt(0.5);
    cvec base(static_cast<std::size_t>(ls));
    for (int attempt = 0;; ++attempt) {
        for (auto& v : base) {
            const auto r = rng();
            v = {(r & 1) ? a : -a, (r & 2) ? a : -a};
        }
        if (max_sidelobe(base) < kSyncSidelobeLimit) break;
        if (attempt > 100000) throw std::runtime_error("gen_sync_ts: no admissible sequence found");
    }
    cvec out;
    out.reserve(base.size() * static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) out.insert(out.end(), base.begin(), base.end());
    return out;
}

/// Unit-power QPSK pilot values.
inline cvec gen_pilots(int count, std::uint64_t seed, std::uint64_t stream_id) {
    auto rng = make_rng(seed, stream_id);
    const double a = std::sqrt(0.5);
    cvec out(static_cast<std::size_t>(count));
    for (auto& v : out) {
        const auto r = rng();
        v = {(r & 1) ? a : -a, (r & 2) ? a : -a};
    }
    return out;
}

inline Bits random_bits(std::size_t n, std::uint64_t seed, std::uint64_t stream_id = stream::kPayloadBits) {
    auto rng = make_rng(seed, stream_id);
    Bits b(n);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0) word = rng();
        b[i] = static_cast<std::uint8_t>(word >> (i % 64) & 1);
    }
    return b;
}

struct SymbolFrame {
    cvec x_pol;
    cvec y_pol;
    FrameLayout layout;
    Bits bit_payload; ///< X payload bits followed by Y payload bits
    cvec pilots_x;
    cvec pilots_y;
    std::uint64_t seed{0};

    [[nodiscard]] const cvec& pol(int p) const { return p == 0 ? x_pol : y_pol; }
    [[nodiscard]] const cvec& pilots(int p) const { return p == 0 ? pilots_x : pilots_y; }
};

/// Known training/pilot content of a frame, derived from (layout, seed) alone.
struct FrameReference {
    cvec tone;
    cvec sync_x;
    cvec sync_y;
    cvec pilots_x;
    cvec pilots_y;

    [[nodiscard]] const cvec& sync(int p) const { return p == 0 ? sync_x : sync_y; }
    [[nodiscard]] const cvec& pilots(int p) const { return p == 0 ? pilots_x : pilots_y; }
};

inline FrameReference frame_reference(const FrameLayout& layout, std::uint64_t seed) {
    layout.validate();
    return {gen_tone_ts(layout.ts_tone_len),
            gen_sync_ts(layout.ts_sync_period, layout.ts_sync_repeats, seed, stream::kSyncX),
            gen_sync_ts(layout.ts_sync_period, layout.ts_sync_repeats, seed, stream::kSyncY),
            gen_pilots(layout.pilot_count, seed, stream::kPilots),
            gen_pilots(layout.pilot_count, seed, stream::kPilots + 100)};
}

/// Builds a dual-polarization frame. `bits` holds 4·payload_len bits for X
/// followed by the same amount for Y.
inline SymbolFrame build_frame(const FrameLayout& layout, std::span<const std::uint8_t> bits, std::uint64_t seed) {
    layout.validate();
    const auto per_pol = static_cast<std::size_t>(layout.payload_len()) * 4;
    if (bits.size() != 2 * per_pol) {
        throw std::invalid_argument("build_frame: expected " + std::to_string(2 * per_pol) + " payload bits, got " +
                                    std::to_string(bits.size()));
    }
    const auto ref = frame_reference(layout, seed);
    SymbolFrame f;
    f.layout = layout;
    f.seed = seed;
    f.bit_payload.assign(bits.begin(), bits.end());
    f.pilots_x = ref.pilots_x;
    f.pilots_y = ref.pilots_y;
    for (int p = 0; p < 2; ++p) {
        auto& out = p == 0 ? f.x_pol : f.y_pol;
        const auto data = map_16qam(bits.subspan(p * per_pol, per_pol));
        const auto& pil = ref.pilots(p);
        out.reserve(static_cast<std::size_t>(layout.total_symbols));
        out.insert(out.end(), ref.tone.begin(), ref.tone.end());
        const auto& sync = ref.sync(p);
        out.insert(out.end(), sync.begin(), sync.end());
        std::size_t d = 0, j = 0;
        for (int i = layout.ts_total; i < layout.total_symbols; ++i) {
            out.push_back(layout.is_pilot(i) ? pil[j++] : data[d++]);
        }
    }
    return f;
}

/// Data (non-pilot) symbols of the payload region, in order.
inline cvec extract_payload(std::span<const cplx> frame_symbols, const FrameLayout& layout) {
    cvec out;
    out.reserve(static_cast<std::size_t>(layout.payload_len()));
    for (int i = layout.ts_total; i < layout.total_symbols && i < static_cast<int>(frame_symbols.size()); ++i) {
        if (!layout.is_pilot(i)) out.push_back(frame_symbols[static_cast<std::size_t>(i)]);
    }
    return out;
}

} // namespace nidsp

#endif // NIDSP_FRAMEGEN_FRAME_HPP
