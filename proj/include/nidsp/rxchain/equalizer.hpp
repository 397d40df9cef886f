#ifndef NIDSP_RXCHAIN_EQUALIZER_HPP
#define NIDSP_RXCHAIN_EQUALIZER_HPP

#include <array>
#include <span>

#include "nidsp/framegen/qam16.hpp"
#include "nidsp/rxchain/errors.hpp"
#include "nidsp/rxchain/frame_sync.hpp"
#include "nidsp/rxchain/polyphase.hpp"

namespace nidsp {

enum class EqMode { training, decision_directed, frozen };

inline const char* eq_mode_name(EqMode m) {
    switch (m) {
    case EqMode::training: return "training";
    case EqMode::decision_directed: return "decision_directed";
    case EqMode::frozen: return "frozen";
    }
    return "unknown";
}

struct EqualizerState {
    std::array<cvec, 4> H; ///< XX, XY, YX, YY
    FilterBank bank;
    int L{0};
    EqMode mode{EqMode::training};
    rvec mse_trace;

    [[nodiscard]] int taps() const noexcept { return static_cast<int>(H[0].size()); }
    /// Output aligned with input: tap c multiplies the current slot.
    [[nodiscard]] int center() const noexcept { return taps() / 2; }

    /// Centre tap 1 on the direct paths, zero elsewhere.
    static EqualizerState init(const DspProfile& prof) {
        EqualizerState s;
        for (auto& h : s.H) h.assign(static_cast<std::size_t>(prof.L1), cplx{});
        s.H[0][static_cast<std::size_t>(prof.L1 / 2)] = 1.0;
        s.H[3][static_cast<std::size_t>(prof.L1 / 2)] = 1.0;
        s.bank = polyphase_bank(prof.L, prof.M);
        s.L = prof.L;
        return s;
    }

    void validate() const {
        for (const auto& h : H) {
            if (h.size() != H[0].size() || h.empty()) throw std::invalid_argument("EqualizerState: tap length mismatch");
        }
        for (const auto& f : bank) {
            double s = 0.0;
            for (double c : f) s += c;
            if (f.size() != static_cast<std::size_t>(2 * L + 1) || std::abs(s - 1.0) > 1e-9) {
                throw std::invalid_argument("EqualizerState: malformed fractional-delay bank");
            }
        }
    }
};

/// What the error signal is computed against.
struct EqReference {
    EqMode mode{EqMode::training};
    cvec known_x; ///< training symbols, or known values where `known` is set
    cvec known_y;
    std::vector<std::uint8_t> known; ///< DD mode: 1 where known_x/known_y hold a pilot
    rvec phase_x; ///< DD mode: carrier phase per slot
    rvec phase_y;
};

struct EqOutput {
    DualPolBlock out; ///< 1 sps
    std::int64_t first_slot{0};
};

/// Number of 1-sps slots carried by len samples at K/M sps.
inline std::int64_t equalizer_slot_count(std::size_t len, const DspProfile& prof) {
    return floor_div(static_cast<std::int64_t>(len) * prof.M, prof.K);
}

/// Symbol-rate samples In(n) of the K/M-rate input: slot n lies at input time
/// n·K/M = base + k/M, and is interpolated by bank filter k around base.
class PolyphaseSampler {
public:
    PolyphaseSampler(const DualPolBlock& y, const FilterBank& bank, int L, int K, int M)
        : y_(y), bank_(bank), L_(L), K_(K), M_(M) {}

    [[nodiscard]] std::pair<cplx, cplx> at(std::int64_t n, OpCount* ops) const {
        const auto pos = n * K_;
        const auto base = floor_div(pos, M_);
        const auto& c = bank_[static_cast<std::size_t>(floor_mod(pos, M_))];
        cplx ax{}, ay{};
        for (int i = -L_; i <= L_; ++i) {
            const double w = c[static_cast<std::size_t>(i + L_)];
            ax += w * at_or_zero(y_.x, base + i);
            ay += w * at_or_zero(y_.y, base + i);
        }
        tally(ops, 2.0 * (2 * L_ + 1), 2.0 * (2 * L_));
        return {ax, ay};
    }

private:
    const DualPolBlock& y_;
    const FilterBank& bank_;
    int L_, K_, M_;
};

/// Polyphase fractionally spaced 2×2 MIMO equalizer over `count` slots
/// starting at `first_slot` (1-sps index into y at K/M sps). The state is
/// updated in place: LMS in training mode, DD-LMS with the error formed
/// after removing the reference carrier phase, or no update when frozen.
inline EqOutput mimo_equalize(const DualPolBlock& y, std::int64_t first_slot, std::size_t count, EqualizerState& st,
                              const EqReference& ref, const DspProfile& prof, OpCount* ops = nullptr) {
    st.validate();
    st.mode = ref.mode;
    if (ref.mode == EqMode::training && (ref.known_x.size() < count || ref.known_y.size() < count)) {
        throw std::invalid_argument("mimo_equalize: fewer training symbols than slots");
    }
    if (ref.mode == EqMode::decision_directed && (ref.phase_x.size() < count || ref.phase_y.size() < count)) {
        throw std::invalid_argument("mimo_equalize: carrier phase missing for decision-directed slots");
    }
    const int taps = st.taps();
    const int c = st.center();
    const double mu = ref.mode == EqMode::training ? prof.mu_train : prof.mu_dd;
    const PolyphaseSampler sampler(y, st.bank, st.L, prof.K, prof.M);

    // sliding window of interpolated samples: win[i] = In(n + c − i)
    std::vector<cplx> wx(static_cast<std::size_t>(taps)), wy(static_cast<std::size_t>(taps));
    for (int i = 0; i < taps; ++i) {
        const auto [a, b] = sampler.at(first_slot + c - i, nullptr);
        wx[static_cast<std::size_t>(i)] = a;
        wy[static_cast<std::size_t>(i)] = b;
    }

    EqOutput res{DualPolBlock{cvec(count), cvec(count), Rational::integer(1)}, first_slot};
    double mse_ref = -1.0;
    int above = 0;
    for (std::size_t j = 0; j < count; ++j) {
        const auto n = first_slot + static_cast<std::int64_t>(j);
        if (j > 0) {
            std::rotate(wx.rbegin(), wx.rbegin() + 1, wx.rend());
            std::rotate(wy.rbegin(), wy.rbegin() + 1, wy.rend());
            const auto [a, b] = sampler.at(n + c, ops);
            wx[0] = a;
            wy[0] = b;
        } else {
            // the priming samples stand in for one slot's worth of filtering
            tally(ops, 2.0 * (2 * st.L + 1), 2.0 * (2 * st.L));
        }
        cplx ox{}, oy{};
        for (int i = 0; i < taps; ++i) {
            const auto u = static_cast<std::size_t>(i);
            ox += st.H[0][u] * wx[u] + st.H[1][u] * wy[u];
            oy += st.H[2][u] * wx[u] + st.H[3][u] * wy[u];
        }
        tally(ops, 2.0 * 2 * taps, 2.0 * (2 * taps - 1));
        res.out.x[j] = ox;
        res.out.y[j] = oy;
        if (ref.mode == EqMode::frozen) continue;

        cplx ex, ey;
        if (ref.mode == EqMode::training) {
            ex = ref.known_x[j] - ox;
            ey = ref.known_y[j] - oy;
        } else {
            const cplx rx = std::polar(1.0, ref.phase_x[j]);
            const cplx ry = std::polar(1.0, ref.phase_y[j]);
            const cplx zx = ox * std::conj(rx);
            const cplx zy = oy * std::conj(ry);
            const bool k = !ref.known.empty() && ref.known[j];
            ex = ((k ? ref.known_x[j] : decide_16qam(zx)) - zx) * rx;
            ey = ((k ? ref.known_y[j] : decide_16qam(zy)) - zy) * ry;
        }
        const double mse = 0.5 * (std::norm(ex) + std::norm(ey));
        st.mse_trace.push_back(mse);
        if (!std::isfinite(mse)) throw NonConvergence(Stage::equalizer, "non-finite equalizer error");
        if (j < 16) {
            mse_ref = (mse_ref < 0 ? 0.0 : mse_ref) + mse / 16.0;
        } else {
            above = mse > 10.0 * mse_ref ? above + 1 : 0;
            if (above >= 100) {
                throw NonConvergence(Stage::equalizer, "MSE above 10x its initial value for 100 symbols (slot " +
                                                           std::to_string(n) + ")");
            }
        }
        const cplx gx = mu * ex, gy = mu * ey;
        for (int i = 0; i < taps; ++i) {
            const auto u = static_cast<std::size_t>(i);
            const cplx cx = std::conj(wx[u]), cy = std::conj(wy[u]);
            st.H[0][u] += gx * cx;
            st.H[1][u] += gx * cy;
            st.H[2][u] += gy * cx;
            st.H[3][u] += gy * cy;
        }
    }
    return res;
}

/// Same, anchored at a sync position: slots start at the sync block.
inline EqOutput mimo_equalize(const DualPolBlock& y, const SyncResult& sync, std::size_t count, EqualizerState& st,
                              const EqReference& ref, const DspProfile& prof, OpCount* ops = nullptr) {
    return mimo_equalize(y, sync.p1, count, st, ref, prof, ops);
}

} // namespace nidsp

#endif // NIDSP_RXCHAIN_EQUALIZER_HPP
