#ifndef NIDSP_FRAMEGEN_DSCM_HPP
#define NIDSP_FRAMEGEN_DSCM_HPP

#include <stdexcept>
#include <string>

#include "nidsp/framegen/frame.hpp"
#include "nidsp/numkit/rrc.hpp"

namespace nidsp {

struct DscmPlan {
    int n_subcarriers{8};
    double baud_per_sc{8e9};
    double sc_spacing{9e9};
    rvec power_vector{}; ///< linear power gain per subcarrier; empty means all ones
    double roll_off{0.1};
    int span_symbols{64}; ///< RRC truncation

    [[nodiscard]] double power(int sc) const {
        return power_vector.empty() ? 1.0 : power_vector[static_cast<std::size_t>(sc)];
    }
    /// Centre frequency of subcarrier i, symmetric about DC.
    [[nodiscard]] double center_hz(int sc) const {
        return (static_cast<double>(sc) - 0.5 * (n_subcarriers - 1)) * sc_spacing;
    }
    [[nodiscard]] double occupied_bandwidth() const {
        return (n_subcarriers - 1) * sc_spacing + baud_per_sc * (1.0 + roll_off);
    }

    void validate() const {
        auto fail = [](const std::string& m) { throw std::invalid_argument("DscmPlan: " + m); };
        if (n_subcarriers < 1) fail("need at least one subcarrier");
        if (!(baud_per_sc > 0)) fail("baud rate must be positive");
        if (roll_off < 0 || roll_off > 1) fail("roll-off must lie in [0, 1]");
        if (n_subcarriers > 1 && sc_spacing < baud_per_sc * (1.0 + roll_off)) {
            fail("subcarrier spacing " + std::to_string(sc_spacing) + " Hz is below Rs(1+β) = " +
                 std::to_string(baud_per_sc * (1.0 + roll_off)) + " Hz (spectral overlap)");
        }
        if (!power_vector.empty()) {
            if (static_cast<int>(power_vector.size()) != n_subcarriers) fail("power vector length mismatch");
            for (double p : power_vector) {
                if (!(p > 0)) fail("power vector entries must be positive");
            }
        }
    }
};

/// RRC pulse shaping of 1-sps symbols to a rational rate K/M: zero-stuff by
/// K, filter with RRC designed at K sps, keep every M-th sample. Zero-phase,
/// so symbol n is centred on output time n·K/M. Output has unit mean power
/// for unit-power symbols.
inline cvec shape_pulse(std::span<const cplx> symbols, double beta, Rational sps, int span_symbols = 64) {
    const auto k = sps.num();
    const auto m = sps.den();
    const auto h = rrc_taps(beta, Rational::integer(k), span_symbols);
    const auto half = static_cast<std::int64_t>(h.size() / 2);
    const double g = std::sqrt(static_cast<double>(k));
    const auto len = static_cast<std::int64_t>(symbols.size());
    const auto out_len = len * k / m;
    cvec out(static_cast<std::size_t>(out_len));
    for (std::int64_t j = 0; j < out_len; ++j) {
        const auto t = j * m;
        const auto n_lo = std::max<std::int64_t>(0, floor_div(t - half + k - 1, k));
        const auto n_hi = std::min<std::int64_t>(len - 1, floor_div(t + half, k));
        cplx acc{};
        for (auto n = n_lo; n <= n_hi; ++n) acc += symbols[static_cast<std::size_t>(n)] * h[static_cast<std::size_t>(t - n * k + half)];
        out[static_cast<std::size_t>(j)] = acc * g;
    }
    return out;
}

/// Shapes each subcarrier's symbol streams (DualPolBlocks at 1 sps), shifts
/// them to their centre frequencies, scales by the power vector and sums.
/// `out_sps` is the output sample rate in units of the per-subcarrier baud.
inline DualPolBlock shape_and_mux(std::span<const DualPolBlock> per_sc, const DscmPlan& plan, Rational out_sps) {
    plan.validate();
    if (static_cast<int>(per_sc.size()) != plan.n_subcarriers) {
        throw std::invalid_argument("shape_and_mux: got " + std::to_string(per_sc.size()) + " symbol streams for " +
                                    std::to_string(plan.n_subcarriers) + " subcarriers");
    }
    const double fs = out_sps.value() * plan.baud_per_sc;
    if (fs < plan.occupied_bandwidth() * (1.0 - 1e-12)) {
        throw std::invalid_argument("shape_and_mux: sample rate " + std::to_string(fs) +
                                    " Hz cannot hold the composite bandwidth " +
                                    std::to_string(plan.occupied_bandwidth()) + " Hz");
    }
    for (const auto& s : per_sc) {
        if (s.size() != per_sc.front().size() || s.y.size() != s.x.size()) {
            throw std::invalid_argument("shape_and_mux: subcarrier streams must have equal length");
        }
    }
    DualPolBlock out;
    out.rate_sps = out_sps;
    for (int sc = 0; sc < plan.n_subcarriers; ++sc) {
        const double amp = std::sqrt(plan.power(sc));
        const double fc = plan.center_hz(sc) / fs;
        for (int p = 0; p < 2; ++p) {
            const auto shaped = shape_pulse(per_sc[static_cast<std::size_t>(sc)].pol(p), plan.roll_off, out_sps,
                                            plan.span_symbols);
            auto& dst = out.pol(p);
            if (dst.empty()) dst.assign(shaped.size(), cplx{});
            for (std::size_t n = 0; n < shaped.size(); ++n) {
                // phase reduced mod 1 keeps the oscillator exact over long blocks
                const double cyc = std::fmod(fc * static_cast<double>(n), 1.0);
                dst[n] += shaped[n] * std::polar(amp, kTwoPi * cyc);
            }
        }
    }
    return out;
}

/// Convenience: a single baseband subcarrier.
inline DualPolBlock shape_single(const DualPolBlock& symbols, double beta, Rational out_sps, int span_symbols = 64) {
    return {shape_pulse(symbols.x, beta, out_sps, span_symbols), shape_pulse(symbols.y, beta, out_sps, span_symbols),
            out_sps};
}

} // namespace nidsp

#endif // NIDSP_FRAMEGEN_DSCM_HPP
