#ifndef NIDSP_RXCHAIN_CPR_HPP
#define NIDSP_RXCHAIN_CPR_HPP

#include <span>
#include <stdexcept>

#include "nidsp/framegen/qam16.hpp"
#include "nidsp/numkit/op_count.hpp"

namespace nidsp {

struct CprState {
    rvec psi_pilot;
    rvec psi_res;
    int Q{7};

    [[nodiscard]] double total(std::size_t n) const { return psi_pilot[n] + psi_res[n]; }
};

struct CprResult {
    cvec symbols;
    CprState state;
};

/// Pilot-aided carrier phase recovery for one polarization.
///
/// ψ_Pilot: arg(rx·conj(pilot)) at each pilot, unwrapped and linearly
/// interpolated (held flat outside the first/last pilot). ψ_Res: after
/// removing ψ_Pilot, the arg of a (2Q+1)-tap average of the decision phasors
/// z·conj(d), with known pilots in place of decisions.
inline CprResult cpr(std::span<const cplx> out, std::span<const std::int64_t> pilot_pos,
                     std::span<const cplx> pilot_val, int Q, OpCount* ops = nullptr) {
    if (Q < 0) throw std::invalid_argument("cpr: Q must be >= 0");
    if (pilot_pos.size() != pilot_val.size() || pilot_pos.empty()) {
        throw std::invalid_argument("cpr: need matching, non-empty pilot positions and values");
    }
    const auto n = static_cast<std::int64_t>(out.size());
    for (std::size_t j = 0; j < pilot_pos.size(); ++j) {
        if (pilot_pos[j] < 0 || pilot_pos[j] >= n || (j > 0 && pilot_pos[j] <= pilot_pos[j - 1])) {
            throw std::invalid_argument("cpr: pilot positions must be increasing and inside the block");
        }
    }
    CprResult r;
    r.state.Q = Q;
    auto& pp = r.state.psi_pilot;
    auto& pr = r.state.psi_res;
    pp.assign(out.size(), 0.0);
    pr.assign(out.size(), 0.0);

    rvec ph(pilot_pos.size());
    for (std::size_t j = 0; j < ph.size(); ++j) {
        ph[j] = std::arg(out[static_cast<std::size_t>(pilot_pos[j])] * std::conj(pilot_val[j]));
        if (j > 0) ph[j] = ph[j - 1] + std::remainder(ph[j] - ph[j - 1], kTwoPi);
    }
    tally(ops, static_cast<double>(ph.size()), 0);
    std::size_t j = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        while (j + 1 < ph.size() && pilot_pos[j + 1] <= i) ++j;
        if (i <= pilot_pos.front()) {
            pp[static_cast<std::size_t>(i)] = ph.front();
        } else if (j + 1 >= ph.size()) {
            pp[static_cast<std::size_t>(i)] = ph.back();
        } else {
            const double t = static_cast<double>(i - pilot_pos[j]) / static_cast<double>(pilot_pos[j + 1] - pilot_pos[j]);
            pp[static_cast<std::size_t>(i)] = ph[j] + t * (ph[j + 1] - ph[j]);
        }
    }

    cvec u(out.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const cplx z = out[i] * std::polar(1.0, -pp[i]);
        cplx d;
        if (next < pilot_pos.size() && pilot_pos[next] == static_cast<std::int64_t>(i)) {
            d = pilot_val[next++];
        } else {
            d = decide_16qam(z);
        }
        u[i] = z * std::conj(d);
    }
    const double w = 1.0 / (2 * Q + 1);
    for (std::int64_t i = 0; i < n; ++i) {
        cplx acc{};
        for (int q = -Q; q <= Q; ++q) {
            const auto k = i + q;
            if (k >= 0 && k < n) acc += w * u[static_cast<std::size_t>(k)];
        }
        pr[static_cast<std::size_t>(i)] = std::abs(acc) > 0 ? std::arg(acc) : 0.0;
    }
    tally(ops, static_cast<double>(n) * (2 * Q + 1), static_cast<double>(n) * 2 * Q);

    r.symbols.resize(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) r.symbols[i] = out[i] * std::polar(1.0, -(pp[i] + pr[i]));
    return r;
}

} // namespace nidsp

#endif // NIDSP_RXCHAIN_CPR_HPP
