#ifndef NIDSP_RXCHAIN_MATCHED_FILTER_HPP
#define NIDSP_RXCHAIN_MATCHED_FILTER_HPP

#include "nidsp/numkit/overlap_save.hpp"
#include "nidsp/numkit/rrc.hpp"
#include "nidsp/rxchain/profile.hpp"

namespace nidsp {

/// RRC taps used by the receiver, sized to fit the overlap-save margin.
inline rvec matched_filter_taps(const DspProfile& prof) {
    return rrc_taps(prof.beta, prof.sps(), prof.matched_filter_span());
}

inline cvec matched_filter_response(const DspProfile& prof) {
    const auto h = matched_filter_taps(prof);
    return fd_kernel_from_taps(std::span<const double>(h), h.size() / 2, static_cast<std::size_t>(prof.N));
}

/// RRC matched filtering in the frequency domain (overlap-save, one complex
/// multiply per bin).
inline DualPolBlock matched_filter(const DualPolBlock& x, const DspProfile& prof, OpCount* ops = nullptr) {
    prof.validate();
    const OverlapSaveEngine eng(prof.os_config());
    const auto h = matched_filter_response(prof);
    DualPolBlock y{cvec(x.size()), cvec(x.size()), x.rate_sps};
    cvec spec(h.size());
    for (std::size_t b = 0; b < eng.block_count(x.size()); ++b) {
        for (int p = 0; p < 2; ++p) {
            eng.load(x.pol(p), b, spec, ops);
            for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= h[k];
            tally(ops, static_cast<double>(spec.size()), 0);
            eng.store(spec, b, y.pol(p), ops);
        }
    }
    return y;
}

} // namespace nidsp

#endif // NIDSP_RXCHAIN_MATCHED_FILTER_HPP
