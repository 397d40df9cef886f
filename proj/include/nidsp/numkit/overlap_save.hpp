#ifndef NIDSP_NUMKIT_OVERLAP_SAVE_HPP
#define NIDSP_NUMKIT_OVERLAP_SAVE_HPP

#include <span>
#include <stdexcept>
#include <string>

#include "nidsp/numkit/dft.hpp"

namespace nidsp {

struct OverlapSaveConfig {
    std::size_t dft_size{256};
    std::size_t overlap{64};

    [[nodiscard]] std::size_t advance() const noexcept { return dft_size - overlap; }
    /// η = N / (N - overlap), exact.
    [[nodiscard]] Rational overlap_rate() const {
        return {static_cast<std::int64_t>(dft_size), static_cast<std::int64_t>(advance())};
    }
    /// Samples discarded at the front of each block; the remainder of the overlap is discarded at the back.
    [[nodiscard]] std::size_t lead() const noexcept { return overlap / 2; }

    void validate() const {
        if (overlap == 0 || overlap >= dft_size) {
            throw std::invalid_argument("OverlapSaveConfig: need 0 < overlap < N (N=" + std::to_string(dft_size) +
                                        ", overlap=" + std::to_string(overlap) + ")");
        }
    }
};

/// Block bookkeeping for centered overlap-save processing.
///
/// Block b reads input samples [b·B - lead, b·B - lead + N) (zero outside the
/// signal) and contributes output samples [b·B, b·B + B). Output sample g is
/// therefore aligned with input sample g, and a kernel whose taps h[i] are
/// supported on i in [-(overlap - lead), lead] is applied as exact linear
/// convolution y[g] = Σ h[i] x[g - i].
class OverlapSaveEngine {
public:
    explicit OverlapSaveEngine(OverlapSaveConfig cfg) : cfg_(cfg), plan_((cfg.validate(), cfg.dft_size)) {}

    [[nodiscard]] const OverlapSaveConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const DftPlan& plan() const noexcept { return plan_; }

    [[nodiscard]] std::size_t block_count(std::size_t len) const noexcept {
        const auto b = cfg_.advance();
        return (len + b - 1) / b;
    }
    [[nodiscard]] std::int64_t block_start(std::size_t b) const noexcept {
        return static_cast<std::int64_t>(b * cfg_.advance()) - static_cast<std::int64_t>(cfg_.lead());
    }

    /// DFT of block b of x into `spectrum` (size N).
    void load(std::span<const cplx> x, std::size_t b, std::span<cplx> spectrum, OpCount* ops = nullptr) const {
        const auto n = cfg_.dft_size;
        cvec time(n);
        const auto s = block_start(b);
        for (std::size_t j = 0; j < n; ++j) time[j] = at_or_zero(x, s + static_cast<std::int64_t>(j));
        plan_.forward(time, spectrum, ops);
    }

    /// IDFT of `spectrum` and write of the kept region of block b into y.
    void store(std::span<const cplx> spectrum, std::size_t b, std::span<cplx> y, OpCount* ops = nullptr) const {
        const auto n = cfg_.dft_size;
        cvec time(n);
        plan_.inverse(spectrum, time, ops);
        const auto base = b * cfg_.advance();
        for (std::size_t j = 0; j < cfg_.advance(); ++j) {
            const auto g = base + j;
            if (g >= y.size()) break;
            y[g] = time[cfg_.lead() + j];
        }
    }

private:
    OverlapSaveConfig cfg_;
    DftPlan plan_;
};

/// N-point frequency response of taps h[i], i in [-center, len-1-center],
/// placed circularly (negative indices wrap to the end of the block).
inline cvec fd_kernel_from_taps(std::span<const double> taps, std::size_t center, std::size_t n) {
    if (taps.size() > n) throw std::invalid_argument("fd_kernel_from_taps: more taps than DFT size");
    cvec time(n, cplx{});
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const auto idx = floor_mod(static_cast<std::int64_t>(i) - static_cast<std::int64_t>(center),
                                   static_cast<std::int64_t>(n));
        time[static_cast<std::size_t>(idx)] += taps[i];
    }
    return DftPlan(n).forward(time);
}

inline cvec fd_kernel_from_taps(std::span<const cplx> taps, std::size_t center, std::size_t n) {
    if (taps.size() > n) throw std::invalid_argument("fd_kernel_from_taps: more taps than DFT size");
    cvec time(n, cplx{});
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const auto idx = floor_mod(static_cast<std::int64_t>(i) - static_cast<std::int64_t>(center),
                                   static_cast<std::int64_t>(n));
        time[static_cast<std::size_t>(idx)] += taps[i];
    }
    return DftPlan(n).forward(time);
}

/// Filters x with a frequency-domain kernel using centered overlap-save.
/// Output has the same length and rate as x.
inline ComplexBuf overlap_save(const ComplexBuf& x, const OverlapSaveConfig& cfg, const ComplexBuf& fd_kernel) {
    cfg.validate();
    if (fd_kernel.size() != cfg.dft_size) {
        throw std::invalid_argument("overlap_save: kernel length " + std::to_string(fd_kernel.size()) +
                                    " != DFT size " + std::to_string(cfg.dft_size));
    }
    if (x.size() <= cfg.dft_size) throw std::invalid_argument("overlap_save: input must be longer than N");
    const OverlapSaveEngine eng(cfg);
    ComplexBuf y{cvec(x.size()), x.rate_sps};
    cvec spec(cfg.dft_size);
    for (std::size_t b = 0; b < eng.block_count(x.size()); ++b) {
        eng.load(x.data, b, spec);
        for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= fd_kernel[k];
        eng.store(spec, b, y.data);
    }
    return y;
}

} // namespace nidsp

#endif // NIDSP_NUMKIT_OVERLAP_SAVE_HPP
