#ifndef NIDSP_RXCHAIN_TIMING_HPP
#define NIDSP_RXCHAIN_TIMING_HPP

#include <span>

#include "nidsp/rxchain/foe.hpp"

namespace nidsp {

/// Raw Godard detector Σ_{k=d}^{a} Im[X_k · X*_{k+s}], s = (1 − M/K)·N.
/// Negative for a positive (late) sampling delay.
inline double godard_ted(std::span<const cplx> x, const DspProfile& prof) {
    const auto n = static_cast<std::size_t>(prof.N);
    if (x.size() != n) throw std::invalid_argument("godard_ted: spectrum size != N");
    const auto s = static_cast<std::size_t>(prof.ted_shift());
    double acc = 0.0;
    for (int k = prof.ted_lower(); k <= prof.ted_upper(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        acc += std::imag(x[i] * std::conj(x[(i + s) % n]));
    }
    return acc;
}

namespace detail {

/// Σ X_k X*_{k+s} over the detector band for both polarizations, plus the
/// magnitude normalizer Σ |X_k||X_{k+s}|.
inline std::pair<cplx, double> godard_correlation(std::span<const cplx> sx, std::span<const cplx> sy,
                                                  const DspProfile& prof, OpCount* ops = nullptr) {
    const auto n = static_cast<std::size_t>(prof.N);
    const auto s = static_cast<std::size_t>(prof.ted_shift());
    cplx c{};
    double mag = 0.0;
    for (int k = prof.ted_lower(); k <= prof.ted_upper(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        const cplx a = sx[i] * std::conj(sx[(i + s) % n]);
        const cplx b = sy[i] * std::conj(sy[(i + s) % n]);
        c += a + b;
        mag += std::abs(a) + std::abs(b);
    }
    const double bins = prof.ted_upper() - prof.ted_lower() + 1;
    tally(ops, 2 * bins, 2 * bins);
    return {c, mag};
}

} // namespace detail

/// Sampling delay in symbols from the phase of the Godard correlation,
/// within (−T/2, T/2].
inline double ted_phase_estimate(cplx correlation) { return -std::arg(correlation) / kTwoPi; }

/// Per-block second-order (PI) timing controller. Delays are in symbol
/// periods T; a block spectrum is corrected by e^{+j2π k τ (K/M)/N}.
class TimingLoop {
public:
    explicit TimingLoop(const DspProfile& prof, double tau0 = 0.0)
        : prof_(prof), tau_(tau0), ramp_(static_cast<std::size_t>(prof.N)) {
        const auto n = static_cast<std::size_t>(prof.N);
        for (std::size_t k = 0; k < n; ++k) {
            ramp_[k] = kTwoPi * static_cast<double>(signed_bin(k, n)) * prof.sps().value() / static_cast<double>(n);
        }
    }

    [[nodiscard]] double tau() const noexcept { return tau_; }

    void correct(std::span<cplx> spectrum, OpCount* ops = nullptr) const {
        for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= std::polar(1.0, ramp_[k] * tau_);
        tally(ops, static_cast<double>(spectrum.size()), 0);
    }

    /// Detector on corrected spectra, then the PI update; returns the
    /// normalized timing error (≈ sin 2πε for a residual delay ε).
    double update(std::span<const cplx> sx, std::span<const cplx> sy, OpCount* ops = nullptr) {
        const auto [c, mag] = detail::godard_correlation(sx, sy, prof_, ops);
        const double e = mag > 0 ? -c.imag() / mag : 0.0;
        integ_ += prof_.tr_ki * e;
        tau_ += prof_.tr_kp * e + integ_;
        return e;
    }

private:
    DspProfile prof_;
    double tau_;
    double integ_{0.0};
    rvec ramp_;
};

struct TrResult {
    DualPolBlock y;
    rvec phase_trace; ///< τ applied to each block, symbols
    rvec ted_trace;   ///< normalized detector output per block
    double tau_init{0.0};
};

/// Initial sampling phase from the tone TS blocks of matched-filtered x.
inline double initial_sampling_phase(const DualPolBlock& x, const DspProfile& prof, const ToneDetection& det) {
    const OverlapSaveEngine eng(prof.os_config());
    const auto n = static_cast<std::size_t>(prof.N);
    cvec sx(n), sy(n);
    cplx acc{};
    for (auto b = det.first_block; b <= det.last_block; ++b) {
        eng.load(x.x, b, sx);
        eng.load(x.y, b, sy);
        acc += detail::godard_correlation(sx, sy, prof).first;
    }
    return ted_phase_estimate(acc);
}

namespace detail {

/// Throws if the loop has left the usable range.
class DivergenceGuard {
public:
    explicit DivergenceGuard(const DspProfile& prof)
        : limit_(static_cast<double>(prof.overlap / 2 - 1) * prof.M / prof.K) {}

    void check(double tau, std::size_t block) {
        const double a = std::abs(tau);
        run_ = (a > last_) ? run_ + 1 : 0;
        last_ = a;
        if (run_ >= 50) {
            throw NonConvergence(Stage::timing_recovery,
                                 "timing estimate grew for 50 consecutive blocks (block " + std::to_string(block) + ")");
        }
        if (!std::isfinite(tau) || a > limit_) {
            throw NonConvergence(Stage::timing_recovery, "timing estimate " + std::to_string(tau) +
                                                             " T exceeds the block margin at block " +
                                                             std::to_string(block));
        }
    }

private:
    double limit_;
    double last_{0.0};
    int run_{0};
};

} // namespace detail

/// Frequency-domain timing recovery on matched-filtered x (K/M sps).
inline TrResult tr_loop(const DualPolBlock& x, const DspProfile& prof, bool init_from_ts, OpCount* ops = nullptr) {
    prof.validate();
    TrResult r;
    if (init_from_ts) r.tau_init = initial_sampling_phase(x, prof, detect_tones(x, prof));
    const OverlapSaveEngine eng(prof.os_config());
    const auto n = static_cast<std::size_t>(prof.N);
    TimingLoop loop(prof, r.tau_init);
    detail::DivergenceGuard guard(prof);
    r.y = DualPolBlock{cvec(x.size()), cvec(x.size()), x.rate_sps};
    cvec sx(n), sy(n);
    const auto nb = eng.block_count(x.size());
    for (std::size_t b = 0; b < nb; ++b) {
        eng.load(x.x, b, sx, ops);
        eng.load(x.y, b, sy, ops);
        r.phase_trace.push_back(loop.tau());
        loop.correct(sx, ops);
        loop.correct(sy, ops);
        eng.store(sx, b, r.y.x, ops);
        eng.store(sy, b, r.y.y, ops);
        r.ted_trace.push_back(loop.update(sx, sy, ops));
        guard.check(loop.tau(), b);
    }
    return r;
}

} // namespace nidsp

#endif // NIDSP_RXCHAIN_TIMING_HPP
