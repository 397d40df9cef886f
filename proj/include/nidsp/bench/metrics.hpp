#ifndef NIDSP_BENCH_METRICS_HPP
#define NIDSP_BENCH_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include "nidsp/numkit/complex_buf.hpp"

namespace nidsp {

/// Centered moving average with a window of `w` (shrinking at the edges).
inline rvec moving_average(std::span<const double> v, int w) {
    rvec out(v.size());
    const auto n = static_cast<std::int64_t>(v.size());
    for (std::int64_t i = 0; i < n; ++i) {
        const auto start = i - w / 2;
        const auto lo = std::max<std::int64_t>(0, start);
        const auto hi = std::min<std::int64_t>(n, start + std::max(w, 1));
        double a = 0.0;
        for (auto j = lo; j < hi; ++j) a += v[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = a / static_cast<double>(hi - lo);
    }
    return out;
}

/// Mean of v[from, to).
inline double range_mean(std::span<const double> v, std::size_t from, std::size_t to) {
    to = std::min(to, v.size());
    if (from >= to) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to), 0.0) /
           static_cast<double>(to - from);
}

/// First index where the smoothed MSE is within `db` of `floor`; −1 if never.
inline std::int64_t mse_convergence_index(std::span<const double> mse, double floor, double db = 1.0, int window = 32) {
    const auto sm = moving_average(mse, window);
    const double lim = floor * std::pow(10.0, db / 10.0);
    for (std::size_t i = 0; i < sm.size(); ++i) {
        if (sm[i] <= lim) return static_cast<std::int64_t>(i);
    }
    return -1;
}

/// Lock value of a phase trace: mean over its second half.
inline double lock_value(std::span<const double> trace) {
    return range_mean(trace, trace.size() / 2, trace.size());
}

/// First block within `frac`·|lock| of the lock value; −1 if never.
inline std::int64_t blocks_to_lock(std::span<const double> trace, double frac = 0.05) {
    const double lock = lock_value(trace);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (std::abs(trace[i] - lock) <= frac * std::abs(lock)) return static_cast<std::int64_t>(i);
    }
    return -1;
}

/// SNR at which BER first falls through `threshold`, interpolating log10(BER)
/// linearly between the bracketing grid points. Points must be sorted by SNR.
/// NaN when the curve never crosses.
inline double ber_crossing(std::span<const double> snr, std::span<const double> ber, double threshold) {
    const double floor_ber = 1e-12; // stands in for BER = 0 on the log axis
    for (std::size_t i = 0; i + 1 < snr.size(); ++i) {
        if (ber[i] >= threshold && ber[i + 1] < threshold) {
            const double a = std::log10(std::max(ber[i], floor_ber));
            const double b = std::log10(std::max(ber[i + 1], floor_ber));
            const double t = (a - std::log10(threshold)) / (a - b);
            return snr[i] + t * (snr[i + 1] - snr[i]);
        }
    }
    if (!snr.empty() && ber[0] < threshold) return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace nidsp

#endif // NIDSP_BENCH_METRICS_HPP
