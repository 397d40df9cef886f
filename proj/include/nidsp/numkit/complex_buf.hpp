#ifndef NIDSP_NUMKIT_COMPLEX_BUF_HPP
#define NIDSP_NUMKIT_COMPLEX_BUF_HPP

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "nidsp/numkit/rational.hpp"

namespace nidsp {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;
using rvec = std::vector<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// A complex sample stream tagged with its samples-per-symbol rate.
struct ComplexBuf {
    cvec data;
    Rational rate_sps{1, 1};

    [[nodiscard]] std::size_t size() const noexcept { return data.size(); }
    cplx& operator[](std::size_t i) { return data[i]; }
    const cplx& operator[](std::size_t i) const { return data[i]; }
};

/// X/Y polarization pair sharing one rate.
struct DualPolBlock {
    cvec x;
    cvec y;
    Rational rate_sps{1, 1};

    [[nodiscard]] std::size_t size() const noexcept { return x.size(); }
    cvec& pol(int p) { return p == 0 ? x : y; }
    [[nodiscard]] const cvec& pol(int p) const { return p == 0 ? x : y; }
};

inline double mean_power(std::span<const cplx> v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& s : v) acc += std::norm(s);
    return acc / static_cast<double>(v.size());
}

inline double rms_error(std::span<const cplx> a, std::span<const cplx> b) {
    const auto n = std::min(a.size(), b.size());
    if (n == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::norm(a[i] - b[i]);
    return std::sqrt(acc / static_cast<double>(n));
}

/// Samples outside [0, size) read as zero.
inline cplx at_or_zero(std::span<const cplx> v, std::int64_t i) noexcept {
    return (i < 0 || i >= static_cast<std::int64_t>(v.size())) ? cplx{} : v[static_cast<std::size_t>(i)];
}

} // namespace nidsp

#endif // NIDSP_NUMKIT_COMPLEX_BUF_HPP
