#ifndef NIDSP_NUMKIT_DFT_HPP
#define NIDSP_NUMKIT_DFT_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nidsp/numkit/complex_buf.hpp"
#include "nidsp/numkit/op_count.hpp"

namespace nidsp {

/// Arbitrary-size DFT plan.
///
/// Sizes whose prime factors are all small (<= kMaxDirectRadix) run as a
/// recursive mixed-radix Cooley-Tukey transform with generic radix-p
/// butterflies; sizes with a larger prime factor fall back to Bluestein's
/// chirp-z algorithm on a power-of-two inner transform.
///
/// Forward kernel is e^{-j2πkn/N}; the inverse is scaled by 1/N.
class DftPlan {
public:
    static constexpr std::size_t kMaxDirectRadix = 61;

    explicit DftPlan(std::size_t n) : n_(n) {
        if (n < 1) throw std::invalid_argument("DftPlan: size must be >= 1");
        twiddle_.resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -kTwoPi * static_cast<double>(t) / static_cast<double>(n);
            twiddle_[t] = {std::cos(ang), std::sin(ang)};
        }
        auto rem = n;
        // radix-4 first keeps the recursion shallow for powers of two
        while (rem % 4 == 0) {
            factors_.push_back(4);
            rem /= 4;
        }
        for (std::size_t p = 2; p * p <= rem; ++p) {
            while (rem % p == 0) {
                factors_.push_back(p);
                rem /= p;
            }
        }
        if (rem > 1) factors_.push_back(rem);

        if (*std::max_element(factors_.begin(), factors_.end(), [](auto a, auto b) { return a < b; }) >
                kMaxDirectRadix &&
            n > 1) {
            init_bluestein();
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] bool uses_bluestein() const noexcept { return inner_ != nullptr; }
    [[nodiscard]] const std::vector<std::size_t>& factors() const noexcept { return factors_; }

    void forward(std::span<const cplx> in, std::span<cplx> out, OpCount* ops = nullptr) const {
        check(in, out);
        if (inner_) {
            bluestein(in, out, ops);
            return;
        }
        std::vector<cplx> scratch(kMaxDirectRadix);
        recurse(in.data(), 1, out.data(), n_, 0, 1, scratch, ops);
    }

    void inverse(std::span<const cplx> in, std::span<cplx> out, OpCount* ops = nullptr) const {
        check(in, out);
        cvec tmp(in.begin(), in.end());
        for (auto& v : tmp) v = std::conj(v);
        forward(tmp, out, ops);
        const double s = 1.0 / static_cast<double>(n_);
        for (auto& v : out) v = std::conj(v) * s;
        tally(ops, static_cast<double>(n_), 0.0);
    }

    [[nodiscard]] cvec forward(std::span<const cplx> in) const {
        cvec out(n_);
        forward(in, out);
        return out;
    }
    [[nodiscard]] cvec inverse(std::span<const cplx> in) const {
        cvec out(n_);
        inverse(in, out);
        return out;
    }

private:
    void check(std::span<const cplx> in, std::span<cplx> out) const {
        if (in.size() != n_ || out.size() != n_) {
            throw std::invalid_argument("DftPlan: buffer size " + std::to_string(in.size()) + "/" +
                                        std::to_string(out.size()) + " does not match plan size " +
                                        std::to_string(n_));
        }
    }

    // tw_step = N / n maps the sub-problem's twiddles onto the full table.
    void recurse(const cplx* in, std::size_t stride, cplx* out, std::size_t n, std::size_t fidx,
                 std::size_t tw_step, std::vector<cplx>& tmp, OpCount* ops) const {
        if (n == 1) {
            out[0] = in[0];
            return;
        }
        const std::size_t p = factors_[fidx];
        const std::size_t m = n / p;
        for (std::size_t r = 0; r < p; ++r) {
            recurse(in + r * stride, stride * p, out + r * m, m, fidx + 1, tw_step * p, tmp, ops);
        }
        const std::size_t root_step = n_ / p; // W_p^{rq} = W_N^{rq N/p}
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t r = 0; r < p; ++r) {
                tmp[r] = out[r * m + k] * twiddle_[(r * k * tw_step) % n_];
            }
            for (std::size_t q = 0; q < p; ++q) {
                cplx acc = tmp[0];
                for (std::size_t r = 1; r < p; ++r) acc += tmp[r] * twiddle_[(r * q * root_step) % n_];
                out[k + q * m] = acc;
            }
        }
        const auto groups = static_cast<double>(m);
        const auto pd = static_cast<double>(p);
        tally(ops, groups * (pd + pd * (pd - 1.0)), groups * pd * (pd - 1.0));
    }

    void init_bluestein() {
        std::size_t m = 1;
        while (m < 2 * n_ - 1) m <<= 1;
        inner_ = std::make_shared<DftPlan>(m);
        chirp_.resize(n_);
        const std::size_t two_n = 2 * n_;
        for (std::size_t k = 0; k < n_; ++k) {
            // k^2 mod 2N keeps the chirp argument small for large N
            const auto k2 = (k * k) % two_n;
            const double ang = -kPi * static_cast<double>(k2) / static_cast<double>(n_);
            chirp_[k] = {std::cos(ang), std::sin(ang)};
        }
        cvec b(m, cplx{});
        b[0] = std::conj(chirp_[0]);
        for (std::size_t k = 1; k < n_; ++k) {
            b[k] = std::conj(chirp_[k]);
            b[m - k] = std::conj(chirp_[k]);
        }
        chirp_fft_ = inner_->forward(b);
    }

    void bluestein(std::span<const cplx> in, std::span<cplx> out, OpCount* ops) const {
        const auto m = inner_->size();
        cvec a(m, cplx{});
        for (std::size_t k = 0; k < n_; ++k) a[k] = in[k] * chirp_[k];
        cvec fa(m);
        inner_->forward(a, fa, ops);
        for (std::size_t k = 0; k < m; ++k) fa[k] *= chirp_fft_[k];
        inner_->inverse(fa, a, ops);
        for (std::size_t k = 0; k < n_; ++k) out[k] = a[k] * chirp_[k];
        tally(ops, static_cast<double>(2 * n_ + m), 0.0);
    }

    std::size_t n_;
    std::vector<std::size_t> factors_;
    cvec twiddle_;
    std::shared_ptr<const DftPlan> inner_;
    cvec chirp_;
    cvec chirp_fft_;
};

/// One-shot transform of a buffer whose length must equal `size`.
inline ComplexBuf dft(const ComplexBuf& x, std::size_t size, bool inverse) {
    if (size < 2) throw std::invalid_argument("dft: size must be >= 2");
    if (x.size() != size) {
        throw std::invalid_argument("dft: input length " + std::to_string(x.size()) + " != size " +
                                    std::to_string(size));
    }
    const DftPlan plan(size);
    ComplexBuf out{cvec(size), x.rate_sps};
    if (inverse) {
        plan.inverse(x.data, out.data);
    } else {
        plan.forward(x.data, out.data);
    }
    return out;
}

/// Signed frequency index of bin k in an N-point DFT: [-N/2, N/2).
constexpr std::int64_t signed_bin(std::size_t k, std::size_t n) noexcept {
    const auto ki = static_cast<std::int64_t>(k);
    const auto ni = static_cast<std::int64_t>(n);
    return ki >= (ni + 1) / 2 ? ki - ni : ki;
}

} // namespace nidsp

#endif // NIDSP_NUMKIT_DFT_HPP
