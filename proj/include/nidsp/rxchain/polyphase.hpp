#ifndef NIDSP_RXCHAIN_POLYPHASE_HPP
#define NIDSP_RXCHAIN_POLYPHASE_HPP

#include <stdexcept>
#include <vector>

#include "nidsp/numkit/complex_buf.hpp"

namespace nidsp {

using FilterBank = std::vector<rvec>;

/// M Lagrange fractional-delay filters over the tap grid i ∈ [−L, L]:
/// C_k(i) = Π_{j≠i} (μ_k − j)/(i − j), μ_k = k/M. Applied as
/// Σ_i C_k(i)·x[n + i] the filter evaluates x at n + μ_k.
inline FilterBank polyphase_bank(int L, int M) {
    if (M < 1) throw std::invalid_argument("polyphase_bank: M must be >= 1");
    if (L < 0) throw std::invalid_argument("polyphase_bank: L must be >= 0");
    if (L == 0 && M != 1) throw std::invalid_argument("polyphase_bank: L = 0 is only valid for integer oversampling");
    FilterBank bank(static_cast<std::size_t>(M), rvec(static_cast<std::size_t>(2 * L + 1)));
    for (int k = 0; k < M; ++k) {
        const double mu = static_cast<double>(k) / M;
        for (int i = -L; i <= L; ++i) {
            double c = 1.0;
            for (int j = -L; j <= L; ++j) {
                if (j != i) c *= (mu - j) / static_cast<double>(i - j);
            }
            bank[static_cast<std::size_t>(k)][static_cast<std::size_t>(i + L)] = c;
        }
    }
    return bank;
}

} // namespace nidsp

#endif // NIDSP_RXCHAIN_POLYPHASE_HPP
