#ifndef NIDSP_NUMKIT_WINDOW_HPP
#define NIDSP_NUMKIT_WINDOW_HPP

#include <cmath>

#include "nidsp/numkit/complex_buf.hpp"

namespace nidsp {

/// Kaiser window evaluated at normalized position u in [-1, 1].
inline double kaiser(double u, double beta) {
    if (std::abs(u) > 1.0) return 0.0;
    return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - u * u)) / std::cyl_bessel_i(0.0, beta);
}

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

} // namespace nidsp

#endif // NIDSP_NUMKIT_WINDOW_HPP
