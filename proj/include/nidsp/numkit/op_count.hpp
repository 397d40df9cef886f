#ifndef NIDSP_NUMKIT_OP_COUNT_HPP
#define NIDSP_NUMKIT_OP_COUNT_HPP

namespace nidsp {

/// Complex-valued multiplication / addition tally.
struct OpCount {
    double mul{0.0};
    double add{0.0};

    OpCount& operator+=(const OpCount& o) noexcept {
        mul += o.mul;
        add += o.add;
        return *this;
    }
    friend OpCount operator*(OpCount c, double s) noexcept { return {c.mul * s, c.add * s}; }
};

/// Adds to `c` when counting is enabled (non-null).
inline void tally(OpCount* c, double mul, double add) noexcept {
    if (c != nullptr) {
        c->mul += mul;
        c->add += add;
    }
}

} // namespace nidsp

#endif // NIDSP_NUMKIT_OP_COUNT_HPP
