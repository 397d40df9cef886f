#ifndef NIDSP_NUMKIT_RATIONAL_HPP
#define NIDSP_NUMKIT_RATIONAL_HPP

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nidsp {

/// Positive rational number kept in lowest terms. Used for samples-per-symbol
/// rates (K/M) and overlap rates (N/(N-overlap)).
class Rational {
public:
    constexpr Rational() = default;

    Rational(std::int64_t num, std::int64_t den) {
        if (num <= 0 || den <= 0) {
            throw std::invalid_argument("Rational: numerator and denominator must be positive, got " +
                                        std::to_string(num) + "/" + std::to_string(den));
        }
        const auto g = std::gcd(num, den);
        num_ = num / g;
        den_ = den / g;
    }

    static Rational integer(std::int64_t v) { return {v, 1}; }

    [[nodiscard]] constexpr std::int64_t num() const noexcept { return num_; }
    [[nodiscard]] constexpr std::int64_t den() const noexcept { return den_; }
    [[nodiscard]] constexpr double value() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }
    [[nodiscard]] constexpr bool is_integer() const noexcept { return den_ == 1; }

    [[nodiscard]] std::string str() const {
        return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend constexpr bool operator==(const Rational&, const Rational&) = default;

    friend Rational operator*(const Rational& a, const Rational& b) {
        return {a.num_ * b.num_, a.den_ * b.den_};
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        return {a.num_ * b.den_, a.den_ * b.num_};
    }

private:
    std::int64_t num_{1};
    std::int64_t den_{1};
};

/// Parses "K/M" or "K" (e.g. "9/8", "2").
inline Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            std::size_t used = 0;
            const auto v = std::stoll(s, &used);
            if (used != s.size()) throw std::invalid_argument("trailing characters");
            return Rational::integer(v);
        }
        std::size_t u1 = 0, u2 = 0;
        const auto a = std::stoll(s.substr(0, slash), &u1);
        const auto rest = s.substr(slash + 1);
        const auto b = std::stoll(rest, &u2);
        if (u1 != slash || u2 != rest.size()) throw std::invalid_argument("trailing characters");
        return {a, b};
    } catch (const std::logic_error&) {
        throw std::invalid_argument("not a positive rational: '" + s + "'");
    }
}

/// floor(a/b) for integers, correct for negative a.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
    const auto q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

constexpr std::int64_t floor_mod(std::int64_t a, std::int64_t b) noexcept {
    return a - floor_div(a, b) * b;
}

} // namespace nidsp

#endif // NIDSP_NUMKIT_RATIONAL_HPP
