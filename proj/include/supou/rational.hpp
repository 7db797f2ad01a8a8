#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace supou {

/// Exact rational with 64-bit terms, used only for regime classification where a
/// float comparison would misfile deliberately critical parameters.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend Rational operator*(const Rational& a, const Rational& b) {
        return mul_checked(a, b);
    }
    friend Rational operator*(std::int64_t k, const Rational& a) {
        return mul_checked(Rational(k, 1), a);
    }
    friend Rational operator+(const Rational& a, const Rational& b) {
        const auto n = checked(static_cast<__int128>(a.num) * b.den +
                               static_cast<__int128>(b.num) * a.den);
        const auto d = checked(static_cast<__int128>(a.den) * b.den);
        return Rational(n, d);
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }

private:
    static std::int64_t checked(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN)
            throw std::overflow_error("Rational: 64-bit overflow");
        return static_cast<std::int64_t>(v);
    }
    static Rational mul_checked(const Rational& a, const Rational& b) {
        return Rational(checked(static_cast<__int128>(a.num) * b.num),
                        checked(static_cast<__int128>(a.den) * b.den));
    }
};

} // namespace supou
