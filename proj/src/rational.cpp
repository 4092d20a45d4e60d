#include "rhls/rational.hpp"

#include <cmath>
#include <limits>

namespace rhls {

namespace {

wide_int gcd128(wide_int a, wide_int b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        wide_int t = a % b;
        a = b;
        b = t;
    }
    return a;
}

constexpr wide_int kMax = std::numeric_limits<std::int64_t>::max();

} // namespace

std::optional<Rational> Rational::make(wide_int n, wide_int d) {
    if (d == 0) return std::nullopt;
    if (d < 0) {
        n = -n;
        d = -d;
    }
    wide_int g = gcd128(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    if (n > kMax || n < -kMax || d > kMax) return std::nullopt;
    return Rational{static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)};
}

std::optional<Rational> operator+(const Rational& a, const Rational& b) {
    return Rational::make(static_cast<wide_int>(a.num) * b.den + static_cast<wide_int>(b.num) * a.den,
                          static_cast<wide_int>(a.den) * b.den);
}

std::optional<Rational> operator-(const Rational& a, const Rational& b) {
    return Rational::make(static_cast<wide_int>(a.num) * b.den - static_cast<wide_int>(b.num) * a.den,
                          static_cast<wide_int>(a.den) * b.den);
}

std::optional<Rational> operator*(const Rational& a, const Rational& b) {
    return Rational::make(static_cast<wide_int>(a.num) * b.num, static_cast<wide_int>(a.den) * b.den);
}

std::optional<Rational> operator/(const Rational& a, const Rational& b) {
    if (b.num == 0) return std::nullopt;
    return Rational::make(static_cast<wide_int>(a.num) * b.den, static_cast<wide_int>(a.den) * b.num);
}

std::optional<Rational> recognize_rational(double x, std::int64_t max_den) {
    if (!std::isfinite(x) || std::fabs(x) > 1e12) return std::nullopt;
    // continued-fraction convergents
    wide_int h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        double a = std::floor(r);
        if (std::fabs(a) > 1e15) break;
        wide_int ai = static_cast<wide_int>(a);
        wide_int h2 = ai * h1 + h0;
        wide_int k2 = ai * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1; h1 = h2; k0 = k1; k1 = k2;
        double approx = static_cast<double>(h1) / static_cast<double>(k1);
        if (std::fabs(approx - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(x))
            return Rational::make(h1, k1);
        double frac = r - a;
        if (frac == 0.0) break;
        r = 1.0 / frac;
    }
    return std::nullopt;
}

std::optional<Rational> pow_int(const Rational& base, std::int64_t k) {
    std::optional<Rational> acc = Rational{1, 1};
    Rational b = base;
    if (k < 0) {
        auto inv = Rational{1, 1} / base;
        if (!inv) return std::nullopt;
        b = *inv;
        k = -k;
    }
    for (std::int64_t i = 0; i < k; ++i) {
        acc = *acc * b;
        if (!acc) return std::nullopt;
    }
    return acc;
}

} // namespace rhls
