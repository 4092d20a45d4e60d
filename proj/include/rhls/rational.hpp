#pragma once
#include <cstdint>
#include <optional>

namespace rhls {

__extension__ typedef __int128 wide_int;

// Exact fraction with positive denominator in lowest terms.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static std::optional<Rational> make(wide_int n, wide_int d);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};

std::optional<Rational> operator+(const Rational& a, const Rational& b);
std::optional<Rational> operator-(const Rational& a, const Rational& b);
std::optional<Rational> operator*(const Rational& a, const Rational& b);
std::optional<Rational> operator/(const Rational& a, const Rational& b);

// Recognizes x as a/b with b <= max_den when x is within a few ulp of a/b.
std::optional<Rational> recognize_rational(double x, std::int64_t max_den = 1000000);

// base^k for integer k, exact.
std::optional<Rational> pow_int(const Rational& base, std::int64_t k);

} // namespace rhls
