#include "rhls/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "rhls/errors.hpp"
#include "rhls/rational.hpp"

namespace rhls {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
constexpr double kLanczosG = 7.0;

double lanczos_gamma(double x) { // x >= 0.5
    const double z = x - 1.0;
    double a = kLanczos[0];
    const double t = z + kLanczosG + 0.5;
    for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (z + static_cast<double>(i));
    // split the power to keep t^{z+1/2} e^{-t} finite for large z
    const double h = std::pow(t, 0.5 * (z + 0.5));
    return std::sqrt(2.0 * kPi) * h * (h * std::exp(-t)) * a;
}

double sin_pi(double x) {
    const double r = x - 2.0 * std::round(0.5 * x); // r in [-1, 1]
    if (r == 0.0 || std::fabs(r) == 1.0) return 0.0;
    if (r > 0.5) return std::sin(kPi * (1.0 - r));
    if (r < -0.5) return -std::sin(kPi * (1.0 + r));
    return std::sin(kPi * r);
}

void check_convergence(bool ok, const char* what) {
    if (!ok) throw RangeError(std::string("radial integral diverges: ") + what);
}

void require_balance(const ExponentSet& s) {
    const double res = balance_residual(s.n, s.m, s.lambda, s.alpha, s.beta, s.p, s.q);
    if (std::fabs(res) > kBalanceTol) throw BalanceError("constant band requires the scaling balance");
}

} // namespace

double gamma(double x) {
    if (std::isnan(x)) throw RangeError("gamma of NaN");
    if (x <= 0.0 && x == std::floor(x)) throw PoleError("gamma pole at nonpositive integer");
    if (x == std::floor(x) && x <= 23.0) {
        double f = 1.0;
        for (int k = 2; k < static_cast<int>(x); ++k) f *= k;
        return f;
    }
    if (x < 0.5) return kPi / (sin_pi(x) * lanczos_gamma(1.0 - x));
    return lanczos_gamma(x);
}

double angular_constant(int n, double s) {
    if (n < 1) throw RangeError("n must be positive");
    if (!(s > -1.0)) throw RangeError("angular_constant requires s > -1");
    return std::pow(kPi, 0.5 * n) * gamma(0.5 * (s + 1.0)) / gamma(0.5 * (n + s + 1.0));
}

double angular_constant_general_m(int n, int m, double s) {
    if (n < 1 || m < 1) throw RangeError("n and m must be positive");
    if (!(s > -m)) throw RangeError("angular_constant_general_m requires s > -m");
    const double N = n + m;
    return 2.0 * std::pow(kPi, 0.5 * N) * gamma(0.5 * (s + m)) / (gamma(0.5 * (N + s)) * gamma(0.5 * m));
}

double lower_factor(double p, double q) {
    auto rp = recognize_rational(p);
    auto rq = recognize_rational(q);
    if (rp && rq) {
        const Rational one{1, 1};
        const Rational two{2, 1};
        auto pq = *rp * *rq;
        if (pq) {
            auto den0 = *pq * two;
            std::optional<Rational> den = den0 ? *den0 - *rp : std::nullopt;
            if (den) den = *den - *rq;
            auto n1 = *pq - *rp;
            auto n2 = *pq - *rq;
            std::optional<Rational> b1 = (den && n1) ? *n1 / *den : std::nullopt;
            std::optional<Rational> b2 = (den && n2) ? *n2 / *den : std::nullopt;
            auto omq = one - *rq;
            auto omp = one - *rp;
            std::optional<Rational> e1 = omq ? *omq / *rq : std::nullopt;
            std::optional<Rational> e2 = omp ? *omp / *rp : std::nullopt;
            if (b1 && b2 && e1 && e2) {
                const Rational B1 = b1.value(), B2 = b2.value();
                if (B1.num == B2.num && B1.den == B2.den) {
                    auto e = *e1 + *e2;
                    if (e && e->den == 1) {
                        auto v = pow_int(B1, e->num);
                        if (v) return v->value();
                    }
                    if (e) return std::pow(B1.value(), e->value());
                }
                return std::pow(B1.value(), e1->value()) * std::pow(B2.value(), e2->value());
            }
        }
    }
    const double den = 2.0 * p * q - p - q;
    return std::pow((p * q - p) / den, (1.0 - q) / q) * std::pow((p * q - q) / den, (1.0 - p) / p);
}

double lower_factor_conj(double p_conj, double r) {
    const double s = p_conj + r;
    return std::pow(p_conj / s, -1.0 / r) * std::pow(r / s, -1.0 / p_conj);
}

ConstantBand constant_band(const ExponentSet& set) {
    if (set.m != 1) throw RangeError("constant_band requires m = 1");
    require_balance(set);
    const double n1 = set.n + 1.0;
    const double pc = set.p_conj;
    const double r = set.q_conj;
    const double a = set.alpha, b = set.beta, l = set.lambda;

    check_convergence(n1 + a * pc > 0.0, "n+1+alpha p' <= 0");
    check_convergence(n1 + b * r > 0.0, "n+1+beta r <= 0");
    check_convergence(n1 + (b - l) * r < 0.0, "n+1+(beta-lambda) r >= 0");
    check_convergence(n1 + (a - l) * pc < 0.0, "n+1+(alpha-lambda) p' >= 0");

    const double Ja = angular_constant(set.n, a * pc);
    const double Jb = angular_constant(set.n, b * r);
    const double C3 = Jb / std::fabs(n1 + (b - l) * r);
    const double C4 = Ja / (n1 + a * pc);
    const double C5 = Ja / std::fabs(n1 + (a - l) * pc);
    const double C6 = Jb / (n1 + b * r);

    ConstantBand out;
    out.d1 = std::pow(C3, 1.0 / r) * std::pow(C4, 1.0 / pc);
    out.d2 = std::pow(C5, 1.0 / pc) * std::pow(C6, 1.0 / r);
    out.lower_factor = lower_factor(set.p, set.q);
    out.lower_factor_conj = lower_factor_conj(pc, r);
    out.lower_factor_mismatch = std::fabs(out.lower_factor - out.lower_factor_conj);
    out.n_upper = std::min(out.d1, out.d2);
    out.n_lower = out.lower_factor * out.n_upper;
    return out;
}

ConstantBand constant_band_general_m(const ExponentSet& set) {
    require_balance(set);
    const double N = set.n + set.m;
    const double pc = set.p_conj;
    const double r = set.q_conj;
    const double a = set.alpha, b = set.beta, l = set.lambda;

    check_convergence(N + a * pc > 0.0, "n+m+alpha p' <= 0");
    check_convergence(N + b * r > 0.0, "n+m+beta r <= 0");
    check_convergence(N + (b - l) * r < 0.0, "n+m+(beta-lambda) r >= 0");
    check_convergence(N + (a - l) * pc < 0.0, "n+m+(alpha-lambda) p' >= 0");

    const double Sa = angular_constant_general_m(set.n, set.m, a * pc);
    const double Sb = angular_constant_general_m(set.n, set.m, b * r);

    ConstantBand out;
    out.d1 = std::pow(Sb / std::fabs(N + (b - l) * r), 1.0 / r) * std::pow(Sa / (N + a * pc), 1.0 / pc);
    out.d2 = std::pow(Sa / std::fabs(N + (a - l) * pc), 1.0 / pc) * std::pow(Sb / (N + b * r), 1.0 / r);
    out.lower_factor = lower_factor(set.p, set.q);
    out.lower_factor_conj = lower_factor_conj(pc, r);
    out.lower_factor_mismatch = std::fabs(out.lower_factor - out.lower_factor_conj);
    out.n_upper = std::min(out.d1, out.d2);
    out.n_lower = out.lower_factor * out.n_upper;
    return out;
}

} // namespace rhls
