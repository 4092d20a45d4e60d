#include "rhls/params.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "rhls/errors.hpp"
#include "rhls/rational.hpp"

namespace rhls {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw RangeError(std::string(name) + " is not finite");
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

double balance_residual(int n, int m, double lambda, double alpha, double beta, double p, double q) {
    const double N = n + m;
    return 1.0 / p + 1.0 / q + (lambda - alpha - beta) / N - 2.0;
}

ExponentSet validate_exponents(const ExponentInput& in, BalanceMode mode) {
    if (in.n < 1) throw RangeError("n must be a positive integer");
    if (in.m < 1) throw RangeError("m must be a positive integer");
    require_finite(in.lambda, "lambda");
    require_finite(in.alpha, "alpha");
    require_finite(in.beta, "beta");
    if (in.p) require_finite(*in.p, "p");
    if (in.q) require_finite(*in.q, "q");

    const double N = in.n + in.m;
    if (!(in.lambda >= -N && in.lambda < 0.0))
        throw RangeError("lambda must lie in [-(n+m), 0), got " + fmt(in.lambda));
    if (in.alpha < 0.0) throw RangeError("alpha must be >= 0");
    if (in.beta < 0.0) throw RangeError("beta must be >= 0");

    double p = 0.0, q = 0.0;
    if (mode == BalanceMode::free) {
        if (!in.p || !in.q) throw RangeError("both p and q are required when the balance is not enforced");
        p = *in.p;
        q = *in.q;
    } else {
        if (!in.p && !in.q) throw RangeError("at least one of p, q must be supplied");
        const double rhs = 2.0 - (in.lambda - in.alpha - in.beta) / N;
        if (in.p && in.q) {
            p = *in.p;
            q = *in.q;
        } else if (in.p) {
            p = *in.p;
            q = 1.0 / (rhs - 1.0 / p);
        } else {
            q = *in.q;
            p = 1.0 / (rhs - 1.0 / q);
        }
    }
    if (!(p > 0.0 && p < 1.0)) throw RangeError("p must lie in (0,1), got " + fmt(p));
    if (!(q > 0.0 && q < 1.0)) throw RangeError("q must lie in (0,1), got " + fmt(q));
    if (mode == BalanceMode::enforce) {
        const double res = balance_residual(in.n, in.m, in.lambda, in.alpha, in.beta, p, q);
        if (std::fabs(res) > kBalanceTol)
            throw BalanceError("1/p + 1/q + (lambda-alpha-beta)/(n+m) = 2 violated by " + fmt(res));
    }

    ExponentSet s;
    s.n = in.n;
    s.m = in.m;
    s.lambda = in.lambda;
    s.alpha = in.alpha;
    s.beta = in.beta;
    s.p = p;
    s.q = q;
    s.p_conj = p / (p - 1.0);
    s.q_conj = q / (q - 1.0);
    s.theta = 1.0 / (1.0 - p);
    s.kappa = 1.0 / (1.0 - q);

    if (!(s.alpha < -in.m / s.p_conj))
        throw RangeError("alpha must be < -m/p' = " + fmt(-in.m / s.p_conj) + ", got " + fmt(s.alpha));
    if (!(s.beta < -in.m / s.q_conj))
        throw RangeError("beta must be < -m/q' = " + fmt(-in.m / s.q_conj) + ", got " + fmt(s.beta));

    auto [pa, qb] = conformal_exponents(in.n, in.m, in.lambda, in.alpha, in.beta);
    s.p_conformal = (p == pa);
    s.q_conformal = (q == qb);
    return s;
}

std::pair<double, double> conformal_exponents(int n, int m, double lambda, double alpha, double beta) {
    if (n < 1 || m < 1) throw RangeError("n and m must be positive integers");
    const double N = n + m;
    if (!(lambda >= -N && lambda < 0.0)) throw RangeError("lambda must lie in [-(n+m), 0)");
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw RangeError("alpha and beta must be >= 0");
    const double pa = 2.0 * N / (2.0 * N + 2.0 * alpha - lambda);
    const double qb = 2.0 * N / (2.0 * N + 2.0 * beta - lambda);
    return {pa, qb};
}

double pohozaev_defect(int n, int m, double lambda, double alpha, double beta, double theta, double kappa) {
    if (!(theta > 1.0) || !(kappa > 1.0)) throw RangeError("theta and kappa must exceed 1");
    const double N = n + m;
    auto rl = recognize_rational(lambda);
    auto ra = recognize_rational(alpha);
    auto rb = recognize_rational(beta);
    auto rt = recognize_rational(theta);
    auto rk = recognize_rational(kappa);
    if (rl && ra && rb && rt && rk) {
        const Rational one{1, 1};
        const Rational RN{static_cast<std::int64_t>(n + m), 1};
        auto t1 = *rt - one;
        auto k1 = *rk - one;
        if (t1 && k1) {
            auto a = RN / *t1;
            auto b = RN / *k1;
            auto ab = *ra + *rb;
            if (a && b && ab) {
                auto c = *ab - *rl;
                auto s = *a + *b;
                if (c && s) {
                    auto d = *s - *c;
                    if (d) return d->value();
                }
            }
        }
    }
    return N / (theta - 1.0) + N / (kappa - 1.0) - (alpha + beta - lambda);
}

double pohozaev_defect(const ExponentSet& set) {
    // conformal theta-1 = 2(n+m)/(2alpha-lambda): the defect vanishes identically
    if (set.p_conformal && set.q_conformal) return 0.0;
    return pohozaev_defect(set.n, set.m, set.lambda, set.alpha, set.beta, set.theta, set.kappa);
}

ExponentSet conformal_set(int n, int m, double lambda, double alpha, double beta) {
    auto [pa, qb] = conformal_exponents(n, m, lambda, alpha, beta);
    ExponentInput in{n, m, lambda, alpha, beta, pa, qb};
    return validate_exponents(in, BalanceMode::enforce);
}

ExponentSet subcritical_set(int n, int m, double lambda, double alpha, double beta, double delta) {
    if (!(delta >= 0.0 && delta < 1.0)) throw RangeError("delta must lie in [0,1)");
    auto [pa, qb] = conformal_exponents(n, m, lambda, alpha, beta);
    ExponentInput in{n, m, lambda, alpha, beta, pa * (1.0 - delta), qb * (1.0 - delta)};
    return validate_exponents(in, BalanceMode::free);
}

} // namespace rhls
