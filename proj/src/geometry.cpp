#include "rhls/geometry.hpp"

#include <cmath>

#include "rhls/errors.hpp"

namespace rhls {

Vec HalfSpacePoint::coords() const {
    Vec c(x);
    c.push_back(t);
    return c;
}

HalfSpacePoint HalfSpacePoint::from_coords(const Vec& c) {
    if (c.size() < 2) throw DomainError("half-space points need at least two coordinates");
    HalfSpacePoint X;
    X.x.assign(c.begin(), c.end() - 1);
    X.t = c.back();
    return X;
}

Vec pole_x0(int dim) {
    Vec v(static_cast<std::size_t>(dim), 0.0);
    v.back() = -2.0;
    return v;
}

Vec center_x1(int dim) {
    Vec v(static_cast<std::size_t>(dim), 0.0);
    v.back() = -1.0;
    return v;
}

namespace {

constexpr double kBoundarySlack = 1e-14;

} // namespace

HalfSpacePoint ball_to_half(const BallPoint& zeta, TraceMode mode) {
    const int d = zeta.dim();
    if (d < 2) throw DomainError("ball points need dimension >= 2");
    for (double v : zeta.zeta)
        if (!std::isfinite(v)) throw DomainError("non-finite ball point");
    const double w = detail::ball_w(zeta.zeta.data(), d);
    if (mode == TraceMode::interior) {
        if (!(w > 0.0)) throw DomainError("ball point on or outside the unit sphere");
    } else if (w < -kBoundarySlack) {
        throw DomainError("ball point outside the closed unit ball");
    }
    const Vec x0 = pole_x0(d);
    if (detail::dist2(zeta.zeta.data(), x0.data(), d) == 0.0)
        throw DomainError("the pole x0 maps to infinity");
    Vec out(static_cast<std::size_t>(d));
    const double phi = detail::conformal_map(zeta.zeta.data(), out.data(), d);
    // t = w phi avoids cancellation in phi (zeta_n + 2) - 2
    out.back() = w > 0.0 ? w * phi : 0.0;
    return HalfSpacePoint::from_coords(out);
}

BallPoint half_to_ball(const HalfSpacePoint& X, TraceMode mode) {
    for (double v : X.x)
        if (!std::isfinite(v)) throw DomainError("non-finite half-space point");
    if (!std::isfinite(X.t)) throw DomainError("non-finite half-space point");
    if (mode == TraceMode::interior ? !(X.t > 0.0) : X.t < 0.0)
        throw DomainError("half-space point must have t > 0");
    const Vec c = X.coords();
    BallPoint z;
    z.zeta.resize(c.size());
    detail::conformal_map(c.data(), z.zeta.data(), static_cast<int>(c.size()));
    return z;
}

double conformal_factor(const BallPoint& zeta) {
    const Vec x0 = pole_x0(zeta.dim());
    const double s = detail::dist2(zeta.zeta.data(), x0.data(), zeta.dim());
    if (s == 0.0) throw DomainError("conformal factor is infinite at x0");
    return 4.0 / s;
}

double ball_weight(const BallPoint& zeta, double s) {
    if (s == 0.0) return 1.0;
    const double w = detail::ball_w(zeta.zeta.data(), zeta.dim());
    if (w < -kBoundarySlack) throw DomainError("ball_weight evaluated outside the ball");
    if (w <= 0.0) {
        if (s > 0.0) return 0.0;
        throw OverflowError("ball_weight with negative exponent on the boundary");
    }
    return std::pow(w, s);
}

HalfSpacePoint kelvin_point(const HalfSpacePoint& X, const Vec& xi, double r) {
    if (xi.size() != X.x.size()) throw DomainError("kelvin center dimension mismatch");
    if (!(r > 0.0)) throw DomainError("kelvin radius must be positive");
    double d2 = X.t * X.t;
    for (std::size_t k = 0; k < xi.size(); ++k) d2 += (X.x[k] - xi[k]) * (X.x[k] - xi[k]);
    if (d2 == 0.0) throw SingularityError("kelvin_point at its own center");
    const double f = r * r / d2;
    HalfSpacePoint Y;
    Y.x.resize(xi.size());
    for (std::size_t k = 0; k < xi.size(); ++k) Y.x[k] = f * (X.x[k] - xi[k]) + xi[k];
    Y.t = f * X.t;
    return Y;
}

HalfSpaceFn kelvin_function(HalfSpaceFn u, const KelvinParams& params) {
    if (!(params.r > 0.0)) throw DomainError("kelvin radius must be positive");
    return [u = std::move(u), params](const HalfSpacePoint& X) {
        double d2 = X.t * X.t;
        for (std::size_t k = 0; k < params.xi.size(); ++k)
            d2 += (X.x[k] - params.xi[k]) * (X.x[k] - params.xi[k]);
        if (d2 == 0.0) throw SingularityError("kelvin transform at its own center");
        const double scale = std::pow(params.r / std::sqrt(d2), params.s);
        return scale * u(kelvin_point(X, params.xi, params.r));
    };
}

} // namespace rhls
