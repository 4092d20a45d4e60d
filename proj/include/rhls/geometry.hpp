#pragma once
#include <functional>
#include <vector>

namespace rhls {

using Vec = std::vector<double>;

// (x, t) in R^{n+1}_+; t = 0 only for boundary traces.
struct HalfSpacePoint {
    Vec x;
    double t = 0.0;

    int dim() const { return static_cast<int>(x.size()) + 1; }
    Vec coords() const;
    static HalfSpacePoint from_coords(const Vec& c);
};

// zeta in B^{n+1} = B(x1, 1), x1 = (0,...,0,-1).
struct BallPoint {
    Vec zeta;
    int dim() const { return static_cast<int>(zeta.size()); }
};

struct KelvinParams {
    Vec xi;        // boundary point, n coordinates
    double r = 1.0;
    double s = 0.0; // homogeneity exponent
};

enum class TraceMode { interior, boundary };

Vec pole_x0(int dim); // (0,...,0,-2)
Vec center_x1(int dim); // (0,...,0,-1)

// T(zeta) = 4 (zeta - x0)/|zeta - x0|^2 + x0; T is an involution.
HalfSpacePoint ball_to_half(const BallPoint& zeta, TraceMode mode = TraceMode::interior);
BallPoint half_to_ball(const HalfSpacePoint& X, TraceMode mode = TraceMode::interior);

// phi(zeta) = 4/|zeta - x0|^2; dX = phi^{n+1} dzeta and t(T zeta) = w(zeta) phi(zeta).
double conformal_factor(const BallPoint& zeta);

// ((1 - |zeta - x1|^2)/2)^s.
double ball_weight(const BallPoint& zeta, double s);

HalfSpacePoint kelvin_point(const HalfSpacePoint& X, const Vec& xi, double r);

using HalfSpaceFn = std::function<double(const HalfSpacePoint&)>;

// X -> (r/|X - xi|)^s u(X^{xi,r}).
HalfSpaceFn kelvin_function(HalfSpaceFn u, const KelvinParams& params);

namespace detail {

// Raw-array forms for inner loops; dim = n+1, arrays of that length.
inline double dist2(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

// Applies T in place semantics: out = T(in); returns phi(in).
inline double conformal_map(const double* in, double* out, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim - 1; ++k) s += in[k] * in[k];
    const double last = in[dim - 1] + 2.0;
    s += last * last;
    const double phi = 4.0 / s;
    for (int k = 0; k < dim - 1; ++k) out[k] = phi * in[k];
    out[dim - 1] = phi * last - 2.0;
    return phi;
}

// 1 - |zeta - x1|^2 over 2.
inline double ball_w(const double* z, int dim) {
    double s = 0.0;
    for (int k = 0; k < dim - 1; ++k) s += z[k] * z[k];
    const double last = z[dim - 1] + 1.0;
    s += last * last;
    return 0.5 * (1.0 - s);
}

} // namespace detail

} // namespace rhls
