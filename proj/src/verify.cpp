#include "rhls/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "rhls/errors.hpp"
#include "rhls/parallel.hpp"
#include "rhls/special.hpp"
#include "rhls/summation.hpp"

namespace rhls {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double dist2_xi(const HalfSpacePoint& X, const Vec& xi) {
    double d2 = X.t * X.t;
    for (std::size_t k = 0; k < xi.size(); ++k) d2 += (X.x[k] - xi[k]) * (X.x[k] - xi[k]);
    return d2;
}

double dist2_pts(const HalfSpacePoint& X, const HalfSpacePoint& Y) {
    double d2 = (X.t - Y.t) * (X.t - Y.t);
    for (std::size_t k = 0; k < X.x.size(); ++k) d2 += (X.x[k] - Y.x[k]) * (X.x[k] - Y.x[k]);
    return d2;
}

double rel_diff(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b)); }

// ---- radial machinery for the Hardy check ----

struct RadialGrid {
    std::vector<double> x, w;  // nodes and weights in rho (dx = x ds)
    std::vector<double> s_lo, s_hi; // panel bounds in s = log rho
    int order = 0;
};

RadialGrid radial_grid(double rho_min, double rho_max, int panels, int order) {
    RadialGrid g;
    g.order = order;
    std::vector<double> xg, wg;
    gauss_legendre(order, 0.0, 1.0, xg, wg);
    const double s0 = std::log(rho_min), s1 = std::log(rho_max);
    const double hs = (s1 - s0) / panels;
    for (int k = 0; k < panels; ++k) {
        const double a = s0 + k * hs;
        g.s_lo.push_back(a);
        g.s_hi.push_back(a + hs);
        for (int i = 0; i < order; ++i) {
            const double x = std::exp(a + hs * xg[i]);
            g.x.push_back(x);
            g.w.push_back(hs * wg[i] * x);
        }
    }
    return g;
}

// Power-law extension of integrand h beyond an end of the grid. Returns +inf when divergent.
double power_tail(double x_near, double h_near, double x_far, double h_far, double end, bool left) {
    if (h_near == 0.0) return 0.0;
    if (!std::isfinite(h_near)) return kInf;
    if (h_far <= 0.0 || !std::isfinite(h_far)) return 0.0;
    const double k = std::log(h_far / h_near) / std::log(x_far / x_near);
    const double h_end = h_near * std::pow(end / x_near, k);
    if (left) return k > -1.0 ? h_end * end / (k + 1.0) : kInf;
    return k < -1.0 ? h_end * end / (-k - 1.0) : kInf;
}

struct RadialIntegral {
    double value = 0.0;
    double head = 0.0;
    double tail = 0.0;
};

RadialIntegral integrate_radial(const RadialGrid& g, const std::vector<double>& h, double rho_min, double rho_max,
                                bool with_tails) {
    RadialIntegral out;
    bool inf = false;
    for (double v : h) inf = inf || std::isinf(v);
    if (inf) {
        out.value = kInf;
        return out;
    }
    std::vector<double> wh(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) wh[i] = g.w[i] * h[i];
    out.value = stable_sum(wh);
    if (with_tails) {
        const std::size_t L = h.size();
        out.head = power_tail(g.x[0], h[0], g.x[1], h[1], rho_min, true);
        out.tail = power_tail(g.x[L - 1], h[L - 1], g.x[L - 2], h[L - 2], rho_max, false);
        out.value += out.head + out.tail;
    }
    return out;
}

// Cumulative mass G(x_k) = int over [0, x_k] (inner) or [x_k, inf) (outer) of F.
std::vector<double> cumulative(const RadialFn& F, const RadialGrid& g, bool inner, double rho_min, double rho_max,
                               bool with_tails) {
    const int P = static_cast<int>(g.s_lo.size());
    const int K = g.order;
    std::vector<double> xg, wg;
    gauss_legendre(K, 0.0, 1.0, xg, wg);
    std::vector<double> Fn(g.x.size());
    for (std::size_t i = 0; i < g.x.size(); ++i) Fn[i] = F(g.x[i]);
    std::vector<double> panel(P);
    for (int p = 0; p < P; ++p) {
        CompensatedSum s;
        for (int i = 0; i < K; ++i) s.add(g.w[p * K + i] * Fn[p * K + i]);
        panel[p] = s.value();
    }
    auto partial = [&](double sa, double sb) {
        CompensatedSum s;
        for (int i = 0; i < K; ++i) {
            const double x = std::exp(sa + (sb - sa) * xg[i]);
            s.add((sb - sa) * wg[i] * x * F(x));
        }
        return s.value();
    };
    const std::size_t L = g.x.size();
    std::vector<double> G(L);
    if (inner) {
        const double head = with_tails ? power_tail(g.x[0], Fn[0], g.x[1], Fn[1], rho_min, true) : 0.0;
        double before = head;
        for (int p = 0; p < P; ++p) {
            for (int i = 0; i < K; ++i) {
                const std::size_t k = static_cast<std::size_t>(p * K + i);
                G[k] = before + partial(g.s_lo[p], std::log(g.x[k]));
            }
            before += panel[p];
        }
    } else {
        const double tail = with_tails ? power_tail(g.x[L - 1], Fn[L - 1], g.x[L - 2], Fn[L - 2], rho_max, false) : 0.0;
        double after = tail;
        for (int p = P - 1; p >= 0; --p) {
            for (int i = 0; i < K; ++i) {
                const std::size_t k = static_cast<std::size_t>(p * K + i);
                G[k] = after + partial(std::log(g.x[k]), g.s_hi[p]);
            }
            after += panel[p];
        }
    }
    return G;
}

// Smooth step: 0 for x <= 0, 1 for x >= 1.
double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

double smooth_step_deriv(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double s = smooth_step(x);
    return s * (1.0 - s) * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x)));
}

struct HalfSpaceQuad {
    std::vector<double> points; // row-major
    std::vector<double> weights;
    std::vector<double> radius;
};

// Tanh-sinh nodes on (0, L) as (x, L - x, weight) with accurate complements.
struct TsNode {
    double lo, hi, w;
};

std::vector<TsNode> tanh_sinh(int level, double L) {
    std::vector<TsNode> out;
    const double h = 6.0 / level;
    for (int k = -level; k <= level; ++k) {
        const double sk = std::sinh(k * h);
        const double u = 0.5 * kPi * sk;
        const double c = 2.0 / (std::exp(2.0 * std::fabs(u)) + 1.0); // 1 - |tanh u|
        const double ch = std::cosh(u);
        const double w = h * 0.5 * kPi * std::cosh(k * h) / (ch * ch) * 0.5 * L;
        if (!(c > 0.0) || !(w > 1e-300)) continue;
        const double small = 0.5 * L * c, big = L - small;
        if (k < 0)
            out.push_back({small, big, w});
        else
            out.push_back({big, small, w});
    }
    return out;
}

HalfSpaceQuad annulus_rule(int dim, double r0, double r1, int radial_nodes, int angular_level) {
    HalfSpaceQuad q;
    std::vector<double> xr, wr;
    gauss_legendre(radial_nodes, std::log(r0), std::log(r1), xr, wr);
    const auto ts = tanh_sinh(angular_level, dim == 2 ? kPi : 0.5 * kPi);
    const int M = 32;
    for (int i = 0; i < radial_nodes; ++i) {
        const double r = std::exp(xr[i]);
        const double wrad = wr[i] * r * std::pow(r, dim - 1);
        for (const auto& a : ts) {
            if (dim == 2) {
                // psi in (0, pi); t = r sin psi with sin psi = sin(min(psi, pi - psi)).
                const double psi = a.lo;
                const double comp = std::min(a.lo, a.hi);
                q.points.push_back(r * std::cos(psi));
                q.points.push_back(r * std::sin(comp));
                q.weights.push_back(wrad * a.w);
                q.radius.push_back(r);
            } else {
                // chi in (0, pi/2) from the vertical; t = r cos chi = r sin(pi/2 - chi).
                const double chi = a.lo, comp = a.hi;
                for (int k = 0; k < M; ++k) {
                    const double az = 2.0 * kPi * (k + 0.5) / M;
                    q.points.push_back(r * std::sin(chi) * std::cos(az));
                    q.points.push_back(r * std::sin(chi) * std::sin(az));
                    q.points.push_back(r * std::sin(comp));
                    q.weights.push_back(wrad * a.w * std::sin(chi) * 2.0 * kPi / M);
                    q.radius.push_back(r);
                }
            }
        }
    }
    return q;
}

struct PohozaevLevel {
    double dq = 0.0;      // (D - Q) / C
    double literal = 0.0; // (D - (a+b-lambda) B_phi) / C
};

PohozaevLevel pohozaev_level(const HalfSpaceSystem& sys, double eps, double R, double th_c, double ka_c,
                             const PohozaevOptions& opts, double norm) {
    const ExponentSet& s = sys.set();
    const int d = sys.dim();
    const double np1 = static_cast<double>(d);
    const HalfSpaceQuad q = annulus_rule(d, eps, 2.0 * R, opts.radial_nodes, opts.angular_level);
    const std::size_t P = q.weights.size();
    std::vector<double> dterm(P), qterm(P), bterm(P);
    parallel_for(P, [&](std::size_t i) {
        const double* X = q.points.data() + i * static_cast<std::size_t>(d);
        const double r = q.radius[i];
        const double phi = smooth_step(r / eps - 1.0) * (1.0 - smooth_step(r / R - 1.0));
        const double rdphi = (r / eps) * smooth_step_deriv(r / eps - 1.0) * (1.0 - smooth_step(r / R - 1.0)) -
                             smooth_step(r / eps - 1.0) * (r / R) * smooth_step_deriv(r / R - 1.0);
        double xgu = 0.0, xgv = 0.0;
        const double u = sys.u_dilation(X, xgu);
        const double v = sys.v_dilation(X, xgv);
        const double u1 = std::pow(u, 1.0 - s.theta), v1 = std::pow(v, 1.0 - s.kappa);
        const double div = np1 * phi + rdphi;
        const double w = q.weights[i];
        dterm[i] = w * (-u1 * div / (1.0 - th_c) - v1 * div / (1.0 - ka_c));
        qterm[i] = w * phi * (std::pow(u, -s.theta) * xgu + std::pow(v, -s.kappa) * xgv);
        bterm[i] = w * phi * 0.5 * (u1 + v1);
    });
    const double D = stable_sum(dterm), Q = stable_sum(qterm), Bphi = stable_sum(bterm);
    return {(D - Q) / norm, (D - (s.alpha + s.beta - s.lambda) * Bphi) / norm};
}

// ---- profile fit ----

struct ProfileFunctor {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    const std::vector<TraceSample>* trace;
    double e;
    int n;

    int inputs() const { return 2 + n; }
    int values() const { return static_cast<int>(trace->size()); }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
        for (int i = 0; i < values(); ++i) {
            const auto& s = (*trace)[i];
            fvec(i) = model(x, s.x) / s.value - 1.0;
        }
        return 0;
    }

    int df(const Eigen::VectorXd& x, Eigen::MatrixXd& J) const {
        const double d = std::exp(x(1));
        for (int i = 0; i < values(); ++i) {
            const auto& s = (*trace)[i];
            double r2 = 0.0;
            for (int k = 0; k < n; ++k) r2 += (s.x[k] - x(2 + k)) * (s.x[k] - x(2 + k));
            const double m = model(x, s.x) / s.value;
            const double den = 1.0 + d * d * r2;
            J(i, 0) = m;
            J(i, 1) = m * e * (1.0 - d * d * r2) / den;
            for (int k = 0; k < n; ++k) J(i, 2 + k) = m * e * 2.0 * d * d * (s.x[k] - x(2 + k)) / den;
        }
        return 0;
    }

    double model(const Eigen::VectorXd& x, const Vec& pt) const {
        const double c = std::exp(x(0)), d = std::exp(x(1));
        double r2 = 0.0;
        for (int k = 0; k < n; ++k) r2 += (pt[k] - x(2 + k)) * (pt[k] - x(2 + k));
        return c * std::pow(d / (1.0 + d * d * r2), e);
    }
};

double sup_rel_residual(const ProfileParams& prm, const std::vector<TraceSample>& trace) {
    double num = 0.0, den = 0.0;
    for (const auto& s : trace) {
        num = std::max(num, std::fabs(profile_value(prm, s.x) - s.value));
        den = std::max(den, std::fabs(s.value));
    }
    return num / den;
}

} // namespace

CheckReport make_report(std::string name, double lhs, double rhs, double residual, double tolerance) {
    CheckReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.residual = residual;
    r.tolerance = tolerance;
    r.pass = std::fabs(residual) <= tolerance;
    return r;
}

CheckReport check_reversed_holder(const Field& f, const Field& h, double p, const QuadratureRule& rule,
                                  double tolerance) {
    if (!(p > 0.0 && p < 1.0)) throw RangeError("reversed Hoelder needs p in (0,1)");
    check_field(f, rule);
    check_field(h, rule);
    std::vector<double> fh(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) fh[i] = f.values[i] * h.values[i];
    const double lhs = stable_dot(rule.weights, fh);
    const double rhs = quasi_norm(f, p, rule) * neg_quasi_norm(h, p / (p - 1.0), rule);
    const double gap = lhs - rhs;
    CheckReport r = make_report("reversed_holder", lhs, rhs, std::max(0.0, -gap), tolerance);
    r.metadata["gap"] = gap;
    r.metadata["p"] = p;
    return r;
}

CheckReport check_reversed_hardy(const RadialFn& f, const ExponentSet& set, HardyMode mode, const HardyOptions& opts) {
    if (!(opts.rho_min > 0.0 && opts.rho_max > opts.rho_min)) throw RangeError("bad Hardy truncation");
    if (opts.panels < 1 || opts.order < 2) throw RangeError("bad Hardy quadrature");
    const ConstantBand band = constant_band(set);
    const int n = set.n;
    const double r = set.q_conj, pc = set.p_conj, p = set.p;
    const bool inner = mode == HardyMode::inner;
    const bool tails = !opts.truncate_only;
    const RadialGrid g = radial_grid(opts.rho_min, opts.rho_max, opts.panels, opts.order);
    const std::size_t L = g.x.size();

    bool zero = true;
    std::vector<double> fv(L);
    for (std::size_t i = 0; i < L; ++i) {
        fv[i] = f(g.x[i]);
        if (!(fv[i] >= 0.0) || !std::isfinite(fv[i])) throw DomainError("Hardy profile must be nonnegative and finite");
        zero = zero && fv[i] == 0.0;
    }
    const double C = lower_factor_conj(pc, r) * (inner ? band.d1 : band.d2);
    const std::string name = inner ? "reversed_hardy_inner" : "reversed_hardy_outer";
    if (zero) {
        CheckReport rep = make_report(name, 0.0, 0.0, 0.0, 1e-9);
        rep.metadata["constant"] = C;
        rep.note = "zero profile";
        return rep;
    }

    const double J0 = angular_constant(n, 0.0);
    const RadialFn mass = [&](double x) { return f(x) * std::pow(x, n); };
    std::vector<double> G = cumulative(mass, g, inner, opts.rho_min, opts.rho_max, tails);
    for (double& v : G) v *= J0;

    const double wexp = inner ? (set.beta - set.lambda) * r + n : set.beta * r + n;
    std::vector<double> hl(L), hr(L);
    const double rexp = inner ? -set.alpha * p + n : (set.lambda - set.alpha) * p + n;
    for (std::size_t i = 0; i < L; ++i) {
        hl[i] = std::pow(g.x[i], wexp) * std::pow(G[i], r);
        hr[i] = std::pow(fv[i], p) * std::pow(g.x[i], rexp);
    }
    const RadialIntegral IL = integrate_radial(g, hl, opts.rho_min, opts.rho_max, tails);
    const RadialIntegral IR = integrate_radial(g, hr, opts.rho_min, opts.rho_max, tails);
    const double lhs_int = angular_constant(n, set.beta * r) * IL.value;
    const double rhs_int = angular_constant(n, -set.alpha * p) * IR.value;
    if (tails) {
        for (const RadialIntegral* I : {&IL, &IR}) {
            if (std::isfinite(I->value) && I->value > 0.0 && std::max(I->head, I->tail) > 0.1 * I->value)
                throw TruncationError("Hardy tail estimate exceeds 10% of the integral");
        }
    }
    const double lhs = std::pow(lhs_int, 1.0 / r);
    const double rhs = std::pow(rhs_int, 1.0 / p);
    const double target = C * rhs;
    double viol = 0.0;
    if (std::isinf(target))
        viol = std::isinf(lhs) ? 0.0 : 1.0;
    else if (target > lhs)
        viol = (target - lhs) / target;
    CheckReport rep = make_report(name, lhs, target, viol, 1e-9);
    rep.metadata["constant"] = C;
    rep.metadata["rhs_norm"] = rhs;
    rep.metadata["lhs_integral"] = lhs_int;
    rep.metadata["lhs_divergent"] = std::isinf(lhs_int) ? 1.0 : 0.0;
    rep.metadata["gap"] = lhs - target;
    return rep;
}

double kernel_K(const Vec& xi, double r, const HalfSpacePoint& Y, const HalfSpacePoint& X, double lambda) {
    const double dx2 = dist2_xi(X, xi);
    if (dx2 == 0.0) throw SingularityError("kernel_K at X = xi");
    const HalfSpacePoint Xs = kelvin_point(X, xi, r);
    return std::pow(r * r / dx2, 0.5 * lambda) * detail::riesz(dist2_pts(Xs, Y), lambda) -
           detail::riesz(dist2_pts(X, Y), lambda);
}

CheckReport kelvin_identity_residual(const HalfSpaceFn& v, const Vec& xi, double r,
                                     const std::vector<HalfSpacePoint>& test_points, const ExponentSet& set,
                                     const QuadratureRule& rule, const KelvinOptions& opts) {
    const int d = rule.dim;
    const int n = d - 1;
    if (set.dim() != d || static_cast<int>(xi.size()) != n) throw DomainError("Kelvin check dimension mismatch");
    if (!(r > 0.0)) throw DomainError("Kelvin radius must be positive");
    const double al = set.alpha, be = set.beta, lam = set.lambda, ka = set.kappa;
    const double mu1 = 2.0 * (n + 1) + 2.0 * be - lam + (lam - 2.0 * be) * ka;
    auto h = [&](const HalfSpacePoint& Y) { return detail::wpow(Y.t, be) * std::pow(v(Y), -ka); };

    // u through the ball chart.
    const HalfSpaceNodes nodes = pullback_nodes(rule);
    std::vector<double> src(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double* Y = nodes.point(j);
        src[j] = nodes.weights[j] * h(HalfSpacePoint::from_coords(Vec(Y, Y + d)));
    }
    auto u = [&](const HalfSpacePoint& X) {
        const Vec c = X.coords();
        std::vector<double> terms(nodes.size());
        for (std::size_t j = 0; j < nodes.size(); ++j)
            terms[j] = src[j] * detail::riesz(detail::dist2(c.data(), nodes.point(j), d), lam);
        return detail::wpow(X.t, al) * stable_sum(terms);
    };

    // Polar rule on B_r^+(xi).
    std::vector<HalfSpacePoint> hb;
    std::vector<double> hw;
    {
        std::vector<double> xr, wr;
        gauss_legendre(opts.radial_order, 0.0, r, xr, wr);
        if (d == 2) {
            std::vector<double> xa, wa;
            gauss_legendre(opts.angular_order, 0.0, kPi, xa, wa);
            for (int i = 0; i < opts.radial_order; ++i)
                for (int k = 0; k < opts.angular_order; ++k) {
                    HalfSpacePoint Y;
                    Y.x = {xi[0] + xr[i] * std::cos(xa[k])};
                    Y.t = xr[i] * std::sin(xa[k]);
                    hb.push_back(Y);
                    hw.push_back(wr[i] * xr[i] * wa[k]);
                }
        } else if (d == 3) {
            std::vector<double> xc, wc;
            gauss_legendre(opts.angular_order, 0.0, 1.0, xc, wc);
            const int M = 2 * opts.angular_order;
            for (int i = 0; i < opts.radial_order; ++i)
                for (int j = 0; j < opts.angular_order; ++j)
                    for (int k = 0; k < M; ++k) {
                        const double c = xc[j], sn = std::sqrt(1.0 - c * c), az = 2.0 * kPi * (k + 0.5) / M;
                        HalfSpacePoint Y;
                        Y.x = {xi[0] + xr[i] * sn * std::cos(az), xi[1] + xr[i] * sn * std::sin(az)};
                        Y.t = xr[i] * c;
                        hb.push_back(Y);
                        hw.push_back(wr[i] * xr[i] * xr[i] * wc[j] * 2.0 * kPi / M);
                    }
        } else {
            throw RangeError("Kelvin check supports dim 2 and 3");
        }
    }
    // Source difference on the half ball: (r/|Y-xi|)^{mu1} z^b v_{xi,r}^{-kappa} - z^b v^{-kappa}.
    std::vector<double> diff(hb.size());
    parallel_for(hb.size(), [&](std::size_t i) {
        const HalfSpacePoint& Y = hb[i];
        const double ry = std::sqrt(dist2_xi(Y, xi));
        const HalfSpacePoint Ys = kelvin_point(Y, xi, r);
        const double vk = std::pow(r / ry, lam - 2.0 * be) * v(Ys);
        diff[i] = hw[i] * (std::pow(r / ry, mu1) * detail::wpow(Y.t, be) * std::pow(vk, -ka) - h(Y));
    });

    const std::size_t T = test_points.size();
    std::vector<double> lhs(T), rhs(T);
    parallel_for(T, [&](std::size_t k) {
        const HalfSpacePoint& X = test_points[k];
        const double rx = std::sqrt(dist2_xi(X, xi));
        const double uk = std::pow(r / rx, lam - 2.0 * al) * u(kelvin_point(X, xi, r));
        lhs[k] = u(X) - uk;
        std::vector<double> terms(hb.size());
        for (std::size_t i = 0; i < hb.size(); ++i) terms[i] = kernel_K(xi, r, hb[i], X, lam) * diff[i];
        rhs[k] = detail::wpow(X.t, al) * stable_sum(terms);
    });
    double worst = 0.0, worst_rel = 0.0, at_l = 0.0, at_r = 0.0;
    for (std::size_t k = 0; k < T; ++k) {
        const double e = std::fabs(lhs[k] - rhs[k]);
        if (e >= worst) {
            worst = e;
            at_l = lhs[k];
            at_r = rhs[k];
        }
        worst_rel = std::max(worst_rel, e / std::max(std::fabs(lhs[k]), 1e-300));
    }
    CheckReport rep = make_report("kelvin_identity", at_l, at_r, worst, opts.tolerance);
    rep.metadata["mu1"] = mu1;
    rep.metadata["max_relative"] = worst_rel;
    rep.metadata["test_points"] = static_cast<double>(T);
    return rep;
}

CheckReport fubini_check(const HalfSpaceSystem& sys, double tolerance) {
    const HalfSpaceNodes& h = sys.nodes();
    const std::size_t N = h.size();
    const ExponentSet& s = sys.set();
    std::vector<double> a(N), c(N), b(N);
    for (std::size_t j = 0; j < N; ++j) {
        a[j] = std::pow(sys.v_nodes()[j], 1.0 - s.kappa);
        c[j] = std::pow(sys.u_nodes()[j], 1.0 - s.theta);
    }
    parallel_for(N, [&](std::size_t i) { b[i] = sys.u_source()[i] * sys.u(h.point(i)); });
    const double A = stable_dot(h.weights, a), B = stable_dot(h.weights, b), C = stable_dot(h.weights, c);
    const double worst = std::max({rel_diff(A, B), rel_diff(B, C), rel_diff(A, C)});
    CheckReport rep = make_report("fubini", A, C, worst, tolerance);
    rep.metadata["A"] = A;
    rep.metadata["B"] = B;
    rep.metadata["C"] = C;
    return rep;
}

CheckReport pohozaev_residual(const HalfSpaceSystem& sys, const PohozaevOptions& opts) {
    if (opts.ladder.size() < 2) throw RangeError("Pohozaev ladder needs two levels");
    for (const auto& [eps, R] : opts.ladder)
        if (!(eps > 0.0 && eps < 2.0 * R)) throw RangeError("Pohozaev cutoff needs 0 < epsilon < 2R");
    const ExponentSet& s = sys.set();
    const double th = opts.theta.value_or(s.theta), ka = opts.kappa.value_or(s.kappa);
    if (!(th > 1.0 && ka > 1.0)) throw RangeError("Pohozaev exponents must exceed 1");
    std::vector<double> c(sys.nodes().size());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = std::pow(sys.u_nodes()[j], 1.0 - s.theta);
    const double norm = stable_dot(sys.nodes().weights, c);

    std::vector<PohozaevLevel> lv;
    for (const auto& [eps, R] : opts.ladder) lv.push_back(pohozaev_level(sys, eps, R, th, ka, opts, norm));
    const PohozaevLevel& fine = lv.back();
    const PohozaevLevel& coarse = lv[lv.size() - 2];
    const double ext = 2.0 * fine.dq - coarse.dq;
    const double rate = std::min(-(s.n + 1.0) * s.lambda / (2.0 * s.alpha - s.lambda),
                                 -(s.n + 1.0) * s.lambda / (2.0 * s.beta - s.lambda));
    const double f2 = std::pow(2.0, rate);
    const double literal_ext = (f2 * fine.literal - coarse.literal) / (f2 - 1.0);
    const double defect = pohozaev_defect(s.n, s.m, s.lambda, s.alpha, s.beta, th, ka);

    CheckReport rep = make_report("pohozaev", fine.dq, 0.0, ext, opts.tolerance);
    for (std::size_t k = 0; k < lv.size(); ++k) {
        rep.metadata["level" + std::to_string(k) + "_residual"] = lv[k].dq;
        rep.metadata["level" + std::to_string(k) + "_literal"] = lv[k].literal;
    }
    rep.metadata["literal_extrapolated"] = literal_ext;
    rep.metadata["literal_rate"] = rate;
    rep.metadata["defect"] = defect;
    rep.metadata["theta"] = th;
    rep.metadata["kappa"] = ka;
    rep.metadata["sign_agrees"] = (defect == 0.0 || (defect > 0.0) == (ext > 0.0)) ? 1.0 : 0.0;
    return rep;
}

double growth_bound_constant(const std::function<double(const double*)>& w, double e, double lambda, int dim) {
    double hi = 0.0, lo = kInf;
    std::vector<double> X(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i <= 30; ++i) {
        const double rad = std::pow(10.0, -2.0 + 5.0 * i / 30.0);
        for (int k = 1; k <= 11; ++k) {
            const double psi = kPi * k / 12.0;
            std::fill(X.begin(), X.end(), 0.0);
            X[0] = rad * std::cos(psi);
            X[dim - 1] = rad * std::sin(psi);
            const double t = X[dim - 1];
            const double ratio = w(X.data()) / (detail::wpow(t, e) * (1.0 + std::pow(rad, -lambda)));
            hi = std::max(hi, ratio);
            lo = std::min(lo, ratio);
        }
    }
    return std::max(hi, 1.0 / lo);
}

namespace {

AsymptoticsReport asymptotics_from(const std::function<double(const double*)>& u,
                                   const std::function<double(const double*)>& v, const ExponentSet& s, int d,
                                   double a, double b, const AsymptoticsOptions& opts) {
    AsymptoticsReport rep;
    rep.a = a;
    rep.b = b;
    double worst = 0.0;
    std::vector<double> X(static_cast<std::size_t>(d), 0.0);
    for (double psi : opts.angles) {
        for (double rad : opts.radii) {
            std::fill(X.begin(), X.end(), 0.0);
            X[0] = rad * std::cos(psi);
            X[d - 1] = rad * std::sin(psi);
            const double t = X[d - 1];
            const double scale = std::pow(rad, -s.lambda);
            RatioSample smp;
            smp.radius = rad;
            smp.angle = psi;
            smp.u_ratio = u(X.data()) / (detail::wpow(t, s.alpha) * scale);
            smp.v_ratio = v(X.data()) / (detail::wpow(t, s.beta) * scale);
            if (!std::isfinite(smp.u_ratio) || !std::isfinite(smp.v_ratio))
                throw NonFiniteError("non-finite asymptotic ratio");
            rep.ratio_samples.push_back(smp);
        }
        const RatioSample& last = rep.ratio_samples.back();
        worst = std::max({worst, std::fabs(last.u_ratio / rep.a - 1.0), std::fabs(last.v_ratio / rep.b - 1.0)});
    }
    rep.bound_constant = std::max(growth_bound_constant(u, s.alpha, s.lambda, d),
                                  growth_bound_constant(v, s.beta, s.lambda, d));
    const RatioSample& any = rep.ratio_samples.back();
    rep.check = make_report("asymptotics", any.u_ratio, rep.a, worst, opts.tolerance);
    rep.check.metadata["a"] = rep.a;
    rep.check.metadata["b"] = rep.b;
    rep.check.metadata["bound_constant"] = rep.bound_constant;
    return rep;
}

} // namespace

AsymptoticsReport asymptotic_constants(const HalfSpaceFn& u, const HalfSpaceFn& v, const ExponentSet& set,
                                       const QuadratureRule& rule, const AsymptoticsOptions& opts) {
    if (set.dim() != rule.dim) throw DomainError("exponent dimension does not match the rule");
    const HalfSpaceNodes h = pullback_nodes(rule);
    const int d = h.dim;
    const std::size_t N = h.size();
    std::vector<double> av(N), bv(N);
    for (std::size_t j = 0; j < N; ++j) {
        const HalfSpacePoint Y = HalfSpacePoint::from_coords(Vec(h.point(j), h.point(j) + d));
        av[j] = detail::wpow(Y.t, set.beta) * std::pow(v(Y), -set.kappa);
        bv[j] = detail::wpow(Y.t, set.alpha) * std::pow(u(Y), -set.theta);
    }
    auto wrap = [d](const HalfSpaceFn& w) {
        return [w, d](const double* P) { return w(HalfSpacePoint::from_coords(Vec(P, P + d))); };
    };
    return asymptotics_from(wrap(u), wrap(v), set, d, stable_dot(h.weights, av), stable_dot(h.weights, bv), opts);
}

AsymptoticsReport asymptotic_constants(const HalfSpaceSystem& sys, const AsymptoticsOptions& opts) {
    const ExponentSet& s = sys.set();
    const HalfSpaceNodes& h = sys.nodes();
    const int d = sys.dim();
    const std::size_t N = h.size();
    std::vector<double> av(N), bv(N);
    for (std::size_t j = 0; j < N; ++j) {
        const double t = h.point(j)[d - 1];
        av[j] = detail::wpow(t, s.beta) * sys.v_source()[j];
        bv[j] = detail::wpow(t, s.alpha) * sys.u_source()[j];
    }
    return asymptotics_from([&](const double* P) { return sys.u(P); }, [&](const double* P) { return sys.v(P); }, s,
                            d, stable_dot(h.weights, av), stable_dot(h.weights, bv), opts);
}

double profile_exponent(const ExponentSet& set, ProfileKind which) {
    const double w = which == ProfileKind::f_profile ? set.alpha : set.beta;
    return (2.0 * (set.n + 1) + 2.0 * w - set.lambda) / 2.0;
}

double profile_value(const ProfileParams& prm, const Vec& x) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - prm.xi0[k]) * (x[k] - prm.xi0[k]);
    return prm.c * std::pow(prm.d / (1.0 + prm.d * prm.d * r2), prm.exponent);
}

std::pair<ProfileParams, CheckReport> boundary_profile_fit(const std::vector<TraceSample>& trace,
                                                           const ExponentSet& set, ProfileKind which,
                                                           double tolerance) {
    if (trace.size() < 4) throw FitError("profile fit needs at least four samples");
    const int n = static_cast<int>(trace.front().x.size());
    for (const auto& s : trace)
        if (!(s.value > 0.0) || !std::isfinite(s.value) || static_cast<int>(s.x.size()) != n)
            throw FitError("trace samples must be positive with a common dimension");
    const double e = profile_exponent(set, which);

    // Coarse grid over (d, xi0); c solves the linear relative least squares.
    Vec lo(n, kInf), hi(n, -kInf);
    for (const auto& s : trace)
        for (int k = 0; k < n; ++k) {
            lo[k] = std::min(lo[k], s.x[k]);
            hi[k] = std::max(hi[k], s.x[k]);
        }
    const int G = n == 1 ? 41 : 15;
    const int Dn = 41;
    ProfileParams best{1.0, 1.0, Vec(n, 0.0), e};
    double best_sse = kInf;
    std::vector<int> idx(n, 0);
    const long total = static_cast<long>(std::pow(G, n));
    for (long cell = 0; cell < total; ++cell) {
        long rem = cell;
        Vec xi(n);
        for (int k = 0; k < n; ++k) {
            const int i = static_cast<int>(rem % G);
            rem /= G;
            xi[k] = lo[k] + (hi[k] - lo[k]) * i / (G - 1);
        }
        for (int j = 0; j < Dn; ++j) {
            const double d = std::pow(10.0, -1.5 + 3.0 * j / (Dn - 1));
            ProfileParams trial{1.0, d, xi, e};
            double s1 = 0.0, s2 = 0.0;
            for (const auto& s : trace) {
                const double m = profile_value(trial, s.x) / s.value;
                s1 += m;
                s2 += m * m;
            }
            trial.c = s1 / s2;
            double sse = 0.0;
            for (const auto& s : trace) {
                const double res = profile_value(trial, s.x) / s.value - 1.0;
                sse += res * res;
            }
            if (sse < best_sse) {
                best_sse = sse;
                best = trial;
            }
        }
    }
    const double initial_sup = sup_rel_residual(best, trace);

    ProfileFunctor fn{&trace, e, n};
    Eigen::VectorXd x(2 + n);
    x(0) = std::log(best.c);
    x(1) = std::log(best.d);
    for (int k = 0; k < n; ++k) x(2 + k) = best.xi0[k];
    Eigen::LevenbergMarquardt<ProfileFunctor> lm(fn);
    lm.parameters.ftol = 1e-15;
    lm.parameters.xtol = 1e-15;
    lm.parameters.maxfev = 2000;
    lm.minimize(x);
    ProfileParams fit{std::exp(x(0)), std::exp(x(1)), Vec(n), e};
    for (int k = 0; k < n; ++k) fit.xi0[k] = x(2 + k);
    double sse = 0.0;
    for (const auto& s : trace) {
        const double res = profile_value(fit, s.x) / s.value - 1.0;
        sse += res * res;
    }
    if (!std::isfinite(sse) || sse > best_sse * (1.0 + 1e-12) + 1e-300)
        throw FitError("Levenberg-Marquardt did not improve on the grid guess");
    const double sup = sup_rel_residual(fit, trace);
    CheckReport rep = make_report(which == ProfileKind::f_profile ? "profile_f" : "profile_g", sup, 0.0, sup, tolerance);
    rep.metadata["c"] = fit.c;
    rep.metadata["d"] = fit.d;
    for (int k = 0; k < n; ++k) rep.metadata["xi0_" + std::to_string(k)] = fit.xi0[k];
    rep.metadata["exponent"] = e;
    rep.metadata["initial_sup_residual"] = initial_sup;
    return {fit, rep};
}

std::vector<Vec> trace_grid(int n, double half_width, int points) {
    if (n < 1 || n > 2) throw RangeError("trace grid supports n = 1, 2");
    if (points <= 0) points = n == 1 ? 41 : 21;
    if (points < 2 || !(half_width > 0.0)) throw RangeError("bad trace grid");
    std::vector<Vec> out;
    const long total = static_cast<long>(std::pow(points, n));
    for (long cell = 0; cell < total; ++cell) {
        long rem = cell;
        Vec x(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            x[k] = -half_width + 2.0 * half_width * static_cast<double>(rem % points) / (points - 1);
            rem /= points;
        }
        out.push_back(x);
    }
    return out;
}

std::vector<TraceSample> solver_trace(const Field& f, const Field& g, const ExponentSet& set,
                                      const QuadratureRule& rule, double c, ProfileKind which,
                                      const std::vector<Vec>& xs) {
    check_field(f, rule);
    check_field(g, rule);
    if (!(c > 0.0)) throw DomainError("multiplier must be positive");
    const int d = rule.dim;
    const bool fp = which == ProfileKind::f_profile;
    const Field& partner = fp ? g : f;
    const double w_src = fp ? set.beta : set.alpha;
    const double power = fp ? set.theta : set.kappa;
    const double expo = fp ? set.p : set.q;
    const std::size_t N = rule.size();
    std::vector<double> src(N);
    for (std::size_t j = 0; j < N; ++j)
        src[j] = rule.weights[j] * detail::wpow(detail::ball_w(rule.node(j), d), w_src) * partner.values[j];
    std::vector<TraceSample> out(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        const Vec& x = xs[i];
        if (static_cast<int>(x.size()) != d - 1) throw DomainError("trace point dimension mismatch");
        HalfSpacePoint X{x, 0.0};
        const BallPoint z = half_to_ball(X, TraceMode::boundary);
        std::vector<double> terms(N);
        for (std::size_t j = 0; j < N; ++j)
            terms[j] = src[j] * detail::riesz(detail::dist2(z.zeta.data(), rule.node(j), d), set.lambda);
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        const double phi = 1.0 + 0.25 * r2;
        out[i] = {x, std::pow(phi, -static_cast<double>(d) / expo) * std::pow(stable_sum(terms) / c, -power)};
    });
    return out;
}

SphereScan moving_sphere_scan(const HalfSpaceFn& u, double s, const Vec& xi, const std::vector<double>& r_grid,
                              const std::vector<HalfSpacePoint>& sample_grid, double threshold) {
    SphereScan out;
    out.r_bar = kInf;
    bool broken = false;
    double last_ok = 0.0;
    for (double r : r_grid) {
        if (!(r > 0.0)) throw DomainError("sphere radii must be positive");
        const KelvinParams kp{xi, r, s};
        const HalfSpaceFn uk = kelvin_function(u, kp);
        double mn = kInf;
        for (const auto& X : sample_grid) {
            const double d2 = dist2_xi(X, xi);
            if (!(X.t > 0.0) || d2 == 0.0 || d2 >= r * r) continue;
            mn = std::min(mn, u(X) - uk(X));
        }
        out.minima.emplace_back(r, mn);
        if (!broken) {
            if (mn >= threshold)
                last_ok = r;
            else
                broken = true;
        }
    }
    if (broken) out.r_bar = last_ok;
    const double first_min = out.minima.empty() ? kInf : out.minima.front().second;
    out.check = make_report("moving_spheres", first_min, threshold, first_min >= threshold ? 0.0 : threshold - first_min, 0.0);
    out.check.metadata["r_bar"] = out.r_bar;
    out.check.metadata["grid_limit"] = r_grid.empty() ? 0.0 : r_grid.back();
    out.check.note = broken ? "finite r_bar" : "r_bar beyond grid";
    return out;
}

std::vector<CheckReport> check_geometry_identities(int dim, int samples, std::uint64_t seed, double tolerance) {
    if (dim < 2) throw RangeError("geometry identities need dim >= 2");
    std::mt19937_64 rng(seed);
    auto ball_point = [&]() {
        BallPoint z{Vec(static_cast<std::size_t>(dim))};
        while (true) {
            double r2 = 0.0;
            for (int k = 0; k < dim; ++k) {
                z.zeta[k] = 2.0 * uniform01(rng) - 1.0;
                r2 += z.zeta[k] * z.zeta[k];
            }
            if (r2 < 1.0) break;
        }
        z.zeta[dim - 1] -= 1.0;
        return z;
    };
    const Vec x0 = pole_x0(dim);
    double e_dist = 0.0, e_weight = 0.0, e_round = 0.0, e_kelvin = 0.0, e_kdist = 0.0;
    for (int i = 0; i < samples; ++i) {
        const BallPoint z = ball_point(), y = ball_point();
        const HalfSpacePoint X = ball_to_half(z), Y = ball_to_half(y);
        const double lhs = std::sqrt(dist2_pts(X, Y));
        const double rhs = 4.0 * std::sqrt(detail::dist2(z.zeta.data(), y.zeta.data(), dim)) /
                           std::sqrt(detail::dist2(z.zeta.data(), x0.data(), dim) * detail::dist2(y.zeta.data(), x0.data(), dim));
        e_dist = std::max(e_dist, rel_diff(lhs, rhs));
        const double w = ball_weight(z, 1.0);
        e_weight = std::max(e_weight, rel_diff(w, X.t * detail::dist2(z.zeta.data(), x0.data(), dim) / 4.0));
        const HalfSpacePoint X2 = ball_to_half(half_to_ball(X));
        double m = 0.0, sc = 0.0;
        for (int k = 0; k < dim - 1; ++k) {
            m = std::max(m, std::fabs(X2.x[k] - X.x[k]));
            sc = std::max(sc, std::fabs(X.x[k]));
        }
        m = std::max(m, std::fabs(X2.t - X.t));
        sc = std::max(sc, X.t);
        e_round = std::max(e_round, m / sc);

        Vec xi(static_cast<std::size_t>(dim - 1));
        for (double& c : xi) c = 4.0 * uniform01(rng) - 2.0;
        const double r = 0.25 + 2.0 * uniform01(rng);
        const HalfSpacePoint K1 = kelvin_point(kelvin_point(X, xi, r), xi, r);
        double mk = std::fabs(K1.t - X.t);
        for (int k = 0; k < dim - 1; ++k) mk = std::max(mk, std::fabs(K1.x[k] - X.x[k]));
        e_kelvin = std::max(e_kelvin, mk / sc);
        const double kd = std::sqrt(dist2_pts(kelvin_point(X, xi, r), kelvin_point(Y, xi, r)));
        const double kd_ref = r * r * lhs / std::sqrt(dist2_xi(X, xi) * dist2_xi(Y, xi));
        e_kdist = std::max(e_kdist, rel_diff(kd, kd_ref));
    }
    std::vector<CheckReport> out;
    out.push_back(make_report("conformal_distance", e_dist, 0.0, e_dist, tolerance));
    out.push_back(make_report("weight_identity", e_weight, 0.0, e_weight, tolerance));
    out.push_back(make_report("round_trip", e_round, 0.0, e_round, tolerance));
    out.push_back(make_report("kelvin_involution", e_kelvin, 0.0, e_kelvin, tolerance));
    out.push_back(make_report("kelvin_distance", e_kdist, 0.0, e_kdist, tolerance));
    const HalfSpacePoint c = ball_to_half(BallPoint{center_x1(dim)});
    double ce = std::fabs(c.t - 2.0);
    for (double v : c.x) ce = std::max(ce, std::fabs(v));
    out.push_back(make_report("center_image", c.t, 2.0, ce, 0.0));
    return out;
}

CheckReport check_kernel_positivity(int dim, double lambda, int samples, std::uint64_t seed) {
    if (dim < 2) throw RangeError("kernel positivity needs dim >= 2");
    std::mt19937_64 rng(seed);
    double mn = kInf;
    int bad = 0;
    for (int i = 0; i < samples; ++i) {
        Vec xi(static_cast<std::size_t>(dim - 1));
        for (double& c : xi) c = 2.0 * uniform01(rng) - 1.0;
        const double r = 0.5 + 1.5 * uniform01(rng);
        auto in_ball = [&]() {
            while (true) {
                HalfSpacePoint P;
                P.x.resize(xi.size());
                for (std::size_t k = 0; k < xi.size(); ++k) P.x[k] = xi[k] + r * (2.0 * uniform01(rng) - 1.0);
                P.t = r * uniform01(rng);
                const double d2 = dist2_xi(P, xi);
                if (P.t > 0.0 && d2 < r * r && d2 > 0.0) return P;
            }
        };
        const HalfSpacePoint X = in_ball(), Y = in_ball();
        const double k = kernel_K(xi, r, Y, X, lambda);
        mn = std::min(mn, k);
        if (!(k > 0.0)) ++bad;
    }
    CheckReport rep = make_report("kernel_positivity", mn, 0.0, static_cast<double>(bad), 0.0);
    rep.metadata["samples"] = samples;
    rep.metadata["min_K"] = mn;
    return rep;
}

} // namespace rhls
