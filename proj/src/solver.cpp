#include "rhls/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "rhls/errors.hpp"
#include "rhls/parallel.hpp"
#include "rhls/summation.hpp"
#include "rhls/verify.hpp"

namespace rhls {

namespace {

Field power_normalized(const Field& base, double exponent, double norm_p, const QuadratureRule& rule) {
    Field out{std::vector<double>(base.size()), rule.id};
    for (std::size_t i = 0; i < base.size(); ++i) out.values[i] = std::pow(base.values[i], exponent);
    const double nrm = quasi_norm(out, norm_p, rule);
    for (double& v : out.values) v /= nrm;
    return out;
}

// <x, y> with normalized x and the quotient's denominator equal to one.
double weighted_dot(const Field& x, const Field& y, const QuadratureRule& rule) {
    std::vector<double> xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xy[i] = x.values[i] * y.values[i];
    return stable_dot(rule.weights, xy);
}

// max_i |c x_i^{e} - y_i| / max_i y_i.
double el_sup_residual(const Field& x, double e, const Field& y, double c) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num = std::max(num, std::fabs(c * std::pow(x.values[i], e) - y.values[i]));
        den = std::max(den, y.values[i]);
    }
    return num / den;
}

Field damp(const Field& old_f, const Field& new_f, double damping, double norm_p, const QuadratureRule& rule) {
    if (damping == 0.0) return new_f;
    Field out{std::vector<double>(new_f.size()), rule.id};
    for (std::size_t i = 0; i < new_f.size(); ++i)
        out.values[i] = std::pow(old_f.values[i], damping) * std::pow(new_f.values[i], 1.0 - damping);
    const double nrm = quasi_norm(out, norm_p, rule);
    for (double& v : out.values) v /= nrm;
    return out;
}

void check_compatible(const ExponentSet& set, const BallOperator& op) {
    const ExponentSet& k = op.set();
    if (k.n != set.n || k.m != set.m || k.lambda != set.lambda || k.alpha != set.alpha || k.beta != set.beta)
        throw DomainError("operator was built for different lambda, alpha or beta");
}

} // namespace

Field best_response_f(const Field& g, const BallOperator& op, double p) {
    return power_normalized(op.apply(g), 1.0 / (p - 1.0), p, op.rule());
}

Field best_response_g(const Field& f, const BallOperator& op, double q) {
    return power_normalized(op.apply_adjoint(f), 1.0 / (q - 1.0), q, op.rule());
}

Field best_response_f(const Field& g, const ExponentSet& set, const QuadratureRule& rule) {
    return best_response_f(g, BallOperator(set, rule), set.p);
}

Field best_response_g(const Field& f, const ExponentSet& set, const QuadratureRule& rule) {
    return best_response_g(f, BallOperator(set, rule), set.q);
}

double quotient_at(const Field& f, const Field& g, const BallOperator& op, double p, double q) {
    return op.bilinear(f, g) / (quasi_norm(f, p, op.rule()) * quasi_norm(g, q, op.rule()));
}

SolveReport solve_subcritical(const ExponentSet& set, const BallOperator& op, const SolveOptions& opts) {
    check_compatible(set, op);
    if (opts.max_iter < 1) throw RangeError("max_iter must be positive");
    if (!(opts.tol > 0.0) || !(opts.el_tol > 0.0)) throw RangeError("tolerances must be positive");
    if (!(opts.delta_min >= 0.0)) throw RangeError("delta_min must be nonnegative");
    if (!(opts.damping >= 0.0 && opts.damping < 1.0)) throw RangeError("damping must lie in [0,1)");
    const auto [pa, qb] = conformal_exponents(set.n, set.m, set.lambda, set.alpha, set.beta);
    if (set.p > pa - opts.delta_min || set.q > qb - opts.delta_min)
        throw RangeError("exponents are not subcritical by delta_min");

    const QuadratureRule& rule = op.rule();
    const double p = set.p, q = set.q;
    SolveReport rep;
    Field g = opts.warm_start_g ? *opts.warm_start_g : Field::constant(rule, 1.0);
    check_field(g, rule);
    {
        const double nrm = quasi_norm(g, q, rule);
        for (double& v : g.values) v /= nrm;
    }
    Field u = op.apply(g);
    Field f = power_normalized(u, 1.0 / (p - 1.0), p, rule);
    rep.quotient_history.push_back(weighted_dot(f, u, rule));
    double prev_full = rep.quotient_history.back();

    for (int it = 1; it <= opts.max_iter; ++it) {
        const Field v = op.apply_adjoint(f);
        g = damp(g, power_normalized(v, 1.0 / (q - 1.0), q, rule), opts.damping, q, rule);
        const double qg = weighted_dot(g, v, rule);
        rep.quotient_history.push_back(qg);
        u = op.apply(g);
        rep.iterations = it;
        rep.c_star = qg;
        rep.el_residual_f = el_sup_residual(f, p - 1.0, u, qg);
        rep.el_residual_g = el_sup_residual(g, q - 1.0, v, qg);
        rep.el_residual = std::max(rep.el_residual_f, rep.el_residual_g);
        const bool small_change = std::fabs(qg - prev_full) <= opts.tol * std::fabs(qg);
        prev_full = qg;
        if (small_change && rep.el_residual < opts.el_tol) {
            rep.converged = true;
            break;
        }
        if (it == opts.max_iter) break;
        f = damp(f, power_normalized(u, 1.0 / (p - 1.0), p, rule), opts.damping, p, rule);
        rep.quotient_history.push_back(weighted_dot(f, u, rule));
    }
    for (std::size_t k = 1; k < rep.quotient_history.size(); ++k)
        rep.max_increase = std::max(rep.max_increase, rep.quotient_history[k] - rep.quotient_history[k - 1]);
    rep.min_f = *std::min_element(f.values.begin(), f.values.end());
    rep.min_g = *std::min_element(g.values.begin(), g.values.end());
    rep.f = std::move(f);
    rep.g = std::move(g);
    return rep;
}

SolveReport solve_subcritical(const ExponentSet& set, const QuadratureRule& rule, const SolveOptions& opts) {
    return solve_subcritical(set, BallOperator(set, rule), opts);
}

void require_converged(const SolveReport& report) {
    if (!report.converged) throw NoConvergence("alternating minimization did not converge");
}

double richardson_first_order(double delta_a, double c_a, double delta_b, double c_b) {
    if (delta_a == delta_b) throw RangeError("Richardson needs distinct deltas");
    return (delta_a * c_b - delta_b * c_a) / (delta_a - delta_b);
}

SweepReport critical_sweep(const ExponentSet& base, const std::vector<double>& schedule, const QuadratureRule& rule,
                           const SolveOptions& opts, bool warm_start) {
    if (schedule.empty()) throw RangeError("sweep schedule is empty");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        if (!(schedule[k] > 0.0 && schedule[k] < 1.0)) throw RangeError("sweep deltas must lie in (0,1)");
        if (k > 0 && !(schedule[k] < schedule[k - 1])) throw RangeError("sweep schedule must be strictly decreasing");
    }
    SweepReport rep;
    rep.band = constant_band(conformal_set(base.n, base.m, base.lambda, base.alpha, base.beta));
    const BallOperator op(base, rule);
    SolveOptions o = opts;
    rep.converged = true;
    for (double delta : schedule) {
        const ExponentSet s = subcritical_set(base.n, base.m, base.lambda, base.alpha, base.beta, delta);
        const SolveReport r = solve_subcritical(s, op, o);
        rep.points.push_back({delta, s.p, s.q, r.c_star, r.el_residual, r.iterations, r.converged});
        rep.converged = rep.converged && r.converged;
        if (warm_start) o.warm_start_g = r.g;
    }
    for (std::size_t k = 1; k < rep.points.size(); ++k)
        rep.richardson.push_back(richardson_first_order(rep.points[k - 1].delta, rep.points[k - 1].c_star,
                                                        rep.points[k].delta, rep.points[k].c_star));
    rep.n_est = rep.richardson.empty() ? rep.points.back().c_star : rep.richardson.back();
    if (rep.richardson.size() >= 2)
        rep.stability = std::fabs(rep.richardson.back() - rep.richardson[rep.richardson.size() - 2]);
    rep.in_band = rep.n_est >= rep.band.n_lower && rep.n_est <= rep.band.n_upper;
    return rep;
}

double holder_quotient(const Field& f, const QuadratureRule& rule, double exponent) {
    check_field(f, rule);
    const std::size_t N = rule.size();
    std::vector<double> row_max(N, 0.0);
    parallel_for(N, [&](std::size_t i) {
        double m = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            if (j == i) continue;
            const double d2 = detail::dist2(rule.node(i), rule.node(j), rule.dim);
            if (d2 == 0.0) continue;
            m = std::max(m, std::fabs(f.values[i] - f.values[j]) / std::pow(d2, 0.5 * exponent));
        }
        row_max[i] = m;
    });
    return *std::max_element(row_max.begin(), row_max.end());
}

BlowupReport blowup_renormalize(const Field& f, const Field& g, const ExponentSet& set, const QuadratureRule& rule,
                                double c, const BlowupOptions& opts) {
    check_field(f, rule);
    check_field(g, rule);
    const auto sys = std::make_shared<HalfSpaceSystem>(
        HalfSpaceSystem::from_ball_pair(f, g, set, rule, c, opts.require_conformal));
    const int d = rule.dim;
    BlowupReport rep;
    rep.max_index = static_cast<std::size_t>(std::max_element(f.values.begin(), f.values.end()) - f.values.begin());
    const double* z = rule.node(rep.max_index);
    rep.u_max_location.zeta.assign(z, z + d);
    const double w = detail::ball_w(z, d);
    if (!(w > 0.0)) throw DomainError("maximum sits on the singular sphere");
    rep.near_boundary = w < opts.boundary_distance;

    const double S = d + set.alpha + set.beta - set.lambda;
    const double den = set.theta * set.kappa - 1.0;
    rep.a_u = -S * (set.kappa - 1.0) / den;
    rep.a_v = -S * (set.theta - 1.0) / den;
    const double* W = sys->nodes().point(rep.max_index);
    const double u_w = sys->u(W);
    const double rho = opts.rho.value_or(std::pow(u_w, -1.0 / rep.a_u));
    if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("blow-up scale must be positive and finite");
    rep.rho = rho;
    Vec np(W, W + d);
    for (double& x : np) x /= rho;
    rep.normalization_point = HalfSpacePoint::from_coords(np);

    const double au = rep.a_u, av = rep.a_v;
    auto scaled = [d, rho](const double* X) {
        Vec Y(X, X + d);
        for (double& y : Y) y *= rho;
        return Y;
    };
    auto Uraw = [sys, scaled, rho, au](const double* X) { return std::pow(rho, au) * sys->u(scaled(X).data()); };
    auto Vraw = [sys, scaled, rho, av](const double* X) { return std::pow(rho, av) * sys->v(scaled(X).data()); };
    rep.U = [Uraw, d](const HalfSpacePoint& X) {
        if (X.dim() != d) throw DomainError("point dimension does not match the system");
        return Uraw(X.coords().data());
    };
    rep.V = [Vraw, d](const HalfSpacePoint& X) {
        if (X.dim() != d) throw DomainError("point dimension does not match the system");
        return Vraw(X.coords().data());
    };
    rep.u_at_normalization = Uraw(np.data());
    rep.bound_constant = std::max(growth_bound_constant(Uraw, set.alpha, set.lambda, d),
                                  growth_bound_constant(Vraw, set.beta, set.lambda, d));
    return rep;
}

} // namespace rhls
