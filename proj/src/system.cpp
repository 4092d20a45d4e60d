#include "rhls/system.hpp"

#include <cmath>
#include <memory>

#include "rhls/errors.hpp"
#include "rhls/parallel.hpp"
#include "rhls/summation.hpp"

namespace rhls {

HalfSpaceSystem::HalfSpaceSystem(const ExponentSet& set, const QuadratureRule& rule)
    : set_(set), nodes_(pullback_nodes(rule)) {
    if (set.dim() != rule.dim) throw DomainError("exponent dimension does not match the rule");
}

HalfSpaceSystem HalfSpaceSystem::from_ball_pair(const Field& f, const Field& g, const ExponentSet& set,
                                                const QuadratureRule& rule, double c, bool require_conformal) {
    if (require_conformal && !(set.p_conformal && set.q_conformal)) throw DomainError("half-space transport needs conformal exponents");
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("multiplier must be positive");
    check_field(f, rule);
    check_field(g, rule);
    HalfSpaceSystem s(set, rule);
    const std::size_t N = s.nodes_.size();
    const double np1 = static_cast<double>(rule.dim);
    const double th = set.theta, ka = set.kappa;
    const double logA = std::log(c) * (1.0 - ka) / (1.0 - ka * th);
    const double logB = std::log(c) * (1.0 - th) / (1.0 - ka * th);
    std::vector<double> u(N), v(N);
    for (std::size_t j = 0; j < N; ++j) {
        const double fh = std::pow(s.nodes_.phi[j], -np1 / set.p) * f.values[j];
        const double gh = std::pow(s.nodes_.phi[j], -np1 / set.q) * g.values[j];
        u[j] = std::exp(logA) * std::pow(fh, set.p - 1.0);
        v[j] = std::exp(logB) * std::pow(gh, set.q - 1.0);
    }
    s.set_node_values(std::move(u), std::move(v));
    return s;
}

HalfSpaceSystem HalfSpaceSystem::from_v_source(const std::vector<double>& v_src, const ExponentSet& set,
                                               const QuadratureRule& rule) {
    HalfSpaceSystem s(set, rule);
    const std::size_t N = s.nodes_.size();
    if (v_src.size() != N) throw DomainError("source size does not match the rule");
    std::vector<double> v(N);
    for (std::size_t j = 0; j < N; ++j) {
        if (!(v_src[j] > 0.0) || !std::isfinite(v_src[j])) throw DomainError("source must be positive");
        v[j] = std::pow(v_src[j], -1.0 / set.kappa);
    }
    s.v_nodes_ = v;
    s.v_src_ = v_src;
    s.src_u_eq_.resize(N);
    for (std::size_t j = 0; j < N; ++j)
        s.src_u_eq_[j] = s.nodes_.weights[j] * detail::wpow(s.nodes_.point(j)[s.dim() - 1], set.beta) * v_src[j];
    std::vector<double> u(N);
    parallel_for(N, [&](std::size_t i) { u[i] = s.u(s.nodes_.point(i)); });
    s.set_node_values(std::move(u), std::move(v));
    return s;
}

void HalfSpaceSystem::set_node_values(std::vector<double> u, std::vector<double> v) {
    const std::size_t N = nodes_.size();
    if (u.size() != N || v.size() != N) throw DomainError("node values do not match the rule");
    u_nodes_ = std::move(u);
    v_nodes_ = std::move(v);
    u_src_.resize(N);
    v_src_.resize(N);
    src_u_eq_.resize(N);
    src_v_eq_.resize(N);
    const int d = dim();
    for (std::size_t j = 0; j < N; ++j) {
        if (!(u_nodes_[j] > 0.0) || !(v_nodes_[j] > 0.0)) throw DomainError("system values must be positive");
        u_src_[j] = std::pow(u_nodes_[j], -set_.theta);
        v_src_[j] = std::pow(v_nodes_[j], -set_.kappa);
        const double t = nodes_.point(j)[d - 1];
        src_u_eq_[j] = nodes_.weights[j] * detail::wpow(t, set_.beta) * v_src_[j];
        src_v_eq_[j] = nodes_.weights[j] * detail::wpow(t, set_.alpha) * u_src_[j];
    }
}

double HalfSpaceSystem::potential(const double* X, const std::vector<double>& src_w, double w_self,
                                  double* x_grad) const {
    const int d = dim();
    const std::size_t N = nodes_.size();
    const double lam = set_.lambda;
    const double t = X[d - 1];
    if (!(t > 0.0)) throw DomainError("system evaluation needs t > 0");
    thread_local std::vector<double> s0, s1;
    s0.resize(N);
    if (x_grad) s1.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        const double* Y = nodes_.point(j);
        const double d2 = detail::dist2(X, Y, d);
        s0[j] = src_w[j] * detail::riesz(d2, lam);
        if (x_grad) {
            double proj = 0.0;
            for (int k = 0; k < d; ++k) proj += (X[k] - Y[k]) * X[k];
            // grad |X-Y|^{-lambda} = -lambda |X-Y|^{-lambda-2} (X-Y)
            const double g = lam == -2.0 ? 1.0 : (d2 > 0.0 ? std::pow(d2, -0.5 * lam - 1.0) : 0.0);
            s1[j] = src_w[j] * g * proj;
        }
    }
    const double tw = detail::wpow(t, w_self);
    const double val = tw * stable_sum(s0);
    if (x_grad) *x_grad = w_self * val + tw * (-lam) * stable_sum(s1);
    return val;
}

double HalfSpaceSystem::u(const double* X) const { return potential(X, src_u_eq_, set_.alpha, nullptr); }
double HalfSpaceSystem::v(const double* X) const { return potential(X, src_v_eq_, set_.beta, nullptr); }

double HalfSpaceSystem::u_dilation(const double* X, double& x_grad) const {
    return potential(X, src_u_eq_, set_.alpha, &x_grad);
}

double HalfSpaceSystem::v_dilation(const double* X, double& x_grad) const {
    return potential(X, src_v_eq_, set_.beta, &x_grad);
}

HalfSpaceFn HalfSpaceSystem::u_fn() const {
    auto self = std::make_shared<HalfSpaceSystem>(*this);
    return [self](const HalfSpacePoint& X) {
        if (X.dim() != self->dim()) throw DomainError("point dimension does not match the system");
        const Vec c = X.coords();
        return self->u(c.data());
    };
}

HalfSpaceFn HalfSpaceSystem::v_fn() const {
    auto self = std::make_shared<HalfSpaceSystem>(*this);
    return [self](const HalfSpacePoint& X) {
        if (X.dim() != self->dim()) throw DomainError("point dimension does not match the system");
        const Vec c = X.coords();
        return self->v(c.data());
    };
}

} // namespace rhls
