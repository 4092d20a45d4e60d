#include "rhls/functional.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include "rhls/errors.hpp"
#include "rhls/parallel.hpp"
#include "rhls/summation.hpp"

namespace rhls {

namespace {

// Entries of the cached kernel matrix; above this the kernel is recomputed per row.
constexpr std::size_t kCacheEntries = std::size_t{1} << 25;

void require_p(double p) {
    if (!(p > 0.0 && p < 1.0)) throw RangeError("quasi-norm exponent must lie in (0,1)");
}

} // namespace

Field Field::constant(const QuadratureRule& rule, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("field constant must be positive and finite");
    return Field{std::vector<double>(rule.size(), c), rule.id};
}

Field Field::sample(const QuadratureRule& rule, const BallFn& f) {
    Field out{std::vector<double>(rule.size()), rule.id};
    for (std::size_t i = 0; i < rule.size(); ++i) out.values[i] = f(rule.point(i));
    return out;
}

void check_field(const Field& f, const QuadratureRule& rule) {
    if (f.size() != rule.size()) throw DomainError("field size does not match the rule");
    if (!f.rule_id.empty() && f.rule_id != rule.id) throw DomainError("field is bound to a different rule");
    for (double v : f.values) {
        if (!std::isfinite(v)) throw NonFiniteError("non-finite field value");
        if (!(v > 0.0)) throw DomainError("field values must be positive");
    }
}

double quasi_norm(const Field& f, double p, const QuadratureRule& rule) {
    require_p(p);
    check_field(f, rule);
    std::vector<double> fp(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) fp[i] = std::pow(f.values[i], p);
    return std::pow(stable_dot(rule.weights, fp), 1.0 / p);
}

double neg_quasi_norm(const Field& h, double p_conj, const QuadratureRule& rule) {
    if (!(p_conj < 0.0) || !std::isfinite(p_conj)) throw RangeError("dual exponent must be negative");
    check_field(h, rule);
    std::vector<double> hp(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) hp[i] = std::pow(h.values[i], p_conj);
    return std::pow(stable_dot(rule.weights, hp), 1.0 / p_conj);
}

BallOperator::BallOperator(const ExponentSet& set, const QuadratureRule& rule) : set_(set), rule_(rule) {
    if (set.dim() != rule.dim) throw DomainError("exponent dimension does not match the rule");
    const std::size_t N = rule.size();
    const int d = rule.dim;
    wa_.resize(N);
    wb_.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double w = detail::ball_w(rule.node(i), d);
        wa_[i] = detail::wpow(w, set.alpha);
        wb_[i] = detail::wpow(w, set.beta);
    }
    if (N * N <= kCacheEntries) {
        matrix_.resize(N * N);
        parallel_for(N, [&](std::size_t i) {
            const double* zi = rule.node(i);
            double* row = matrix_.data() + i * N;
            for (std::size_t j = 0; j < N; ++j) row[j] = detail::riesz(detail::dist2(zi, rule.node(j), d), set.lambda);
        });
    }
}

double BallOperator::kernel(std::size_t i, std::size_t j) const {
    if (cached()) return matrix_[i * rule_.size() + j];
    return detail::riesz(detail::dist2(rule_.node(i), rule_.node(j), rule_.dim), set_.lambda);
}

double BallOperator::row_dot(std::size_t i, const std::vector<double>& s) const {
    const std::size_t N = rule_.size();
    if (cached()) return stable_dot(std::span<const double>(matrix_.data() + i * N, N), s);
    thread_local std::vector<double> row;
    row.resize(N);
    const double* zi = rule_.node(i);
    for (std::size_t j = 0; j < N; ++j) row[j] = detail::riesz(detail::dist2(zi, rule_.node(j), rule_.dim), set_.lambda);
    return stable_dot(row, s);
}

Field BallOperator::contract(const std::vector<double>& outer, const std::vector<double>& inner, const Field& x) const {
    check_field(x, rule_);
    const std::size_t N = rule_.size();
    std::vector<double> s(N);
    for (std::size_t j = 0; j < N; ++j) s[j] = rule_.weights[j] * inner[j] * x.values[j];
    Field out{std::vector<double>(N), rule_.id};
    parallel_for(N, [&](std::size_t i) { out.values[i] = outer[i] * row_dot(i, s); });
    for (double v : out.values)
        if (!std::isfinite(v)) throw NonFiniteError("non-finite operator value");
    return out;
}

Field BallOperator::apply(const Field& g) const { return contract(wa_, wb_, g); }

// K is symmetric, so the adjoint reuses rows.
Field BallOperator::apply_adjoint(const Field& f) const { return contract(wb_, wa_, f); }

double BallOperator::bilinear(const Field& f, const Field& g) const {
    check_field(f, rule_);
    const Field u = apply(g);
    std::vector<double> fu(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) fu[i] = f.values[i] * u.values[i];
    return stable_dot(rule_.weights, fu);
}

double BallOperator::quotient(const Field& f, const Field& g) const {
    return bilinear(f, g) / (quasi_norm(f, set_.p, rule_) * quasi_norm(g, set_.q, rule_));
}

Field apply_T_operator(const Field& g, const ExponentSet& set, const QuadratureRule& rule) {
    return BallOperator(set, rule).apply(g);
}

double bilinear_functional(const Field& f, const Field& g, const ExponentSet& set, const QuadratureRule& rule) {
    return BallOperator(set, rule).bilinear(f, g);
}

double quotient(const Field& f, const Field& g, const ExponentSet& set, const QuadratureRule& rule) {
    return BallOperator(set, rule).quotient(f, g);
}

HalfSpaceNodes pullback_nodes(const QuadratureRule& rule) {
    HalfSpaceNodes h;
    h.dim = rule.dim;
    const std::size_t N = rule.size();
    h.points.resize(N * static_cast<std::size_t>(rule.dim));
    h.phi.resize(N);
    h.weights.resize(N);
    const int np1 = rule.dim;
    for (std::size_t j = 0; j < N; ++j) {
        const double* z = rule.node(j);
        double* Y = h.points.data() + j * static_cast<std::size_t>(rule.dim);
        const double phi = detail::conformal_map(z, Y, rule.dim);
        Y[rule.dim - 1] = detail::ball_w(z, rule.dim) * phi;
        h.phi[j] = phi;
        h.weights[j] = rule.weights[j] * std::pow(phi, np1);
    }
    return h;
}

HalfSpaceFn halfspace_operator(const HalfSpaceFn& f, const ExponentSet& set, const QuadratureRule& rule,
                               HalfSpaceMode mode) {
    if (set.dim() != rule.dim) throw DomainError("exponent dimension does not match the rule");
    auto nodes = std::make_shared<HalfSpaceNodes>(pullback_nodes(rule));
    const bool weighted = mode == HalfSpaceMode::I_ab;
    const int d = rule.dim;
    auto src = std::make_shared<std::vector<double>>(nodes->size());
    for (std::size_t j = 0; j < nodes->size(); ++j) {
        const double* X = nodes->point(j);
        const double fx = f(HalfSpacePoint::from_coords(Vec(X, X + d)));
        if (!std::isfinite(fx)) throw NonFiniteError("non-finite half-space integrand");
        (*src)[j] = nodes->weights[j] * fx * (weighted ? detail::wpow(X[d - 1], set.alpha) : 1.0);
    }
    const double beta = weighted ? set.beta : 0.0;
    const double lambda = set.lambda;
    return [nodes, src, beta, lambda, d](const HalfSpacePoint& Y) {
        if (Y.dim() != d) throw DomainError("half-space point has the wrong dimension");
        if (!(Y.t > 0.0)) throw DomainError("half-space operator needs t > 0");
        const Vec y = Y.coords();
        std::vector<double> terms(nodes->size());
        for (std::size_t j = 0; j < nodes->size(); ++j)
            terms[j] = (*src)[j] * detail::riesz(detail::dist2(y.data(), nodes->point(j), d), lambda);
        return detail::wpow(Y.t, beta) * stable_sum(terms);
    };
}

double halfspace_quotient(const Field& f, const Field& g, const ExponentSet& set, const QuadratureRule& rule) {
    check_field(f, rule);
    check_field(g, rule);
    const HalfSpaceNodes h = pullback_nodes(rule);
    const std::size_t N = h.size();
    const int d = h.dim;
    const double np1 = static_cast<double>(d);
    std::vector<double> fh(N), gh(N), sf(N), sg(N), fp(N), gq(N);
    for (std::size_t j = 0; j < N; ++j) {
        fh[j] = std::pow(h.phi[j], -np1 / set.p) * f.values[j];
        gh[j] = std::pow(h.phi[j], -np1 / set.q) * g.values[j];
        const double t = h.point(j)[d - 1];
        sf[j] = h.weights[j] * detail::wpow(t, set.alpha) * fh[j];
        sg[j] = h.weights[j] * detail::wpow(t, set.beta) * gh[j];
        fp[j] = std::pow(fh[j], set.p);
        gq[j] = std::pow(gh[j], set.q);
    }
    std::vector<double> rows(N);
    parallel_for(N, [&](std::size_t i) {
        std::vector<double> terms(N);
        const double* X = h.point(i);
        for (std::size_t j = 0; j < N; ++j) terms[j] = detail::riesz(detail::dist2(X, h.point(j), d), set.lambda) * sg[j];
        rows[i] = stable_sum(terms);
    });
    const double num = stable_dot(sf, rows);
    const double nf = std::pow(stable_dot(h.weights, fp), 1.0 / set.p);
    const double ng = std::pow(stable_dot(h.weights, gq), 1.0 / set.q);
    return num / (nf * ng);
}

std::string field_to_csv(const Field& f) {
    std::ostringstream os;
    os << "# rule_id=" << f.rule_id << "\nindex,value\n";
    char buf[40];
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", f.values[i]);
        os << i << ',' << buf << '\n';
    }
    return os.str();
}

Field field_from_csv(const std::string& text, const QuadratureRule& rule) {
    std::istringstream is(text);
    std::string line;
    Field f{std::vector<double>(rule.size(), 0.0), rule.id};
    std::vector<char> seen(rule.size(), 0);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string key = "# rule_id=";
            if (line.rfind(key, 0) == 0 && line.substr(key.size()) != rule.id)
                throw DomainError("field CSV belongs to a different rule");
            continue;
        }
        if (line.rfind("index", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DomainError("malformed field CSV line");
        const std::size_t i = std::stoul(line.substr(0, comma));
        if (i >= rule.size()) throw DomainError("field CSV index out of range");
        f.values[i] = std::stod(line.substr(comma + 1));
        seen[i] = 1;
    }
    for (char s : seen)
        if (!s) throw DomainError("field CSV is missing nodes");
    check_field(f, rule);
    return f;
}

} // namespace rhls
