#include "rhls/quad.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include <gsl/gsl_integration.h>
#include <openssl/evp.h>

#include "rhls/errors.hpp"
#include "rhls/parallel.hpp"
#include "rhls/special.hpp"
#include "rhls/summation.hpp"

namespace rhls {

namespace {
constexpr double kPi = std::numbers::pi;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace

BallPoint QuadratureRule::point(std::size_t i) const {
    const double* p = node(i);
    return BallPoint{Vec(p, p + dim)};
}

int QuadratureRule::exact_degree() const {
    if (dim == 2) return std::min(4 * radial_order - 2, angular_order - 1);
    const int polar = std::max(2, (angular_order + 1) / 2);
    return std::min({2 * radial_order - 3, 2 * polar - 1, angular_order - 1});
}

double ball_volume(int dim) { return std::pow(kPi, 0.5 * dim) / gamma(0.5 * dim + 1.0); }

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
    if (n < 1) throw RangeError("Gauss-Legendre order must be positive");
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n));
    if (!t) throw RangeError("Gauss-Legendre table allocation failed");
    std::vector<std::pair<double, double>> pts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(a, b, static_cast<std::size_t>(i), &pts[i].first, &pts[i].second, t);
    gsl_integration_glfixed_table_free(t);
    std::sort(pts.begin(), pts.end());
    x.resize(static_cast<std::size_t>(n));
    w.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x[i] = pts[i].first;
        w[i] = pts[i].second;
    }
}

namespace {

std::string digest_hex(const std::vector<std::pair<const void*, std::size_t>>& parts) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    for (const auto& [data, size] : parts) EVP_DigestUpdate(ctx, data, size);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < 8 && i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

} // namespace

std::string rule_hash(int dim, int radial_order, int angular_order, const std::vector<double>& nodes,
                      const std::vector<double>& weights) {
    const std::int32_t head[3] = {dim, radial_order, angular_order};
    return digest_hex({{head, sizeof head},
                       {nodes.data(), nodes.size() * sizeof(double)},
                       {weights.data(), weights.size() * sizeof(double)}});
}

std::string text_hash(const std::string& text) { return digest_hex({{text.data(), text.size()}}); }

QuadratureRule build_ball_rule(int dim, int radial_order, int angular_order) {
    if (dim != 2 && dim != 3) throw RangeError("deterministic ball rules exist for dim 2 and 3 only");
    if (radial_order < 2 || angular_order < 2) throw RangeError("rule orders must be >= 2");
    QuadratureRule rule;
    rule.dim = dim;
    rule.radial_order = radial_order;
    rule.angular_order = angular_order;
    const int M = angular_order;
    std::vector<double> ang(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) ang[k] = 2.0 * kPi * (k + 0.5) / M;
    const double wang = 2.0 * kPi / M;

    std::vector<double> xr, wr;
    if (dim == 2) {
        gauss_legendre(radial_order, 0.0, 1.0, xr, wr); // u = rho^2, rho d rho = du/2
        for (int i = 0; i < radial_order; ++i) {
            const double rho = std::sqrt(xr[i]);
            for (int k = 0; k < M; ++k) {
                rule.nodes.push_back(rho * std::cos(ang[k]));
                rule.nodes.push_back(rho * std::sin(ang[k]) - 1.0);
                rule.weights.push_back(0.5 * wr[i] * wang);
            }
        }
    } else {
        gauss_legendre(radial_order, 0.0, 1.0, xr, wr);
        const int P = std::max(2, (angular_order + 1) / 2);
        std::vector<double> xc, wc;
        gauss_legendre(P, -1.0, 1.0, xc, wc);
        for (int i = 0; i < radial_order; ++i) {
            const double rho = xr[i];
            for (int j = 0; j < P; ++j) {
                const double c = xc[j];
                const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
                for (int k = 0; k < M; ++k) {
                    rule.nodes.push_back(rho * s * std::cos(ang[k]));
                    rule.nodes.push_back(rho * s * std::sin(ang[k]));
                    rule.nodes.push_back(rho * c - 1.0);
                    rule.weights.push_back(wr[i] * rho * rho * wc[j] * wang);
                }
            }
        }
    }
    rule.id = rule_hash(dim, radial_order, angular_order, rule.nodes, rule.weights);
    return rule;
}

std::string rule_to_csv(const QuadratureRule& rule) {
    std::ostringstream os;
    os << "# rule_id=" << rule.id << "\n";
    os << "index";
    for (int k = 0; k < rule.dim; ++k) os << ",zeta" << k;
    os << ",weight\n";
    for (std::size_t i = 0; i < rule.size(); ++i) {
        os << i;
        for (int k = 0; k < rule.dim; ++k) os << ',' << fmt17(rule.node(i)[k]);
        os << ',' << fmt17(rule.weights[i]) << '\n';
    }
    return os.str();
}

double integrate(std::span<const double> values, const QuadratureRule& rule) {
    if (values.size() != rule.size()) throw DomainError("field size does not match the rule");
    for (double v : values)
        if (!std::isfinite(v)) throw NonFiniteError("non-finite integrand sample");
    return stable_dot(rule.weights, values);
}

double integrate(const BallFn& f, const QuadratureRule& rule) {
    std::vector<double> vals(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) vals[i] = f(rule.point(i));
    return integrate(vals, rule);
}

double double_integral(const BallPairFn& F, const QuadratureRule& rule) {
    const std::size_t N = rule.size();
    std::vector<BallPoint> pts(N);
    for (std::size_t i = 0; i < N; ++i) pts[i] = rule.point(i);
    std::vector<double> rows(N);
    std::vector<char> bad(N, 0);
    parallel_for(N, [&](std::size_t i) {
        std::vector<double> vals(N);
        for (std::size_t j = 0; j < N; ++j) {
            vals[j] = F(pts[i], pts[j]);
            if (!std::isfinite(vals[j])) bad[i] = 1;
        }
        rows[i] = stable_dot(rule.weights, vals);
    });
    for (char b : bad)
        if (b) throw NonFiniteError("non-finite double-integral sample");
    return stable_dot(rule.weights, rows);
}

MCEstimate mc_integrate(const BallFn& f, int dim, std::int64_t samples, std::uint64_t seed) {
    if (dim < 2) throw RangeError("mc_integrate needs dim >= 2");
    if (samples < 2) throw RangeError("mc_integrate needs at least two samples");
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    BallPoint z{Vec(static_cast<std::size_t>(dim))};
    CompensatedSum s1, s2;
    std::int64_t accepted = 0;
    while (accepted < samples) {
        double r2 = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double c = 2.0 * uniform() - 1.0;
            z.zeta[k] = c;
            r2 += c * c;
        }
        if (r2 >= 1.0) continue;
        z.zeta[dim - 1] -= 1.0;
        const double v = f(z);
        if (!std::isfinite(v)) throw NonFiniteError("non-finite Monte Carlo sample");
        s1.add(v);
        s2.add(v * v);
        ++accepted;
    }
    const double n = static_cast<double>(samples);
    const double mean = s1.value() / n;
    const double var = std::max(0.0, (s2.value() / n - mean * mean) * n / (n - 1.0));
    const double vol = ball_volume(dim);
    MCEstimate out;
    out.value = vol * mean;
    out.stderr_ = vol * std::sqrt(var / n);
    out.samples = samples;
    out.seed = seed;
    return out;
}

} // namespace rhls
