#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rhls/errors.hpp"
#include "rhls/functional.hpp"
#include "rhls/special.hpp"

using namespace rhls;

namespace {

const double pi = std::acos(-1.0);

Field random_field(const QuadratureRule& rule, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double a = 2.0 * U(rng) - 1.0, b = 2.0 * U(rng) - 1.0, c = 0.5 + U(rng);
    Field f = Field::sample(rule, [&](const BallPoint& z) {
        return std::exp(a * z.zeta[0] + b * z.zeta.back()) * (c + z.zeta[0] * z.zeta[0]);
    });
    for (double& v : f.values) v *= 0.5 + U(rng);
    return f;
}

} // namespace

TEST_CASE("quasi-norm of a constant") {
    const QuadratureRule rule = build_ball_rule(2, 16, 16);
    const Field f = Field::constant(rule, 3.0);
    CHECK(quasi_norm(f, 0.5, rule) == doctest::Approx(3.0 * pi * pi).epsilon(1e-13));
    CHECK(neg_quasi_norm(f, -2.0, rule) == doctest::Approx(3.0 / std::sqrt(pi)).epsilon(1e-13));
    CHECK_THROWS_AS(quasi_norm(f, 1.0, rule), RangeError);
    CHECK_THROWS_AS(neg_quasi_norm(f, 0.5, rule), RangeError);
}

TEST_CASE("fields must be positive, finite and bound to the rule") {
    const QuadratureRule rule = build_ball_rule(2, 8, 8), other = build_ball_rule(2, 8, 9);
    Field f = Field::constant(rule, 1.0);
    CHECK_THROWS_AS(quasi_norm(f, 0.5, other), DomainError);
    f.values[2] = 0.0;
    CHECK_THROWS_AS(check_field(f, rule), DomainError);
    f.values[2] = std::nan("");
    CHECK_THROWS_AS(check_field(f, rule), NonFiniteError);
    CHECK_THROWS_AS(Field::constant(rule, -1.0), DomainError);
}

TEST_CASE("T of the constant field against the second-moment formula") {
    // lambda = -2, alpha = beta = 0: int |zeta - eta|^2 d eta = |B| (|zeta - x1|^2 + d/(d+2)).
    for (int dim : {2, 3}) {
        const int n = dim - 1;
        const auto [p, q] = conformal_exponents(n, 1, -2.0, 0.0, 0.0);
        const ExponentSet s = validate_exponents({n, 1, -2.0, 0.0, 0.0, p, q});
        const QuadratureRule rule = build_ball_rule(dim, 12, 12);
        const Field Tg = apply_T_operator(Field::constant(rule, 1.0), s, rule);
        double worst = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double* z = rule.node(i);
            double r2 = 0.0;
            for (int k = 0; k < dim; ++k) r2 += (z[k] - center_x1(dim)[k]) * (z[k] - center_x1(dim)[k]);
            const double want = ball_volume(dim) * (r2 + dim / (dim + 2.0));
            worst = std::max(worst, std::fabs(Tg.values[i] / want - 1.0));
        }
        CHECK(worst < 1e-13);
    }
}

TEST_CASE("weights enter T as w^alpha outside and w^beta inside") {
    const ExponentSet s = conformal_set(1, 1, -2.0, 0.3, 0.0);
    const QuadratureRule rule = build_ball_rule(2, 12, 12);
    const BallOperator op(s, rule);
    const Field Tg = op.apply(Field::constant(rule, 1.0));
    for (std::size_t i = 0; i < rule.size(); i += 37) {
        const double* z = rule.node(i);
        const double r2 = z[0] * z[0] + (z[1] + 1.0) * (z[1] + 1.0);
        const double w = 0.5 * (1.0 - r2);
        CHECK(Tg.values[i] == doctest::Approx(std::pow(w, 0.3) * pi * (r2 + 0.5)).epsilon(1e-12));
    }
}

TEST_CASE("property: bilinear form equals int f T g and int g T* f") {
    std::mt19937_64 rng(21);
    const QuadratureRule rule = build_ball_rule(2, 16, 16);
    for (auto [l, a, b] : {std::tuple{-2.0, 0.2, 0.2}, std::tuple{-1.0, 0.1, 0.3}, std::tuple{-1.7, 0.0, 0.4}}) {
        const ExponentSet s = conformal_set(1, 1, l, a, b);
        const BallOperator op(s, rule);
        for (int k = 0; k < 5; ++k) {
            const Field f = random_field(rule, rng), g = random_field(rule, rng);
            const Field Tg = op.apply(g), Tf = op.apply_adjoint(f);
            double fTg = 0.0, gTf = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                fTg += rule.weights[i] * f.values[i] * Tg.values[i];
                gTf += rule.weights[i] * g.values[i] * Tf.values[i];
            }
            const double B = op.bilinear(f, g);
            CHECK(B == doctest::Approx(fTg).epsilon(1e-12));
            CHECK(B == doctest::Approx(gTf).epsilon(1e-12));
            CHECK(B == doctest::Approx(bilinear_functional(f, g, s, rule)).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: quotient is invariant under positive scaling") {
    std::mt19937_64 rng(22);
    const QuadratureRule rule = build_ball_rule(2, 16, 16);
    const ExponentSet s = conformal_set(1, 1, -2.0, 0.2, 0.2);
    for (int k = 0; k < 10; ++k) {
        const Field f = random_field(rule, rng), g = random_field(rule, rng);
        Field f2 = f, g2 = g;
        for (double& v : f2.values) v *= 7.5;
        for (double& v : g2.values) v *= 0.013;
        CHECK(quotient(f2, g2, s, rule) == doctest::Approx(quotient(f, g, s, rule)).epsilon(1e-12));
        CHECK(quotient(f, g, s, rule) ==
              doctest::Approx(bilinear_functional(f, g, s, rule) / (quasi_norm(f, s.p, rule) * quasi_norm(g, s.q, rule)))
                  .epsilon(1e-13));
    }
}

TEST_CASE("explicit half-space pair against its closed-form quotient") {
    // f = g = (1+|X|^2)^{-3} on the upper half-plane, lambda = -2, p = q = 2/3:
    // bilinear 2 M0 M2 - 2 |M1|^2 = 3 pi^2/32, ||f||_p = (pi/2)^{3/2}, quotient 3/(4 pi).
    const ExponentSet s = conformal_set(1, 1, -2.0, 0.0, 0.0);
    const QuadratureRule rule = build_ball_rule(2, 64, 64);
    const Field f = Field::sample(rule, [](const BallPoint& z) {
        const HalfSpacePoint X = ball_to_half(z);
        const double r2 = X.x[0] * X.x[0] + X.t * X.t;
        return std::pow(conformal_factor(z), 3.0) * std::pow(1.0 + r2, -3.0);
    });
    const double Q = quotient(f, f, s, rule);
    CHECK(Q == doctest::Approx(3.0 / (4.0 * pi)).epsilon(1e-9));
    // The pair sits below the lower end of the constant band.
    CHECK(Q < constant_band(s).n_lower);
}

TEST_CASE("conformal quotient is the same on the half-space") {
    std::mt19937_64 rng(24);
    const QuadratureRule rule = build_ball_rule(2, 16, 16);
    const ExponentSet s = conformal_set(1, 1, -2.0, 0.2, 0.2);
    const Field f = random_field(rule, rng), g = random_field(rule, rng);
    CHECK(halfspace_quotient(f, g, s, rule) == doctest::Approx(quotient(f, g, s, rule)).epsilon(1e-10));
}

TEST_CASE("half-space operator against a Gaussian closed form") {
    // int_{t>0} e^{-|X|^2} |X - Y|^2 dX = pi/2 + pi y^2/2 - sqrt(pi) s + pi s^2/2, Y = (y, s).
    const ExponentSet s = conformal_set(1, 1, -2.0, 0.0, 0.0);
    const QuadratureRule rule = build_ball_rule(2, 64, 64);
    const HalfSpaceFn f = [](const HalfSpacePoint& X) { return std::exp(-(X.x[0] * X.x[0] + X.t * X.t)); };
    const HalfSpaceFn E = halfspace_operator(f, s, rule, HalfSpaceMode::E_lambda);
    const HalfSpaceFn I = halfspace_operator(f, s, rule, HalfSpaceMode::I_ab);
    for (double y : {-1.0, 0.0, 0.5})
        for (double t : {0.2, 1.0, 2.0}) {
            const HalfSpacePoint Y{{y}, t};
            const double want = 0.5 * pi + 0.5 * pi * y * y - std::sqrt(pi) * t + 0.5 * pi * t * t;
            CHECK(E(Y) == doctest::Approx(want).epsilon(1e-8));
            CHECK(I(Y) == doctest::Approx(want).epsilon(1e-8));
        }
    CHECK_THROWS_AS(E(HalfSpacePoint{{0.0}, 0.0}), DomainError);
}

TEST_CASE("field CSV round trip is exact") {
    std::mt19937_64 rng(25);
    const QuadratureRule rule = build_ball_rule(2, 8, 8);
    const Field f = random_field(rule, rng);
    const Field back = field_from_csv(field_to_csv(f), rule);
    CHECK(back.values == f.values);
    CHECK_THROWS_AS(field_from_csv(field_to_csv(f), build_ball_rule(2, 8, 9)), DomainError);
}

TEST_CASE("pullback weights integrate the half-space Gaussian") {
    const QuadratureRule rule = build_ball_rule(2, 64, 64);
    const HalfSpaceNodes hn = pullback_nodes(rule);
    double s = 0.0;
    for (std::size_t j = 0; j < hn.size(); ++j) {
        const double* X = hn.point(j);
        CHECK(X[1] > 0.0);
        s += hn.weights[j] * std::exp(-(X[0] * X[0] + X[1] * X[1]));
    }
    CHECK(s == doctest::Approx(0.5 * pi).epsilon(1e-10));
}
