#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rhls/errors.hpp"
#include "rhls/solver.hpp"
#include "rhls/verify.hpp"

using namespace rhls;

namespace {

const double pi = std::acos(-1.0);

struct Conformal {
    ExponentSet set;
    QuadratureRule rule;
    SolveReport solve;
};

// One conformal solve shared by the system-level cases.
const Conformal& conformal_case() {
    static const Conformal c = [] {
        Conformal out{conformal_set(1, 1, -2.0, 0.2, 0.2), build_ball_rule(2, 48, 48), {}};
        SolveOptions o;
        o.delta_min = 0.0;
        out.solve = solve_subcritical(out.set, out.rule, o);
        return out;
    }();
    return c;
}

HalfSpaceSystem conformal_system() {
    const Conformal& c = conformal_case();
    return HalfSpaceSystem::from_ball_pair(c.solve.f, c.solve.g, c.set, c.rule, c.solve.c_star);
}

} // namespace

TEST_CASE("report passes iff the residual is within tolerance") {
    CHECK(make_report("a", 1.0, 1.0, 1e-9, 1e-8).pass);
    CHECK_FALSE(make_report("a", 1.0, 1.0, -1e-7, 1e-8).pass);
    CHECK_FALSE(make_report("a", 1.0, 1.0, std::nan(""), 1e-8).pass);
}

TEST_CASE("property: reversed Holder holds on random pairs and is tight at h = f^{p-1}") {
    const QuadratureRule rule = build_ball_rule(2, 16, 16);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> U(0.1, 3.0);
    for (int k = 0; k < 50; ++k) {
        Field f{std::vector<double>(rule.size()), rule.id}, h = f;
        for (double& v : f.values) v = U(rng);
        for (double& v : h.values) v = U(rng);
        const CheckReport r = check_reversed_holder(f, h, 0.6, rule);
        CHECK(r.pass);
        CHECK(r.metadata.at("gap") >= 0.0);
    }
    const Field f = Field::sample(rule, [](const BallPoint& z) { return 1.5 + z.zeta[0]; });
    Field h = f;
    for (double& v : h.values) v = std::pow(v, -0.4);
    const CheckReport r = check_reversed_holder(f, h, 0.6, rule);
    CHECK(r.pass);
    CHECK(std::fabs(r.metadata.at("gap")) < 1e-12 * r.lhs);
}

TEST_CASE("reversed Hardy: zero profile passes and integrable bumps give a vanishing left side") {
    const ExponentSet s = conformal_set(1, 1, -2.0, 0.2, 0.2);
    const RadialFn bump = [](double r) {
        const double x = r - 1.0;
        return std::fabs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
    };
    for (HardyMode m : {HardyMode::inner, HardyMode::outer}) {
        CHECK(check_reversed_hardy([](double) { return 0.0; }, s, m).pass);
        // G stays bounded, so the weighted integral of G^r diverges and the left side is 0.
        const CheckReport b = check_reversed_hardy(bump, s, m);
        CHECK(b.lhs == 0.0);
        CHECK(b.rhs > 0.0);
        CHECK_FALSE(b.pass);
    }
}

TEST_CASE("kernel K vanishes on the sphere and is positive inside") {
    const Vec xi{0.3};
    const double r = 1.2;
    const HalfSpacePoint Y{{0.1}, 0.5};
    for (double a : {0.3, 1.0, 2.5}) {
        const HalfSpacePoint X{{xi[0] + r * std::cos(a)}, r * std::sin(a)};
        CHECK(std::fabs(kernel_K(xi, r, Y, X, -2.0)) < 1e-12);
    }
    CHECK(kernel_K(xi, r, Y, HalfSpacePoint{{0.5}, 0.2}, -2.0) > 0.0);
    for (int dim : {2, 3}) {
        const CheckReport c = check_kernel_positivity(dim, -1.5, 1000, 43);
        CHECK(c.pass);
    }
}

TEST_CASE("Kelvin identity for a constructed pair") {
    const ExponentSet s = conformal_set(1, 1, -2.0, 0.2, 0.2);
    const QuadratureRule rule = build_ball_rule(2, 48, 48);
    const HalfSpaceFn v = [s](const HalfSpacePoint& Y) {
        const double r2 = (Y.t + 1.0) * (Y.t + 1.0) + (Y.x[0] - 0.3) * (Y.x[0] - 0.3);
        return std::pow(Y.t, s.beta / s.kappa) * std::pow(std::pow(1.0 / r2, 4.0), -1.0 / s.kappa);
    };
    std::vector<HalfSpacePoint> pts;
    for (int i = 0; i < 20; ++i) {
        const double a = pi * (i + 0.5) / 20.0, rr = 0.2 + 0.7 * ((i * 7) % 20) / 20.0;
        pts.push_back({{0.1 + rr * std::cos(a)}, rr * std::sin(a)});
    }
    const CheckReport r = kelvin_identity_residual(v, {0.1}, 1.0, pts, s, rule);
    CHECK(r.pass);
    CHECK(r.residual < 1e-5);
}

TEST_CASE("Fubini integrals agree on solver output and not after a perturbation") {
    REQUIRE(conformal_case().solve.converged);
    HalfSpaceSystem sys = conformal_system();
    const CheckReport r = fubini_check(sys);
    CHECK(r.pass);
    CHECK(r.residual < 1e-4);
    std::vector<double> u = sys.u_nodes();
    for (double& x : u) x *= 1.1;
    sys.set_node_values(u, sys.v_nodes());
    CHECK_FALSE(fubini_check(sys).pass);
}

TEST_CASE("Pohozaev residual is small when balanced and follows the defect sign otherwise") {
    const HalfSpaceSystem sys = conformal_system();
    const CheckReport r = pohozaev_residual(sys);
    CHECK(r.pass);
    CHECK(std::fabs(r.residual) < 1e-3);
    for (double f : {1.1, 0.9}) {
        PohozaevOptions o;
        o.theta = sys.set().theta * f;
        const CheckReport u = pohozaev_residual(sys, o);
        CHECK(u.metadata.at("defect") != 0.0);
        CHECK(u.metadata.at("sign_agrees") == 1.0);
        CHECK((u.residual > 0.0) == (u.metadata.at("defect") > 0.0));
    }
}

TEST_CASE("asymptotic ratio approaches a and a doubled u is caught") {
    const HalfSpaceSystem sys = conformal_system();
    const AsymptoticsReport a = asymptotic_constants(sys);
    CHECK(a.check.pass);
    CHECK(a.a > 0.0);
    CHECK(a.a == doctest::Approx(a.b).epsilon(1e-8));
    CHECK(std::isfinite(a.bound_constant));
    CHECK(a.ratio_samples.size() == 9);

    const Conformal& c = conformal_case();
    const HalfSpaceFn u = sys.u_fn(), v = sys.v_fn();
    const AsymptoticsReport f = asymptotic_constants(u, v, c.set, c.rule);
    CHECK(f.check.pass);
    CHECK(f.a == doctest::Approx(a.a).epsilon(1e-6));
    const HalfSpaceFn u2 = [u](const HalfSpacePoint& X) { return 2.0 * u(X); };
    const AsymptoticsReport d = asymptotic_constants(u2, v, c.set, c.rule);
    CHECK(d.a == doctest::Approx(f.a).epsilon(1e-15));
    CHECK(d.ratio_samples.back().u_ratio == doctest::Approx(2.0 * f.ratio_samples.back().u_ratio).epsilon(1e-14));
    CHECK_FALSE(d.check.pass);
}

TEST_CASE("profile self-fit recovers parameters") {
    const ExponentSet s = conformal_set(1, 1, -2.0, 0.2, 0.2);
    const ProfileParams truth{1.3, 0.8, {0.4}, profile_exponent(s, ProfileKind::f_profile)};
    std::vector<TraceSample> tr;
    for (const Vec& x : trace_grid(1)) tr.push_back({x, profile_value(truth, x)});
    const auto [fit, rep] = boundary_profile_fit(tr, s, ProfileKind::f_profile);
    CHECK(rep.pass);
    CHECK(rep.residual < 1e-10);
    CHECK(fit.c == doctest::Approx(truth.c).epsilon(1e-8));
    CHECK(fit.d == doctest::Approx(truth.d).epsilon(1e-8));
    CHECK(fit.xi0[0] == doctest::Approx(truth.xi0[0]).epsilon(1e-8));
    CHECK(profile_exponent(s, ProfileKind::f_profile) == doctest::Approx((4.0 + 0.4 + 2.0) / 2.0).epsilon(1e-15));
}

TEST_CASE("conformal solver trace has the bubble shape, a perturbed trace does not") {
    const Conformal& c = conformal_case();
    REQUIRE(c.solve.converged);
    const auto tr = solver_trace(c.solve.f, c.solve.g, c.set, c.rule, c.solve.c_star, ProfileKind::f_profile, trace_grid(1));
    const auto [fit, rep] = boundary_profile_fit(tr, c.set, ProfileKind::f_profile);
    CHECK(rep.pass);
    CHECK(rep.residual < 1e-2);
    auto bad = tr;
    for (auto& t : bad) t.value *= 1.0 + 0.2 * std::sin(3.0 * t.x[0]);
    const auto [fit2, rep2] = boundary_profile_fit(bad, c.set, ProfileKind::f_profile);
    CHECK(rep2.residual > rep.residual);
    CHECK_FALSE(rep2.pass);
}

TEST_CASE("moving spheres find the self-inversion radius of an exact profile") {
    const double alpha = 0.2, lambda = -2.0, d = 0.7, x0 = 0.2;
    const HalfSpaceFn u = [=](const HalfSpacePoint& X) {
        const double r2 = (X.x[0] - x0) * (X.x[0] - x0) + (X.t + d) * (X.t + d);
        return std::pow(X.t, alpha) * std::pow(r2, -lambda / 2.0);
    };
    std::vector<double> rg;
    for (int i = 1; i <= 200; ++i) rg.push_back(0.01 * i);
    std::vector<HalfSpacePoint> sg;
    for (int i = 0; i < 80; ++i)
        for (int j = 1; j <= 40; ++j) sg.push_back({{-2.5 + 5.0 * i / 79.0}, 2.5 * j / 40.0});
    const Vec xi{0.5};
    const SphereScan sc = moving_sphere_scan(u, lambda - 2.0 * alpha, xi, rg, sg);
    CHECK(std::fabs(sc.r_bar - std::hypot(xi[0] - x0, d)) <= 0.01);
    CHECK(sc.minima.size() == rg.size());
    const HalfSpaceFn flat = [=](const HalfSpacePoint& X) { return 3.0 * std::pow(X.t, alpha); };
    CHECK(moving_sphere_scan(flat, lambda - 2.0 * alpha, xi, rg, sg).r_bar == std::numeric_limits<double>::infinity());
}

TEST_CASE("geometry identity checks report and center anchor") {
    const auto reps = check_geometry_identities(2, 200, 44);
    bool anchor = false;
    for (const auto& r : reps) {
        CHECK(r.pass);
        anchor = anchor || r.name.find("center") != std::string::npos;
    }
    CHECK(anchor);
}
