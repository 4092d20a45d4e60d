// One line per acceptance criterion; exit status 1 if any fails.
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rhls/errors.hpp"
#include "rhls/solver.hpp"
#include "rhls/special.hpp"
#include "rhls/verify.hpp"

using namespace rhls;
namespace fs = std::filesystem;

namespace {

const double pi = std::acos(-1.0);
int failures = 0;

void line(int id, const char* title, bool ok, const std::string& detail) {
    std::printf("%s  C%-2d %s | %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Direct sin-power integrals with the singular end at an exact 0.
double angular_oracle(int n, double s) {
    boost::math::quadrature::tanh_sinh<double> ts;
    if (n == 1) return 2.0 * ts.integrate([s](double a) { return std::pow(std::sin(a), s); }, 0.0, 0.5 * pi);
    return 2.0 * pi * ts.integrate([s](double a) { return std::pow(std::sin(a), s) * std::cos(a); }, 0.0, 0.5 * pi);
}

std::pair<double, double> band_oracle(const ExponentSet& s) {
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    const int n = s.n;
    const double pc = s.p_conj, r = s.q_conj, a = s.alpha, b = s.beta, l = s.lambda;
    const double Ja = angular_oracle(n, a * pc), Jb = angular_oracle(n, b * r);
    auto outside = [&](double e) { return es.integrate([e](double x) { return std::pow(1.0 + x, e); }, 0.0, HUGE_VAL); };
    auto inside = [&](double e) { return ts.integrate([e](double x) { return std::pow(x, e); }, 0.0, 1.0); };
    const double d1 = std::pow(Jb * outside((b - l) * r + n), 1.0 / r) * std::pow(Ja * inside(a * pc + n), 1.0 / pc);
    const double d2 = std::pow(Ja * outside((a - l) * pc + n), 1.0 / pc) * std::pow(Jb * inside(b * r + n), 1.0 / r);
    return {d1, d2};
}

void criterion1() {
    double worst_j = 0.0;
    for (int n : {1, 2})
        for (double s : {0.0, 0.3, 0.9}) worst_j = std::max(worst_j, std::fabs(angular_constant(n, s) - angular_oracle(n, s)));
    double worst_g = 0.0;
    worst_g = std::max(worst_g, std::fabs(rhls::gamma(0.5) / std::sqrt(pi) - 1.0));
    worst_g = std::max(worst_g, std::fabs(rhls::gamma(1.0) - 1.0));
    worst_g = std::max(worst_g, std::fabs(rhls::gamma(2.5) / (0.75 * std::sqrt(pi)) - 1.0));
    line(1, "special-function fidelity", worst_j < 1e-10 && worst_g < 1e-13,
         fmt("max |J - oracle| = %.2e (tol 1e-10), max gamma rel err = %.2e (tol 1e-13)", worst_j, worst_g));
}

void criterion2() {
    const ExponentSet s = validate_exponents({1, 1, -2.0, 0.0, 0.0, 2.0 / 3.0, 2.0 / 3.0});
    const ConstantBand b = constant_band(s);
    const auto [d1, d2] = band_oracle(s);
    const double eq = std::fabs(b.d1 - b.d2);
    const double orc = std::max(std::fabs(b.d1 - d1), std::fabs(b.d2 - d2));
    const bool half = b.lower_factor == 0.5;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int tested = 0, positive = 0;
    while (tested < 100) {
        const int n = 1 + static_cast<int>(rng() % 2);
        const double lambda = -(n + 1) * (0.05 + 0.95 * U(rng));
        const double alpha = 0.5 * U(rng), beta = 0.5 * U(rng);
        ExponentSet e;
        try {
            e = conformal_set(n, 1, lambda, alpha, beta);
        } catch (const Error&) {
            continue;
        }
        ++tested;
        const ConstantBand cb = constant_band(e);
        if (cb.n_lower > 0.0 && cb.n_upper >= cb.n_lower && std::isfinite(cb.n_upper)) ++positive;
    }
    line(2, "constant band", eq < 1e-10 && orc < 1e-10 && half && positive == tested,
         fmt("|D1-D2| = %.2e, |D - oracle| = %.2e (tol 1e-10), lower_factor = %.17g, positive %d/%d", eq, orc,
             b.lower_factor, positive, tested));
}

void criterion3() {
    double worst = 0.0;
    bool ok = true;
    for (int dim : {2, 3})
        for (const CheckReport& r : check_geometry_identities(dim, 1000, 3)) {
            worst = std::max(worst, std::fabs(r.residual));
            ok = ok && r.pass;
        }
    const HalfSpacePoint c = ball_to_half({center_x1(2)});
    const bool anchor = c.x[0] == 0.0 && c.t == 2.0;
    line(3, "geometry identities", ok && worst <= 1e-12 && anchor,
         fmt("worst residual %.2e over 10^3 points in dims 2, 3 (tol 1e-12), T(x1) = (%g, %g)", worst, c.x[0], c.t));
}

// exp of a random quadratic in the ball coordinates, times lognormal node noise.
Field random_positive_field(const QuadratureRule& rule, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    const double c[5] = {N(rng), N(rng), N(rng), 0.5 * N(rng), 0.5 * N(rng)};
    Field f{std::vector<double>(rule.size()), rule.id};
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double* z = rule.node(i);
        const double x = z[0], y = z[1] + 1.0;
        f.values[i] = std::exp(c[0] * x + c[1] * y + c[2] * x * y + c[3] * x * x + c[4] * y * y + 0.3 * N(rng));
    }
    return f;
}

void criterion4(const QuadratureRule& rule) {
    const ExponentSet s = conformal_set(1, 1, -2.0, 0.2, 0.2);
    const BallOperator op(s, rule);
    const double lower = constant_band(s).n_lower;
    std::mt19937_64 rng(4);
    double worst = HUGE_VAL;
    int below = 0;
    for (int k = 0; k < 100; ++k) {
        const double q = op.quotient(random_positive_field(rule, rng), random_positive_field(rule, rng));
        worst = std::min(worst, q);
        below += q < lower - 1e-6;
    }
    line(4, "inequality on random pairs", below == 0,
         fmt("min quotient %.6f vs n_lower %.6f - 1e-6; %d/100 below (alpha=beta=0.2, lambda=-2, conformal)", worst,
             lower, below));
}

void criterion5(const QuadratureRule& rule) {
    const ExponentSet s = subcritical_set(1, 1, -2.0, 0.2, 0.2, 0.05);
    const auto t0 = std::chrono::steady_clock::now();
    const SolveReport r = solve_subcritical(s, rule);
    const double secs = seconds_since(t0);
    double fg = 0.0, top = 0.0;
    for (std::size_t i = 0; i < r.f.size(); ++i) {
        fg = std::max(fg, std::fabs(r.f.values[i] - r.g.values[i]));
        top = std::max(top, r.g.values[i]);
    }
    fg /= top;
    const bool ok = r.converged && r.iterations <= 500 && r.max_increase <= 1e-12 && r.el_residual < 1e-8 &&
                    secs < 60.0 && fg < 1e-8;
    line(5, "solver contract", ok,
         fmt("converged=%d in %d iterations, %.1f s (< 60), max increase %.1e (<= 1e-12), EL %.1e (< 1e-8), "
             "|f-g|/|g| %.1e (< 1e-8), c* = %.10f",
             r.converged, r.iterations, secs, r.max_increase, r.el_residual, fg, r.c_star));
}

void criterion6(const QuadratureRule& rule) {
    const ExponentSet base = conformal_set(1, 1, -2.0, 0.2, 0.2);
    const SweepReport r = critical_sweep(base, {0.08, 0.04, 0.02, 0.01}, rule);
    const bool stable = r.stability < 1e-3;
    line(6, "critical sweep", r.converged && stable && r.in_band,
         fmt("N_est %.6f, stability %.1e (< 1e-3), band [%.6f, %.6f], in band %d", r.n_est, r.stability, r.band.n_lower,
             r.band.n_upper, r.in_band));
}

void criterion7(const QuadratureRule& rule) {
    const ExponentSet s = conformal_set(1, 1, -2.0, 0.2, 0.2);
    const HalfSpaceFn v = [s](const HalfSpacePoint& Y) {
        const double r2 = (Y.t + 1.0) * (Y.t + 1.0) + (Y.x[0] - 0.3) * (Y.x[0] - 0.3);
        return std::pow(Y.t, s.beta / s.kappa) * std::pow(std::pow(1.0 / r2, 4.0), -1.0 / s.kappa);
    };
    std::vector<HalfSpacePoint> pts;
    for (int i = 0; i < 20; ++i) {
        const double a = pi * (i + 0.5) / 20.0, rr = 0.2 + 0.7 * ((i * 7) % 20) / 20.0;
        pts.push_back({{0.1 + rr * std::cos(a)}, rr * std::sin(a)});
    }
    const CheckReport k = kelvin_identity_residual(v, {0.1}, 1.0, pts, s, rule);
    const CheckReport p2 = check_kernel_positivity(2, -2.0, 1000, 7);
    const CheckReport p3 = check_kernel_positivity(3, -1.5, 1000, 7);
    line(7, "Kelvin identity and kernel positivity", k.pass && k.residual < 1e-5 && p2.pass && p3.pass,
         fmt("identity residual %.2e at 20 points (< 1e-5), min K %.2e (dim 2), %.2e (dim 3) over 10^3 pairs",
             k.residual, p2.lhs, p3.lhs));
}

struct ConformalPair {
    ExponentSet set;
    SolveReport solve;
};

ConformalPair conformal_pair(const QuadratureRule& rule) {
    ConformalPair c{conformal_set(1, 1, -2.0, 0.2, 0.2), {}};
    SolveOptions o;
    o.delta_min = 0.0;
    c.solve = solve_subcritical(c.set, rule, o);
    return c;
}

void criterion8(const QuadratureRule& rule, const ConformalPair& c) {
    const HalfSpaceSystem sys = HalfSpaceSystem::from_ball_pair(c.solve.f, c.solve.g, c.set, rule, c.solve.c_star);
    const CheckReport fb = fubini_check(sys);
    const CheckReport pb = pohozaev_residual(sys);
    bool signs = true;
    std::string unbalanced;
    for (double f : {1.1, 0.9}) {
        PohozaevOptions o;
        o.theta = c.set.theta * f;
        const CheckReport u = pohozaev_residual(sys, o);
        const bool agree = u.metadata.at("sign_agrees") == 1.0;
        signs = signs && agree;
        unbalanced += fmt(", theta x %.1f: %+.3f vs defect %+.3f", f, u.residual, u.metadata.at("defect"));
    }
    line(8, "Fubini and Pohozaev", c.solve.converged && fb.residual < 1e-4 && std::fabs(pb.residual) < 1e-3 && signs,
         fmt("Fubini residual %.1e (< 1e-4), balanced Pohozaev %.1e (< 1e-3)", fb.residual, pb.residual) + unbalanced);
}

void criterion9(const QuadratureRule& rule, const ConformalPair& c) {
    const HalfSpaceSystem sys = HalfSpaceSystem::from_ball_pair(c.solve.f, c.solve.g, c.set, rule, c.solve.c_star);
    const AsymptoticsReport a = asymptotic_constants(sys);
    line(9, "asymptotics", a.check.pass && std::isfinite(a.bound_constant) && a.bound_constant >= 1.0,
         fmt("worst |ratio/a - 1| at radius 1e3 = %.2e (< 1e-2), a = %.6f, b = %.6f, growth constant %.4f",
             a.check.residual, a.a, a.b, a.bound_constant));
}

void criterion10(const QuadratureRule& rule, const ConformalPair& c) {
    const auto tr = solver_trace(c.solve.f, c.solve.g, c.set, rule, c.solve.c_star, ProfileKind::f_profile, trace_grid(1));
    const auto [fit, rep] = boundary_profile_fit(tr, c.set, ProfileKind::f_profile);
    const ProfileParams truth{1.3, 0.8, {0.4}, profile_exponent(c.set, ProfileKind::f_profile)};
    std::vector<TraceSample> syn;
    for (const Vec& x : trace_grid(1)) syn.push_back({x, profile_value(truth, x)});
    const auto [sfit, srep] = boundary_profile_fit(syn, c.set, ProfileKind::f_profile);
    const double perr = std::max({std::fabs(sfit.c / truth.c - 1.0), std::fabs(sfit.d / truth.d - 1.0),
                                  std::fabs(sfit.xi0[0] - truth.xi0[0])});
    line(10, "boundary profile", rep.residual < 1e-2 && perr < 1e-8,
         fmt("solver trace sup residual %.1e (< 1e-2; c=%.6f d=%.6f xi0=%.1e), self-fit parameter error %.1e (< 1e-8)",
             rep.residual, fit.c, fit.d, fit.xi0[0], perr));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Returns the first differing relative path, or empty when the trees are byte-identical.
std::string compare_dirs(const fs::path& a, const fs::path& b) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
    std::size_t count_b = 0;
    for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
    if (files.empty() || count_b != files.size()) return "file count";
    for (const fs::path& f : files)
        if (!fs::exists(b / f) || slurp(a / f) != slurp(b / f)) return f.string();
    return {};
}

void criterion11(const std::string& cli, const fs::path& work) {
    if (cli.empty()) {
        line(11, "determinism", false, "no --cli given");
        return;
    }
    fs::remove_all(work);
    fs::create_directories(work);
    const std::vector<std::string> cmds = {"solve --delta 0.05 --seed 7", "verify --suite identities,kelvin,holder --seed 7"};
    std::string detail;
    bool ok = true;
    int k = 0;
    for (const std::string& cmd : cmds) {
        std::vector<fs::path> dirs;
        for (const char* run : {"a1", "b1", "c8"}) {
            const fs::path d = work / (std::to_string(k) + run);
            fs::create_directories(d);
            const int threads = run[1] == '8' ? 8 : 1;
            const std::string full = "\"" + cli + "\" " + cmd + " --threads " + std::to_string(threads) + " --out \"" +
                                     (d / "out").string() + "\" > \"" + (d / "out.stdout").string() + "\" 2>&1";
            const int rc = std::system(full.c_str());
            std::ofstream(d / "exit_code") << rc;
            dirs.push_back(d);
        }
        const std::string rerun = compare_dirs(dirs[0], dirs[1]);
        const std::string threads = compare_dirs(dirs[0], dirs[2]);
        ok = ok && rerun.empty() && threads.empty();
        detail += fmt("%s'%s': rerun %s, 1 vs 8 threads %s", k ? "; " : "", cmd.c_str(),
                      rerun.empty() ? "identical" : ("differs in " + rerun).c_str(),
                      threads.empty() ? "identical" : ("differs in " + threads).c_str());
        ++k;
    }
    line(11, "determinism", ok, detail);
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    fs::path work = fs::temp_directory_path() / "rhls_acceptance";
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string key = argv[i];
        if (key == "--cli") cli = argv[i + 1];
        else if (key == "--work") work = argv[i + 1];
        else {
            std::fprintf(stderr, "usage: acceptance [--cli PATH] [--work DIR]\n");
            return 2;
        }
    }
    try {
        const QuadratureRule rule = build_ball_rule(2, 64, 64);
        criterion1();
        criterion2();
        criterion3();
        criterion4(rule);
        criterion5(rule);
        criterion6(rule);
        criterion7(rule);
        const ConformalPair c = conformal_pair(rule);
        criterion8(rule, c);
        criterion9(rule, c);
        criterion10(rule, c);
        criterion11(cli, work);
    } catch (const std::exception& e) {
        std::printf("FAIL  aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
