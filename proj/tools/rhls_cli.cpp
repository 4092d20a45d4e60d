#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rhls/errors.hpp"
#include "rhls/parallel.hpp"
#include "rhls/params.hpp"
#include "rhls/quad.hpp"
#include "rhls/solver.hpp"
#include "rhls/special.hpp"
#include "rhls/verify.hpp"

using json = nlohmann::json;
using namespace rhls;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitVerify = 4;

const std::vector<std::string> kSuites = {"holder",      "hardy",   "kelvin", "fubini",    "pohozaev",
                                          "asymptotics", "profile", "spheres", "identities"};

struct RunConfig {
    int n = 1;
    int m = 1;
    double lambda = -2.0;
    double alpha = 0.2;
    double beta = 0.2;
    std::optional<double> p, q, delta;
    std::optional<int> dim;
    int radial_order = 64;
    int angular_order = 64;
    double tol = 1e-10;
    int max_iter = 500;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out;
    std::optional<double> theta, kappa;
    std::vector<double> schedule = {0.08, 0.04, 0.02, 0.01};
    std::vector<std::string> suite = {"all"};
};

json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
void take(const json& obj, const char* key, T& dst) {
    if (obj.contains(key)) dst = obj.at(key).get<T>();
}

template <class T>
void take(const json& obj, const char* key, std::optional<T>& dst) {
    if (obj.contains(key)) dst = obj.at(key).get<T>();
}

void load_config(const std::string& path, RunConfig& c) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        reject_unknown(j, {"exponents", "rule", "solve", "sweep", "verify", "seed", "threads", "out"}, "config");
        if (j.contains("exponents")) {
            const json& e = j["exponents"];
            reject_unknown(e, {"n", "m", "lambda", "alpha", "beta", "p", "q"}, "exponents");
            take(e, "n", c.n);
            take(e, "m", c.m);
            take(e, "lambda", c.lambda);
            take(e, "alpha", c.alpha);
            take(e, "beta", c.beta);
            take(e, "p", c.p);
            take(e, "q", c.q);
        }
        if (j.contains("rule")) {
            const json& r = j["rule"];
            reject_unknown(r, {"dim", "radial_order", "angular_order"}, "rule");
            take(r, "dim", c.dim);
            take(r, "radial_order", c.radial_order);
            take(r, "angular_order", c.angular_order);
        }
        if (j.contains("solve")) {
            const json& s = j["solve"];
            reject_unknown(s, {"tol", "max_iter", "delta"}, "solve");
            take(s, "tol", c.tol);
            take(s, "max_iter", c.max_iter);
            take(s, "delta", c.delta);
        }
        if (j.contains("sweep")) {
            const json& s = j["sweep"];
            reject_unknown(s, {"schedule"}, "sweep");
            take(s, "schedule", c.schedule);
        }
        if (j.contains("verify")) {
            const json& s = j["verify"];
            reject_unknown(s, {"suite", "theta", "kappa"}, "verify");
            take(s, "suite", c.suite);
            take(s, "theta", c.theta);
            take(s, "kappa", c.kappa);
        }
        take(j, "seed", c.seed);
        take(j, "threads", c.threads);
        take(j, "out", c.out);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

// Canonical form of everything that affects numerics; output paths and threads are excluded.
json effective_config(const RunConfig& c, const std::string& command) {
    json e = {{"n", c.n}, {"m", c.m}, {"lambda", c.lambda}, {"alpha", c.alpha}, {"beta", c.beta}};
    if (c.p) e["p"] = *c.p;
    if (c.q) e["q"] = *c.q;
    json j = {{"command", command},
              {"exponents", e},
              {"rule", {{"dim", c.dim.value_or(c.n + c.m)}, {"radial_order", c.radial_order}, {"angular_order", c.angular_order}}},
              {"seed", c.seed}};
    if (command == "solve" || command == "sweep") {
        j["solve"] = {{"tol", c.tol}, {"max_iter", c.max_iter}};
        if (c.delta) j["solve"]["delta"] = *c.delta;
    }
    if (command == "sweep") j["sweep"] = {{"schedule", c.schedule}};
    if (command == "verify") {
        j["verify"] = {{"suite", c.suite}};
        if (c.theta) j["verify"]["theta"] = *c.theta;
        if (c.kappa) j["verify"]["kappa"] = *c.kappa;
    }
    return j;
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot write " + tmp.string());
        os << text;
        if (!os) throw ConfigError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Context {
    RunConfig cfg;
    std::string command;
    std::string config_hash;

    json header(const std::string& rule_id) const {
        return {{"config_hash", config_hash}, {"rule_id", rule_id}, {"config", effective_config(cfg, command)}};
    }

    void emit(const std::string& name, const std::string& text) const {
        if (!cfg.out.empty()) write_atomic(std::filesystem::path(cfg.out) / name, text);
    }

    std::string csv_header(const std::string& rule_id) const {
        return "# config_hash=" + config_hash + " rule_id=" + rule_id + "\n";
    }
};

QuadratureRule make_rule(const RunConfig& c) {
    const int d = c.dim.value_or(c.n + c.m);
    if (d != c.n + c.m) throw ConfigError("dim must equal n + m");
    if (c.radial_order < 1 || c.angular_order < 1) throw ConfigError("rule orders must be positive");
    return build_ball_rule(d, c.radial_order, c.angular_order);
}

json exponents_json(const ExponentSet& s) {
    return {{"n", s.n},          {"m", s.m},          {"lambda", s.lambda}, {"alpha", s.alpha},
            {"beta", s.beta},    {"p", s.p},          {"q", s.q},           {"p_conj", s.p_conj},
            {"q_conj", s.q_conj}, {"theta", s.theta}, {"kappa", s.kappa},   {"p_conformal", s.p_conformal},
            {"q_conformal", s.q_conformal}};
}

json report_json(const CheckReport& r) {
    json meta = json::object();
    for (const auto& [k, v] : r.metadata) meta[k] = num(v);
    return {{"name", r.name},           {"lhs", num(r.lhs)},   {"rhs", num(r.rhs)}, {"residual", num(r.residual)},
            {"tolerance", r.tolerance}, {"pass", r.pass},      {"metadata", meta},  {"note", r.note}};
}

ExponentSet solve_set(const RunConfig& c) {
    if (c.delta) {
        if (c.p || c.q) throw ConfigError("give either delta or p and q, not both");
        return subcritical_set(c.n, c.m, c.lambda, c.alpha, c.beta, *c.delta);
    }
    if (!c.p && !c.q) return subcritical_set(c.n, c.m, c.lambda, c.alpha, c.beta, 0.05);
    if (!c.p || !c.q) throw ConfigError("solve needs both p and q, or delta");
    return validate_exponents({c.n, c.m, c.lambda, c.alpha, c.beta, c.p, c.q}, BalanceMode::free);
}

int cmd_constants(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    ExponentSet s;
    if (!c.p && !c.q) {
        s = conformal_set(c.n, c.m, c.lambda, c.alpha, c.beta);
    } else {
        s = validate_exponents({c.n, c.m, c.lambda, c.alpha, c.beta, c.p, c.q}, BalanceMode::enforce);
    }
    const ConstantBand b = constant_band(s);
    json j = ctx.header("");
    j.erase("rule_id");
    j["exponents"] = exponents_json(s);
    j["band"] = {{"d1", num(b.d1)},
                 {"d2", num(b.d2)},
                 {"lower_factor", num(b.lower_factor)},
                 {"lower_factor_conj", num(b.lower_factor_conj)},
                 {"n_lower", num(b.n_lower)},
                 {"n_upper", num(b.n_upper)}};
    j["pohozaev_defect"] = pohozaev_defect(s);
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    ctx.emit("constants.json", text);
    return 0;
}

int cmd_solve(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    const ExponentSet s = solve_set(c);
    const QuadratureRule rule = make_rule(c);
    SolveOptions o;
    o.tol = c.tol;
    o.max_iter = c.max_iter;
    const SolveReport r = solve_subcritical(s, rule, o);
    json j = ctx.header(rule.id);
    j["exponents"] = exponents_json(s);
    // The band belongs to the conformal limit of this solve.
    const ConstantBand band = constant_band(conformal_set(s.n, s.m, s.lambda, s.alpha, s.beta));
    j["band"] = {{"n_lower", num(band.n_lower)}, {"n_upper", num(band.n_upper)}};
    j["c_star"] = r.c_star;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["el_residual"] = r.el_residual;
    j["el_residual_f"] = r.el_residual_f;
    j["el_residual_g"] = r.el_residual_g;
    j["max_increase"] = r.max_increase;
    j["min_f"] = r.min_f;
    j["min_g"] = r.min_g;
    j["holder_quotient_f"] = holder_quotient(r.f, rule, 0.5);
    j["quotient_history"] = r.quotient_history;
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    ctx.emit("solve.json", text);
    ctx.emit("f.csv", ctx.csv_header(rule.id) + field_to_csv(r.f));
    ctx.emit("g.csv", ctx.csv_header(rule.id) + field_to_csv(r.g));
    if (!r.converged) {
        std::cerr << "solver did not converge within " << c.max_iter << " iterations\n";
        return kExitSolver;
    }
    return 0;
}

int cmd_sweep(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    if (c.p || c.q || c.delta) throw ConfigError("sweep derives p and q from the schedule");
    const ExponentSet base = conformal_set(c.n, c.m, c.lambda, c.alpha, c.beta);
    const QuadratureRule rule = make_rule(c);
    SolveOptions o;
    o.tol = c.tol;
    o.max_iter = c.max_iter;
    const SweepReport r = critical_sweep(base, c.schedule, rule, o, true);
    std::string csv = ctx.csv_header(rule.id) + "delta,p,q,c_star,iterations\n";
    json pts = json::array();
    for (const auto& pt : r.points) {
        csv += fmt17(pt.delta) + "," + fmt17(pt.p) + "," + fmt17(pt.q) + "," + fmt17(pt.c_star) + "," +
               std::to_string(pt.iterations) + "\n";
        pts.push_back({{"delta", pt.delta},
                       {"p", pt.p},
                       {"q", pt.q},
                       {"c_star", pt.c_star},
                       {"el_residual", pt.el_residual},
                       {"iterations", pt.iterations},
                       {"converged", pt.converged}});
    }
    json j = ctx.header(rule.id);
    j["points"] = pts;
    j["richardson"] = r.richardson;
    j["n_est"] = r.n_est;
    j["stability"] = r.stability;
    j["band"] = {{"n_lower", r.band.n_lower}, {"n_upper", r.band.n_upper}};
    j["in_band"] = r.in_band;
    j["converged"] = r.converged;
    const std::string text = j.dump(2) + "\n";
    std::cout << text;
    ctx.emit("sweep.json", text);
    ctx.emit("sweep.csv", csv);
    if (!r.converged) {
        std::cerr << "a sweep point did not converge\n";
        return kExitSolver;
    }
    return 0;
}

// ---- verification suites ----

struct ConformalPair {
    ExponentSet set;
    SolveReport report;
};

class Verifier {
public:
    Verifier(const RunConfig& c, const QuadratureRule& rule) : cfg_(c), rule_(rule) {}

    std::vector<CheckReport> run(const std::string& suite) {
        if (suite == "holder") return holder();
        if (suite == "hardy") return hardy();
        if (suite == "kelvin") return kelvin();
        if (suite == "fubini") return {fubini_check(system())};
        if (suite == "pohozaev") return pohozaev();
        if (suite == "asymptotics") return {asymptotic_constants(system()).check};
        if (suite == "profile") return profile();
        if (suite == "spheres") return spheres();
        if (suite == "identities") return identities();
        throw ConfigError("unknown suite " + suite);
    }

private:
    ExponentSet conformal() const { return conformal_set(cfg_.n, cfg_.m, cfg_.lambda, cfg_.alpha, cfg_.beta); }

    const ConformalPair& pair() {
        if (!pair_) {
            SolveOptions o;
            o.tol = cfg_.tol;
            o.max_iter = cfg_.max_iter;
            o.delta_min = 0.0;
            const ExponentSet s = conformal();
            pair_ = ConformalPair{s, solve_subcritical(s, rule_, o)};
            require_converged(pair_->report);
        }
        return *pair_;
    }

    const HalfSpaceSystem& system() {
        if (!system_) {
            const ConformalPair& p = pair();
            system_ = HalfSpaceSystem::from_ball_pair(p.report.f, p.report.g, p.set, rule_, p.report.c_star);
        }
        return *system_;
    }

    std::vector<CheckReport> holder() {
        const ExponentSet s = conformal();
        std::mt19937_64 rng(cfg_.seed);
        auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        const Field one = Field::constant(rule_, 1.0);
        CheckReport eq = check_reversed_holder(one, one, s.p, rule_);
        eq = make_report("holder_constants_equality", eq.lhs, eq.rhs, eq.metadata["gap"], 1e-9);
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            Field f = one, h = one;
            for (auto& v : f.values) v = 0.05 + u01();
            for (auto& v : h.values) v = 0.05 + u01();
            worst = std::max(worst, check_reversed_holder(f, h, s.p, rule_).residual);
        }
        CheckReport rnd = make_report("holder_random_pairs", 0.0, 0.0, worst, 1e-10);
        rnd.metadata["samples"] = 200;
        Field f = one, h = one;
        for (auto& v : f.values) v = 0.05 + u01();
        for (std::size_t i = 0; i < f.size(); ++i) h.values[i] = 3.0 * std::pow(f.values[i], s.p - 1.0);
        CheckReport e2 = check_reversed_holder(f, h, s.p, rule_);
        e2 = make_report("holder_equality_case", e2.lhs, e2.rhs, e2.metadata["gap"], 1e-9);
        return {eq, rnd, e2};
    }

    std::vector<CheckReport> hardy() {
        const ExponentSet s = conformal();
        const RadialFn bump = [](double r) {
            const double x = r - 1.0;
            return std::fabs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
        };
        const RadialFn zero = [](double) { return 0.0; };
        std::vector<CheckReport> out;
        for (HardyMode m : {HardyMode::inner, HardyMode::outer}) {
            const std::string tag = m == HardyMode::inner ? "inner" : "outer";
            CheckReport b = check_reversed_hardy(bump, s, m);
            b.name = "hardy_bump_" + tag;
            CheckReport z = check_reversed_hardy(zero, s, m);
            z.name = "hardy_zero_" + tag;
            out.push_back(b);
            out.push_back(z);
        }
        return out;
    }

    std::vector<CheckReport> kelvin() {
        const ExponentSet s = conformal();
        const int n = s.n;
        // h = z^b v^{-kappa} is a smooth bubble; v is recovered from it.
        const double d = 1.0;
        const Vec y0 = n == 1 ? Vec{0.3} : Vec{0.3, -0.2};
        const HalfSpaceFn v = [s, d, y0](const HalfSpacePoint& Y) {
            double r2 = (Y.t + d) * (Y.t + d);
            for (std::size_t k = 0; k < y0.size(); ++k) r2 += (Y.x[k] - y0[k]) * (Y.x[k] - y0[k]);
            const double h = std::pow(d / r2, 4.0);
            return std::pow(Y.t, s.beta / s.kappa) * std::pow(h, -1.0 / s.kappa);
        };
        const Vec xi(static_cast<std::size_t>(n), 0.1);
        std::vector<HalfSpacePoint> pts;
        std::mt19937_64 rng(cfg_.seed);
        auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        while (pts.size() < 20) {
            HalfSpacePoint X;
            X.x.resize(static_cast<std::size_t>(n));
            double r2 = 0.0;
            for (int k = 0; k < n; ++k) {
                X.x[k] = xi[k] + (2.0 * u01() - 1.0);
                r2 += (X.x[k] - xi[k]) * (X.x[k] - xi[k]);
            }
            X.t = u01();
            r2 += X.t * X.t;
            if (X.t > 0.05 && r2 < 0.9 && r2 > 0.01) pts.push_back(X);
        }
        KelvinOptions ko;
        if (n == 2) ko.angular_order = 24;
        return {kelvin_identity_residual(v, xi, 1.0, pts, s, rule_, ko),
                check_kernel_positivity(rule_.dim, s.lambda, 1000, cfg_.seed)};
    }

    std::vector<CheckReport> pohozaev() {
        PohozaevOptions o;
        o.theta = cfg_.theta;
        o.kappa = cfg_.kappa;
        CheckReport r = pohozaev_residual(system(), o);
        if (cfg_.theta || cfg_.kappa) r.note = "coefficient exponents overridden";
        return {r};
    }

    std::vector<CheckReport> profile() {
        const ConformalPair& p = pair();
        const int n = p.set.n;
        const auto grid = trace_grid(n);
        std::vector<CheckReport> out;
        for (ProfileKind k : {ProfileKind::f_profile, ProfileKind::g_profile}) {
            const auto tr = solver_trace(p.report.f, p.report.g, p.set, rule_, p.report.c_star, k, grid);
            out.push_back(boundary_profile_fit(tr, p.set, k).second);
        }
        // Self-fit of the model family.
        ProfileParams truth{0.7, 0.8, Vec(static_cast<std::size_t>(n), 0.35), profile_exponent(p.set, ProfileKind::f_profile)};
        std::vector<TraceSample> syn;
        for (const Vec& x : grid) syn.push_back({x, profile_value(truth, x)});
        auto [fit, rep] = boundary_profile_fit(syn, p.set, ProfileKind::f_profile, 1e-10);
        double perr = std::max(std::fabs(fit.c - truth.c), std::fabs(fit.d - truth.d));
        for (int k = 0; k < n; ++k) perr = std::max(perr, std::fabs(fit.xi0[k] - truth.xi0[k]));
        rep.name = "profile_self_fit";
        CheckReport par = make_report("profile_self_fit_parameters", perr, 0.0, perr, 1e-8);
        out.push_back(rep);
        out.push_back(par);
        return out;
    }

    std::vector<CheckReport> spheres() {
        const ExponentSet s = conformal();
        const int n = s.n;
        const double dd = 0.7;
        const Vec x0(static_cast<std::size_t>(n), 0.2), xi(static_cast<std::size_t>(n), 0.5);
        // u = t^a |X - P|^{-lambda}, P = (x0, -dd), is fixed by the sphere of radius |P - xi| about xi.
        const HalfSpaceFn u = [s, x0, dd](const HalfSpacePoint& X) {
            double r2 = (X.t + dd) * (X.t + dd);
            for (std::size_t k = 0; k < x0.size(); ++k) r2 += (X.x[k] - x0[k]) * (X.x[k] - x0[k]);
            return std::pow(X.t, s.alpha) * std::pow(r2, -0.5 * s.lambda);
        };
        double exact2 = dd * dd;
        for (int k = 0; k < n; ++k) exact2 += (xi[k] - x0[k]) * (xi[k] - x0[k]);
        const double exact = std::sqrt(exact2);
        const double step = 0.01;
        std::vector<double> radii;
        for (int i = 1; i <= 200; ++i) radii.push_back(step * i);
        std::vector<HalfSpacePoint> grid;
        const int G = n == 1 ? 80 : 24;
        const int T = n == 1 ? 40 : 16;
        for (int i = 0; i < G; ++i)
            for (int j = 0; j < (n == 1 ? 1 : G); ++j)
                for (int k = 1; k <= T; ++k) {
                    HalfSpacePoint X;
                    X.x = {-2.5 + 5.0 * i / (G - 1)};
                    if (n == 2) X.x.push_back(-2.5 + 5.0 * j / (G - 1));
                    X.t = 2.5 * k / T;
                    grid.push_back(X);
                }
        const SphereScan sc = moving_sphere_scan(u, s.lambda - 2.0 * s.alpha, xi, radii, grid);
        CheckReport a = make_report("spheres_profile_radius", sc.r_bar, exact, std::fabs(sc.r_bar - exact), step);
        a.metadata["r_bar"] = sc.r_bar;
        a.metadata["exact"] = exact;
        const HalfSpaceFn c = [s](const HalfSpacePoint& X) { return 3.0 * std::pow(X.t, s.alpha); };
        const SphereScan sc2 = moving_sphere_scan(c, s.lambda - 2.0 * s.alpha, xi, radii, grid);
        CheckReport b = make_report("spheres_constant_unbounded", sc2.r_bar, radii.back(),
                                    std::isinf(sc2.r_bar) ? 0.0 : 1.0, 0.0);
        b.metadata["r_bar"] = sc2.r_bar;
        b.metadata["grid_limit"] = radii.back();
        return {a, b};
    }

    std::vector<CheckReport> identities() {
        std::vector<CheckReport> out = check_geometry_identities(rule_.dim, 1000, cfg_.seed);
        out.push_back(check_kernel_positivity(rule_.dim, cfg_.lambda, 1000, cfg_.seed));
        return out;
    }

    const RunConfig& cfg_;
    const QuadratureRule& rule_;
    std::optional<ConformalPair> pair_;
    std::optional<HalfSpaceSystem> system_;
};

int cmd_verify(const Context& ctx) {
    const RunConfig& c = ctx.cfg;
    if (c.p || c.q || c.delta) throw ConfigError("verify runs at the conformal exponents; drop p, q and delta");
    std::vector<std::string> suites;
    for (const auto& s : c.suite) {
        if (s == "all") {
            suites = kSuites;
            break;
        }
        if (std::find(kSuites.begin(), kSuites.end(), s) == kSuites.end()) throw ConfigError("unknown suite " + s);
        if (std::find(suites.begin(), suites.end(), s) == suites.end()) suites.push_back(s);
    }
    conformal_set(c.n, c.m, c.lambda, c.alpha, c.beta);
    const QuadratureRule rule = make_rule(c);
    Verifier v(c, rule);
    json arr = json::array();
    std::vector<std::string> failed;
    std::ostringstream table;
    for (const auto& s : suites) {
        for (const CheckReport& r : v.run(s)) {
            json jr = report_json(r);
            jr["suite"] = s;
            arr.push_back(jr);
            char line[200];
            std::snprintf(line, sizeof line, "%-12s %-30s %-4s residual=%.3e tol=%.1e\n", s.c_str(), r.name.c_str(),
                          r.pass ? "PASS" : "FAIL", r.residual, r.tolerance);
            table << line;
            if (!r.pass) failed.push_back(r.name);
        }
    }
    json j = ctx.header(rule.id);
    j["checks"] = arr;
    const std::string text = j.dump(2) + "\n";
    std::cout << table.str();
    ctx.emit("verify.json", text);
    if (!failed.empty()) {
        std::cerr << "failing checks:";
        for (const auto& f : failed) std::cerr << ' ' << f;
        std::cerr << '\n';
        return kExitVerify;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reversed weighted HLS toolkit"};
    app.require_subcommand(1);
    RunConfig flags;
    std::string config_path;
    std::string suite_csv;
    std::vector<CLI::Option*> opts;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--n", flags.n);
        sub->add_option("--m", flags.m);
        sub->add_option("--lambda", flags.lambda);
        sub->add_option("--alpha", flags.alpha);
        sub->add_option("--beta", flags.beta);
        sub->add_option("--p", flags.p);
        sub->add_option("--q", flags.q);
        sub->add_option("--dim", flags.dim);
        sub->add_option("--radial-order", flags.radial_order);
        sub->add_option("--angular-order", flags.angular_order);
        sub->add_option("--tol", flags.tol);
        sub->add_option("--max-iter", flags.max_iter);
        sub->add_option("--seed", flags.seed);
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--threads", flags.threads);
        sub->add_option("--delta", flags.delta, "p = p_alpha (1 - delta), q = q_beta (1 - delta)");
        sub->add_option("--theta", flags.theta);
        sub->add_option("--kappa", flags.kappa);
        sub->add_option("--suite", suite_csv, "comma separated suites or 'all'");
        sub->add_option("--schedule", flags.schedule, "sweep deltas, strictly decreasing");
    };
    CLI::App* constants = app.add_subcommand("constants", "constant band at validated exponents");
    CLI::App* solve = app.add_subcommand("solve", "subcritical alternating minimization");
    CLI::App* sweep = app.add_subcommand("sweep", "subcritical to critical sweep");
    CLI::App* verify = app.add_subcommand("verify", "verification suites");
    for (CLI::App* sub : {constants, solve, sweep, verify}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    CLI::App* sub = app.get_subcommands().front();
    Context ctx;
    ctx.command = sub->get_name();
    try {
        RunConfig c;
        if (!config_path.empty()) load_config(config_path, c);
        auto given = [&](const char* name) { return sub->count(name) > 0; };
        if (given("--n")) c.n = flags.n;
        if (given("--m")) c.m = flags.m;
        if (given("--lambda")) c.lambda = flags.lambda;
        if (given("--alpha")) c.alpha = flags.alpha;
        if (given("--beta")) c.beta = flags.beta;
        if (given("--p")) c.p = flags.p;
        if (given("--q")) c.q = flags.q;
        if (given("--dim")) c.dim = flags.dim;
        if (given("--radial-order")) c.radial_order = flags.radial_order;
        if (given("--angular-order")) c.angular_order = flags.angular_order;
        if (given("--tol")) c.tol = flags.tol;
        if (given("--max-iter")) c.max_iter = flags.max_iter;
        if (given("--seed")) c.seed = flags.seed;
        if (given("--out")) c.out = flags.out;
        if (given("--threads")) c.threads = flags.threads;
        if (given("--delta")) c.delta = flags.delta;
        if (given("--theta")) c.theta = flags.theta;
        if (given("--kappa")) c.kappa = flags.kappa;
        if (given("--schedule")) c.schedule = flags.schedule;
        if (given("--suite")) {
            c.suite.clear();
            std::stringstream ss(suite_csv);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) c.suite.push_back(item);
            if (c.suite.empty()) throw ConfigError("empty suite list");
        }
        if (c.threads < 0) throw ConfigError("threads must be >= 0");
        if (c.threads > 0) set_num_threads(c.threads);
        ctx.cfg = c;
        ctx.config_hash = text_hash(effective_config(c, ctx.command).dump());
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (ctx.command == "constants") return cmd_constants(ctx);
        if (ctx.command == "solve") return cmd_solve(ctx);
        if (ctx.command == "sweep") return cmd_sweep(ctx);
        return cmd_verify(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const RangeError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const BalanceError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NoConvergence& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ctx.command == "verify" ? kExitVerify : kExitSolver;
    }
}
