#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rhls/functional.hpp"
#include "rhls/system.hpp"

namespace rhls {

// pass <=> |residual| <= tolerance. One-sided checks store the violation in residual
// and the signed gap in metadata["gap"].
struct CheckReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::map<std::string, double> metadata;
    std::string note;
};

CheckReport make_report(std::string name, double lhs, double rhs, double residual, double tolerance);

// int f h >= ||f||_p ||h||_{p'}; gap = lhs - rhs.
CheckReport check_reversed_holder(const Field& f, const Field& h, double p, const QuadratureRule& rule,
                                  double tolerance = 1e-10);

enum class HardyMode { inner, outer };

struct HardyOptions {
    double rho_min = 1e-6;
    double rho_max = 1e6;
    int panels = 96;
    int order = 12;
    bool truncate_only = false; // integrate over [rho_min, rho_max] without tails
};

using RadialFn = std::function<double(double)>;

// Radial profiles only. inner: W = z^{br}|.|^{-lambda r}, U = t^{-ap};
// outer: W = z^{br}, U = t^{-ap}|.|^{lambda p}. Passes iff lhs >= C rhs with
// C = lower_factor_conj(p', r) * (d1 or d2). Divergent integrals are resolved exactly:
// an infinite integral of G^r gives lhs = 0.
CheckReport check_reversed_hardy(const RadialFn& f, const ExponentSet& set, HardyMode mode,
                                 const HardyOptions& opts = {});

// (r/|X - xi|)^lambda |X^{xi,r} - Y|^{-lambda} - |X - Y|^{-lambda}.
double kernel_K(const Vec& xi, double r, const HalfSpacePoint& Y, const HalfSpacePoint& X, double lambda);

struct KelvinOptions {
    int radial_order = 48;
    int angular_order = 48;
    double tolerance = 1e-5;
};

// u(X) = t^a int z^b v^{-kappa}(Y) |X - Y|^{-lambda} dY through the ball rule; the
// right side integrates over B_r^+(xi) with a polar product rule centred at xi.
CheckReport kelvin_identity_residual(const HalfSpaceFn& v, const Vec& xi, double r,
                                     const std::vector<HalfSpacePoint>& test_points, const ExponentSet& set,
                                     const QuadratureRule& rule, const KelvinOptions& opts = {});

// A = int v^{1-kappa}, B = double integral, C = int u^{1-theta}.
CheckReport fubini_check(const HalfSpaceSystem& sys, double tolerance = 1e-4);

struct PohozaevOptions {
    std::vector<std::pair<double, double>> ladder = {{0.1, 5.0}, {0.05, 10.0}}; // (epsilon, R), coarse to fine
    std::optional<double> theta;  // coefficient exponents; default the system's
    std::optional<double> kappa;
    int radial_nodes = 120;
    int angular_level = 60;
    double tolerance = 1e-3;
};

// residual = [D_phi(theta, kappa) - Q_phi] / C with
//   D_phi = -1/(1-theta) int u^{1-theta}((n+1) phi + X.grad phi) - (same for v, kappa),
//   Q_phi = int phi (u^{-theta} X.grad u + v^{-kappa} X.grad v),
// X.grad u taken from the integral representation; first-order extrapolated over the ladder.
CheckReport pohozaev_residual(const HalfSpaceSystem& sys, const PohozaevOptions& opts = {});

struct RatioSample {
    double radius = 0.0;
    double angle = 0.0;
    double u_ratio = 0.0;
    double v_ratio = 0.0;
};

struct AsymptoticsReport {
    double a = 0.0;
    double b = 0.0;
    std::vector<RatioSample> ratio_samples;
    double bound_constant = 0.0;
    CheckReport check;
};

struct AsymptoticsOptions {
    std::vector<double> radii = {10.0, 100.0, 1000.0};
    std::vector<double> angles = {0.5 * 3.141592653589793, 3.141592653589793 / 3.0, 3.141592653589793 / 6.0};
    double tolerance = 1e-2;
};

// a = int z^b v^{-kappa}, b = int t^a u^{-theta} through the pullback of rule; ratios sample u and v.
AsymptoticsReport asymptotic_constants(const HalfSpaceFn& u, const HalfSpaceFn& v, const ExponentSet& set,
                                       const QuadratureRule& rule, const AsymptoticsOptions& opts = {});
AsymptoticsReport asymptotic_constants(const HalfSpaceSystem& sys, const AsymptoticsOptions& opts = {});

// max over the sample grid of max(R, 1/R), R = w(X) / (t^e (1 + |X|^{-lambda})).
double growth_bound_constant(const std::function<double(const double*)>& w, double e, double lambda, int dim);

struct ProfileParams {
    double c = 0.0;
    double d = 0.0;
    Vec xi0;
    double exponent = 0.0;
};

enum class ProfileKind { f_profile, g_profile };

struct TraceSample {
    Vec x;
    double value = 0.0;
};

double profile_exponent(const ExponentSet& set, ProfileKind which);
double profile_value(const ProfileParams& prm, const Vec& x);

// Boundary points x on [-half_width, half_width]^n; points per axis default 41 (n=1) or 21.
std::vector<Vec> trace_grid(int n, double half_width = 6.0, int points = 0);

// Boundary trace of an Euler-Lagrange pair with multiplier c, with the t-power removed:
//   f: phi(x)^{-(n+1)/p} (S_g(T(x,0))/c)^{-theta},  S_g(zeta) = sum_j W_j w_j^b |zeta - eta_j|^{-lambda} g_j,
// phi(x) = 1 + |x|^2/4; the g trace swaps (f, alpha, kappa, q) in.
std::vector<TraceSample> solver_trace(const Field& f, const Field& g, const ExponentSet& set,
                                      const QuadratureRule& rule, double c, ProfileKind which,
                                      const std::vector<Vec>& xs);

// Least squares on relative residuals; coarse (d, xi0) grid then Levenberg-Marquardt on (c, d, xi0).
std::pair<ProfileParams, CheckReport> boundary_profile_fit(const std::vector<TraceSample>& trace,
                                                           const ExponentSet& set, ProfileKind which,
                                                           double tolerance = 1e-2);

struct SphereScan {
    double r_bar = 0.0; // +inf when every radius passes
    std::vector<std::pair<double, double>> minima; // (r, min of u - u_{xi,r}); +inf when no samples
    CheckReport check;
};

// s is the homogeneity exponent of the Kelvin transform (lambda - 2 alpha for u).
SphereScan moving_sphere_scan(const HalfSpaceFn& u, double s, const Vec& xi, const std::vector<double>& r_grid,
                              const std::vector<HalfSpacePoint>& sample_grid, double threshold = -1e-8);

// Distance, weight, round-trip and Kelvin identities plus T(x1) = (0,...,0,2).
std::vector<CheckReport> check_geometry_identities(int dim, int samples, std::uint64_t seed, double tolerance = 1e-12);

// kernel_K > 0 on random pairs inside B_r^+(xi).
CheckReport check_kernel_positivity(int dim, double lambda, int samples, std::uint64_t seed);

} // namespace rhls
