#pragma once
#include <optional>
#include <vector>

#include "rhls/functional.hpp"
#include "rhls/special.hpp"
#include "rhls/system.hpp"

namespace rhls {

struct SolveOptions {
    int max_iter = 500;
    double tol = 1e-10;      // relative quotient change between full sweeps
    double el_tol = 1e-9;    // relative sup residual of both Euler-Lagrange equations
    double delta_min = 1e-3; // p <= p_alpha - delta_min, q <= q_beta - delta_min
    double damping = 0.0;    // f <- f_old^damping f_new^{1-damping}; 0 is exact best response
    std::optional<Field> warm_start_g;
};

struct SolveReport {
    Field f, g; // quasi_norm(f,p) = quasi_norm(g,q) = 1
    double c_star = 0.0;
    std::vector<double> quotient_history; // one entry per half-step
    double el_residual = 0.0;
    double el_residual_f = 0.0;
    double el_residual_g = 0.0;
    double max_increase = 0.0; // largest quotient increase between consecutive half-steps
    double min_f = 0.0;
    double min_g = 0.0;
    int iterations = 0;
    bool converged = false;
};

// f proportional to (T g)^{1/(p-1)}, normalized.
Field best_response_f(const Field& g, const BallOperator& op, double p);
// g proportional to (T* f)^{1/(q-1)}, normalized.
Field best_response_g(const Field& f, const BallOperator& op, double q);
Field best_response_f(const Field& g, const ExponentSet& set, const QuadratureRule& rule);
Field best_response_g(const Field& f, const ExponentSet& set, const QuadratureRule& rule);

// Quotient at exponents (p, q) using op's kernel and weights.
double quotient_at(const Field& f, const Field& g, const BallOperator& op, double p, double q);

// Never throws NoConvergence; check report.converged (see require_converged).
SolveReport solve_subcritical(const ExponentSet& set, const BallOperator& op, const SolveOptions& opts = {});
SolveReport solve_subcritical(const ExponentSet& set, const QuadratureRule& rule, const SolveOptions& opts = {});
void require_converged(const SolveReport& report);

struct SweepPoint {
    double delta = 0.0;
    double p = 0.0;
    double q = 0.0;
    double c_star = 0.0;
    double el_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct SweepReport {
    std::vector<SweepPoint> points;
    std::vector<double> richardson; // first order in delta, one per consecutive pair
    double n_est = 0.0;
    double stability = 0.0; // |last two Richardson values|
    ConstantBand band;
    bool in_band = false;
    bool converged = false;
};

// p_j = p_alpha (1 - delta_j), q_j = q_beta (1 - delta_j); warm start from the previous level.
SweepReport critical_sweep(const ExponentSet& base, const std::vector<double>& schedule, const QuadratureRule& rule,
                           const SolveOptions& opts = {}, bool warm_start = true);

// First-order Richardson limit from (delta_a, c_a), (delta_b, c_b).
double richardson_first_order(double delta_a, double c_a, double delta_b, double c_b);

// max over node pairs |f_i - f_j| / |zeta_i - zeta_j|^exponent.
double holder_quotient(const Field& f, const QuadratureRule& rule, double exponent = 0.5);

struct BlowupOptions {
    std::optional<double> rho;     // overrides the normalizing scale
    bool require_conformal = true; // false admits subcritical pairs as a diagnostic
    double boundary_distance = 1e-6;
};

// U(X) = rho^{a_u} u(rho X), V(X) = rho^{a_v} v(rho X) with
// a_u = -S(kappa-1)/(theta kappa-1), a_v = -S(theta-1)/(theta kappa-1), S = n+1+alpha+beta-lambda.
struct BlowupReport {
    double rho = 1.0;
    double a_u = 0.0;
    double a_v = 0.0;
    BallPoint u_max_location;
    std::size_t max_index = 0; // first node among ties
    bool near_boundary = false;
    HalfSpacePoint normalization_point; // T(max location) / rho
    double u_at_normalization = 0.0;
    HalfSpaceFn U, V;
    double bound_constant = 0.0; // two-sided growth constant over U and V
};

// f, g an Euler-Lagrange pair with multiplier c (SolveReport::c_star).
BlowupReport blowup_renormalize(const Field& f, const Field& g, const ExponentSet& set, const QuadratureRule& rule,
                                double c, const BlowupOptions& opts = {});

} // namespace rhls
