#pragma once
#include <optional>
#include <utility>

namespace rhls {

inline constexpr double kBalanceTol = 1e-12;

// Unvalidated exponent tuple; at most one of p, q may be absent.
struct ExponentInput {
    int n = 1;
    int m = 1;
    double lambda = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    std::optional<double> p;
    std::optional<double> q;
};

enum class BalanceMode {
    enforce, // scaling balance must hold (whole-space / conformal problems)
    free     // subcritical ball problems: p, q independent, both required
};

struct ExponentSet {
    int n = 1;
    int m = 1;
    double lambda = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double p = 0.0;
    double q = 0.0;
    double p_conj = 0.0; // p' = p/(p-1) < 0
    double q_conj = 0.0; // r = q' = q/(q-1) < 0
    double theta = 0.0;  // 1/(1-p)
    double kappa = 0.0;  // 1/(1-q)
    bool p_conformal = false; // p equals p_alpha bit-for-bit
    bool q_conformal = false;

    int dim() const { return n + m; }
};

double balance_residual(int n, int m, double lambda, double alpha, double beta, double p, double q);

ExponentSet validate_exponents(const ExponentInput& in, BalanceMode mode = BalanceMode::enforce);

// (p_alpha, q_beta) = 2(n+m)/(2(n+m) + 2alpha - lambda), likewise for beta.
std::pair<double, double> conformal_exponents(int n, int m, double lambda, double alpha, double beta);

// (n+m)/(theta-1) + (n+m)/(kappa-1) - (alpha+beta-lambda).
double pohozaev_defect(const ExponentSet& set);
double pohozaev_defect(int n, int m, double lambda, double alpha, double beta, double theta, double kappa);

// Validated set at (p_alpha, q_beta).
ExponentSet conformal_set(int n, int m, double lambda, double alpha, double beta);

// p = p_alpha (1 - delta), q = q_beta (1 - delta), balance free.
ExponentSet subcritical_set(int n, int m, double lambda, double alpha, double beta, double delta);

} // namespace rhls
