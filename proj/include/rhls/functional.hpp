#pragma once
#include <cmath>
#include <string>
#include <vector>

#include "rhls/geometry.hpp"
#include "rhls/params.hpp"
#include "rhls/quad.hpp"

namespace rhls {

// Positive samples at the nodes of one rule.
struct Field {
    std::vector<double> values;
    std::string rule_id;

    std::size_t size() const { return values.size(); }
    static Field constant(const QuadratureRule& rule, double c);
    static Field sample(const QuadratureRule& rule, const BallFn& f);
};

void check_field(const Field& f, const QuadratureRule& rule);

// (int f^p)^{1/p}, p in (0,1).
double quasi_norm(const Field& f, double p, const QuadratureRule& rule);
// (int h^{p'})^{1/p'}, p' < 0.
double neg_quasi_norm(const Field& h, double p_conj, const QuadratureRule& rule);

// Discretized T g(zeta) = w_a(zeta) int w_b(eta) |zeta - eta|^{-lambda} g(eta) d eta,
// with w_s(zeta) = ((1 - |zeta - x1|^2)/2)^s.
class BallOperator {
public:
    BallOperator(const ExponentSet& set, const QuadratureRule& rule);

    const ExponentSet& set() const { return set_; }
    const QuadratureRule& rule() const { return rule_; }
    const std::vector<double>& weight_alpha() const { return wa_; }
    const std::vector<double>& weight_beta() const { return wb_; }
    bool cached() const { return !matrix_.empty(); }

    double kernel(std::size_t i, std::size_t j) const;

    // T_{alpha,beta} g on the nodes.
    Field apply(const Field& g) const;
    // T_{beta,alpha} f: w_b(eta) int w_a(zeta) |zeta - eta|^{-lambda} f(zeta) d zeta.
    Field apply_adjoint(const Field& f) const;

    double bilinear(const Field& f, const Field& g) const;
    double quotient(const Field& f, const Field& g) const;

private:
    // sum_j K(i, j) s[j] in fixed order.
    double row_dot(std::size_t i, const std::vector<double>& s) const;
    Field contract(const std::vector<double>& outer, const std::vector<double>& inner, const Field& x) const;

    ExponentSet set_;
    QuadratureRule rule_;
    std::vector<double> wa_, wb_;
    std::vector<double> matrix_;
};

Field apply_T_operator(const Field& g, const ExponentSet& set, const QuadratureRule& rule);
double bilinear_functional(const Field& f, const Field& g, const ExponentSet& set, const QuadratureRule& rule);
double quotient(const Field& f, const Field& g, const ExponentSet& set, const QuadratureRule& rule);

// Images of the ball nodes under T with the transported weights W_j phi_j^{n+1}.
struct HalfSpaceNodes {
    int dim = 0;
    std::vector<double> points; // row-major, last coordinate t_j = w_j phi_j
    std::vector<double> phi;
    std::vector<double> weights;

    std::size_t size() const { return phi.size(); }
    const double* point(std::size_t j) const { return points.data() + j * static_cast<std::size_t>(dim); }
};

HalfSpaceNodes pullback_nodes(const QuadratureRule& rule);

namespace detail {
// |X - Y|^{-lambda} from the squared distance.
inline double riesz(double d2, double lambda) { return lambda == -2.0 ? d2 : std::pow(d2, -0.5 * lambda); }
// w^s with 0^0 = 1.
inline double wpow(double w, double s) { return s == 0.0 ? 1.0 : std::pow(w, s); }
} // namespace detail

enum class HalfSpaceMode { I_ab, E_lambda };

// Y -> int t^a z^b f(X) |X - Y|^{-lambda} dX (I_ab) or without weights (E_lambda),
// evaluated through the ball chart: dX = phi^{n+1} d zeta.
HalfSpaceFn halfspace_operator(const HalfSpaceFn& f, const ExponentSet& set, const QuadratureRule& rule,
                               HalfSpaceMode mode);

// Half-space quotient of the pullbacks f_H = phi^{-(n+1)/p} f, g_H = phi^{-(n+1)/q} g.
double halfspace_quotient(const Field& f, const Field& g, const ExponentSet& set, const QuadratureRule& rule);

std::string field_to_csv(const Field& f);
Field field_from_csv(const std::string& text, const QuadratureRule& rule);

} // namespace rhls
