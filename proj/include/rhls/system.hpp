#pragma once
#include <vector>

#include "rhls/functional.hpp"

namespace rhls {

// Nystrom form of the half-space system
//   u(X) = t^a int z^b |X - Y|^{-lambda} v^{-kappa}(Y) dY,
//   v(Y) = z^b int t^a |X - Y|^{-lambda} u^{-theta}(X) dX,
// on the images Y_j = T(zeta_j) with weights W_j phi_j^{n+1}.
class HalfSpaceSystem {
public:
    // Transport of a ball Euler-Lagrange pair with multiplier c. Only conformal exponents give a
    // solution; require_conformal = false admits subcritical pairs for diagnostics.
    // u = A f_H^{p-1}, v = B g_H^{q-1}, log A = log c (1-kappa)/(1-kappa theta), log B = log c (1-theta)/(1-kappa theta).
    static HalfSpaceSystem from_ball_pair(const Field& f, const Field& g, const ExponentSet& set,
                                          const QuadratureRule& rule, double c, bool require_conformal = true);

    // u from the first equation with the given v; v at the nodes is v_src^{-1/kappa}.
    static HalfSpaceSystem from_v_source(const std::vector<double>& v_src, const ExponentSet& set,
                                         const QuadratureRule& rule);

    const ExponentSet& set() const { return set_; }
    const HalfSpaceNodes& nodes() const { return nodes_; }
    int dim() const { return nodes_.dim; }

    const std::vector<double>& u_nodes() const { return u_nodes_; }
    const std::vector<double>& v_nodes() const { return v_nodes_; }
    const std::vector<double>& u_source() const { return u_src_; } // u^{-theta}
    const std::vector<double>& v_source() const { return v_src_; } // v^{-kappa}

    // Replaces node values; sources follow.
    void set_node_values(std::vector<double> u, std::vector<double> v);

    double u(const double* X) const;
    double v(const double* X) const;
    // Returns u(X) and writes X . grad u(X).
    double u_dilation(const double* X, double& x_grad) const;
    double v_dilation(const double* X, double& x_grad) const;

    HalfSpaceFn u_fn() const;
    HalfSpaceFn v_fn() const;

private:
    HalfSpaceSystem(const ExponentSet& set, const QuadratureRule& rule);
    // t^w_self sum_j W_j z_j^w_src src_j |X - Y_j|^{-lambda}, with optional dilation derivative.
    double potential(const double* X, const std::vector<double>& src_w, double w_self, double* x_grad) const;

    ExponentSet set_;
    HalfSpaceNodes nodes_;
    std::vector<double> u_nodes_, v_nodes_, u_src_, v_src_;
    std::vector<double> src_u_eq_, src_v_eq_; // W_j z_j^b v_src_j and W_j t_j^a u_src_j
};

} // namespace rhls
