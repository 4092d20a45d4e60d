#pragma once
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rhls/geometry.hpp"

namespace rhls {

// Product rule on B(x1, 1) in R^dim; nodes stored row-major (size() x dim).
struct QuadratureRule {
    int dim = 0;
    int radial_order = 0;
    int angular_order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::string id;

    std::size_t size() const { return weights.size(); }
    const double* node(std::size_t i) const { return nodes.data() + i * static_cast<std::size_t>(dim); }
    BallPoint point(std::size_t i) const;
    // Highest total degree integrated exactly.
    int exact_degree() const;
};

struct MCEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

double ball_volume(int dim);

// dim 2: Gauss-Legendre in rho^2 x offset trapezoid in angle.
// dim 3: Gauss-Legendre in rho x Gauss-Legendre in cos(polar) x offset trapezoid in azimuth.
QuadratureRule build_ball_rule(int dim, int radial_order, int angular_order);

// Hex SHA-256 prefix over the rule's shape, nodes and weights.
std::string rule_hash(int dim, int radial_order, int angular_order, const std::vector<double>& nodes,
                      const std::vector<double>& weights);

// First 8 bytes of SHA-256, hex.
std::string text_hash(const std::string& text);

std::string rule_to_csv(const QuadratureRule& rule);

using BallFn = std::function<double(const BallPoint&)>;
using BallPairFn = std::function<double(const BallPoint&, const BallPoint&)>;

double integrate(std::span<const double> values, const QuadratureRule& rule);
double integrate(const BallFn& f, const QuadratureRule& rule);

// sum_ij w_i w_j F(node_i, node_j); rows in parallel, fixed reduction order.
double double_integral(const BallPairFn& F, const QuadratureRule& rule);

// Uniform rejection sampling in B(x1, 1); identical output for identical seed.
MCEstimate mc_integrate(const BallFn& f, int dim, std::int64_t samples, std::uint64_t seed);

// Nodes and weights of n-point Gauss-Legendre on [a, b], ascending.
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

} // namespace rhls
