#pragma once
#include "rhls/params.hpp"

namespace rhls {

struct ConstantBand {
    double d1 = 0.0;
    double d2 = 0.0;
    double lower_factor = 0.0; // ((pq-p)/(2pq-p-q))^{(1-q)/q} ((pq-q)/(2pq-p-q))^{(1-p)/p}
    double n_lower = 0.0;      // lower_factor * min(d1, d2)
    double n_upper = 0.0;      // min(d1, d2)
    double lower_factor_conj = 0.0; // (p'/(p'+r))^{-1/r} (r/(p'+r))^{-1/p'}
    double lower_factor_mismatch = 0.0; // |lower_factor - lower_factor_conj|
};

// Relative error < 1e-13 on (0, 30]; PoleError at nonpositive integers.
double gamma(double x);

// J(n,s) = pi^{n/2} Gamma((s+1)/2) / Gamma((n+s+1)/2), s > -1.
double angular_constant(int n, double s);

// Integral of |omega'|^s over S^{n+m-1}, omega' the last m coordinates, s > -m.
double angular_constant_general_m(int n, int m, double s);

double lower_factor(double p, double q);
double lower_factor_conj(double p_conj, double r);

// Requires m == 1 and the scaling balance.
ConstantBand constant_band(const ExponentSet& set);

// Codimension-m form; at m == 1 equals constant_band scaled by 2^{1/p' + 1/r} in d1, d2.
ConstantBand constant_band_general_m(const ExponentSet& set);

} // namespace rhls
