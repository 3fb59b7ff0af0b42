#pragma once

#include <vector>

#include "feynprop/model.hpp"

namespace feynprop {

/*!
 * Scalar data entering the integrated majorant of a series term.
 *
 * The coupling g is folded into both measures: m1 atoms carry |g c_l| and
 * m2_total is |g| sum_j |g_j|, so term_majorant bounds the term values
 * including their g^n factor.
 */
struct BoundContext {
    struct Atom {
        double alpha = 0.0;
        double weight = 0.0;  // |g c_l|
    };

    double b = 0.0;           // max(a, |x|, |y|), a = max |delta location|
    double theta_norm = 0.0;  // appendix_norm of theta on [t0, t]
    double dt = 0.0;
    double x_abs = 0.0;
    std::vector<Atom> m1;
    double m2_total = 0.0;

    // sum_l |g c_l| exp(C |alpha_l|)
    double m1_weight(double c) const;
    // argument at which m1_weight enters the majorant: |x| + 4b + dt + |||theta|||^2
    double m1_argument() const;
};

BoundContext make_bound_context(const TestFunction& theta, const PotentialSpec& p,
                                const PropagatorQuery& q);

// int over Delta_n of prod_{j=1}^{n+1} (2 pi (tau_j - tau_{j-1}))^(-1/2)
//   = (1/sqrt 2)^(n+1) dt^((n-1)/2) / Gamma((n+1)/2).
double simplex_weight_closed_form(int n, double dt);
double log_simplex_weight_closed_form(int n, double dt);

/*!
 * exp(2 |||theta|||^2 + b^2) dt^(n-k) W(k, dt) m2_total^k m1_weight(C)^(n-k) / (n-k)!
 * with W = simplex_weight_closed_form and C = ctx.m1_argument(). Requires
 * 0 <= k <= n.
 */
double term_majorant(int n, int k, const BoundContext& ctx);

// sum_k term_majorant(n, k, ctx), evaluated as the n-th coefficient of the
// product of the two generating series (log-space convolution).
double cauchy_coefficient(int n, const BoundContext& ctx);

// sum_{n > N} cauchy_coefficient(n, ctx), summed until the increment falls
// below 1e-16 of the running sum. +inf if the sum overflows.
double tail_bound(int N, const BoundContext& ctx);

}  // namespace feynprop
