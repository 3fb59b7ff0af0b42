#pragma once

#include <span>
#include <vector>

#include "feynprop/model.hpp"

namespace feynprop {

// k Donsker-delta pins: the path passes x_j at time tau_j,
// t0 < tau_1 < ... < tau_k < t. Boundary convention tau_0 = t0, x_0 = y,
// tau_{k+1} = t, x_{k+1} = x.
struct PinConfiguration {
    std::vector<double> taus;
    std::vector<double> xs;

    std::size_t size() const { return taus.size(); }
    // DomainError on length mismatch or violated strict time ordering.
    void validate(double t0, double t) const;
};

// n - k exponential insertions exp(alpha_l x(s_l)), s_l in [t0, t].
struct ExpInsertion {
    std::vector<double> ss;
    std::vector<double> alphas;

    std::size_t size() const { return ss.size(); }
    void validate(double t0, double t) const;
};

// T-transform of the free integrand times k pins, evaluated at a (possibly
// shifted) argument. Reduces to free_T for k = 0.
Complex multi_delta_T(const ShiftedArgument& xi, const PinConfiguration& pins,
                      const PropagatorQuery& q);

struct PhiOptions {
    // Drop prod_j (2 pi (tau_j - tau_{j-1}))^(-1/2) from the result, keeping
    // the e^{-i pi/4} phases. Quadrature rules that absorb this factor into
    // their weights integrate the stripped value.
    bool strip_singular_weight = false;
    // RangeError when the real part of the total exponent exceeds this.
    double exponent_cap = 700.0;
};

/*!
 * T-transform of I0 * exp(sum_l alpha_l x(s_l)) * prod_j delta(x(tau_j) - x_j).
 *
 * Equal to multi_delta_T at theta + i sum_l alpha_l 1_{(s_l,t]} times
 * exp(x sum_l alpha_l), but assembled directly from integrals of theta and
 * interval overlaps, so the shifted function is never built. The whole
 * exponent is accumulated before a single exp().
 */
Complex phi_T(const TestFunction& theta, const PinConfiguration& pins,
              const ExpInsertion& ins, const PropagatorQuery& q,
              const PhiOptions& opts = {});

// Same without input validation; the series integrands call this per node.
Complex phi_T_unchecked(const TestFunction& theta, std::span<const double> taus,
                        std::span<const double> xs, std::span<const double> ss,
                        std::span<const double> alphas, const PropagatorQuery& q,
                        const PhiOptions& opts = {});

// phi_T for theta = 0 and no insertions, with the singular weight
// stripped, as a function of possibly complex interval lengths
// dtau_1..dtau_{k+1} (pins xs between y and x):
//   prod_j e^{-i pi/4} exp(i (x_j - x_{j-1})^2 / (2 dtau_j)).
// This is the holomorphic continuation used on deformed time contours.
Complex pin_chain_stripped(std::span<const Complex> spacings, std::span<const double> xs,
                           const PropagatorQuery& q, const PhiOptions& opts = {});

/*!
 * Majorant C of |phi_T|:
 *
 *   prod_j (2 pi dtau_j)^(-1/2) exp(2 |||theta|||^2)
 *     * exp((|x| + t - t0 + |||theta|||^2) sum_l |alpha_l|)
 *     * exp(4 M sum_l |alpha_l|) exp(M^2),
 *
 * with |||.||| the appendix_norm on [t0, t] and M = max_j |x_j| over pins
 * and both endpoints. Independent of the insertion times.
 */
double pointwise_bound(const TestFunction& theta, const PinConfiguration& pins,
                       const ExpInsertion& ins, const PropagatorQuery& q);

}  // namespace feynprop
