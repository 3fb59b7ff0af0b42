#pragma once

#include <string>
#include <vector>

#include "feynprop/bounds.hpp"
#include "feynprop/model.hpp"
#include "feynprop/quadrature.hpp"

namespace feynprop {

// One (n, k) contribution: k delta pins, n - k exponential insertions.
struct SeriesTerm {
    int n = 0;
    int k = 0;
    Complex value{0.0, 0.0};
    double majorant = 0.0;
    double mc_stderr = 0.0;
};

struct StopCriteria {
    int max_order = 10;
    double tail_tol = 1e-6;
};

struct PropagatorResult {
    PropagatorQuery query;
    TestFunction theta;
    QuadratureSpec spec;
    // terms[n] holds k = 0..n
    std::vector<std::vector<SeriesTerm>> terms;
    // K_n^(theta) for n = 0..N
    std::vector<Complex> order_values;
    // partial_sums[N] = sum_{n <= N} order_values[n]
    std::vector<Complex> partial_sums;
    // tail_bound(N) times |boundary phase|
    double tail = 0.0;
    bool converged = true;
    // root-sum-square of all Monte Carlo standard errors entering K
    double mc_stderr = 0.0;
    std::vector<std::string> diagnostics;

    // N, or -1 for the empty (t <= t0) result.
    int orders_used() const { return static_cast<int>(order_values.size()) - 1; }
    Complex value() const { return partial_sums.empty() ? Complex{} : partial_sums.back(); }
};

/*!
 * (-i)^n / (n-k)! * g^n * sum over ordered delta assignments (prod g_j)
 *   * int_{Delta_k} int_{[t0,t]^(n-k)} sum over exp assignments (prod c_l) phi_T.
 *
 * Throws the quadrature or overflow error with (n, k, assignment) context;
 * NumericalError if |value| exceeds the majorant by more than 1e-8 relative
 * plus six Monte Carlo standard errors.
 */
SeriesTerm term_value(int n, int k, const TestFunction& theta, const PotentialSpec& p,
                      const PropagatorQuery& q, const QuadratureSpec& spec);

// Theta(t - t0) exp((i/2) int_{[t0,t]^c} theta^2 + i y theta(t0) - i x theta(t)).
Complex boundary_phase(const TestFunction& theta, const PropagatorQuery& q);

// True if theta is nonzero somewhere outside [t0, t].
bool support_exceeds_window(const TestFunction& theta, const PropagatorQuery& q);

// sum_k term_value(n, k) times boundary_phase.
Complex k_n_theta(int n, const TestFunction& theta, const PotentialSpec& p,
                  const PropagatorQuery& q, const QuadratureSpec& spec);

/*!
 * Sums K_n^(theta) for n = 0, 1, ... until tail_bound(N) < tail_tol or
 * N = max_order; in the latter case converged is false. Returns an empty
 * result with zero value for t <= t0.
 */
PropagatorResult propagator(const TestFunction& theta, const PotentialSpec& p,
                            const PropagatorQuery& q, const QuadratureSpec& spec,
                            const StopCriteria& stop = {});

}  // namespace feynprop
