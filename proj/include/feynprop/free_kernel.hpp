#pragma once

#include <functional>

#include "feynprop/model.hpp"

namespace feynprop {

// (2 pi i dt)^(-1/2) on the principal branch: e^{-i pi/4} / sqrt(2 pi dt).
Complex inv_sqrt_2pi_i(double dt);

// Standard free-particle propagator, zero for dt <= 0.
Complex free_propagator(double x, double y, double dt);

// T-transform of the free integrand at xi:
//   (2 pi i dt)^(-1/2) exp(-(i/2) int_R xi^2)
//     * exp( i/(2 dt) (int_{t0}^{t} xi + x - y)^2 ).
// Throws DomainError unless t > t0.
Complex free_T(const ShiftedArgument& xi, const PropagatorQuery& q);

// Forced free Green function K0^(xi)(x,t|y,t0); zero for t <= t0.
Complex free_green(const ShiftedArgument& xi, const PropagatorQuery& q);
Complex free_green(const TestFunction& theta, const PropagatorQuery& q);

struct KernelValue {
    Complex value{0.0, 0.0};
    // log|value|, -inf for an exact zero
    double log_magnitude = 0.0;
};

// free_green assembled in log space; log_magnitude survives when the value
// itself under- or overflows.
KernelValue free_green_value(const ShiftedArgument& xi, const PropagatorQuery& q);

//---------------------------------------------------------------------------//
// Finite-difference Schrodinger residual
//---------------------------------------------------------------------------//

using KernelEvaluator = std::function<Complex(double x, double t)>;

enum class Stencil { second_order, fourth_order };

struct ResidualReport {
    double residual = 0.0;
    // |K_x / K| and |K_t / K| at the point
    double wavenumber = 0.0;
    double frequency = 0.0;
    // Set when h_x * wavenumber or h_t * frequency exceeds 0.5.
    bool step_warning = false;
};

/*!
 * |i K_t + K_xx / 2 - theta'(t) x K - V1(x) K| at (q.x, q.t).
 *
 * Derivatives by central differences with steps h_x, h_t. The delta part
 * of V acts only at its atoms, so the point must be at least 10 h_x away
 * from every atom and at least 10 h_t after t0; DomainError otherwise. Use
 * delta_jump_residual at the atoms themselves.
 */
ResidualReport schrodinger_residual(const KernelEvaluator& kernel,
                                    const PropagatorQuery& q,
                                    const TestFunction& theta,
                                    const PotentialSpec& v, double h_x, double h_t,
                                    Stencil stencil = Stencil::second_order);

struct JumpReport {
    Complex jump{0.0, 0.0};      // K_x(y_j+) - K_x(y_j-)
    Complex expected{0.0, 0.0};  // 2 g g_j K(y_j)
    double mismatch = 0.0;       // |jump - expected|
};

// Derivative jump across one delta atom at time t, by second-order
// one-sided differences with step h_x. `coupling` is the atom weight
// including the global g.
JumpReport delta_jump_residual(const KernelEvaluator& kernel, double location,
                               double coupling, double t, double h_x);

}  // namespace feynprop
