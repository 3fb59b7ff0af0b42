#include "feynprop/free_kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "feynprop/errors.hpp"

namespace feynprop {

namespace {

const Complex kPhaseMinusQuarterPi = std::polar(1.0, -std::numbers::pi / 4.0);

double support_lo(const ShiftedArgument& xi, double t0)
{
    const auto& b = xi.base();
    return b.is_zero() ? t0 : std::min(t0, b.support_begin());
}

double support_hi(const ShiftedArgument& xi, double t)
{
    const auto& b = xi.base();
    return b.is_zero() ? t : std::max(t, b.support_end());
}

// log of free_green without the Heaviside factor, for dt > 0
Complex log_free_green(const ShiftedArgument& xi, const PropagatorQuery& q)
{
    const double dt = q.dt();
    const auto in = piecewise_integrals(xi, q.t0, q.t);
    const Complex shift = in.first + q.x - q.y;
    return Complex{-0.5 * std::log(2.0 * std::numbers::pi * dt), -std::numbers::pi / 4.0} -
           0.5 * kI * in.second + kI / (2.0 * dt) * shift * shift +
           kI * (q.y * xi(q.t0) - q.x * xi(q.t));
}

}  // namespace

Complex inv_sqrt_2pi_i(double dt)
{
    return kPhaseMinusQuarterPi / std::sqrt(2.0 * std::numbers::pi * dt);
}

Complex free_propagator(double x, double y, double dt)
{
    if (!(dt > 0.0)) return {};
    const double d = x - y;
    return inv_sqrt_2pi_i(dt) * std::exp(kI * (d * d / (2.0 * dt)));
}

Complex free_T(const ShiftedArgument& xi, const PropagatorQuery& q)
{
    if (!q.forward()) throw DomainError("free_T: requires t > t0");
    const double dt = q.dt();
    const auto window = piecewise_integrals(xi, q.t0, q.t);
    const auto whole = piecewise_integrals(xi, support_lo(xi, q.t0), support_hi(xi, q.t));
    const Complex shift = window.first + q.x - q.y;
    return inv_sqrt_2pi_i(dt) *
           std::exp(-0.5 * kI * whole.second + kI / (2.0 * dt) * shift * shift);
}

Complex free_green(const ShiftedArgument& xi, const PropagatorQuery& q)
{
    if (!q.forward()) return {};
    return std::exp(log_free_green(xi, q));
}

Complex free_green(const TestFunction& theta, const PropagatorQuery& q)
{
    return free_green(ShiftedArgument(theta, q.t), q);
}

KernelValue free_green_value(const ShiftedArgument& xi, const PropagatorQuery& q)
{
    if (!q.forward()) {
        return {Complex{}, -std::numeric_limits<double>::infinity()};
    }
    const Complex lg = log_free_green(xi, q);
    return {std::exp(lg), lg.real()};
}

//---------------------------------------------------------------------------//

ResidualReport schrodinger_residual(const KernelEvaluator& kernel,
                                    const PropagatorQuery& q,
                                    const TestFunction& theta,
                                    const PotentialSpec& v, double h_x, double h_t,
                                    Stencil stencil)
{
    if (!(h_x > 0.0) || !(h_t > 0.0)) {
        throw DomainError("schrodinger_residual: steps must be positive");
    }
    if (q.t - q.t0 < 10.0 * h_t) {
        throw DomainError("schrodinger_residual: point too close to t0 (need t - t0 >= 10 h_t)");
    }
    for (const auto& d : v.delta_atoms) {
        if (std::abs(q.x - d.location) < 10.0 * h_x) {
            throw DomainError(
                "schrodinger_residual: point within 10 h_x of a delta atom; "
                "use delta_jump_residual there");
        }
    }

    const double x = q.x;
    const double t = q.t;
    const Complex k0 = kernel(x, t);
    Complex kt, kxx, kx;
    if (stencil == Stencil::second_order) {
        const Complex tp = kernel(x, t + h_t);
        const Complex tm = kernel(x, t - h_t);
        const Complex xp = kernel(x + h_x, t);
        const Complex xm = kernel(x - h_x, t);
        kt = (tp - tm) / (2.0 * h_t);
        kx = (xp - xm) / (2.0 * h_x);
        kxx = (xp - 2.0 * k0 + xm) / (h_x * h_x);
    } else {
        const Complex tp = kernel(x, t + h_t);
        const Complex tm = kernel(x, t - h_t);
        const Complex tp2 = kernel(x, t + 2 * h_t);
        const Complex tm2 = kernel(x, t - 2 * h_t);
        const Complex xp = kernel(x + h_x, t);
        const Complex xm = kernel(x - h_x, t);
        const Complex xp2 = kernel(x + 2 * h_x, t);
        const Complex xm2 = kernel(x - 2 * h_x, t);
        kt = (-tp2 + 8.0 * tp - 8.0 * tm + tm2) / (12.0 * h_t);
        kx = (-xp2 + 8.0 * xp - 8.0 * xm + xm2) / (12.0 * h_x);
        kxx = (-xp2 + 16.0 * xp - 30.0 * k0 + 16.0 * xm - xm2) / (12.0 * h_x * h_x);
    }

    const Complex forcing = theta.slope(t) * x;
    const Complex v1 = eval_potential(v, x);
    const Complex r = kI * kt + 0.5 * kxx - forcing * k0 - v1 * k0;

    ResidualReport out;
    out.residual = std::abs(r);
    const double mag = std::abs(k0);
    if (mag > 0.0) {
        out.wavenumber = std::abs(kx) / mag;
        out.frequency = std::abs(kt) / mag;
    }
    out.step_warning = out.wavenumber * h_x > 0.5 || out.frequency * h_t > 0.5;
    return out;
}

JumpReport delta_jump_residual(const KernelEvaluator& kernel, double location,
                               double coupling, double t, double h_x)
{
    if (!(h_x > 0.0)) throw DomainError("delta_jump_residual: step must be positive");
    const Complex k0 = kernel(location, t);
    const Complex p1 = kernel(location + h_x, t);
    const Complex p2 = kernel(location + 2 * h_x, t);
    const Complex m1 = kernel(location - h_x, t);
    const Complex m2 = kernel(location - 2 * h_x, t);
    const Complex right = (-3.0 * k0 + 4.0 * p1 - p2) / (2.0 * h_x);
    const Complex left = (3.0 * k0 - 4.0 * m1 + m2) / (2.0 * h_x);
    JumpReport out;
    out.jump = right - left;
    out.expected = 2.0 * coupling * k0;
    out.mismatch = std::abs(out.jump - out.expected);
    return out;
}

}  // namespace feynprop
