#include "feynprop/pinned.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "feynprop/errors.hpp"

namespace feynprop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kQuarterPi = std::numbers::pi / 4.0;

}  // namespace

void PinConfiguration::validate(double t0, double t) const
{
    if (taus.size() != xs.size()) {
        throw DomainError("PinConfiguration: taus and xs differ in length");
    }
    double prev = t0;
    for (double tau : taus) {
        if (!std::isfinite(tau) || !(tau > prev)) {
            throw DomainError("PinConfiguration: pin times must satisfy t0 < tau_1 < ... < tau_k < t");
        }
        prev = tau;
    }
    if (!taus.empty() && !(taus.back() < t)) {
        throw DomainError("PinConfiguration: pin times must satisfy t0 < tau_1 < ... < tau_k < t");
    }
    for (double x : xs) {
        if (!std::isfinite(x)) throw DomainError("PinConfiguration: non-finite pin position");
    }
}

void ExpInsertion::validate(double t0, double t) const
{
    if (ss.size() != alphas.size()) {
        throw DomainError("ExpInsertion: ss and alphas differ in length");
    }
    for (double s : ss) {
        if (!(s >= t0 && s <= t)) {
            throw DomainError("ExpInsertion: insertion times must lie in [t0, t]");
        }
    }
    for (double a : alphas) {
        if (!std::isfinite(a)) throw DomainError("ExpInsertion: non-finite alpha");
    }
}

Complex multi_delta_T(const ShiftedArgument& xi, const PinConfiguration& pins,
                      const PropagatorQuery& q)
{
    if (!q.forward()) throw DomainError("multi_delta_T: requires t > t0");
    pins.validate(q.t0, q.t);

    const auto& base = xi.base();
    const double lo = base.is_zero() ? q.t0 : std::min(q.t0, base.support_begin());
    const double hi = base.is_zero() ? q.t : std::max(q.t, base.support_end());
    Complex exponent = -0.5 * kI * piecewise_integrals(xi, lo, hi).second;
    Complex prefactor{1.0, 0.0};

    const std::size_t k = pins.size();
    double tau_prev = q.t0;
    double x_prev = q.y;
    for (std::size_t j = 0; j <= k; ++j) {
        const double tau = j < k ? pins.taus[j] : q.t;
        const double xj = j < k ? pins.xs[j] : q.x;
        const double dtau = tau - tau_prev;
        const Complex s = piecewise_integrals(xi, tau_prev, tau).first + (xj - x_prev);
        exponent += kI / (2.0 * dtau) * s * s;
        prefactor *= std::polar(1.0 / std::sqrt(kTwoPi * dtau), -kQuarterPi);
        tau_prev = tau;
        x_prev = xj;
    }
    return prefactor * std::exp(exponent);
}

Complex phi_T_unchecked(const TestFunction& theta, std::span<const double> taus,
                        std::span<const double> xs, std::span<const double> ss,
                        std::span<const double> alphas, const PropagatorQuery& q,
                        const PhiOptions& opts)
{
    const std::size_t k = taus.size();
    const std::size_t d = ss.size();
    const double t = q.t;
    const bool has_theta = !theta.is_zero();

    Complex exponent{0.0, 0.0};

    // -(i/2) int_R (theta + i S)^2 with S = sum_l alpha_l 1_{(s_l,t]}:
    //   -(i/2) int theta^2 + sum_l alpha_l int_{s_l}^t theta
    //   + (i/2) sum_{l,m} alpha_l alpha_m (t - max(s_l, s_m))
    if (has_theta) {
        exponent -= 0.5 * kI * theta.integral_sq(theta.support_begin(), theta.support_end());
    }
    double step_sq = 0.0;
    double alpha_sum = 0.0;
    for (std::size_t l = 0; l < d; ++l) {
        alpha_sum += alphas[l];
        if (has_theta) exponent += alphas[l] * theta.integral(ss[l], t);
        step_sq += alphas[l] * alphas[l] * (t - ss[l]);
        for (std::size_t m = l + 1; m < d; ++m) {
            step_sq += 2.0 * alphas[l] * alphas[m] * (t - std::max(ss[l], ss[m]));
        }
    }
    exponent += 0.5 * kI * step_sq;
    exponent += q.x * alpha_sum;

    double log_weight = 0.0;
    double tau_prev = q.t0;
    double x_prev = q.y;
    for (std::size_t j = 0; j <= k; ++j) {
        const double tau = j < k ? taus[j] : t;
        const double xj = j < k ? xs[j] : q.x;
        const double dtau = tau - tau_prev;
        // int_{tau_{j-1}}^{tau_j} 1_{(s_l,t]} = max(0, tau_j - max(tau_{j-1}, s_l))
        double overlap = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
            overlap += alphas[l] * std::max(0.0, tau - std::max(tau_prev, ss[l]));
        }
        Complex s{xj - x_prev, overlap};
        if (has_theta) s += theta.integral(tau_prev, tau);
        exponent += kI / (2.0 * dtau) * s * s;
        if (!opts.strip_singular_weight) log_weight -= 0.5 * std::log(kTwoPi * dtau);
        tau_prev = tau;
        x_prev = xj;
    }
    exponent += Complex{log_weight, -kQuarterPi * static_cast<double>(k + 1)};

    if (exponent.real() > opts.exponent_cap) {
        std::ostringstream msg;
        msg << "phi_T: exponent real part " << exponent.real() << " exceeds cap "
            << opts.exponent_cap << " for configuration (n=" << (k + d) << ", k=" << k
            << ")";
        throw RangeError(msg.str());
    }
    return std::exp(exponent);
}

Complex pin_chain_stripped(std::span<const Complex> spacings, std::span<const double> xs,
                           const PropagatorQuery& q, const PhiOptions& opts)
{
    const std::size_t k = xs.size();
    Complex exponent{0.0, -kQuarterPi * static_cast<double>(k + 1)};
    double x_prev = q.y;
    for (std::size_t j = 0; j <= k; ++j) {
        const double xj = j < k ? xs[j] : q.x;
        const double dx = xj - x_prev;
        if (dx != 0.0) exponent += kI * (dx * dx) / (2.0 * spacings[j]);
        x_prev = xj;
    }
    if (exponent.real() > opts.exponent_cap) {
        std::ostringstream msg;
        msg << "pin_chain_stripped: exponent real part " << exponent.real() << " exceeds cap "
            << opts.exponent_cap << " for configuration (n=" << k << ", k=" << k << ")";
        throw RangeError(msg.str());
    }
    return std::exp(exponent);
}

Complex phi_T(const TestFunction& theta, const PinConfiguration& pins,
              const ExpInsertion& ins, const PropagatorQuery& q, const PhiOptions& opts)
{
    if (!q.forward()) throw DomainError("phi_T: requires t > t0");
    pins.validate(q.t0, q.t);
    ins.validate(q.t0, q.t);
    return phi_T_unchecked(theta, pins.taus, pins.xs, ins.ss, ins.alphas, q, opts);
}

double pointwise_bound(const TestFunction& theta, const PinConfiguration& pins,
                       const ExpInsertion& ins, const PropagatorQuery& q)
{
    if (!q.forward()) throw DomainError("pointwise_bound: requires t > t0");
    pins.validate(q.t0, q.t);
    ins.validate(q.t0, q.t);

    const double norm = appendix_norm(theta, q.t0, q.t);
    const double norm_sq = norm * norm;
    double abs_alpha = 0.0;
    for (double a : ins.alphas) abs_alpha += std::abs(a);
    double m = std::max(std::abs(q.x), std::abs(q.y));
    for (double xj : pins.xs) m = std::max(m, std::abs(xj));

    double log_c = 2.0 * norm_sq + (std::abs(q.x) + q.dt() + norm_sq) * abs_alpha +
                   4.0 * m * abs_alpha + m * m;
    double tau_prev = q.t0;
    for (std::size_t j = 0; j <= pins.size(); ++j) {
        const double tau = j < pins.size() ? pins.taus[j] : q.t;
        log_c -= 0.5 * std::log(kTwoPi * (tau - tau_prev));
        tau_prev = tau;
    }
    return std::exp(log_c);
}

}  // namespace feynprop
