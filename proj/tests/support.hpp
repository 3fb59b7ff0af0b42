#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "feynprop/free_kernel.hpp"
#include "feynprop/quadrature.hpp"

namespace feynprop::testing {

inline double rel_err(Complex a, Complex b)
{
    return std::abs(a - b) / std::abs(b);
}

// Exact kernel of V = gamma delta(x) for x, y on either side of the atom:
//   K0(x - y) - gamma int_0^inf e^{-gamma u} K0(|x| + |y| + u) du,
// with the u-contour rotated to e^{i pi/4} R+ where the integrand decays.
inline Complex delta_kernel_exact(double x, double y, double dt, double gamma)
{
    static const GaussRule rule = gauss_legendre(200);
    const Complex rot = std::polar(1.0, std::numbers::pi / 4.0);
    const double a = std::abs(x) + std::abs(y);
    const double len = 12.0 * std::sqrt(dt) + 5.0;
    Complex acc{};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double s = 0.5 * len * (1.0 + rule.nodes[i]);
        const Complex u = rot * s;
        const Complex z = a + u;
        acc += 0.5 * len * rule.weights[i] * rot * std::exp(-gamma * u) *
               std::exp(kI * z * z / (2.0 * dt));
    }
    return free_propagator(x, y, dt) - gamma * inv_sqrt_2pi_i(dt) * acc;
}

// Monte Carlo for int over the ordered simplex in [0, dt] of
// prod_j (2 pi dtau_j)^(-1/2) f(dtau), drawing spacings from Dirichlet(3/4)
// (a proposal different from the library's Dirichlet(1/2)) with explicit
// importance weights.
template <class F>
std::pair<double, double> dirichlet34_mc(int k, double dt, std::size_t samples, unsigned seed,
                                         F&& f)
{
    std::mt19937_64 gen(seed);
    std::gamma_distribution<double> gam(0.75, 1.0);
    const double a = 0.75;
    const int m = k + 1;
    // Dirichlet(a) density on the unit simplex, in spacing coordinates
    const double log_norm = std::lgamma(a * m) - m * std::lgamma(a);
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> u(static_cast<std::size_t>(m));
    for (std::size_t s = 0; s < samples; ++s) {
        double tot = 0.0;
        for (auto& v : u) tot += (v = gam(gen));
        double log_pdf = log_norm;
        double log_w = 0.0;
        for (auto& v : u) {
            v /= tot;
            log_pdf += (a - 1.0) * std::log(v);
            log_w += -0.5 * std::log(2.0 * std::numbers::pi * dt * v);
        }
        // volume element d(tau_1..tau_k) = dt^k d(u_1..u_k)
        const double w = std::exp(log_w + k * std::log(dt) - log_pdf) * f(u);
        sum += w;
        sum_sq += w * w;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    return {mean, std::sqrt((sum_sq / n - mean * mean) / n)};
}

}  // namespace feynprop::testing
