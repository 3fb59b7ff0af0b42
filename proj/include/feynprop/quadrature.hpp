#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "feynprop/model.hpp"

namespace feynprop {

enum class SimplexRule { gauss_jacobi_tensor, dirichlet_mc };

struct QuadratureSpec {
    SimplexRule simplex_rule = SimplexRule::gauss_jacobi_tensor;
    int points_per_dim = 16;
    std::int64_t mc_samples = 100000;
    std::uint64_t seed = 0x5eedULL;
    int hypercube_points = 16;
    // Largest simplex dimension the tensor rule accepts.
    int tensor_max_k = 4;
    // Nested tensor rules above this many nodes fall back to Monte Carlo.
    std::int64_t max_tensor_nodes = 1 << 20;

    // DomainError unless points_per_dim >= 2, hypercube_points >= 2,
    // mc_samples >= 100, tensor_max_k >= 1.
    void validate() const;
};

struct Estimate {
    Complex value{0.0, 0.0};
    // Monte Carlo standard error; 0 for deterministic rules.
    double std_error = 0.0;
};

// Weight the simplex rules integrate against.
enum class SimplexWeight {
    // prod_{j=1}^{k+1} (2 pi (tau_j - tau_{j-1}))^(-1/2), tau_0 = t0, tau_{k+1} = t
    singular,
    // 1 (plain volume measure)
    none,
};

using SimplexIntegrand = std::function<Complex(std::span<const double> taus)>;
using HypercubeIntegrand = std::function<Complex(std::span<const double> ss)>;
using JointIntegrand =
    std::function<Complex(std::span<const double> taus, std::span<const double> ss)>;

/*!
 * int over t0 < tau_1 < ... < tau_k < t of weight(tau) * f(tau).
 *
 * f is the smooth part only; the weight is supplied analytically by the
 * rule. The tensor rule uses stick-breaking coordinates
 * tau_j - tau_{j-1} = dt * v_j prod_{i<j} (1 - v_i), in which the singular
 * weight factorizes into one Jacobi weight v^(-1/2) (1-v)^((k-i-1)/2) per
 * coordinate; a Gauss-Jacobi rule with points_per_dim nodes is used in each.
 * The Monte Carlo rule samples spacings from Dirichlet(1/2, ..., 1/2)
 * (Dirichlet(1) for SimplexWeight::none), which is the normalized weight,
 * so only f is averaged.
 *
 * Requires k >= 1. DomainError for the tensor rule when k > tensor_max_k or
 * the node count exceeds max_tensor_nodes; use dirichlet_mc for those.
 * `substream` keys the random stream (see detail::stream_key).
 */
Estimate simplex_integrate(int k, const SimplexIntegrand& f, double t0, double t,
                           const QuadratureSpec& spec,
                           SimplexWeight weight = SimplexWeight::singular,
                           std::uint64_t substream = 0);

// Integrand of the (complex) interval lengths dtau_1..dtau_{k+1}.
using SpacingIntegrand = std::function<Complex(std::span<const Complex> spacings)>;

/*!
 * int over Delta_k of prod_j (2 pi dtau_j)^(-1/2) f(dtau), evaluated on a
 * deformed contour.
 *
 * With u_j = dtau_j / dt on the unit simplex and S = sum_j u_j^2 the
 * contour is dtau_j = dt u_j (1 - i beta (S - u_j)). The lengths still sum
 * to dt, vanish exactly where u_j does, and get a negative imaginary part
 * whenever they are small, so factors exp(i c / dtau_j) with c > 0 are damped
 * instead of oscillating without bound. f must be holomorphic in the
 * lengths on the swept region (|arg dtau_j| <= atan beta); the result then
 * equals the real-contour integral. The deformed integrand is handed to
 * simplex_integrate, so `spec` selects the rule as usual. beta = 0 is the
 * real contour.
 */
Estimate simplex_integrate_deformed(int k, const SpacingIntegrand& f, double t0, double t,
                                    const QuadratureSpec& spec, double beta,
                                    std::uint64_t substream = 0);

struct HypercubeOptions {
    // f is invariant under permutations of its arguments; integrate the
    // ordered sector s_1 < ... < s_d and multiply by d!.
    bool symmetric = false;
    // Points in (t0, t) where f may have a kink; tensor panels are split there.
    std::vector<double> breakpoints;
};

// int over [t0, t]^d of f. Tensor Gauss-Legendre (hypercube_points per
// panel and dimension) for d <= 3, plain Monte Carlo with mc_samples beyond
// or when the tensor node count would exceed max_tensor_nodes.
Estimate hypercube_integrate(int d, const HypercubeIntegrand& f, double t0, double t,
                             const QuadratureSpec& spec, const HypercubeOptions& opts = {},
                             std::uint64_t substream = 0);

// Monte Carlo over simplex x hypercube with the simplex weight sampled
// exactly; mc_samples joint samples.
Estimate simplex_hypercube_mc(int k, int d, const JointIntegrand& f, double t0, double t,
                              const QuadratureSpec& spec,
                              SimplexWeight weight = SimplexWeight::singular,
                              std::uint64_t substream = 0);

// int_R exp(i a z^2 + b z) dz = sqrt(pi / (-i a)) exp(-b^2 / (4 i a)),
// principal branch. Im(a) > 0, or Im(a) == 0 with Re(a) != 0 (Fresnel
// limit). DomainError otherwise.
Complex gaussian_integral(Complex a, Complex b);

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point rule for weight (1 - x)^alpha (1 + x)^beta on [-1, 1]
// (Golub-Welsch). alpha, beta > -1.
GaussRule gauss_jacobi(int n, double alpha, double beta);
GaussRule gauss_legendre(int n);

// Same rules mapped to [0, 1] with weight (1 - v)^alpha v^beta.
GaussRule gauss_jacobi_unit(int n, double alpha, double beta);

}  // namespace feynprop
