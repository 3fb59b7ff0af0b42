#include "feynprop/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "feynprop/errors.hpp"
#include "feynprop/parallel.hpp"

namespace feynprop {

namespace {

constexpr double kSpacingFloor = 1e-12;

Estimate mc_estimate(std::span<const Complex> samples, double scale)
{
    const auto m = static_cast<double>(samples.size());
    const Complex mean = detail::pairwise_sum(samples) / m;
    std::vector<double> dev(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) dev[i] = std::norm(samples[i] - mean);
    const double var = detail::pairwise_sum(dev) / (m - 1.0);
    return {scale * mean, std::abs(scale) * std::sqrt(var / m)};
}

// Spacings u_0..u_k (summing to 1) for sample `i`, written into `u`.
void sample_spacings(const detail::CounterRng& rng, std::uint64_t block, SimplexWeight weight,
                     std::span<double> u)
{
    double total = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (weight == SimplexWeight::singular) {
            // Gamma(1/2) = Z^2 / 2; the factor 2 cancels on normalization
            const double z = rng.normal(block + j);
            u[j] = z * z;
        } else {
            u[j] = -std::log(rng.uniform(2 * (block + j)));
        }
        total += u[j];
    }
    bool floored = false;
    for (double& x : u) {
        x /= total;
        if (x < kSpacingFloor) {
            x = kSpacingFloor;
            floored = true;
        }
    }
    if (floored) {
        double s = 0.0;
        for (double x : u) s += x;
        for (double& x : u) x /= s;
    }
}

void spacings_to_times(std::span<const double> u, double t0, double dt, std::span<double> taus)
{
    double acc = 0.0;
    for (std::size_t j = 0; j < taus.size(); ++j) {
        acc += u[j];
        taus[j] = t0 + dt * acc;
    }
}

// Integral of the simplex weight over Delta_k (the Dirichlet normalizer).
double simplex_weight_total(int k, double dt, SimplexWeight weight)
{
    if (weight == SimplexWeight::none) {
        return std::exp(k * std::log(dt) - std::lgamma(k + 1.0));
    }
    const double kk = static_cast<double>(k);
    return std::exp(-0.5 * (kk + 1.0) * std::log(2.0 * std::numbers::pi * dt) + kk * std::log(dt) +
                    0.5 * (kk + 1.0) * std::log(std::numbers::pi) - std::lgamma(0.5 * (kk + 1.0)));
}

Estimate simplex_tensor(int k, const SimplexIntegrand& f, double t0, double t,
                        const QuadratureSpec& spec, SimplexWeight weight)
{
    if (k > spec.tensor_max_k) {
        throw DomainError("simplex_integrate: k=" + std::to_string(k) +
                          " exceeds the tensor rule cap " + std::to_string(spec.tensor_max_k) +
                          "; use dirichlet_mc");
    }
    const int p = spec.points_per_dim;
    const double nodes_d = std::pow(static_cast<double>(p), k);
    if (nodes_d > static_cast<double>(spec.max_tensor_nodes)) {
        throw DomainError("simplex_integrate: tensor rule needs " +
                          std::to_string(static_cast<long long>(nodes_d)) +
                          " nodes (> max_tensor_nodes); use dirichlet_mc");
    }
    const double dt = t - t0;

    // rule for stick-breaking coordinate i = 1..k
    std::vector<GaussRule> rules;
    rules.reserve(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) {
        if (weight == SimplexWeight::singular) {
            rules.push_back(gauss_jacobi_unit(p, 0.5 * (k - i - 1), -0.5));
        } else {
            rules.push_back(gauss_jacobi_unit(p, static_cast<double>(k - i), 0.0));
        }
    }
    double scale = std::pow(dt, k);
    if (weight == SimplexWeight::singular) {
        scale *= std::pow(2.0 * std::numbers::pi * dt, -0.5 * (k + 1));
    }

    const auto n = static_cast<std::int64_t>(nodes_d);
    std::vector<Complex> vals(static_cast<std::size_t>(n));
    detail::parallel_for(n, [&](std::int64_t idx) {
        std::vector<double> taus(static_cast<std::size_t>(k));
        double w = 1.0;
        double remaining = 1.0;
        double acc = 0.0;
        std::int64_t rest = idx;
        for (int i = 0; i < k; ++i) {
            const auto digit = static_cast<std::size_t>(rest % p);
            rest /= p;
            const double v = rules[static_cast<std::size_t>(i)].nodes[digit];
            w *= rules[static_cast<std::size_t>(i)].weights[digit];
            acc += remaining * v;
            remaining *= 1.0 - v;
            taus[static_cast<std::size_t>(i)] = t0 + dt * acc;
        }
        vals[static_cast<std::size_t>(idx)] = w * f(taus);
    });
    return {scale * detail::pairwise_sum(vals), 0.0};
}

Estimate simplex_mc(int k, const SimplexIntegrand& f, double t0, double t,
                    const QuadratureSpec& spec, SimplexWeight weight, std::uint64_t substream)
{
    const double dt = t - t0;
    const detail::CounterRng rng(substream);
    const auto block = static_cast<std::uint64_t>(k + 1);
    std::vector<Complex> vals(static_cast<std::size_t>(spec.mc_samples));
    detail::parallel_for(spec.mc_samples, [&](std::int64_t i) {
        std::vector<double> u(static_cast<std::size_t>(k + 1));
        std::vector<double> taus(static_cast<std::size_t>(k));
        sample_spacings(rng, static_cast<std::uint64_t>(i) * block, weight, u);
        spacings_to_times(u, t0, dt, taus);
        vals[static_cast<std::size_t>(i)] = f(taus);
    });
    return mc_estimate(vals, simplex_weight_total(k, dt, weight));
}

// Tensor nodes (flattened, d per node) and weights over the cube or its
// ordered sector, panels split at breakpoints. False when the budget is
// exceeded.
bool hypercube_nodes(int d, double t0, double t, const GaussRule& rule,
                     const std::vector<double>& breaks, bool ordered, std::int64_t budget,
                     std::vector<double>& coords, std::vector<double>& weights)
{
    std::vector<double> current(static_cast<std::size_t>(d));
    bool ok = true;
    std::function<void(int, double, double)> rec = [&](int level, double lower, double w) {
        if (!ok) return;
        if (level == d) {
            if (static_cast<std::int64_t>(weights.size()) >= budget) {
                ok = false;
                return;
            }
            coords.insert(coords.end(), current.begin(), current.end());
            weights.push_back(w);
            return;
        }
        const double start = ordered ? lower : t0;
        std::vector<double> edges{start};
        for (double b : breaks) {
            if (b > start && b < t) edges.push_back(b);
        }
        edges.push_back(t);
        for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
            const double mid = 0.5 * (edges[e] + edges[e + 1]);
            const double half = 0.5 * (edges[e + 1] - edges[e]);
            if (!(half > 0.0)) continue;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                current[static_cast<std::size_t>(level)] = mid + half * rule.nodes[q];
                rec(level + 1, current[static_cast<std::size_t>(level)],
                    w * half * rule.weights[q]);
            }
        }
    };
    rec(0, t0, 1.0);
    return ok;
}

}  // namespace

void QuadratureSpec::validate() const
{
    if (points_per_dim < 2) throw DomainError("QuadratureSpec: points_per_dim must be >= 2");
    if (hypercube_points < 2) throw DomainError("QuadratureSpec: hypercube_points must be >= 2");
    if (mc_samples < 100) throw DomainError("QuadratureSpec: mc_samples must be >= 100");
    if (tensor_max_k < 1) throw DomainError("QuadratureSpec: tensor_max_k must be >= 1");
    if (max_tensor_nodes < 1) throw DomainError("QuadratureSpec: max_tensor_nodes must be >= 1");
}

Estimate simplex_integrate(int k, const SimplexIntegrand& f, double t0, double t,
                           const QuadratureSpec& spec, SimplexWeight weight,
                           std::uint64_t substream)
{
    if (k < 1) throw DomainError("simplex_integrate: requires k >= 1");
    if (!(t > t0)) throw DomainError("simplex_integrate: requires t > t0");
    spec.validate();
    if (spec.simplex_rule == SimplexRule::gauss_jacobi_tensor) {
        return simplex_tensor(k, f, t0, t, spec, weight);
    }
    return simplex_mc(k, f, t0, t, spec, weight, substream);
}

Estimate simplex_integrate_deformed(int k, const SpacingIntegrand& f, double t0, double t,
                                    const QuadratureSpec& spec, double beta,
                                    std::uint64_t substream)
{
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw DomainError("simplex_integrate_deformed: beta must be finite and >= 0");
    }
    const double dt = t - t0;
    const auto kk = static_cast<std::size_t>(k);
    auto deformed = [&, dt](std::span<const double> taus) {
        std::vector<double> u(kk + 1);
        double prev = t0;
        for (std::size_t j = 0; j <= kk; ++j) {
            const double tau = j < kk ? taus[j] : t;
            u[j] = (tau - prev) / dt;
            prev = tau;
        }
        double s2 = 0.0;
        for (double v : u) s2 += v * v;

        std::vector<Complex> spacings(kk + 1);
        Complex weight_ratio{1.0, 0.0};
        for (std::size_t j = 0; j <= kk; ++j) {
            const Complex stretch{1.0, -beta * (s2 - u[j])};
            spacings[j] = dt * u[j] * stretch;
            weight_ratio /= std::sqrt(stretch);
        }
        // det of d(dtau_1..k)/d(u_1..k) / dt^k: diagonal plus rank one
        Complex det{1.0, 0.0};
        Complex lemma{1.0, 0.0};
        for (std::size_t j = 0; j < kk; ++j) {
            const Complex dj{1.0, -beta * (s2 - 2.0 * u[j])};
            const Complex aj{0.0, -beta * u[j]};
            const double bj = 2.0 * (u[j] - u[kk]);
            det *= dj;
            lemma += aj * bj / dj;
        }
        return f(spacings) * weight_ratio * det * lemma;
    };
    return simplex_integrate(k, deformed, t0, t, spec, SimplexWeight::singular, substream);
}

Estimate hypercube_integrate(int d, const HypercubeIntegrand& f, double t0, double t,
                             const QuadratureSpec& spec, const HypercubeOptions& opts,
                             std::uint64_t substream)
{
    if (d < 1) throw DomainError("hypercube_integrate: requires d >= 1");
    if (!(t > t0)) throw DomainError("hypercube_integrate: requires t > t0");
    spec.validate();
    const double dt = t - t0;

    if (d <= 3) {
        std::vector<double> breaks;
        for (double b : opts.breakpoints) {
            if (b > t0 && b < t) breaks.push_back(b);
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

        const GaussRule rule = gauss_legendre(spec.hypercube_points);
        std::vector<double> coords;
        std::vector<double> weights;
        if (hypercube_nodes(d, t0, t, rule, breaks, opts.symmetric, spec.max_tensor_nodes,
                            coords, weights)) {
            const auto n = static_cast<std::int64_t>(weights.size());
            std::vector<Complex> vals(weights.size());
            detail::parallel_for(n, [&](std::int64_t i) {
                const auto at = static_cast<std::size_t>(i);
                std::span<const double> ss(coords.data() + at * static_cast<std::size_t>(d),
                                           static_cast<std::size_t>(d));
                vals[at] = weights[at] * f(ss);
            });
            double factor = 1.0;
            if (opts.symmetric) {
                for (int i = 2; i <= d; ++i) factor *= i;
            }
            return {factor * detail::pairwise_sum(vals), 0.0};
        }
    }

    const detail::CounterRng rng(substream);
    const auto block = static_cast<std::uint64_t>(d);
    std::vector<Complex> vals(static_cast<std::size_t>(spec.mc_samples));
    detail::parallel_for(spec.mc_samples, [&](std::int64_t i) {
        std::vector<double> ss(static_cast<std::size_t>(d));
        for (std::size_t l = 0; l < ss.size(); ++l) {
            ss[l] = t0 + dt * rng.uniform(2 * (static_cast<std::uint64_t>(i) * block + l));
        }
        vals[static_cast<std::size_t>(i)] = f(ss);
    });
    return mc_estimate(vals, std::pow(dt, d));
}

Estimate simplex_hypercube_mc(int k, int d, const JointIntegrand& f, double t0, double t,
                              const QuadratureSpec& spec, SimplexWeight weight,
                              std::uint64_t substream)
{
    if (k < 0 || d < 0) throw DomainError("simplex_hypercube_mc: negative dimension");
    if (!(t > t0)) throw DomainError("simplex_hypercube_mc: requires t > t0");
    spec.validate();
    const double dt = t - t0;
    const detail::CounterRng rng(substream);
    const auto block = static_cast<std::uint64_t>(k + 1 + d);
    std::vector<Complex> vals(static_cast<std::size_t>(spec.mc_samples));
    detail::parallel_for(spec.mc_samples, [&](std::int64_t i) {
        const std::uint64_t base = static_cast<std::uint64_t>(i) * block;
        std::vector<double> u(static_cast<std::size_t>(k + 1));
        std::vector<double> taus(static_cast<std::size_t>(k));
        std::vector<double> ss(static_cast<std::size_t>(d));
        if (k > 0) {
            sample_spacings(rng, base, weight, u);
            spacings_to_times(u, t0, dt, taus);
        }
        for (std::size_t l = 0; l < ss.size(); ++l) {
            ss[l] = t0 + dt * rng.uniform(2 * (base + static_cast<std::uint64_t>(k + 1) + l));
        }
        vals[static_cast<std::size_t>(i)] = f(taus, ss);
    });
    double scale = std::pow(dt, d);
    if (k > 0) {
        scale *= simplex_weight_total(k, dt, weight);
    } else if (weight == SimplexWeight::singular) {
        scale /= std::sqrt(2.0 * std::numbers::pi * dt);
    }
    return mc_estimate(vals, scale);
}

Complex gaussian_integral(Complex a, Complex b)
{
    if (a == Complex{}) throw DomainError("gaussian_integral: a = 0");
    if (a.imag() < 0.0) {
        throw DomainError("gaussian_integral: Im(a) < 0, integral diverges");
    }
    const Complex mia = -kI * a;
    return std::sqrt(std::numbers::pi / mia) * std::exp(-b * b / (4.0 * kI * a));
}

GaussRule gauss_jacobi(int n, double alpha, double beta)
{
    if (n < 1) throw DomainError("gauss_jacobi: n must be >= 1");
    if (!(alpha > -1.0) || !(beta > -1.0)) {
        throw DomainError("gauss_jacobi: requires alpha, beta > -1");
    }
    const double ab = alpha + beta;
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(std::max(n - 1, 1));
    for (int i = 0; i < n; ++i) {
        const double s = 2.0 * i + ab;
        diag(i) = (i == 0) ? (beta - alpha) / (ab + 2.0)
                           : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    }
    for (int i = 1; i < n; ++i) {
        const double s = 2.0 * i + ab;
        double b2;
        if (i == 1) {
            // (alpha+beta+1) cancels; stays finite at alpha+beta = -1
            b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
        } else {
            b2 = 4.0 * i * (i + alpha) * (i + beta) * (i + ab) / (s * s * (s + 1.0) * (s - 1.0));
        }
        sub(i - 1) = std::sqrt(b2);
    }
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                                std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    if (n == 1) {
        rule.nodes[0] = diag(0);
        rule.weights[0] = mu0;
        return rule;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
    for (int i = 0; i < n; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
    }
    return rule;
}

GaussRule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

GaussRule gauss_jacobi_unit(int n, double alpha, double beta)
{
    GaussRule rule = gauss_jacobi(n, alpha, beta);
    const double scale = std::pow(2.0, -(alpha + beta + 1.0));
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        rule.nodes[i] = 0.5 * (1.0 + rule.nodes[i]);
        rule.weights[i] *= scale;
    }
    return rule;
}

}  // namespace feynprop
