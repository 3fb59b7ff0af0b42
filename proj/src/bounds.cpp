#include "feynprop/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "feynprop/errors.hpp"

namespace feynprop {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

double log_add(double a, double b)
{
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double log_prefactor(const BoundContext& ctx)
{
    return 2.0 * ctx.theta_norm * ctx.theta_norm + ctx.b * ctx.b;
}

// log of W(k) m2^k and of (dt m1w)^j / j!
double log_delta_part(int k, const BoundContext& ctx)
{
    if (k == 0) return log_simplex_weight_closed_form(0, ctx.dt);
    return log_simplex_weight_closed_form(k, ctx.dt) + k * safe_log(ctx.m2_total);
}

double log_exp_part(int j, double log_dt_m1w)
{
    if (j == 0) return 0.0;
    return j * log_dt_m1w - std::lgamma(j + 1.0);
}

double log_cauchy(int n, const BoundContext& ctx, double log_dt_m1w)
{
    double acc = kNegInf;
    for (int k = n; k >= 0; --k) {
        const double term = log_delta_part(k, ctx) + log_exp_part(n - k, log_dt_m1w);
        acc = log_add(acc, term);
    }
    return acc + log_prefactor(ctx);
}

}  // namespace

double BoundContext::m1_weight(double c) const
{
    double acc = 0.0;
    for (const auto& a : m1) acc += a.weight * std::exp(c * std::abs(a.alpha));
    return acc;
}

double BoundContext::m1_argument() const
{
    return x_abs + 4.0 * b + dt + theta_norm * theta_norm;
}

BoundContext make_bound_context(const TestFunction& theta, const PotentialSpec& p,
                                const PropagatorQuery& q)
{
    BoundContext ctx;
    ctx.b = std::max({p.delta_support_radius(), std::abs(q.x), std::abs(q.y)});
    ctx.theta_norm = appendix_norm(theta, q.t0, q.t);
    ctx.dt = q.dt();
    ctx.x_abs = std::abs(q.x);
    const double g = std::abs(p.g);
    for (const auto& a : p.exp_atoms) ctx.m1.push_back({a.alpha, g * std::abs(a.coeff)});
    for (const auto& d : p.delta_atoms) ctx.m2_total += g * std::abs(d.weight);
    return ctx;
}

double log_simplex_weight_closed_form(int n, double dt)
{
    if (n < 0) throw DomainError("simplex_weight_closed_form: n must be >= 0");
    if (!(dt > 0.0)) throw DomainError("simplex_weight_closed_form: dt must be > 0");
    return -0.5 * (n + 1) * std::log(2.0) + 0.5 * (n - 1) * std::log(dt) -
           std::lgamma(0.5 * (n + 1));
}

double simplex_weight_closed_form(int n, double dt)
{
    return std::exp(log_simplex_weight_closed_form(n, dt));
}

double term_majorant(int n, int k, const BoundContext& ctx)
{
    if (k < 0 || k > n) {
        throw DomainError("term_majorant: requires 0 <= k <= n (n=" + std::to_string(n) +
                          ", k=" + std::to_string(k) + ")");
    }
    const int j = n - k;
    double log_v = log_prefactor(ctx) + log_simplex_weight_closed_form(k, ctx.dt);
    if (k > 0) log_v += k * safe_log(ctx.m2_total);
    if (j > 0) {
        log_v += j * std::log(ctx.dt) + j * safe_log(ctx.m1_weight(ctx.m1_argument())) -
                 std::lgamma(j + 1.0);
    }
    return std::exp(log_v);
}

double cauchy_coefficient(int n, const BoundContext& ctx)
{
    if (n < 0) throw DomainError("cauchy_coefficient: n must be >= 0");
    const double log_dt_m1w = safe_log(ctx.dt * ctx.m1_weight(ctx.m1_argument()));
    return std::exp(log_cauchy(n, ctx, log_dt_m1w));
}

double tail_bound(int N, const BoundContext& ctx)
{
    if (N < 0) throw DomainError("tail_bound: N must be >= 0");
    if (!(ctx.dt > 0.0)) return 0.0;
    const double log_dt_m1w = safe_log(ctx.dt * ctx.m1_weight(ctx.m1_argument()));
    if (log_dt_m1w == kNegInf && ctx.m2_total == 0.0) return 0.0;

    constexpr int kMaxOrder = 100000;
    double log_sum = kNegInf;
    double prev = std::numeric_limits<double>::infinity();
    for (int n = N + 1; n <= kMaxOrder; ++n) {
        const double lc = log_cauchy(n, ctx, log_dt_m1w);
        log_sum = log_add(log_sum, lc);
        if (log_sum > std::log(std::numeric_limits<double>::max())) {
            return std::numeric_limits<double>::infinity();
        }
        if (lc < prev && lc - log_sum < std::log(1e-16)) break;
        prev = lc;
    }
    return std::exp(log_sum);
}

}  // namespace feynprop
