#include "feynprop/series.hpp"

#include <cmath>
#include <sstream>

#include "feynprop/errors.hpp"
#include "feynprop/parallel.hpp"
#include "feynprop/pinned.hpp"

namespace feynprop {

namespace {

// All ordered assignments of `slots` positions to `atoms` atoms, in
// lexicographic order (slot 0 most significant).
template <class Fn>
void for_each_assignment(std::size_t slots, std::size_t atoms, Fn&& fn)
{
    std::vector<std::size_t> idx(slots, 0);
    std::size_t counter = 0;
    while (true) {
        fn(counter++, std::span<const std::size_t>(idx));
        std::size_t pos = slots;
        while (pos > 0) {
            --pos;
            if (++idx[pos] < atoms) break;
            idx[pos] = 0;
            if (pos == 0) return;
        }
        if (slots == 0) return;
    }
}

struct ExpChoice {
    std::vector<double> alphas;
    Complex coeff{1.0, 0.0};
};

std::vector<double> theta_breaks(const TestFunction& theta, const PropagatorQuery& q)
{
    std::vector<double> out;
    for (const auto& node : theta.nodes()) {
        if (node.time > q.t0 && node.time < q.t) out.push_back(node.time);
    }
    return out;
}

bool tensor_simplex_ok(int k, const QuadratureSpec& spec)
{
    return spec.simplex_rule == SimplexRule::gauss_jacobi_tensor && k <= spec.tensor_max_k &&
           std::pow(static_cast<double>(spec.points_per_dim), k) <=
               static_cast<double>(spec.max_tensor_nodes);
}

bool nested_tensor_ok(int k, int d, std::size_t n_breaks, const QuadratureSpec& spec)
{
    if (!tensor_simplex_ok(k, spec) || d > 3) return false;
    const double inner = std::pow(
        static_cast<double>(spec.hypercube_points) * static_cast<double>(k + 1 + n_breaks), d);
    return std::pow(static_cast<double>(spec.points_per_dim), k) * inner <=
           static_cast<double>(spec.max_tensor_nodes);
}

// Contour tilt for pin chains: 0 when no interval carries a displacement,
// else small enough that exp(i dx^2 / (2 dtau)) grows by at most e^2 where
// the contour bends upward.
double contour_beta(std::span<const double> xs, const PropagatorQuery& q)
{
    double max_sq = 0.0;
    double prev = q.y;
    for (std::size_t j = 0; j <= xs.size(); ++j) {
        const double xj = j < xs.size() ? xs[j] : q.x;
        max_sq = std::max(max_sq, (xj - prev) * (xj - prev));
        prev = xj;
    }
    if (max_sq == 0.0) return 0.0;
    return std::min(0.5, 4.0 * q.dt() / max_sq);
}

std::string context(int n, int k, std::size_t assignment)
{
    std::ostringstream s;
    s << " [term n=" << n << ", k=" << k << ", assignment " << assignment << "]";
    return s.str();
}

// Integral for one fixed delta assignment (pins at `xs`).
Estimate integrate_assignment(int n, int k, const TestFunction& theta,
                              const std::vector<ExpChoice>& exps, std::span<const double> xs,
                              const PropagatorQuery& q, const QuadratureSpec& spec,
                              std::uint64_t substream)
{
    const int d = n - k;
    const std::vector<double> tbreaks = theta_breaks(theta, q);
    const PhiOptions stripped{.strip_singular_weight = true};

    auto exp_sum = [&](std::span<const double> taus, std::span<const double> ss,
                       const PhiOptions& opts) {
        Complex acc{};
        for (const auto& e : exps) {
            acc += e.coeff * phi_T_unchecked(theta, taus, xs, ss, e.alphas, q, opts);
        }
        return acc;
    };

    if (k == 0) {
        HypercubeOptions opts{.symmetric = true, .breakpoints = tbreaks};
        return hypercube_integrate(
            d, [&](std::span<const double> ss) { return exp_sum({}, ss, PhiOptions{}); }, q.t0,
            q.t, spec, opts, substream);
    }

    if (d == 0 && theta.is_zero()) {
        QuadratureSpec local = spec;
        if (!tensor_simplex_ok(k, spec)) local.simplex_rule = SimplexRule::dirichlet_mc;
        const double beta = contour_beta(xs, q);
        return simplex_integrate_deformed(
            k, [&](std::span<const Complex> sp) { return pin_chain_stripped(sp, xs, q); }, q.t0,
            q.t, local, beta, substream);
    }

    if (d == 0) {
        QuadratureSpec local = spec;
        if (!tensor_simplex_ok(k, spec)) local.simplex_rule = SimplexRule::dirichlet_mc;
        return simplex_integrate(
            k, [&](std::span<const double> taus) { return exp_sum(taus, {}, stripped); }, q.t0,
            q.t, local, SimplexWeight::singular, substream);
    }

    if (nested_tensor_ok(k, d, tbreaks.size(), spec)) {
        auto outer = [&](std::span<const double> taus) {
            HypercubeOptions opts{.symmetric = true, .breakpoints = tbreaks};
            opts.breakpoints.insert(opts.breakpoints.end(), taus.begin(), taus.end());
            return hypercube_integrate(
                       d, [&](std::span<const double> ss) { return exp_sum(taus, ss, stripped); },
                       q.t0, q.t, spec, opts, substream)
                .value;
        };
        return simplex_integrate(k, outer, q.t0, q.t, spec, SimplexWeight::singular, substream);
    }

    return simplex_hypercube_mc(
        k, d,
        [&](std::span<const double> taus, std::span<const double> ss) {
            return exp_sum(taus, ss, stripped);
        },
        q.t0, q.t, spec, SimplexWeight::singular, substream);
}

std::vector<SeriesTerm> order_terms(int n, const TestFunction& theta, const PotentialSpec& p,
                                    const PropagatorQuery& q, const QuadratureSpec& spec)
{
    std::vector<SeriesTerm> out;
    out.reserve(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) out.push_back(term_value(n, k, theta, p, q, spec));
    return out;
}

}  // namespace

SeriesTerm term_value(int n, int k, const TestFunction& theta, const PotentialSpec& p,
                      const PropagatorQuery& q, const QuadratureSpec& spec)
{
    if (n < 0 || k < 0 || k > n) {
        throw DomainError("term_value: requires 0 <= k <= n (n=" + std::to_string(n) +
                          ", k=" + std::to_string(k) + ")");
    }
    if (!q.forward()) throw DomainError("term_value: requires t > t0");
    spec.validate();
    p.validate();

    SeriesTerm term{n, k, {}, 0.0, 0.0};
    const BoundContext ctx = make_bound_context(theta, p, q);
    term.majorant = term_majorant(n, k, ctx);

    const int d = n - k;
    if ((k > 0 && p.delta_atoms.empty()) || (d > 0 && p.exp_atoms.empty())) return term;

    if (n == 0) {
        term.value = phi_T_unchecked(theta, {}, {}, {}, {}, q);
        return term;
    }

    std::vector<ExpChoice> exps;
    for_each_assignment(static_cast<std::size_t>(d), p.exp_atoms.size(),
                        [&](std::size_t, std::span<const std::size_t> idx) {
                            ExpChoice e;
                            for (std::size_t a : idx) {
                                e.alphas.push_back(p.exp_atoms[a].alpha);
                                e.coeff *= p.exp_atoms[a].coeff;
                            }
                            exps.push_back(std::move(e));
                        });

    // (-i)^n g^n / (n - k)!
    const Complex phase = std::pow(-kI, n);
    const double scale = std::pow(p.g, n) / std::tgamma(d + 1.0);

    double var = 0.0;
    for_each_assignment(
        static_cast<std::size_t>(k), p.delta_atoms.size(),
        [&](std::size_t index, std::span<const std::size_t> idx) {
            std::vector<double> xs;
            double weight = 1.0;
            for (std::size_t a : idx) {
                xs.push_back(p.delta_atoms[a].location);
                weight *= p.delta_atoms[a].weight;
            }
            const auto substream =
                detail::stream_key(spec.seed, static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(k), index);
            Estimate est;
            try {
                est = integrate_assignment(n, k, theta, exps, xs, q, spec, substream);
            } catch (const RangeError& e) {
                throw RangeError(e.what() + context(n, k, index));
            } catch (const DomainError& e) {
                throw DomainError(e.what() + context(n, k, index));
            } catch (const NumericalError& e) {
                throw NumericalError(e.what() + context(n, k, index));
            }
            const double w = scale * weight;
            term.value += phase * w * est.value;
            var += w * w * est.std_error * est.std_error;
        });
    term.mc_stderr = std::sqrt(var);

    const double limit = term.majorant * (1.0 + 1e-8) + 6.0 * term.mc_stderr;
    if (!(std::abs(term.value) <= limit)) {
        std::ostringstream msg;
        msg << "term_value: |I(n=" << n << ",k=" << k << ")| = " << std::abs(term.value)
            << " exceeds its majorant " << term.majorant;
        throw NumericalError(msg.str());
    }
    return term;
}

Complex boundary_phase(const TestFunction& theta, const PropagatorQuery& q)
{
    if (!q.forward()) return {};
    if (theta.is_zero()) return {1.0, 0.0};
    const Complex outside = theta.integral_sq(theta.support_begin(), theta.support_end()) -
                            theta.integral_sq(q.t0, q.t);
    return std::exp(0.5 * kI * outside + kI * q.y * theta(q.t0) - kI * q.x * theta(q.t));
}

bool support_exceeds_window(const TestFunction& theta, const PropagatorQuery& q)
{
    if (theta.is_zero()) return false;
    const auto nodes = theta.nodes();
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const bool nonzero = nodes[i].value != Complex{} || nodes[i + 1].value != Complex{};
        if (nonzero && (nodes[i].time < q.t0 || nodes[i + 1].time > q.t)) return true;
    }
    return false;
}

Complex k_n_theta(int n, const TestFunction& theta, const PotentialSpec& p,
                  const PropagatorQuery& q, const QuadratureSpec& spec)
{
    if (n < 0) throw DomainError("k_n_theta: n must be >= 0");
    if (!q.forward()) return {};
    Complex acc{};
    for (const auto& term : order_terms(n, theta, p, q, spec)) acc += term.value;
    return boundary_phase(theta, q) * acc;
}

PropagatorResult propagator(const TestFunction& theta, const PotentialSpec& p,
                            const PropagatorQuery& q, const QuadratureSpec& spec,
                            const StopCriteria& stop)
{
    if (stop.max_order < 0) throw DomainError("propagator: max_order must be >= 0");
    PropagatorResult res;
    res.query = q;
    res.theta = theta;
    res.spec = spec;
    if (!q.forward()) return res;

    if (support_exceeds_window(theta, q)) {
        res.diagnostics.push_back("theta is nonzero outside [t0, t]; the outside-window "
                                  "phase is applied literally");
    }
    const Complex phase = boundary_phase(theta, q);
    const BoundContext ctx = make_bound_context(theta, p, q);

    double var = 0.0;
    Complex sum{};
    for (int n = 0; n <= stop.max_order; ++n) {
        auto terms = order_terms(n, theta, p, q, spec);
        Complex order{};
        for (const auto& t : terms) {
            order += t.value;
            var += t.mc_stderr * t.mc_stderr;
        }
        order *= phase;
        sum += order;
        res.terms.push_back(std::move(terms));
        res.order_values.push_back(order);
        res.partial_sums.push_back(sum);
        res.tail = tail_bound(n, ctx) * std::abs(phase);
        if (res.tail < stop.tail_tol) break;
    }
    res.mc_stderr = std::abs(phase) * std::sqrt(var);
    res.converged = res.tail < stop.tail_tol;
    if (!res.converged) {
        std::ostringstream msg;
        msg << "tail bound " << res.tail << " above tolerance " << stop.tail_tol
            << " at max_order " << stop.max_order;
        res.diagnostics.push_back(msg.str());
    }
    return res;
}

}  // namespace feynprop
