#include "feynprop/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "feynprop/errors.hpp"
#include "feynprop/free_kernel.hpp"
#include "feynprop/parallel.hpp"

namespace feynprop {

namespace {

constexpr double kContainment = 1e-8;

std::vector<double> map_rule(const GaussRule& r, double lo, double hi, std::vector<double>& w)
{
    std::vector<double> x(r.nodes.size());
    w.resize(r.nodes.size());
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = mid + half * r.nodes[i];
        w[i] = half * r.weights[i];
    }
    return x;
}

}  // namespace

Complex Packet::operator()(double x) const
{
    const double d = x - center;
    const double norm = std::pow(2.0 * std::numbers::pi * width * width, -0.25);
    return norm * std::exp(Complex{-d * d / (4.0 * width * width), momentum * x});
}

void GridSpec::validate() const
{
    if (!(x_max > x_min)) throw DomainError("GridSpec: x_max must exceed x_min");
    if (nx < 16 || nt < 16) throw DomainError("GridSpec: nx and nt must be >= 16");
    if (!(delta_width > 0.0) || delta_width < 2.0 * spacing()) {
        throw DomainError("GridSpec: delta_width must be positive and >= 2 grid spacings");
    }
    if (!(packet.width > 0.0)) throw DomainError("GridSpec: packet width must be positive");
}

double Wavefunction::norm_sq() const
{
    std::vector<double> a(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) a[i] = std::norm(psi[i]);
    return h * detail::pairwise_sum(a);
}

Complex Wavefunction::at(double xq) const
{
    const double u = (xq - x_min) / h;
    const auto n = static_cast<std::int64_t>(psi.size());
    if (u < 0.0 || u > static_cast<double>(n - 1)) return {};
    auto i0 = static_cast<std::int64_t>(std::floor(u)) - 1;
    i0 = std::clamp<std::int64_t>(i0, 0, n - 4);
    Complex acc{};
    for (std::int64_t a = 0; a < 4; ++a) {
        double l = 1.0;
        for (std::int64_t b = 0; b < 4; ++b) {
            if (b != a) l *= (u - static_cast<double>(i0 + b)) / static_cast<double>(a - b);
        }
        acc += l * psi[static_cast<std::size_t>(i0 + a)];
    }
    return acc;
}

double regularized_potential(const PotentialSpec& p, double x, double width)
{
    double v = eval_potential(p, x).real();
    const double norm = 1.0 / (width * std::sqrt(2.0 * std::numbers::pi));
    for (const auto& d : p.delta_atoms) {
        const double z = (x - d.location) / width;
        v += p.g * d.weight * norm * std::exp(-0.5 * z * z);
    }
    return v;
}

Wavefunction evolve_packet(const PotentialSpec& p, const GridSpec& grid, double t0, double t)
{
    grid.validate();
    p.validate();
    if (!(t > t0)) throw DomainError("evolve_packet: requires t > t0");
    for (const auto& a : p.exp_atoms) {
        if (a.coeff.imag() != 0.0) {
            throw DomainError("evolve_packet: complex exp coefficients give a non-Hermitian "
                              "potential");
        }
    }

    const auto nx = static_cast<std::size_t>(grid.nx);
    const double h = grid.spacing();
    const double tau = (t - t0) / grid.nt;
    Wavefunction w{grid.x_min, h, std::vector<Complex>(nx)};
    for (std::size_t i = 1; i + 1 < nx; ++i) w.psi[i] = grid.packet(w.x(i));

    // A = I + i tau/2 H, B = I - i tau/2 H on interior points 1..nx-2
    const std::size_t m = nx - 2;
    const Complex off = -kI * tau / (4.0 * h * h);
    std::vector<Complex> diag_a(m), diag_b(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double v = regularized_potential(p, w.x(j + 1), grid.delta_width);
        const Complex e = 0.5 * kI * tau * (1.0 / (h * h) + v);
        diag_a[j] = 1.0 + e;
        diag_b[j] = 1.0 - e;
    }
    // Thomas factorization of A
    std::vector<Complex> cprime(m), inv_denom(m);
    inv_denom[0] = 1.0 / diag_a[0];
    cprime[0] = off * inv_denom[0];
    for (std::size_t j = 1; j < m; ++j) {
        inv_denom[j] = 1.0 / (diag_a[j] - off * cprime[j - 1]);
        cprime[j] = off * inv_denom[j];
    }

    std::vector<Complex> rhs(m);
    for (int step = 0; step < grid.nt; ++step) {
        for (std::size_t j = 0; j < m; ++j) {
            rhs[j] = diag_b[j] * w.psi[j + 1] - off * (w.psi[j] + w.psi[j + 2]);
        }
        rhs[0] *= inv_denom[0];
        for (std::size_t j = 1; j < m; ++j) rhs[j] = (rhs[j] - off * rhs[j - 1]) * inv_denom[j];
        for (std::size_t j = m - 1; j-- > 0;) rhs[j] -= cprime[j] * rhs[j + 1];
        for (std::size_t j = 0; j < m; ++j) w.psi[j + 1] = rhs[j];

        if (std::abs(w.psi[1]) >= kContainment || std::abs(w.psi[nx - 2]) >= kContainment) {
            std::ostringstream msg;
            msg << "evolve_packet: wave packet reached the grid boundary at step " << step + 1
                << " of " << grid.nt << "; widen [x_min, x_max]";
            throw NumericalError(msg.str());
        }
    }
    return w;
}

double l2_relative(const Wavefunction& a, const Wavefunction& ref)
{
    if (a.psi.size() != ref.psi.size()) throw DomainError("l2_relative: grid mismatch");
    std::vector<double> num(a.psi.size()), den(a.psi.size());
    for (std::size_t i = 0; i < a.psi.size(); ++i) {
        num[i] = std::norm(a.psi[i] - ref.psi[i]);
        den[i] = std::norm(ref.psi[i]);
    }
    return std::sqrt(detail::pairwise_sum(num) / detail::pairwise_sum(den));
}

WidthExtrapolation extrapolate_delta_width(const PotentialSpec& p, const GridSpec& grid,
                                           double t0, double t)
{
    WidthExtrapolation out;
    if (p.delta_atoms.empty()) {
        out.value = evolve_packet(p, grid, t0, t);
        out.widths = {grid.delta_width};
        return out;
    }
    std::vector<Wavefunction> runs;
    GridSpec g = grid;
    for (int i = 0; i < 3; ++i) {
        out.widths.push_back(g.delta_width);
        runs.push_back(evolve_packet(p, g, t0, t));
        g.delta_width *= 0.5;
    }
    auto combine = [](const Wavefunction& a, const Wavefunction& b, double ca, double cb) {
        Wavefunction r = a;
        for (std::size_t i = 0; i < r.psi.size(); ++i) r.psi[i] = ca * a.psi[i] + cb * b.psi[i];
        return r;
    };
    const Wavefunction r1 = combine(runs[1], runs[0], 2.0, -1.0);
    const Wavefunction r2 = combine(runs[2], runs[1], 2.0, -1.0);
    out.value = combine(r2, r1, 4.0 / 3.0, -1.0 / 3.0);
    out.successive_differences = {l2_relative(runs[0], runs[1]), l2_relative(runs[1], runs[2]),
                                  l2_relative(r1, r2)};
    return out;
}

Complex free_packet_exact(const Packet& packet, double x, double dt)
{
    if (!(dt > 0.0)) throw DomainError("free_packet_exact: requires dt > 0");
    const double s2 = packet.width * packet.width;
    const Complex a{1.0 / (2.0 * dt), 1.0 / (4.0 * s2)};
    const Complex b{packet.center / (2.0 * s2), packet.momentum - x / dt};
    const double norm = std::pow(2.0 * std::numbers::pi * s2, -0.25);
    const Complex outer = std::exp(Complex{-packet.center * packet.center / (4.0 * s2),
                                           x * x / (2.0 * dt)});
    return inv_sqrt_2pi_i(dt) * norm * outer * gaussian_integral(a, b);
}

SeriesPacket propagate_packet_via_series(const PotentialSpec& p, double t0, double t,
                                         const Packet& packet, const QuadratureSpec& spec,
                                         const StopCriteria& stop,
                                         const SeriesPacketOptions& opts)
{
    if (!(t > t0)) throw DomainError("propagate_packet_via_series: requires t > t0");
    if (opts.y_points < 2 || opts.x_points < 2) {
        throw DomainError("propagate_packet_via_series: need at least 2 points per axis");
    }
    const double dt = t - t0;
    const double w = packet.width;
    const double spread = w * std::sqrt(1.0 + std::pow(dt / (2.0 * w * w), 2));

    std::vector<double> wy;
    const std::vector<double> ys = map_rule(gauss_legendre(opts.y_points),
                                            packet.center - opts.span * w,
                                            packet.center + opts.span * w, wy);
    SeriesPacket out;
    const double xc = packet.center + packet.momentum * dt;
    out.x = map_rule(gauss_legendre(opts.x_points), xc - opts.span * spread,
                     xc + opts.span * spread, out.weights);

    const std::size_t nyp = ys.size();
    const std::size_t total = out.x.size() * nyp;
    std::vector<Complex> contrib(total);
    std::vector<double> tails(total), errs(total);
    detail::parallel_for(static_cast<std::int64_t>(total), [&](std::int64_t idx) {
        const auto i = static_cast<std::size_t>(idx) / nyp;
        const auto j = static_cast<std::size_t>(idx) % nyp;
        const PropagatorQuery q{out.x[i], ys[j], t0, t};
        const PropagatorResult r = propagator(TestFunction{}, p, q, spec, stop);
        contrib[static_cast<std::size_t>(idx)] = wy[j] * r.value() * packet(ys[j]);
        tails[static_cast<std::size_t>(idx)] = r.tail;
        errs[static_cast<std::size_t>(idx)] = r.mc_stderr;
    });
    out.psi.resize(out.x.size());
    for (std::size_t i = 0; i < out.x.size(); ++i) {
        out.psi[i] = detail::pairwise_sum(std::span<const Complex>(contrib).subspan(i * nyp, nyp));
    }
    for (std::size_t k = 0; k < total; ++k) {
        out.max_tail = std::max(out.max_tail, tails[k]);
        out.max_mc_stderr = std::max(out.max_mc_stderr, errs[k]);
    }
    return out;
}

double l2_discrepancy(const SeriesPacket& a, const std::function<Complex(double)>& ref)
{
    std::vector<double> num(a.x.size()), den(a.x.size());
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        const Complex r = ref(a.x[i]);
        num[i] = a.weights[i] * std::norm(a.psi[i] - r);
        den[i] = a.weights[i] * std::norm(r);
    }
    return std::sqrt(detail::pairwise_sum(num) / detail::pairwise_sum(den));
}

double l2_discrepancy(const SeriesPacket& a, const Wavefunction& ref)
{
    return l2_discrepancy(a, [&](double x) { return ref.at(x); });
}

Complex born1_exp(double alpha, Complex c, const PropagatorQuery& q)
{
    if (!q.forward()) throw DomainError("born1_exp: requires t > t0");
    if (c == Complex{}) return {};

    auto integrand = [&](double s) {
        const double t1 = q.t - s;
        const double t2 = s - q.t0;
        const Complex a{1.0 / (2.0 * t1) + 1.0 / (2.0 * t2), 0.0};
        const Complex b{alpha, -(q.x / t1 + q.y / t2)};
        const Complex outer =
            std::exp(kI * (q.x * q.x / (2.0 * t1) + q.y * q.y / (2.0 * t2)));
        return inv_sqrt_2pi_i(t1) * inv_sqrt_2pi_i(t2) * outer * gaussian_integral(a, b);
    };
    using boost::math::quadrature::gauss_kronrod;
    const double re = gauss_kronrod<double, 61>::integrate(
        [&](double s) { return integrand(s).real(); }, q.t0, q.t, 15, 1e-14);
    const double im = gauss_kronrod<double, 61>::integrate(
        [&](double s) { return integrand(s).imag(); }, q.t0, q.t, 15, 1e-14);
    return -kI * c * Complex{re, im};
}

void write_wavefunction_csv(std::ostream& os, const Wavefunction& w)
{
    os << "x,re,im\n" << std::setprecision(17);
    for (std::size_t i = 0; i < w.psi.size(); ++i) {
        os << w.x(i) << ',' << w.psi[i].real() << ',' << w.psi[i].imag() << '\n';
    }
}

}  // namespace feynprop
