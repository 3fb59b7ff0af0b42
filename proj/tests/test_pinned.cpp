#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "feynprop/errors.hpp"
#include "feynprop/free_kernel.hpp"
#include "feynprop/pinned.hpp"

using namespace feynprop;

namespace {

TestFunction random_theta(std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<TestFunction::Node> nodes{{-0.2 + 0.1 * u(gen), 0.0}};
    for (int i = 0; i < 3; ++i) {
        nodes.push_back({nodes.back().time + 0.2 + 0.1 * u(gen), {0.5 * u(gen), 0.5 * u(gen)}});
    }
    nodes.push_back({nodes.back().time + 0.3, 0.0});
    return TestFunction(nodes);
}

std::vector<double> sorted_uniform(std::mt19937_64& gen, int n, double a, double b)
{
    std::uniform_real_distribution<double> u(a, b);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = u(gen);
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_SUITE("pinned")
{
    TEST_CASE("multi_delta_T examples")
    {
        const ShiftedArgument zero;
        const PropagatorQuery q{0.4, -0.3, 0.0, 1.0};
        CHECK(std::abs(multi_delta_T(zero, {}, q) - free_T(zero, q)) < 1e-15);

        const Complex v = multi_delta_T(zero, {{0.5}, {0.0}}, {0.0, 0.0, 0.0, 1.0});
        CHECK(std::abs(v - Complex(0.0, -1.0 / std::numbers::pi)) < 1e-15);

        CHECK_THROWS_AS(multi_delta_T(zero, {{0.6, 0.4}, {0.0, 0.0}}, q), DomainError);
        CHECK_THROWS_AS(multi_delta_T(zero, {{0.5}, {0.0, 1.0}}, q), DomainError);
    }

    TEST_CASE("pins at zero forcing factor into free propagators")
    {
        std::mt19937_64 gen(3);
        const ShiftedArgument zero;
        for (int k = 1; k <= 3; ++k) {
            const PropagatorQuery q{0.8, -0.6, 0.2, 1.7};
            const auto taus = sorted_uniform(gen, k, q.t0, q.t);
            const auto xs = sorted_uniform(gen, k, -1.0, 1.0);
            Complex prod{1.0, 0.0};
            double tp = q.t0, xp = q.y;
            for (int j = 0; j <= k; ++j) {
                const double tj = j < k ? taus[static_cast<std::size_t>(j)] : q.t;
                const double xj = j < k ? xs[static_cast<std::size_t>(j)] : q.x;
                prod *= free_propagator(xj, xp, tj - tp);
                tp = tj;
                xp = xj;
            }
            const Complex v = multi_delta_T(zero, {taus, xs}, q);
            CHECK(std::abs(v - prod) <= 1e-12 * std::abs(prod));
        }
    }

    TEST_CASE("k = 1 composition at a forcing argument")
    {
        // One pin splits the forced kernel into two forced kernels whose
        // boundary phases cancel at the pin.
        const TestFunction theta({{0.1, 0.0}, {0.5, {0.6, 0.2}}, {0.9, 0.0}});
        const PropagatorQuery q{0.5, -0.2, 0.0, 1.0};
        const double tau = 0.37, x1 = 0.3;
        const Complex global = std::exp(-0.5 * kI * theta.integral_sq(0.0, 1.0));
        const Complex left = free_green(theta, {x1, q.y, q.t0, tau});
        const Complex right = free_green(theta, {q.x, x1, tau, q.t});
        // free_green carries exp(-(i/2) int_window theta^2) and boundary
        // phases; undo them to get the pinned T-transform
        const Complex undo = std::exp(0.5 * kI * theta.integral_sq(0.0, tau)) *
                             std::exp(0.5 * kI * theta.integral_sq(tau, 1.0)) *
                             std::exp(-kI * q.y * theta(0.0) + kI * q.x * theta(1.0));
        const Complex expected = global * left * right * undo;
        const Complex v = multi_delta_T(ShiftedArgument(theta), {{tau}, {x1}}, q);
        CHECK(std::abs(v - expected) <= 1e-12 * std::abs(expected));
    }

    TEST_CASE("phi_T reductions")
    {
        const TestFunction theta({{0.1, 0.0}, {0.5, {0.6, 0.2}}, {0.9, 0.0}});
        const PropagatorQuery q{0.5, -0.2, 0.0, 1.0};
        const Complex free = free_T(ShiftedArgument(theta), q);
        CHECK(std::abs(phi_T(theta, {}, {}, q) - free) <= 1e-13 * std::abs(free));

        const PinConfiguration pins{{0.3, 0.6}, {0.1, -0.2}};
        const Complex m = multi_delta_T(ShiftedArgument(theta), pins, q);
        CHECK(std::abs(phi_T(theta, pins, {}, q) - m) <= 1e-13 * std::abs(m));

        // alpha = 0 insertion disappears
        const Complex zero_alpha = phi_T(TestFunction{}, {}, {{0.4}, {0.0}}, q);
        CHECK(std::abs(zero_alpha - free_T(ShiftedArgument{}, q)) < 1e-15);
    }

    TEST_CASE("phi_T equals multi_delta_T at the shifted argument")
    {
        std::mt19937_64 gen(5);
        for (int trial = 0; trial < 50; ++trial) {
            const TestFunction theta = random_theta(gen);
            const PropagatorQuery q{0.3, -0.4, 0.0, 1.0};
            const auto taus = sorted_uniform(gen, 2, 0.0, 1.0);
            const PinConfiguration pins{taus, {0.2, -0.1}};
            const ExpInsertion ins{sorted_uniform(gen, 2, 0.0, 1.0), {0.7, -0.4}};
            std::vector<ImaginaryStep> steps;
            double asum = 0.0;
            for (std::size_t l = 0; l < ins.size(); ++l) {
                steps.push_back({ins.ss[l], ins.alphas[l]});
                asum += ins.alphas[l];
            }
            const Complex direct =
                multi_delta_T(ShiftedArgument(theta, q.t, steps), pins, q) * std::exp(q.x * asum);
            const Complex v = phi_T(theta, pins, ins, q);
            CHECK(std::abs(v - direct) <= 1e-11 * std::abs(direct));
        }
    }

    TEST_CASE("phi_T is symmetric in the insertions")
    {
        const TestFunction theta({{0.0, 0.0}, {0.4, {0.3, -0.5}}, {1.0, 0.0}});
        const PropagatorQuery q{0.2, 0.1, 0.0, 1.0};
        const PinConfiguration pins{{0.5}, {0.3}};
        const Complex a = phi_T(theta, pins, {{0.2, 0.7, 0.9}, {1.0, -0.5, 0.3}}, q);
        const Complex b = phi_T(theta, pins, {{0.9, 0.2, 0.7}, {0.3, 1.0, -0.5}}, q);
        const Complex c = phi_T(theta, pins, {{0.7, 0.9, 0.2}, {-0.5, 0.3, 1.0}}, q);
        CHECK(std::abs(a - b) <= 1e-14 * std::abs(a));
        CHECK(std::abs(a - c) <= 1e-14 * std::abs(a));
    }

    TEST_CASE("phi_T is continuous as an insertion crosses a pin")
    {
        const TestFunction theta({{0.0, 0.0}, {0.4, {0.3, -0.5}}, {1.0, 0.0}});
        const PropagatorQuery q{0.2, 0.1, 0.0, 1.0};
        const PinConfiguration pins{{0.35, 0.6}, {0.3, -0.2}};
        auto at = [&](double s) { return phi_T(theta, pins, {{s}, {0.8}}, q); };
        const double eps = 1e-6;
        for (double tau : pins.taus) {
            // one-sided limits by linear extrapolation from offsets eps, 2 eps
            const Complex lo = 2.0 * at(tau - eps) - at(tau - 2 * eps);
            const Complex hi = 2.0 * at(tau + eps) - at(tau + 2 * eps);
            CHECK(std::abs(lo - hi) <= 1e-8 * std::abs(lo));
        }
    }

    TEST_CASE("stripped evaluation drops only the singular weight")
    {
        const PropagatorQuery q{0.4, -0.3, 0.0, 1.0};
        const PinConfiguration pins{{0.2, 0.7}, {0.5, -0.1}};
        const Complex full = phi_T(TestFunction{}, pins, {}, q);
        const Complex stripped = phi_T(TestFunction{}, pins, {}, q, {.strip_singular_weight = true});
        double w = 1.0;
        double prev = 0.0;
        for (double tau : {0.2, 0.7, 1.0}) {
            w *= 1.0 / std::sqrt(2.0 * std::numbers::pi * (tau - prev));
            prev = tau;
        }
        CHECK(std::abs(full - w * stripped) <= 1e-14 * std::abs(full));

        const std::vector<Complex> sp{0.2, 0.5, 0.3};
        const Complex chain = pin_chain_stripped(sp, pins.xs, q);
        CHECK(std::abs(chain - stripped) <= 1e-13 * std::abs(chain));
    }

    TEST_CASE("exponent cap")
    {
        const PropagatorQuery q{100.0, 0.0, 0.0, 1.0};
        CHECK_THROWS_AS(phi_T(TestFunction{}, {}, {{0.5, 0.5}, {10.0, 10.0}}, q), RangeError);
        PhiOptions loose;
        loose.exponent_cap = 2000.0;
        CHECK(std::isfinite(std::abs(phi_T(TestFunction{}, {}, {{0.5}, {1.0}}, q, loose))));
    }

    TEST_CASE("pointwise bound examples")
    {
        const PropagatorQuery q{1.5, -0.5, 0.0, 2.0};
        const double b0 = pointwise_bound(TestFunction{}, {}, {}, q);
        CHECK(b0 == doctest::Approx(std::exp(2.25) / std::sqrt(4.0 * std::numbers::pi)));
        const double s1 = pointwise_bound(TestFunction{}, {}, {{0.1}, {0.7}}, q);
        const double s2 = pointwise_bound(TestFunction{}, {}, {{1.9}, {0.7}}, q);
        CHECK(s1 == s2);
    }

    TEST_CASE("pointwise bound majorizes phi_T on random configurations")
    {
        std::mt19937_64 gen(2024);
        std::uniform_int_distribution<int> count(0, 3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        int checked = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const TestFunction theta = trial % 4 == 0 ? TestFunction{} : random_theta(gen);
            const PropagatorQuery q{1.5 * u(gen), 1.5 * u(gen), 0.0, 0.3 + 0.7 * (1 + u(gen))};
            const int k = count(gen), d = count(gen);
            PinConfiguration pins{sorted_uniform(gen, k, q.t0, q.t), {}};
            for (int j = 0; j < k; ++j) pins.xs.push_back(1.5 * u(gen));
            ExpInsertion ins;
            for (int l = 0; l < d; ++l) {
                ins.ss.push_back(q.t0 + (q.t - q.t0) * 0.5 * (1 + u(gen)));
                ins.alphas.push_back(1.5 * u(gen));
            }
            const double v = std::abs(phi_T(theta, pins, ins, q));
            const double bound = pointwise_bound(theta, pins, ins, q);
            CHECK(v <= bound * (1.0 + 1e-10));
            ++checked;
        }
        CHECK(checked == 1000);
    }
}
