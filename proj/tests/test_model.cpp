#include <doctest.h>

#include <cmath>
#include <random>

#include "feynprop/errors.hpp"
#include "feynprop/model.hpp"

using namespace feynprop;

namespace {

TestFunction hat(double a, double peak_at, double b, Complex height)
{
    return TestFunction({{a, 0.0}, {peak_at, height}, {b, 0.0}});
}

}  // namespace

TEST_SUITE("model")
{
    TEST_CASE("eval_potential examples")
    {
        PotentialSpec c;
        c.exp_atoms = {{0.0, 5.0}};
        CHECK(eval_potential(c, 3.0) == Complex(5.0, 0.0));

        PotentialSpec d;
        d.delta_atoms = {{0.0, 1.0}};
        CHECK(eval_potential(d, 3.0) == Complex{});

        PotentialSpec cosh2;
        cosh2.exp_atoms = {{1.0, 1.0}, {-1.0, 1.0}};
        CHECK(eval_potential(cosh2, 0.0).real() == doctest::Approx(2.0));
    }

    TEST_CASE("eval_potential is linear in coefficients and coupling")
    {
        PotentialSpec p;
        p.exp_atoms = {{0.7, {1.0, -0.5}}, {-0.3, {0.25, 2.0}}};
        p.g = 1.3;
        const Complex base = eval_potential(p, 0.9);
        CHECK(std::abs(eval_potential(p.scaled(-2.5), 0.9) + 2.5 * base) < 1e-14);
        PotentialSpec doubled = p;
        for (auto& a : doubled.exp_atoms) a.coeff *= 2.0;
        CHECK(std::abs(eval_potential(doubled, 0.9) - 2.0 * base) < 1e-14);
    }

    TEST_CASE("eval_potential overflow names the atom")
    {
        PotentialSpec p;
        p.exp_atoms = {{0.0, 1.0}, {10.0, 1.0}};
        try {
            eval_potential(p, 100.0);
            FAIL("expected RangeError");
        } catch (const RangeError& e) {
            CHECK(std::string(e.what()).find("exp atom 1") != std::string::npos);
        }
    }

    TEST_CASE("piecewise_integrals examples")
    {
        const auto zero = piecewise_integrals(ShiftedArgument(TestFunction{}, 1.0), 0.2, 0.9);
        CHECK(zero.first == Complex{});
        CHECK(zero.second == Complex{});

        const ShiftedArgument step(TestFunction{}, 1.0, {{0.0, 1.0}});
        const auto s = piecewise_integrals(step, 0.0, 1.0);
        CHECK(std::abs(s.first - kI) < 1e-15);
        CHECK(std::abs(s.second + 1.0) < 1e-15);

        const ShiftedArgument h(hat(0.0, 1.0, 2.0, 1.0));
        const auto r = piecewise_integrals(h, 0.0, 2.0);
        CHECK(std::abs(r.first - 1.0) < 1e-15);
        CHECK(std::abs(r.second - 2.0 / 3.0) < 1e-15);

        CHECK(piecewise_integrals(h, 0.5, 0.5).first == Complex{});
    }

    TEST_CASE("piecewise_integrals is additive")
    {
        std::mt19937_64 gen(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<TestFunction::Node> nodes{{-0.3, 0.0}};
            double tnow = -0.3;
            for (int i = 0; i < 4; ++i) {
                tnow += 0.1 + 0.4 * u(gen);
                nodes.push_back({tnow, {u(gen) - 0.5, u(gen) - 0.5}});
            }
            nodes.push_back({tnow + 0.3, 0.0});
            const ShiftedArgument f(TestFunction(nodes), 1.5,
                                    {{0.2 * u(gen), u(gen) - 0.5}, {0.5 + u(gen), 2.0 * u(gen)}});
            double pts[3] = {-0.5 + 2.0 * u(gen), -0.5 + 2.0 * u(gen), -0.5 + 2.0 * u(gen)};
            std::sort(pts, pts + 3);
            const auto whole = piecewise_integrals(f, pts[0], pts[2]);
            const auto left = piecewise_integrals(f, pts[0], pts[1]);
            const auto right = piecewise_integrals(f, pts[1], pts[2]);
            const double scale1 = std::max(std::abs(whole.first), 1e-3);
            const double scale2 = std::max(std::abs(whole.second), 1e-3);
            CHECK(std::abs(left.first + right.first - whole.first) <= 1e-13 * scale1);
            CHECK(std::abs(left.second + right.second - whole.second) <= 1e-13 * scale2);
        }
    }

    TEST_CASE("appendix_norm examples and homogeneity")
    {
        CHECK(appendix_norm(TestFunction{}, 0.0, 1.0) == 0.0);
        const TestFunction h = hat(0.0, 0.5, 1.0, 1.0);
        CHECK(appendix_norm(h, 0.0, 1.0) == doctest::Approx(3.0 + 1.0 / std::sqrt(3.0)).epsilon(1e-14));
        CHECK(appendix_norm(h, 2.0, 3.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));

        const TestFunction g({{-0.2, 0.0}, {0.3, {0.4, -1.1}}, {0.8, {-0.7, 0.2}}, {1.4, 0.0}});
        for (double lam : {-3.0, 0.25, 7.5}) {
            const double lhs = appendix_norm(g.scaled(lam), 0.0, 1.0);
            const double rhs = std::abs(lam) * appendix_norm(g, 0.0, 1.0);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
        }
    }

    TEST_CASE("test function invariants are enforced")
    {
        CHECK_THROWS_AS(TestFunction({{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}}), DomainError);
        CHECK_THROWS_AS(TestFunction({{0.0, 1.0}, {1.0, 0.0}}), DomainError);
        CHECK_THROWS_AS(TestFunction({{0.0, 0.0}, {1.0, 1.0}}), DomainError);
    }

    TEST_CASE("shifted argument uses half-open steps")
    {
        const ShiftedArgument f(TestFunction{}, 1.0, {{0.5, 2.0}});
        CHECK(f(0.5) == Complex{});
        CHECK(f(1.0) == Complex(0.0, 2.0));
        CHECK(f(0.75) == Complex(0.0, 2.0));
    }
}
