#pragma once

#include <complex>
#include <span>
#include <vector>

namespace feynprop {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

//---------------------------------------------------------------------------//
// Potentials
//---------------------------------------------------------------------------//

// One atom of the exponential (Laplace-transform) part: coeff * exp(alpha x).
struct ExpAtom {
    double alpha = 0.0;
    Complex coeff{0.0, 0.0};
};

// One atom of the singular part: weight * delta(x - location).
struct DeltaAtom {
    double location = 0.0;
    double weight = 0.0;
};

/*!
 * V(x) = g * ( sum_l c_l exp(alpha_l x) + sum_j g_j delta(x - y_j) ).
 *
 * Both atom lists may be empty; with both empty the motion is free. Finite
 * atom lists satisfy the exponential-moment condition on the Laplace
 * measure and the bounded-support condition on the singular measure
 * automatically.
 */
struct PotentialSpec {
    std::vector<ExpAtom> exp_atoms;
    std::vector<DeltaAtom> delta_atoms;
    double g = 1.0;

    bool is_free() const { return exp_atoms.empty() && delta_atoms.empty(); }

    // max_j |y_j|, zero without delta atoms.
    double delta_support_radius() const;

    // Same atoms, coupling multiplied by lambda.
    PotentialSpec scaled(double lambda) const;

    // Throws DomainError on non-finite atom data.
    void validate() const;
};

// Smooth part g * sum_l c_l exp(alpha_l x). Delta atoms are distributions and
// do not contribute to a point value. Throws RangeError naming the atom if
// exp(alpha x) overflows.
Complex eval_potential(const PotentialSpec& p, double x);

//---------------------------------------------------------------------------//
// Queries
//---------------------------------------------------------------------------//

// Endpoint data for K(x, t | y, t0).
struct PropagatorQuery {
    double x = 0.0;
    double y = 0.0;
    double t0 = 0.0;
    double t = 1.0;

    double dt() const { return t - t0; }
    bool forward() const { return t > t0; }
};

//---------------------------------------------------------------------------//
// Test functions
//---------------------------------------------------------------------------//

/*!
 * Complex piecewise-linear function with compact support.
 *
 * Linear between nodes, identically zero outside [first node, last node].
 * Node times are strictly increasing and the end values are zero, so the
 * function is continuous on the whole line. A default-constructed
 * TestFunction is the zero function.
 *
 * Running integrals of theta and theta^2 are tabulated at the nodes, so
 * integral() and integral_sq() cost one binary search per endpoint.
 */
class TestFunction {
  public:
    struct Node {
        double time = 0.0;
        Complex value{0.0, 0.0};
    };

    TestFunction() = default;
    explicit TestFunction(std::vector<Node> nodes);

    bool is_zero() const { return nodes_.empty(); }
    std::span<const Node> nodes() const { return nodes_; }
    double support_begin() const;
    double support_end() const;

    Complex operator()(double tau) const;

    // Derivative of the segment containing tau (right derivative at nodes).
    Complex slope(double tau) const;

    // Exact int_a^b theta and int_a^b theta^2 (complex square, no conjugate).
    Complex integral(double a, double b) const;
    Complex integral_sq(double a, double b) const;

    // int |theta|^2 over the whole line.
    double l2_norm_sq() const;
    // sup_{[a,b]} |theta|.
    double sup_abs(double a, double b) const;
    // int_a^b |theta'|.
    double total_variation(double a, double b) const;

    TestFunction scaled(Complex lambda) const;

  private:
    // int_{-inf}^{tau} theta, int_{-inf}^{tau} theta^2.
    Complex primitive(double tau) const;
    Complex primitive_sq(double tau) const;
    // Index i with nodes_[i].time <= tau < nodes_[i+1].time; requires tau in
    // [support_begin, support_end).
    std::size_t segment_of(double tau) const;

    std::vector<Node> nodes_;
    std::vector<Complex> cum_;
    std::vector<Complex> cum_sq_;
};

// A jump of i * alpha on (start, end].
struct ImaginaryStep {
    double start = 0.0;
    double alpha = 0.0;
};

/*!
 * base(tau) + i * sum_l alpha_l * 1_{(s_l, end]}(tau).
 *
 * This is the test-function argument after the exponential insertions
 * exp(alpha_l x(s_l)) have been absorbed into a complex shift. `end` is the
 * query time t; all step starts must lie in [t0, t].
 */
class ShiftedArgument {
  public:
    ShiftedArgument() = default;
    explicit ShiftedArgument(TestFunction base, double end = 0.0,
                             std::vector<ImaginaryStep> steps = {});

    const TestFunction& base() const { return base_; }
    double end() const { return end_; }
    std::span<const ImaginaryStep> steps() const { return steps_; }

    Complex operator()(double tau) const;

    // sum of step heights active at tau (imaginary unit not included).
    double step_sum(double tau) const;

  private:
    TestFunction base_;
    double end_ = 0.0;
    std::vector<ImaginaryStep> steps_;
};

struct PiecewiseIntegrals {
    Complex first{0.0, 0.0};   // int_a^b f
    Complex second{0.0, 0.0};  // int_a^b f^2
};

// Exact closed forms; a == b gives zeros. Requires a <= b.
PiecewiseIntegrals piecewise_integrals(const ShiftedArgument& f, double a,
                                       double b);

// sup_{[t0,t]} |f| + int_{t0}^{t} |f'| + (int_R |f|^2)^(1/2).
double appendix_norm(const TestFunction& f, double t0, double t);

}  // namespace feynprop
