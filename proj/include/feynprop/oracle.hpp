#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include "feynprop/model.hpp"
#include "feynprop/quadrature.hpp"
#include "feynprop/series.hpp"

namespace feynprop {

// psi0(x) = (2 pi w^2)^(-1/4) exp(-(x - center)^2 / (4 w^2) + i momentum x)
struct Packet {
    double center = 0.0;
    double width = 0.5;
    double momentum = 0.0;

    Complex operator()(double x) const;
};

struct GridSpec {
    double x_min = -20.0;
    double x_max = 20.0;
    int nx = 4096;
    int nt = 4096;
    // Gaussian width replacing each delta atom
    double delta_width = 0.16;
    Packet packet;

    double spacing() const { return (x_max - x_min) / (nx - 1); }
    // DomainError unless x_max > x_min, nx, nt >= 16, delta_width >= 2 spacing.
    void validate() const;
};

// Samples on the uniform grid x_i = x_min + i h, i = 0..nx-1.
struct Wavefunction {
    double x_min = 0.0;
    double h = 1.0;
    std::vector<Complex> psi;

    double x(std::size_t i) const { return x_min + static_cast<double>(i) * h; }
    // h sum |psi|^2
    double norm_sq() const;
    // 4-point Lagrange interpolation; zero outside the grid.
    Complex at(double x) const;
};

// Regularized potential used on the grid: g (sum_l c_l e^{alpha_l x}
// + sum_j g_j N(x; y_j, width^2)). Real part only; complex coefficients are
// rejected by evolve_packet.
double regularized_potential(const PotentialSpec& p, double x, double width);

/*!
 * Crank-Nicolson for i psi_t = -psi_xx / 2 + V psi on the grid with
 * Dirichlet walls, nt steps from t0 to t, starting from grid.packet.
 *
 * NumericalError if |psi| reaches 1e-8 next to a wall at any step.
 */
Wavefunction evolve_packet(const PotentialSpec& p, const GridSpec& grid, double t0, double t);

struct WidthExtrapolation {
    Wavefunction value;
    std::vector<double> widths;
    // L2 norms of successive differences: the three raw runs, then the two
    // first-stage extrapolants against the final one.
    std::vector<double> successive_differences;
};

// Runs evolve_packet at delta widths w, w/2, w/4 (w = grid.delta_width) and
// eliminates error terms proportional to w and w^2.
WidthExtrapolation extrapolate_delta_width(const PotentialSpec& p, const GridSpec& grid,
                                           double t0, double t);

// Exact free evolution of the packet over dt > 0.
Complex free_packet_exact(const Packet& packet, double x, double dt);

struct SeriesPacketOptions {
    int y_points = 64;
    int x_points = 48;
    double span = 6.0;  // packet widths either side of the center
};

struct SeriesPacket {
    std::vector<double> x;
    std::vector<double> weights;
    std::vector<Complex> psi;
    double max_tail = 0.0;
    double max_mc_stderr = 0.0;
};

/*!
 * psi(x, t) = int K(x,t|y,t0) psi0(y) dy with K from the truncated series
 * (theta = 0). Gauss-Legendre in y over center +- span*width and in x over
 * the freely spread window center + momentum dt +- span*width(dt).
 */
SeriesPacket propagate_packet_via_series(const PotentialSpec& p, double t0, double t,
                                         const Packet& packet, const QuadratureSpec& spec,
                                         const StopCriteria& stop,
                                         const SeriesPacketOptions& opts = {});

// sqrt(sum w |a - ref(x)|^2 / sum w |ref(x)|^2) over the series nodes.
double l2_discrepancy(const SeriesPacket& a, const Wavefunction& ref);
// Same with an explicit reference function.
double l2_discrepancy(const SeriesPacket& a, const std::function<Complex(double)>& ref);
// Discrete L2 relative difference of two wavefunctions on the same grid.
double l2_relative(const Wavefunction& a, const Wavefunction& ref);

/*!
 * First Born term for V = c e^{alpha x}:
 *   -i c int_{t0}^{t} ds int dz K0(x,t|z,s) e^{alpha z} K0(z,s|y,t0),
 * z-integral by gaussian_integral, s-integral by Gauss-Kronrod.
 */
Complex born1_exp(double alpha, Complex c, const PropagatorQuery& q);

// CSV rows "x,re,im" with 17 significant digits.
void write_wavefunction_csv(std::ostream& os, const Wavefunction& w);

}  // namespace feynprop
