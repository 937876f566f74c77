#pragma once

#include <cstddef>
#include <vector>

namespace gkdv {

// Uniform grid x_i = x0 + i*h, i = 0..n-1.
struct Grid {
    double x0 = 0.0;
    double h = 0.0;
    std::size_t n = 0;

    double x(std::size_t i) const { return x0 + static_cast<double>(i) * h; }
    double x_last() const { return x(n - 1); }
    std::vector<double> points() const;
};

// Symmetric grid on [-half_width, half_width] with spacing <= h_max and an
// odd point count so that x = 0 is a node.
Grid make_symmetric_grid(double half_width, double h_max);

// Composite trapezoid rule on a uniform grid.
double trapezoid(const std::vector<double>& f, double h);

// Composite Simpson rule; falls back to trapezoid on the last interval when
// the point count is even.
double simpson(const std::vector<double>& f, double h);

// Cumulative integral from the left endpoint, trapezoid weights, same length
// as the input.
std::vector<double> cumulative_trapezoid(const std::vector<double>& f, double h);

// Cumulative integral with the Euler-Maclaurin h^2 endpoint correction
// (requires smooth samples); 4th-order accurate.
std::vector<double> cumulative_integral(const std::vector<double>& f, double h);

// Centered 4th-order first derivative on a uniform grid; one-sided 4th-order
// stencils at the two points nearest each boundary.
std::vector<double> derivative_4th(const std::vector<double>& f, double h);

// Centered 4th-order second derivative on a uniform grid; one-sided stencils
// near the boundary.
std::vector<double> second_derivative_4th(const std::vector<double>& f, double h);

// Cubic Lagrange interpolation of samples f on grid g at point x. Outside the
// grid the value decays: the result is f at the nearest endpoint damped by
// exp(-rate*dist) with rate estimated from the last few samples (clamped to
// [0.05, 20]); zero endpoint values extrapolate to zero.
double interp_cubic(const Grid& g, const std::vector<double>& f, double x);

// l2 norm of samples scaled by sqrt(h) (discrete L2 norm).
double l2_norm(const std::vector<double>& f, double h);

// Discrete H1 norm: sqrt(L2(f)^2 + L2(f')^2) with f' the 4th-order derivative.
double h1_norm(const std::vector<double>& f, double h);

double linf_norm(const std::vector<double>& f);

} // namespace gkdv
