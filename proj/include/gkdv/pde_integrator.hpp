#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "gkdv/fft.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/nonlinearity.hpp"

namespace gkdv {

// Periodic field sample: u on grid, domain [x0, x0 + n h), length n h.
struct FieldState {
    Grid grid;
    double t = 0.0;
    std::vector<double> u;
};

// Centered periodic grid of length L_dom with n points (n a power of two).
Grid make_periodic_grid(double L_dom, std::size_t n);
FieldState make_state(double L_dom, std::size_t n, double t = 0.0);

struct Invariants {
    double integral = 0.0; // int u
    double mass = 0.0;     // int u^2
    double energy = 0.0;   // 1/2 int u_x^2 - int F(u), u_x spectral
};
Invariants invariants(const FieldState& state, const NonlinearityModel& model);

// x -> -x, t -> -t. The equation is invariant, so composing a forward run
// with this on both sides integrates backward in time.
FieldState time_reversed(const FieldState& state);

struct Observer {
    double stride = 0.0; // time between calls; 0 calls on every step
    std::function<void(const FieldState&)> fn;
};

struct IntegratorSettings {
    NonlinearityModel model;
    double dt = 1e-3;
    double frame_speed = 0.0;    // solves u_t - V u_x + d/dx(u_xx + f(u)) = 0
    bool dealias = true;         // 2/3 rule on the nonlinear term
    double blowup_ceiling = 1e3; // BlowupDetected when linf(u) exceeds this
    double sponge_width = 0.0;   // absorbing layer at both edges; 0 disables
    double sponge_strength = 0.0;
};

// Nonlinear-advection bound 1/2 / (k_kept * max|f'(u)|), capped at 1. The
// dispersive part costs nothing: the scheme treats it exactly.
double suggested_dt(const FieldState& state, const NonlinearityModel& model);

// Fourth-order exponential time differencing (ETDRK4) with the third
// derivative integrated exactly in Fourier space and f(u) pseudospectral.
// The phi-function weights are evaluated by a 32-point unit-circle contour
// mean, stable for every mode regardless of k^3 dt.
class Etdrk4 {
public:
    Etdrk4(IntegratorSettings settings, const Grid& grid);
    const IntegratorSettings& settings() const { return settings_; }

    void step(FieldState& state);            // one settings.dt step
    void step(FieldState& state, double dt); // one step of a given size
    // Fixed-dt march to t_end (a shorter final step absorbs the remainder),
    // invoking each observer at the start, on its stride, and at t_end.
    void run(FieldState& state, double t_end, const std::vector<Observer>& observers = {});

private:
    void prepare(double dt);
    void nonlinear_rhs(std::vector<std::complex<double>>& spec);
    void check_state(const FieldState& state) const;

    IntegratorSettings settings_;
    Grid grid_;
    Fft fft_;
    double dt_tab_ = -1.0;
    std::vector<std::complex<double>> lin_;
    std::vector<double> mask_;
    std::vector<std::complex<double>> E_, E2_, Q_, f1_, f2_, f3_;
    std::vector<std::complex<double>> v_, a_, b_, c_, Nu_, Na_, Nb_, Nc_;
    std::vector<double> phys_;
    std::vector<double> sponge_;
};

// Exact two-soliton solution of the integrable quadratic model, speeds
// (1, c), evaluated from the analytic second log-derivative of the tau
// function with the largest exponent factored out per point.
std::vector<double> exact_two_soliton_p2(double c, double t, const Grid& grid);

// Closed-form collision shifts of the same solution: the fast soliton jumps
// forward by delta1 = 2 ln((1+sqrt(c))/(1-sqrt(c))), the slow one backward
// by delta2 = -delta1/sqrt(c).
struct TwoSolitonShifts {
    double delta1 = 0.0;
    double delta2 = 0.0;
};
TwoSolitonShifts exact_shifts_p2(double c);

} // namespace gkdv
