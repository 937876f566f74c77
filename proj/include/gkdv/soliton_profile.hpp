#pragma once

#include <vector>

#include "gkdv/grid.hpp"
#include "gkdv/nonlinearity.hpp"

namespace gkdv {

struct ProfileGridSpec {
    // Half-width of the symmetric grid; 0 selects max(50, 40/sqrt(c) + 10).
    double half_width = 0.0;
    double h = 0.02;
};

// Solitary-wave profile solving Q'' + f(Q) = c Q, tabulated with derivatives.
// Immutable after construction.
struct SolitonProfile {
    NonlinearityModel model; // original model (f)
    double c = 1.0;
    int sign = +1;           // -1 allowed only for p = 3
    double amplitude = 0.0;  // Q(0), signed
    Grid grid;
    std::vector<double> Q, Qp, Qpp;

    // Pointwise evaluation with interpolation inside the grid and the exact
    // exp(-sqrt(c)|x|) envelope beyond it. deriv/second come from the first
    // integral and the profile equation, so they are consistent with value()
    // at any x.
    double value(double x) const;
    double deriv(double x) const;
    double second(double x) const;
};

struct ProfileFunctionals {
    double integral = 0.0; // int Q
    double mass = 0.0;     // int Q^2
    double energy = 0.0;   // 1/2 int Q'^2 - int F(Q)
};

struct LambdaProfile {
    Grid grid;
    std::vector<double> values; // dQ_c/dc at the reference speed
};

struct CDerivatives {
    double dIntQ_dc = 0.0;
    double dMass_dc = 0.0;
    LambdaProfile lambda;
    bool stability_violation = false; // dMass_dc <= 0
};

// Smallest q > 0 with c q^2 = 2F(q) (turning point of the first integral),
// signed by the branch. Throws NoSolitaryWave when no transversal root exists
// below the search ceiling.
double amplitude(const NonlinearityModel& model, double c, int sign = +1);

// Tabulates the profile. Pure powers use the closed sech form; perturbed
// models integrate x(Q) by quadrature with the q = amplitude*(1 - s^2)
// substitution at the peak and a log-form tail, then invert.
SolitonProfile build_profile(const NonlinearityModel& model, double c, int sign = +1,
                             ProfileGridSpec spec = {});

ProfileFunctionals functionals(const SolitonProfile& profile);

// Central differences in c with step 1e-4*c and Richardson extrapolation.
// All four auxiliary profiles share the reference grid.
CDerivatives c_derivatives(const NonlinearityModel& model, double c, int sign = +1,
                           ProfileGridSpec spec = {});

// Profile of the rescaled nonlinearity at speed c/c1: the model's monomial
// coefficients transform by c1^{(e-p)/(p-1)} and the profile is rebuilt at
// the rescaled speed.
SolitonProfile rescale_profile(const SolitonProfile& profile, double c1);

// The rescaled model itself (exposed for tests and the physical-frame
// assembly).
NonlinearityModel rescale_model(const NonlinearityModel& model, double c1);

} // namespace gkdv
