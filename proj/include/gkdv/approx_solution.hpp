#pragma once

#include <cstddef>
#include <vector>

#include "gkdv/grid.hpp"
#include "gkdv/nonlinearity.hpp"
#include "gkdv/soliton_profile.hpp"

namespace gkdv {

// One (k, ell) correction block: the translation-rate coefficient a, the
// boundary coefficient b of B, and the tabulated profiles A (even, decaying)
// and B (odd, tending to +-b) with their derivatives on the owning params'
// term_grid.
struct CorrectionTerm {
    int k = 1;
    int ell = 0;
    double a = 0.0;
    double b = 0.0;
    std::vector<double> A, Aprime;
    std::vector<double> B, Bprime;
};

// Immutable data bundle for the approximate two-soliton solution in the frame
// of the large soliton. Built in the normalized frame (large speed 1);
// rescale_to stamps a physical large speed c1 onto a copy and every operation
// consults it. c == 0 is the single-wave sentinel: v = Q and S = 0.
struct ApproxSolutionParams {
    NonlinearityModel model;   // normalized-frame nonlinearity
    double c1 = 1.0;           // physical large-soliton speed
    double c = 0.0;            // small-soliton speed, normalized frame
    double T_c = 0.0;          // normalized half-window c^(-1/2-1/100)
    double a10 = 0.0;          // first-order coefficients; kept even when the
    double b10 = 0.0;          // truncation list is edited
    SolitonProfile big;        // speed-1 profile
    SolitonProfile small;      // speed-c profile (unset when c == 0)
    std::vector<CorrectionTerm> terms; // default {(1,0)}
    Grid term_grid;            // grid carrying the A/B tables
    Grid alpha_grid;           // grid carrying the alpha/beta tables
    std::vector<double> alpha; // odd, plateaus at +-Delta/2
    std::vector<double> beta;  // alpha', even
};

// Builds the normalized-frame bundle: solves the first-order correction
// system at speed 1 and tabulates alpha(s) = int_0^s sum a c^ell Q_c^k.
ApproxSolutionParams make_approx_params(const NonlinearityModel& model, double c);

// Copy with the correction sum removed: v = Q(x) + Q_c(y_c), alpha = 0. The
// comparison tier in the defect-scaling experiments.
ApproxSolutionParams without_corrections(const ApproxSolutionParams& params);

// Physical-frame half-window c1^(-3/2) T_c (infinite when c == 0).
double time_window(const ApproxSolutionParams& params);

// Grid for defect and recomposition work: covers both soliton cores over the
// whole window plus padding well beyond 10 decay lengths of the slowest tail;
// power-of-two length for the spectral pass.
Grid recommended_grid(const ApproxSolutionParams& params);

// v(t, .) sampled on grid. Throws WindowExceeded when |t| > time_window.
std::vector<double> evaluate_v(const ApproxSolutionParams& params, double t,
                               const Grid& grid);

struct DefectResult {
    std::vector<double> S;
    double l2_S = 0.0;
    double l2_Sx = 0.0;
    double l2_Sxx = 0.0;
};

// S = dv/dt + d/dx(d2v/dx2 - c1 v + f(v)), the time derivative taken
// analytically through (y, y_c) and the spatial ones spectrally over the grid
// period. Three seeded probe points cross-check the analytic dv/dt against
// central differences; DerivativeMismatch on disagreement.
DefectResult defect(const ApproxSolutionParams& params, double t, const Grid& grid);

struct PredictedShift {
    double Delta = 0.0;       // sum over the truncation of a c^ell int Q_c^k
    double first_order = 0.0; // a10 int Q_c
};

// Physical-frame shift of the large soliton; both fields scale by c1^(-1/2).
PredictedShift predicted_shift(const ApproxSolutionParams& params);

struct Recomposition {
    double Q_shift = 0.0;           // applied shift of the large soliton
    double Qc_shift = 0.0;          // applied shift of the small soliton
    double closeness = 0.0;         // H1 distance to the recomposed pair
    double tail = 0.0;              // small-soliton tail over the far
                                    // half-space, relative to its peak
    double alpha_plateau_dev = 0.0; // max |alpha - Delta/2| on the far
                                    // half-line (normalized frame)
    double taylor_error = 0.0;      // H1 error of Q_c - b Q_c' vs Q_c(.-b)
};

// Compares v(sign*T) in H1 against
//   Q_c1(. - sign*Delta/2) + Q_c2(. + (c1-c2) sign T - sign*Delta_c/2)
// with Delta_c = 2 b10 (first order only). sign must be +1 or -1.
Recomposition endpoint_recomposition(const ApproxSolutionParams& params, int sign);

// Stamps the physical frame (c1, c2) onto a normalized-params copy; params
// must still be normalized and satisfy params.c = c2/c1. c1 == 1 is the
// identity.
ApproxSolutionParams rescale_to(double c1, double c2, const ApproxSolutionParams& params);

} // namespace gkdv
