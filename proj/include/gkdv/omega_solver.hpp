#pragma once

#include <vector>

#include "gkdv/linearized_operator.hpp"
#include "gkdv/nonlinearity.hpp"
#include "gkdv/soliton_profile.hpp"

namespace gkdv {

// Structural profiles entering the model system: L V0 = 3Q - 2f(Q),
// L V1 = f'(Q), Z0 = 3Q'' + 3V0'' + f'(Q)V0, Z1 = 3V1'' + f'(Q)V1 + f'(Q).
// Second derivatives are substituted from the defining equations, not finite
// differences.
struct Structurals {
    std::vector<double> V0, V1, Z0, Z1;
};

// Builds the structural profiles and verifies V0 = -(3-2c)LambdaQ - xQ'
// against an independent even solve (reduces to V0 = -LambdaQ - xQ' at c=1).
Structurals build_structurals(const OperatorGrid& op);

struct OmegaDiagnostics {
    double residual1 = 0.0;    // relative residual of L A + a(3Q-2f(Q)) = H
    double residual2 = 0.0;    // relative residual of L B = integral of D-aZ0
    double e_qprime = 0.0;     // normalized <E, Q'> after the (a,b) choice
    double e_infinity = 0.0;   // normalized E at the right boundary
    double f_asymmetry = 0.0;  // discarded even part of F (relative)
    double g_asymmetry = 0.0;  // discarded odd part of G (relative)
    double b_tail_bound = 0.0; // quadrature truncation estimate in b
};

struct OmegaSolution {
    double a = 0.0;             // translation-rate coefficient
    double b = 0.0;             // bounded odd tail coefficient (multiplies phi)
    std::vector<double> A;      // even, decaying
    std::vector<double> B_bar;  // odd, decaying; full B = B_bar + b*phi
    OmegaDiagnostics diagnostics;
};

// Solves the model system for odd F and even G: H(x) = integral of F from the
// left (even), H_bar = solve(L, H, even), D = 3H_bar'' + f'(Q)H_bar + G,
// a = <D,Q>/<Z0,Q>, b chosen so E = int_0^x (D - aZ0) - b L(phi) decays,
// B_bar = solve(L, E, odd), A = H_bar - a V0. Inputs are folded to exact
// parity; the discarded parts land in the diagnostics.
OmegaSolution solve_omega(const OperatorGrid& op, const std::vector<double>& F,
                          const std::vector<double>& G);

// Right-hand sides of the first-order system: F10 = (f'(Q))' = f''(Q)Q',
// G10 = f'(Q).
std::vector<double> rhs_F10(const OperatorGrid& op);
std::vector<double> rhs_G10(const OperatorGrid& op);

struct ShiftCoefficient {
    double a10 = 0.0;    // 2 (d/dc int Q_c) / (d/dc int Q_c^2) at c1
    double delta1 = 0.0; // 2 int Q_c1 (d/dc int Q_c) / (d/dc int Q_c^2)
};

// Closed-form route to the first-order shift data; throws Degenerate when the
// mass derivative vanishes at c1.
ShiftCoefficient shift_coefficient(const NonlinearityModel& model, double c1);

} // namespace gkdv
