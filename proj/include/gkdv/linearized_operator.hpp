#pragma once

#include <memory>
#include <vector>

#include "gkdv/grid.hpp"
#include "gkdv/soliton_profile.hpp"

namespace gkdv {

enum class Parity { Even, Odd, Auto };

namespace detail {
struct OperatorFactorizations;
}

struct OperatorGrid;

namespace detail {
// Odd-subspace solve with kernel deflation but without the orthogonality
// gates; for callers whose right-hand side is orthogonal to Q' by
// construction and may be dominated by round-off.
std::vector<double> solve_odd_deflated(const OperatorGrid& op, const std::vector<double>& h);
}

// Discretization of L w = -w'' + c w - f'(Q_c) w on the profile grid:
// 4th-order centered stencil, identity rows at the two outermost points per
// side, cached banded LU factorizations per parity subspace. Immutable after
// construction; concurrent solves are read-only.
struct OperatorGrid {
    Grid grid;
    double c = 1.0;
    NonlinearityModel model;
    std::vector<double> potential; // f'(Q) on the grid
    std::vector<double> Q;         // reference profile
    std::vector<double> Qprime;    // kernel direction
    std::shared_ptr<const detail::OperatorFactorizations> fact;
};

OperatorGrid make_operator(const SolitonProfile& profile);

// Stencil application; rows 0,1,n-2,n-1 return w itself.
std::vector<double> apply(const OperatorGrid& op, const std::vector<double>& w);

// Solves L w = h in the stated parity subspace with <w, Q'> = 0. Odd solves
// require <h, Q'> ~ 0 (NotOrthogonal otherwise; SingularSolve when h is
// mostly the kernel direction). Auto splits h into parity components and
// solves each nonzero part.
std::vector<double> solve(const OperatorGrid& op, const std::vector<double>& h,
                          Parity parity = Parity::Auto);

struct GroundState {
    double lambda0 = 0.0;        // L chi0 = -lambda0 chi0, lambda0 > 0
    std::vector<double> chi0;    // sign-normalized positive, unit L2 norm
};

// Smallest eigenvalue of L by Rayleigh-quotient iteration in the even
// subspace, seeded with Q^{(p+1)/2}. Throws NonNegativeGroundState when the
// smallest eigenvalue is >= 0.
GroundState ground_eigenvalue(const OperatorGrid& op);

// Discrete L2 inner product (trapezoid) on the operator grid.
double inner(const OperatorGrid& op, const std::vector<double>& u,
             const std::vector<double>& v);

} // namespace gkdv
