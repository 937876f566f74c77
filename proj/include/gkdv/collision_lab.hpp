#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "gkdv/grid.hpp"
#include "gkdv/nonlinearity.hpp"
#include "gkdv/pde_integrator.hpp"

namespace gkdv {

// (2/pi) arctan(exp(-x/4)): 1 far left, 1/2 at 0, 0 far right.
double weight_psi(double x);

struct SolitonGuess {
    double x = 0.0; // approximate peak location
    double c = 1.0; // approximate speed
};

struct SolitonFit {
    double c = 0.0;
    double rho = 0.0;
    double window = 0.0;   // fit half-width 8/sqrt(c_guess)
    double residual = 0.0; // L2 of the misfit over the window
};

// Locates each peak by parabolic interpolation of the samples near guess.x,
// then runs a damped Gauss-Newton fit of sign*Q_c(. - rho) over
// |x - peak| <= 8/sqrt(c_guess). With orthogonal set, refines both waves
// jointly by Newton on <eta, R_j> = <eta, (x - rho_j) R_j> = 0 where
// eta = u - R_1 - R_2. small_sign applies to the second guess only.
// Throws Overlapping when the two fit windows intersect, FitDiverged when
// an iteration leaves the admissible region or fails to converge.
std::array<SolitonFit, 2> fit_solitons(const FieldState& frame, const NonlinearityModel& model,
                                       const std::array<SolitonGuess, 2>& guess,
                                       bool orthogonal = false, int small_sign = +1);

struct CollisionConfig {
    NonlinearityModel model;
    double c1 = 1.0;
    double c2 = 0.05;
    int small_sign = +1; // -1 allowed only for p = 3 bare starts
    // true: start from the modulated two-wave solution at -T_int and grow the
    // pre-collision leg by mirror integration; false: start from the bare sum
    // Q_c1 + Q_c2 at peak distance `separation`.
    bool dressed = true;
    double separation = 0.0;  // bare starts; 0 -> 24/sqrt(c2), must be >= 20/sqrt(c2)
    double pre_window = 0.0;  // outer measurement extent, multiples of T_int; 0 -> auto
    double post_window = 0.0; // likewise on the post side
    double window_gap = 1.25; // inner measurement edge, multiples of T_int
    std::size_t n = 0;        // grid points; 0 -> auto power of two
    double h_target = 0.0;    // 0 -> 0.05/sqrt(c1)
    double dt = 0.0;          // 0 -> 0.6 * suggested_dt on the initial data
    double sponge_strength = 10.0; // 0 disables the absorbing edges
    double sponge_width = 30.0;
    bool orthogonal_fits = false;
    double contamination_tol = 1e-10; // quiet-zone gate in measurement windows
    double perturb_eps = 0.0;         // H1 size of an even bump added at start
};

struct TrackSample {
    double t = 0.0;
    bool fit_ok = false; // fits attempted only when the windows are disjoint
    std::array<SolitonFit, 2> fits{};
    double eta_l2 = 0.0;    // u - R_1 - R_2 over the whole domain
    double eta_h1 = 0.0;    // sqrt(int eta_x^2 + eta^2)
    double eta_h1w = 0.0;   // sqrt(int eta_x^2 + c2 eta^2)
    double quiet_linf = 0.0; // max |u| ahead of the fast soliton
    double closeness = 0.0;  // dressed, inside the window: H1 distance to v(t)
};

struct ModulationTrack {
    std::vector<TrackSample> samples;
};

struct CollisionReport {
    // Linear-trajectory fits rho_j(t) ~ c_j t + x_j on the measurement
    // windows; speeds are lab-frame slopes, errors are OLS slope stderr.
    double c1_minus = 0.0, c2_minus = 0.0, c1_plus = 0.0, c2_plus = 0.0;
    double c1_minus_err = 0.0, c2_minus_err = 0.0, c1_plus_err = 0.0, c2_plus_err = 0.0;
    // Shifts: intercept difference at t = 0, and the same two lines compared
    // at t = +T_int (the anchored convention).
    double delta1 = 0.0, delta2 = 0.0;
    double delta1_at_T = 0.0, delta2_at_T = 0.0;
    // Residual mass/energy on the half-space x_lab > c2 t / 10 at the stored
    // late times, plus Cauchy differences of the series tail.
    double m_plus = 0.0, e_plus = 0.0;
    double m_plus_cauchy = 0.0, e_plus_cauchy = 0.0;
    std::vector<double> late_t, late_m, late_e;
    std::vector<double> late_quad; // int (w_x^2 + c2 w^2) on the same window
    double sup_w_h1 = 0.0;         // sup over samples of the H1 residual
    double mass_drift = 0.0, energy_drift = 0.0; // relative, whole run
    double quiet_max = 0.0;
    double T_int = 0.0, t_start = 0.0, t_end = 0.0;
    double window_inner = 0.0, window_outer_pre = 0.0, window_outer_post = 0.0;
    double L_dom = 0.0, h = 0.0, dt = 0.0;
    std::size_t n = 0;
    double wall_seconds = 0.0;
};

struct CollisionOutcome {
    CollisionConfig config;
    CollisionReport report;
    ModulationTrack track;
    // Snapshots (co-moving frame, speed c1) at a subset of samples: the post
    // window plus, for dressed runs, the interaction phase. frame_sample[i]
    // indexes the matching track sample.
    std::vector<FieldState> frames;
    std::vector<std::size_t> frame_sample;
};

// Integrates the collision in the frame moving at c1 (both solitons nearly
// still; radiation exits left into the sponge), tracking modulation fits,
// and extracts trajectories, shifts, and residual mass/energy.
// Throws ConfigError on invalid setups and WindowContaminated when the quiet
// zone exceeds contamination_tol during a measurement window.
CollisionOutcome run_collision(const CollisionConfig& config);

struct CertificateRow {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 0.0; // fitted constant, 0 when below noise
    bool pass = false;
};

// Four checks: the H1 residual bound sup_t |w|_H1 <= K c2^{1/(p-1)}; the
// sandwich (1/2) sup_late int (w_x^2 + c2 w^2) <= 2 E+ + c2 M+; the speed
// changes against their conservation-law predictions
// dc1 = (2E+ + c2M+)/((c1-c2) M'(c1)), dc2 = -(2E+ + c1M+)/((c1-c2) M'(c2));
// and the sign 2E+ + c2M+ >= -noise.
std::vector<CertificateRow> residual_certificates(const CollisionOutcome& outcome);

struct MonotonicityPoint {
    double t = 0.0;
    double m1 = 0.0, m2 = 0.0; // int eta^2 psi_j
    double e1 = 0.0, e2 = 0.0; // localized energy functionals
    double g1 = 0.0, g2 = 0.0; // exp-weighted residual energies
    std::array<double, 4> lyapunov{};
    std::array<double, 4> allowance{}; // unit-constant budget for d/dt
};

// Localized mass/energy functionals with the translating arctan-exponential
// weights on the stored post-collision frames; x0 > 0 sets the weight offset
// and t0 defaults to the first post-window frame time.
std::vector<MonotonicityPoint> monotonicity_diagnostics(const CollisionOutcome& outcome,
                                                        double t0 = -1.0, double x0 = 2.0);

} // namespace gkdv
