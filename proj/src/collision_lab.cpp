#include "gkdv/collision_lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <lapacke.h>

#include "gkdv/approx_solution.hpp"
#include "gkdv/errors.hpp"
#include "gkdv/fft.hpp"
#include "gkdv/soliton_profile.hpp"

namespace gkdv {

namespace {

double smoothstep(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * (3.0 - 2.0 * s);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_err = 0.0;
};

LineFit ols(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t m = t.size();
    double tb = 0.0, yb = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        tb += t[i];
        yb += y[i];
    }
    tb /= static_cast<double>(m);
    yb /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (t[i] - tb) * (t[i] - tb);
        sxy += (t[i] - tb) * (y[i] - yb);
    }
    if (sxx <= 0.0) throw DegenerateFit("ols: zero time spread");
    LineFit out;
    out.slope = sxy / sxx;
    out.intercept = yb - out.slope * tb;
    if (m > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double r = y[i] - out.slope * t[i] - out.intercept;
            rss += r * r;
        }
        out.slope_err = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
    }
    return out;
}

// Parabola through the three samples around index i.
double parabolic_peak(const FieldState& f, std::size_t i, double sign) {
    const std::size_t n = f.grid.n;
    const double um = sign * f.u[(i + n - 1) % n];
    const double u0 = sign * f.u[i];
    const double up = sign * f.u[(i + 1) % n];
    const double d2 = um - 2.0 * u0 + up;
    if (d2 >= 0.0) return f.grid.x(i);
    return f.grid.x(i) + 0.5 * f.grid.h * (um - up) / d2;
}

struct IndexWindow {
    std::size_t lo = 0, hi = 0; // inclusive
};

IndexWindow clamp_window(const Grid& g, double center, double half) {
    IndexWindow w;
    const double lo = std::max(center - half, g.x0);
    const double hi = std::min(center + half, g.x0 + static_cast<double>(g.n - 1) * g.h);
    if (hi < lo) {
        w.lo = 1;
        w.hi = 0; // empty
        return w;
    }
    w.lo = static_cast<std::size_t>(std::ceil((lo - g.x0) / g.h));
    w.hi = static_cast<std::size_t>(std::floor((hi - g.x0) / g.h));
    if (w.hi >= g.n) w.hi = g.n - 1;
    return w;
}

SolitonFit fit_one(const FieldState& frame, const NonlinearityModel& model,
                   const SolitonGuess& guess, int sign) {
    const Grid& g = frame.grid;
    const double half = 8.0 / std::sqrt(guess.c);
    const double s = static_cast<double>(sign);

    const IndexWindow search = clamp_window(g, guess.x, 10.0 / std::sqrt(guess.c));
    std::size_t ipk = search.lo;
    for (std::size_t i = search.lo; i <= search.hi; ++i)
        if (s * frame.u[i] > s * frame.u[ipk]) ipk = i;
    const double x_peak = parabolic_peak(frame, ipk, s);

    const IndexWindow w = clamp_window(g, x_peak, half);
    if (w.hi < w.lo + 8) throw FitDiverged("fit_one: window holds too few samples");
    const std::size_t m = w.hi - w.lo + 1;

    double c = guess.c, rho = x_peak;
    std::vector<double> r(m), jc(m), jr(m);

    auto rss_at = [&](double cc, double rr, std::vector<double>* out) -> double {
        const SolitonProfile prof = build_profile(model, cc, sign);
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double xi = g.x(w.lo + i);
            const double d = frame.u[w.lo + i] - prof.value(xi - rr);
            if (out) (*out)[i] = d;
            acc += d * d;
        }
        return acc;
    };

    double rss = rss_at(c, rho, &r);
    bool converged = false;
    for (int iter = 0; iter < 60 && !converged; ++iter) {
        const double dc = 1e-5 * c;
        const SolitonProfile pp = build_profile(model, c + dc, sign);
        const SolitonProfile pm = build_profile(model, c - dc, sign);
        const SolitonProfile p0 = build_profile(model, c, sign);
        for (std::size_t i = 0; i < m; ++i) {
            const double xi = g.x(w.lo + i) - rho;
            jc[i] = (pp.value(xi) - pm.value(xi)) / (2.0 * dc);
            jr[i] = -p0.deriv(xi);
        }
        double hcc = 0.0, hcr = 0.0, hrr = 0.0, gc = 0.0, gr = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            hcc += jc[i] * jc[i];
            hcr += jc[i] * jr[i];
            hrr += jr[i] * jr[i];
            gc += jc[i] * r[i];
            gr += jr[i] * r[i];
        }
        const double det = hcc * hrr - hcr * hcr;
        if (!(det > 0.0)) throw FitDiverged("fit_one: singular normal equations");
        double sc = (hrr * gc - hcr * gr) / det;
        double sr = (hcc * gr - hcr * gc) / det;

        const double c_lo = guess.c / 25.0, c_hi = guess.c * 25.0;
        double lam = 1.0;
        double cn = c, rn = rho, rssn = rss + 1.0;
        for (int back = 0; back < 12; ++back) {
            cn = c + lam * sc;
            rn = rho + lam * sr;
            if (cn >= c_lo && cn <= c_hi) {
                rssn = rss_at(cn, rn, nullptr);
                if (rssn <= rss) break;
            }
            lam *= 0.5;
        }
        if (cn < c_lo || cn > c_hi || rssn > rss) {
            // near the optimum the finite-difference Jacobian noise can stop
            // strict descent; a small proposed step means we are done
            if (std::abs(sc) <= 1e-6 * c && std::abs(sr) * std::sqrt(c) <= 1e-6) {
                converged = true;
                break;
            }
            throw FitDiverged("fit_one: no descent step inside the admissible region");
        }
        if (std::abs(rn - x_peak) > half)
            throw FitDiverged("fit_one: iterate left the window");
        converged = std::abs(lam * sc) <= 1e-9 * c && std::abs(lam * sr) * std::sqrt(c) <= 1e-9;
        c = cn;
        rho = rn;
        rss = rss_at(c, rho, &r);
    }
    if (!converged) throw FitDiverged("fit_one: no convergence in 60 iterations");

    SolitonFit out;
    out.c = c;
    out.rho = rho;
    out.window = half;
    out.residual = std::sqrt(rss * g.h);
    return out;
}

// Joint Newton solve of the four orthogonality conditions
// <eta, R_j> = <eta, (x - rho_j) R_j> = 0.
void ortho_refine(const FieldState& frame, const NonlinearityModel& model,
                  std::array<SolitonFit, 2>& fits, int small_sign) {
    const Grid& g = frame.grid;
    const std::size_t n = g.n;
    const int signs[2] = {+1, small_sign};

    auto eval_F = [&](const double* th, double* F) {
        std::vector<double> R1(n), R2(n);
        const SolitonProfile p1 = build_profile(model, th[0], signs[0]);
        const SolitonProfile p2 = build_profile(model, th[2], signs[1]);
        for (std::size_t i = 0; i < n; ++i) {
            R1[i] = p1.value(g.x(i) - th[1]);
            R2[i] = p2.value(g.x(i) - th[3]);
        }
        double f0 = 0.0, f1 = 0.0, f2 = 0.0, f3 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double eta = frame.u[i] - R1[i] - R2[i];
            f0 += R1[i] * eta;
            f1 += (g.x(i) - th[1]) * R1[i] * eta;
            f2 += R2[i] * eta;
            f3 += (g.x(i) - th[3]) * R2[i] * eta;
        }
        F[0] = f0 * g.h;
        F[1] = f1 * g.h;
        F[2] = f2 * g.h;
        F[3] = f3 * g.h;
    };

    double th[4] = {fits[0].c, fits[0].rho, fits[1].c, fits[1].rho};
    const double scale[2] = {fits[0].c * std::sqrt(fits[0].c), fits[1].c * std::sqrt(fits[1].c)};

    double F[4];
    for (int iter = 0; iter < 25; ++iter) {
        eval_F(th, F);
        const double tol = 1e-12;
        if (std::abs(F[0]) <= tol * scale[0] && std::abs(F[1]) <= tol * scale[0] &&
            std::abs(F[2]) <= tol * scale[1] && std::abs(F[3]) <= tol * scale[1])
            return;

        double J[16]; // column-major for LAPACK
        for (int k = 0; k < 4; ++k) {
            const double step = (k % 2 == 0) ? 1e-7 * th[k] : 1e-7 / std::sqrt(th[k - 1]);
            double tp[4] = {th[0], th[1], th[2], th[3]};
            tp[k] += step;
            double Fp[4];
            eval_F(tp, Fp);
            for (int i = 0; i < 4; ++i) J[k * 4 + i] = (Fp[i] - F[i]) / step;
        }
        lapack_int piv[4];
        double rhs[4] = {F[0], F[1], F[2], F[3]};
        const lapack_int info = LAPACKE_dgesv(LAPACK_COL_MAJOR, 4, 1, J, 4, piv, rhs, 4);
        if (info != 0) throw FitDiverged("ortho_refine: singular Jacobian");
        for (int k = 0; k < 4; ++k) th[k] -= rhs[k];
        if (!(th[0] > 0.0) || !(th[2] > 0.0))
            throw FitDiverged("ortho_refine: speed left the admissible region");
    }
    throw FitDiverged("ortho_refine: no convergence in 25 iterations");
}

} // namespace

double weight_psi(double x) {
    return (2.0 / std::numbers::pi) * std::atan(std::exp(-0.25 * x));
}

std::array<SolitonFit, 2> fit_solitons(const FieldState& frame, const NonlinearityModel& model,
                                       const std::array<SolitonGuess, 2>& guess, bool orthogonal,
                                       int small_sign) {
    if (small_sign != 1 && small_sign != -1)
        throw std::invalid_argument("fit_solitons: small_sign must be +-1");
    std::array<SolitonFit, 2> fits;
    fits[0] = fit_one(frame, model, guess[0], +1);
    fits[1] = fit_one(frame, model, guess[1], small_sign);
    if (std::abs(fits[0].rho - fits[1].rho) < fits[0].window + fits[1].window)
        throw Overlapping("fit_solitons: fit windows intersect");
    if (orthogonal) {
        ortho_refine(frame, model, fits, small_sign);
        // refresh the windowed residuals at the refined parameters
        const int signs[2] = {+1, small_sign};
        for (int j = 0; j < 2; ++j) {
            const SolitonProfile prof = build_profile(model, fits[j].c, signs[j]);
            const IndexWindow w = clamp_window(frame.grid, fits[j].rho, fits[j].window);
            double rss = 0.0;
            for (std::size_t i = w.lo; i <= w.hi; ++i) {
                const double d = frame.u[i] - prof.value(frame.grid.x(i) - fits[j].rho);
                rss += d * d;
            }
            fits[j].residual = std::sqrt(rss * frame.grid.h);
        }
    }
    return fits;
}

namespace {

void validate(const CollisionConfig& cfg) {
    if (!(cfg.c1 > 0.0) || !(cfg.c2 > 0.0)) throw ConfigError("collision: speeds must be positive");
    if (cfg.c2 > 0.5 * cfg.c1) throw ConfigError("collision: c2 must be at most c1/2");
    if (cfg.small_sign != 1 && cfg.small_sign != -1)
        throw ConfigError("collision: small_sign must be +-1");
    if (cfg.small_sign == -1 && cfg.model.p != 3)
        throw ConfigError("collision: negative branch requires p = 3");
    if (cfg.small_sign == -1 && cfg.dressed)
        throw ConfigError("collision: negative branch supports bare starts only");
    if (cfg.window_gap < 1.0) throw ConfigError("collision: window_gap below 1");
    if (!(cfg.contamination_tol > 0.0)) throw ConfigError("collision: contamination_tol <= 0");
    if (cfg.perturb_eps < 0.0) throw ConfigError("collision: negative perturb_eps");
    if (cfg.sponge_strength < 0.0 || (cfg.sponge_strength > 0.0 && !(cfg.sponge_width > 0.0)))
        throw ConfigError("collision: bad sponge settings");
    if (cfg.n != 0 && (cfg.n & (cfg.n - 1)) != 0)
        throw ConfigError("collision: n must be a power of two");
    if (cfg.dt < 0.0 || cfg.h_target < 0.0 || cfg.separation < 0.0 || cfg.pre_window < 0.0 ||
        cfg.post_window < 0.0)
        throw ConfigError("collision: negative parameter");
}

struct H1Sums {
    double l2sq = 0.0; // int u^2
    double dxsq = 0.0; // int u_x^2
};

H1Sums h1_sums(Fft& fft, const std::vector<double>& u, double h) {
    const std::vector<double> ux = spectral_derivative(fft, u, h, 1);
    H1Sums s;
    for (std::size_t i = 0; i < u.size(); ++i) {
        s.l2sq += u[i] * u[i];
        s.dxsq += ux[i] * ux[i];
    }
    s.l2sq *= h;
    s.dxsq *= h;
    return s;
}

} // namespace

CollisionOutcome run_collision(const CollisionConfig& config) {
    const auto wall0 = std::chrono::steady_clock::now();
    validate(config);

    const double c1 = config.c1, c2 = config.c2;
    const double cr = c2 / c1;
    const int sign2 = config.small_sign;

    CollisionOutcome out;
    out.config = config;
    CollisionReport& rep = out.report;

    // Time scales: interaction half-width, fit-disjointness horizon, windows.
    double T_int = std::pow(c1, -1.5) * std::pow(cr, -0.51);
    ApproxSolutionParams params;
    if (config.dressed) {
        params = make_approx_params(rescale_model(config.model, c1), cr);
        if (c1 != 1.0) params = rescale_to(c1, c2, params);
        T_int = time_window(params);
    }
    const double t_geo = (8.0 / std::sqrt(c1) + 8.0 / std::sqrt(c2) + 2.0) / (c1 - c2);
    const double t_in = std::max(config.window_gap * T_int, t_geo);
    const double t_pre_out = config.pre_window > 0.0 ? config.pre_window * T_int : 1.5 * t_in;
    const double t_post_out = config.post_window > 0.0 ? config.post_window * T_int : 1.5 * t_in;
    if (t_pre_out < 1.15 * t_in || t_post_out < 1.15 * t_in)
        throw ConfigError("collision: measurement windows too narrow for the fit horizon");

    double t_start = -t_pre_out;
    double X0 = 0.0;
    if (!config.dressed) {
        X0 = config.separation > 0.0 ? config.separation : 24.0 / std::sqrt(c2);
        if (X0 < 20.0 / std::sqrt(c2) - 1e-12)
            throw ConfigError("collision: separation below 20/sqrt(c2)");
        t_start = -X0 / (c1 - c2);
        if (t_start > -1.15 * t_in)
            throw ConfigError("collision: separation too small for the measurement windows");
    }
    const double t_end = t_post_out;

    // Domain: co-moving frame at speed c1. The big wave stays near 0, the
    // small one walks from +(c1-c2)|t_start| to -(c1-c2)t_end.
    const double w_sp = config.sponge_strength > 0.0 ? config.sponge_width : 0.0;
    const double pad = 26.0 / std::sqrt(c2) + w_sp + 5.0;
    double x_right = (c1 - c2) * (-t_start) + pad;
    double x_left = -(c1 - c2) * t_end - pad;
    x_right = std::max(x_right, 30.0 / std::sqrt(c1) + w_sp + 5.0);
    x_left = std::min(x_left, -(30.0 / std::sqrt(c1) + w_sp + 5.0));
    const double L = x_right - x_left;
    const double ht = config.h_target > 0.0 ? config.h_target : 0.05 / std::sqrt(c1);
    std::size_t n = config.n;
    if (n == 0) {
        n = 256;
        while (L / static_cast<double>(n) > ht) n <<= 1;
    }
    if (n > (std::size_t{1} << 17))
        throw ConfigError("collision: grid beyond 2^17 points; relax h_target or windows");

    FieldState state = make_state(L, n, t_start);
    state.grid.x0 = x_left;
    const Grid grid = state.grid;
    const double h = grid.h;

    // Initial data.
    const SolitonProfile prof2_init = build_profile(config.model, c2, sign2);
    if (config.dressed) {
        state.u = evaluate_v(params, -T_int, grid);
        state.t = -T_int;
    } else {
        const SolitonProfile prof1_init = build_profile(config.model, c1);
        for (std::size_t i = 0; i < n; ++i)
            state.u[i] = prof1_init.value(grid.x(i)) + prof2_init.value(grid.x(i) - X0);
    }

    IntegratorSettings iset;
    iset.model = config.model;
    iset.frame_speed = c1;
    iset.sponge_strength = config.sponge_strength;
    iset.sponge_width = config.sponge_width;
    const double dt = config.dt > 0.0 ? config.dt : 0.6 * suggested_dt(state, config.model);
    iset.dt = dt;
    Etdrk4 stepper(iset, grid);

    // Dressed runs grow the pre-collision leg by mirror integration: the
    // reflected field solves the same equation, so stepping it forward
    // extends the true flow backward in time.
    if (config.dressed && t_pre_out > T_int) {
        FieldState back = time_reversed(state);
        const long bsteps = static_cast<long>(std::ceil((t_pre_out - T_int) / dt - 1e-9));
        for (long k = 0; k < bsteps; ++k) stepper.step(back);
        state = time_reversed(back);
        t_start = state.t;
    }

    if (config.perturb_eps > 0.0) {
        const double x_mid = 0.5 * (c1 - c2) * (-t_start);
        const double a = 0.5 * std::sqrt(c2);
        double nsq = 0.0;
        std::vector<double> bump(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = grid.x(i) - x_mid;
            const double se = 1.0 / std::cosh(a * xi);
            bump[i] = se * se;
            const double bx = -2.0 * a * se * se * std::tanh(a * xi);
            nsq += bump[i] * bump[i] + bx * bx;
        }
        const double scale = config.perturb_eps / std::sqrt(nsq * h);
        for (std::size_t i = 0; i < n; ++i) state.u[i] += scale * bump[i];
    }

    const Invariants inv0 = invariants(state, config.model);

    // Sampling cadence: at least 24 samples in the narrower window.
    const double span_pre = t_pre_out - t_in;
    const double span_post = t_post_out - t_in;
    const long stride =
        std::max<long>(1, std::llround(std::min(span_pre, span_post) / 24.0 / dt));
    const long total = static_cast<long>(std::ceil((t_end - state.t) / dt - 1e-9));

    const double pre_lo =
        config.dressed ? t_start - 1e-9 : t_start + 0.1 * (-t_start - t_in);
    Fft fft(n);

    ModulationTrack& track = out.track;
    double rho1_pred = 0.0, rho2_pred = 0.0, c1_pred = c1, c2_pred = c2;
    double last_fit_t = state.t;
    bool have_fit = false;
    long frames_taken = 0;

    auto sample = [&](const FieldState& st) {
        TrackSample smp;
        smp.t = st.t;
        const double r1g = have_fit ? rho1_pred + (c1_pred - c1) * (st.t - last_fit_t) : 0.0;
        const double r2g = have_fit ? rho2_pred + (c2_pred - c1) * (st.t - last_fit_t)
                                    : -(c1 - c2) * st.t;

        // Quiet zone ahead of both waves, shielded by the right sponge.
        const double qlo =
            std::max(r1g + 27.0 / std::sqrt(c1_pred), r2g + 27.0 / std::sqrt(c2_pred));
        const double qhi = x_right - w_sp - 5.0 * h;
        if (qhi > qlo) {
            const IndexWindow qw = clamp_window(grid, 0.5 * (qlo + qhi), 0.5 * (qhi - qlo));
            for (std::size_t i = qw.lo; i <= qw.hi; ++i)
                smp.quiet_linf = std::max(smp.quiet_linf, std::abs(st.u[i]));
        }
        const bool in_pre = st.t <= -t_in + 1e-9 && st.t >= pre_lo;
        const bool in_post = st.t >= t_in - 1e-9;
        if (in_pre || in_post) {
            rep.quiet_max = std::max(rep.quiet_max, smp.quiet_linf);
            if (smp.quiet_linf > config.contamination_tol)
                throw WindowContaminated("collision: quiet zone at " +
                                         std::to_string(smp.quiet_linf) +
                                         " during a measurement window");
        }

        const double sep_needed = 8.0 / std::sqrt(c1_pred) + 8.0 / std::sqrt(c2_pred) + 4.0 * h + 1.0;
        if (std::abs(r1g - r2g) >= sep_needed) {
            // near the geometric edge an occasional miss is expected; the
            // sample is recorded without a fit and tracking resumes
            try {
                std::array<SolitonGuess, 2> guesses{{{r1g, c1_pred}, {r2g, c2_pred}}};
                const auto fits =
                    fit_solitons(st, config.model, guesses, config.orthogonal_fits, sign2);
                smp.fit_ok = true;
                smp.fits = fits;
                rho1_pred = fits[0].rho;
                rho2_pred = fits[1].rho;
                c1_pred = fits[0].c;
                c2_pred = fits[1].c;
                last_fit_t = st.t;
                have_fit = true;
            } catch (const Overlapping&) {
            } catch (const FitDiverged&) {
            }
        }
        if (smp.fit_ok) {
            const SolitonProfile p1 = build_profile(config.model, smp.fits[0].c);
            const SolitonProfile p2 = build_profile(config.model, smp.fits[1].c, sign2);
            std::vector<double> eta(n);
            for (std::size_t i = 0; i < n; ++i)
                eta[i] = st.u[i] - p1.value(grid.x(i) - smp.fits[0].rho) -
                         p2.value(grid.x(i) - smp.fits[1].rho);
            const H1Sums s = h1_sums(fft, eta, h);
            smp.eta_l2 = std::sqrt(s.l2sq);
            smp.eta_h1 = std::sqrt(s.dxsq + s.l2sq);
            smp.eta_h1w = std::sqrt(s.dxsq + c2 * s.l2sq);
        }

        if (config.dressed && std::abs(st.t) < T_int * (1.0 - 1e-9)) {
            const std::vector<double> v = evaluate_v(params, st.t, grid);
            std::vector<double> d(n);
            for (std::size_t i = 0; i < n; ++i) d[i] = st.u[i] - v[i];
            const H1Sums s = h1_sums(fft, d, h);
            smp.closeness = std::sqrt(s.dxsq + s.l2sq);
        }

        track.samples.push_back(smp);
        const bool keep_frame =
            (smp.fit_ok && in_post) || (config.dressed && std::abs(st.t) < t_in);
        if (keep_frame && frames_taken % 2 == 0 && out.frames.size() < 160) {
            out.frames.push_back(st);
            out.frame_sample.push_back(track.samples.size() - 1);
        }
        if (keep_frame) ++frames_taken;
    };

    for (long k = 0; k <= total; ++k) {
        if (k % stride == 0 || k == total) sample(state);
        if (k < total) stepper.step(state);
    }

    const Invariants inv1 = invariants(state, config.model);
    rep.mass_drift = std::abs(inv1.mass - inv0.mass) / std::abs(inv0.mass);
    rep.energy_drift = std::abs(inv1.energy - inv0.energy) /
                       std::max(std::abs(inv0.energy), 1e-300);

    // Trajectory regressions on the measurement windows.
    std::vector<double> tp, r1p, r2p, tq, r1q, r2q;
    for (const TrackSample& smp : track.samples) {
        if (!smp.fit_ok) continue;
        rep.sup_w_h1 = std::max(rep.sup_w_h1, smp.eta_h1);
        if (smp.t <= -t_in + 1e-9 && smp.t >= pre_lo) {
            tp.push_back(smp.t);
            r1p.push_back(smp.fits[0].rho);
            r2p.push_back(smp.fits[1].rho);
        } else if (smp.t >= t_in - 1e-9) {
            tq.push_back(smp.t);
            r1q.push_back(smp.fits[0].rho);
            r2q.push_back(smp.fits[1].rho);
        }
        if (smp.closeness > 0.0) rep.sup_w_h1 = std::max(rep.sup_w_h1, smp.closeness);
    }
    for (const TrackSample& smp : track.samples)
        if (!smp.fit_ok && smp.closeness > 0.0)
            rep.sup_w_h1 = std::max(rep.sup_w_h1, smp.closeness);
    if (tp.size() < 6 || tq.size() < 6)
        throw FitDiverged("collision: too few trajectory samples in a measurement window");

    const LineFit l1p = ols(tp, r1p), l2p = ols(tp, r2p);
    const LineFit l1q = ols(tq, r1q), l2q = ols(tq, r2q);
    rep.c1_minus = l1p.slope + c1;
    rep.c2_minus = l2p.slope + c1;
    rep.c1_plus = l1q.slope + c1;
    rep.c2_plus = l2q.slope + c1;
    rep.c1_minus_err = l1p.slope_err;
    rep.c2_minus_err = l2p.slope_err;
    rep.c1_plus_err = l1q.slope_err;
    rep.c2_plus_err = l2q.slope_err;
    rep.delta1 = l1q.intercept - l1p.intercept;
    rep.delta2 = l2q.intercept - l2p.intercept;
    rep.delta1_at_T = (l1q.slope - l1p.slope) * T_int + rep.delta1;
    rep.delta2_at_T = (l2q.slope - l2p.slope) * T_int + rep.delta2;

    // Residual mass/energy on the half-space x_lab > c2 t / 10 at the stored
    // post-window frames (fixed post-fit speeds, per-frame positions).
    const SolitonProfile pf1 = build_profile(config.model, rep.c1_plus);
    const SolitonProfile pf2 = build_profile(config.model, rep.c2_plus, sign2);
    for (std::size_t fi = 0; fi < out.frames.size(); ++fi) {
        const TrackSample& smp = track.samples[out.frame_sample[fi]];
        if (!smp.fit_ok || smp.t < t_in - 1e-9) continue;
        const FieldState& fr = out.frames[fi];
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i)
            w[i] = fr.u[i] - pf1.value(grid.x(i) - smp.fits[0].rho) -
                   pf2.value(grid.x(i) - smp.fits[1].rho);
        const std::vector<double> wx = spectral_derivative(fft, w, h, 1);
        double m = 0.0, e = 0.0, quad = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x_lab = grid.x(i) + c1 * fr.t;
            const double phi = smoothstep((x_lab - c2 * fr.t / 10.0) / (5.0 * h));
            if (phi == 0.0) continue;
            m += w[i] * w[i] * phi;
            e += (0.5 * wx[i] * wx[i] - antiderivative(config.model, w[i])) * phi;
            quad += (wx[i] * wx[i] + c2 * w[i] * w[i]) * phi;
        }
        rep.late_t.push_back(fr.t);
        rep.late_m.push_back(m * h);
        rep.late_e.push_back(e * h);
        rep.late_quad.push_back(quad * h);
    }
    if (!rep.late_m.empty()) {
        rep.m_plus = rep.late_m.back();
        rep.e_plus = rep.late_e.back();
        const std::size_t tail = std::min<std::size_t>(6, rep.late_m.size());
        for (std::size_t i = rep.late_m.size() - tail + 1; i < rep.late_m.size(); ++i) {
            rep.m_plus_cauchy = std::max(rep.m_plus_cauchy,
                                         std::abs(rep.late_m[i] - rep.late_m[i - 1]));
            rep.e_plus_cauchy = std::max(rep.e_plus_cauchy,
                                         std::abs(rep.late_e[i] - rep.late_e[i - 1]));
        }
    }

    rep.T_int = T_int;
    rep.t_start = t_start;
    rep.t_end = state.t;
    rep.window_inner = t_in;
    rep.window_outer_pre = -t_start;
    rep.window_outer_post = t_post_out;
    rep.L_dom = L;
    rep.h = h;
    rep.dt = dt;
    rep.n = n;
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return out;
}

std::vector<CertificateRow> residual_certificates(const CollisionOutcome& outcome) {
    const CollisionConfig& cfg = outcome.config;
    const CollisionReport& rep = outcome.report;
    const double c1 = cfg.c1, c2 = cfg.c2;
    const double pw = 1.0 / (cfg.model.p - 1);
    std::vector<CertificateRow> rows;

    {
        CertificateRow r;
        r.name = "h1_residual_bound";
        r.lhs = rep.sup_w_h1;
        r.constant = rep.sup_w_h1 / std::pow(c2, pw);
        r.rhs = 10.0 * std::pow(c2, pw);
        r.pass = r.lhs <= r.rhs;
        rows.push_back(r);
    }
    {
        CertificateRow r;
        r.name = "quadratic_sandwich";
        double q = 0.0;
        for (const double v : rep.late_quad) q = std::max(q, v);
        r.lhs = 0.5 * q;
        r.rhs = 2.0 * rep.e_plus + c2 * rep.m_plus;
        r.constant = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
        r.pass = r.lhs <= 1.05 * r.rhs + 1e-9;
        rows.push_back(r);
    }
    const double signal = 2.0 * rep.e_plus + c2 * rep.m_plus;
    const double noise_sig = 1e-9 + 2.0 * rep.e_plus_cauchy + c2 * rep.m_plus_cauchy;
    {
        CertificateRow r;
        r.name = "speed_gain_proportionality";
        const double dc1 = rep.c1_plus - rep.c1_minus;
        const double mp1 = c_derivatives(cfg.model, c1).dMass_dc;
        r.lhs = dc1;
        r.rhs = signal / ((c1 - c2) * mp1);
        const double noise =
            std::max(3.0 * (rep.c1_plus_err + rep.c1_minus_err), 1e-4 * c1);
        if (std::abs(dc1) <= noise && signal <= 10.0 * noise_sig) {
            r.constant = 0.0;
            r.pass = true;
        } else {
            r.constant = r.rhs != 0.0 ? r.lhs / r.rhs : 0.0;
            r.pass = r.constant > 0.05 && r.constant < 20.0;
        }
        rows.push_back(r);
    }
    {
        CertificateRow r;
        r.name = "speed_loss_proportionality";
        const double dc2 = rep.c2_minus - rep.c2_plus;
        const double mp2 = c_derivatives(cfg.model, c2, cfg.small_sign).dMass_dc;
        const double signal2 = 2.0 * rep.e_plus + c1 * rep.m_plus;
        r.lhs = dc2;
        r.rhs = signal2 / ((c1 - c2) * mp2);
        const double noise =
            std::max(3.0 * (rep.c2_plus_err + rep.c2_minus_err), 1e-4 * c2);
        const double noise2 = noise_sig + (c1 - c2) * rep.m_plus_cauchy;
        if (std::abs(dc2) <= noise && signal2 <= 10.0 * noise2) {
            r.constant = 0.0;
            r.pass = true;
        } else {
            r.constant = r.rhs != 0.0 ? r.lhs / r.rhs : 0.0;
            r.pass = r.constant > 0.05 && r.constant < 20.0;
        }
        rows.push_back(r);
    }
    {
        CertificateRow r;
        r.name = "defect_sign";
        r.lhs = signal;
        r.rhs = -noise_sig;
        r.constant = signal;
        r.pass = signal >= -noise_sig;
        rows.push_back(r);
    }
    return rows;
}

std::vector<MonotonicityPoint> monotonicity_diagnostics(const CollisionOutcome& outcome,
                                                        double t0, double x0) {
    const CollisionConfig& cfg = outcome.config;
    const CollisionReport& rep = outcome.report;
    const double c1 = cfg.c1, c2 = cfg.c2;
    if (!(x0 > 0.0)) throw std::invalid_argument("monotonicity: x0 must be positive");

    std::vector<std::size_t> post;
    for (std::size_t fi = 0; fi < outcome.frames.size(); ++fi) {
        const TrackSample& smp = outcome.track.samples[outcome.frame_sample[fi]];
        if (smp.fit_ok && smp.t >= rep.window_inner - 1e-9) post.push_back(fi);
    }
    if (post.empty()) return {};
    if (t0 < 0.0) t0 = outcome.frames[post.front()].t;

    const Grid& grid = outcome.frames[post.front()].grid;
    const std::size_t n = grid.n;
    Fft fft(n);

    // Linearize the soliton mass/energy around the reference speeds; fitted
    // speeds wander by parts in 1e-4 at most.
    const ProfileFunctionals f1 = functionals(build_profile(cfg.model, c1));
    const ProfileFunctionals f2 = functionals(build_profile(cfg.model, c2, cfg.small_sign));
    const double mp1 = c_derivatives(cfg.model, c1).dMass_dc;
    const double mp2 = c_derivatives(cfg.model, c2, cfg.small_sign).dMass_dc;

    std::vector<MonotonicityPoint> series;
    for (const std::size_t fi : post) {
        const FieldState& fr = outcome.frames[fi];
        const TrackSample& smp = outcome.track.samples[outcome.frame_sample[fi]];
        if (fr.t < t0 - 1e-12) continue;
        const double ca = smp.fits[0].c, ra = smp.fits[0].rho;
        const double cb = smp.fits[1].c, rb = smp.fits[1].rho;

        const SolitonProfile p1 = build_profile(cfg.model, ca);
        const SolitonProfile p2 = build_profile(cfg.model, cb, cfg.small_sign);
        std::vector<double> R1(n), R2(n), eta(n);
        for (std::size_t i = 0; i < n; ++i) {
            R1[i] = p1.value(grid.x(i) - ra);
            R2[i] = p2.value(grid.x(i) - rb);
            eta[i] = fr.u[i] - R1[i] - R2[i];
        }
        const std::vector<double> etax = spectral_derivative(fft, eta, grid.h, 1);

        MonotonicityPoint pt;
        pt.t = fr.t;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.x(i);
            const double ps1 = weight_psi(std::sqrt(c1) * (x - ra + x0 + 0.5 * c1 * (fr.t - t0)));
            const double ps2 = weight_psi(std::sqrt(c2) * (x - rb + x0 + 0.5 * c2 * (fr.t - t0)));
            const double esum = eta[i] * eta[i];
            pt.m1 += esum * ps1;
            pt.m2 += esum * ps2;
            const double nl = antiderivative(cfg.model, R1[i] + R2[i] + eta[i]) -
                              (eval(cfg.model, R1[i]) + eval(cfg.model, R2[i])) * eta[i] -
                              antiderivative(cfg.model, R1[i] + R2[i]);
            const double edens = 0.5 * etax[i] * etax[i] - nl;
            pt.e1 += edens * ps1;
            pt.e2 += edens * ps2;
            pt.g1 += (etax[i] * etax[i] + c1 * esum) *
                     std::exp(-0.25 * std::sqrt(c1) * std::abs(x - ra));
            pt.g2 += (etax[i] * etax[i] + c2 * esum) *
                     std::exp(-0.25 * std::sqrt(c2) * std::abs(x - rb));
        }
        pt.m1 *= grid.h;
        pt.m2 *= grid.h;
        pt.e1 *= grid.h;
        pt.e2 *= grid.h;
        pt.g1 *= grid.h;
        pt.g2 *= grid.h;

        const double mass1 = f1.mass + mp1 * (ca - c1);
        const double mass2 = f2.mass + mp2 * (cb - c2);
        const double en1 = f1.energy - 0.5 * c1 * mp1 * (ca - c1);
        const double en2 = f2.energy - 0.5 * c2 * mp2 * (cb - c2);

        pt.lyapunov[0] = mass1 + pt.m1;
        pt.lyapunov[1] = 2.0 * en1 + 2.0 * pt.e1 + (c1 / 100.0) * (mass1 + pt.m1);
        pt.lyapunov[2] = mass1 + mass2 + pt.m2;
        pt.lyapunov[3] = 2.0 * en1 + 2.0 * en2 + 2.0 * pt.e2 +
                         (c2 / 100.0) * (mass1 + mass2) + pt.m2;

        const double tail = std::exp(-c1 * std::sqrt(c2) * (fr.t + rep.T_int) / 32.0);
        const double a1 =
            std::exp(-std::sqrt(c1) * (c1 * (fr.t - t0) + x0) / 16.0) * pt.g1 + tail;
        pt.allowance[0] = a1;
        pt.allowance[1] = a1;
        pt.allowance[2] = std::exp(-c2 * std::sqrt(c2) * (fr.t - t0) / 16.0) *
                              std::exp(-std::sqrt(c2) * x0 / 16.0) * std::sqrt(c2) * pt.g2 +
                          tail;
        pt.allowance[3] = std::exp(-c2 * std::sqrt(c2) * (fr.t - t0) / 16.0) *
                              std::exp(-c2 * x0 / 16.0) * std::pow(c2, 1.5) * pt.g2 +
                          tail;
        series.push_back(pt);
    }
    return series;
}

} // namespace gkdv
