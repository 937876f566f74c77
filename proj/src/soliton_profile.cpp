#include "gkdv/soliton_profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "gkdv/errors.hpp"

namespace gkdv {

namespace {

// First-integral polynomial G(q) = c q^2 - 2F(q); G(amplitude) = 0 and
// G > 0 on (0, amplitude) for a monotone profile.
double Gfun(const NonlinearityModel& model, double c, double q) {
    return c * q * q - 2.0 * antiderivative(model, q);
}

double Gfun_deriv(const NonlinearityModel& model, double c, double q) {
    return 2.0 * c * q - 2.0 * eval(model, q, 0);
}

double pure_amplitude(int p, double c) {
    return std::pow(0.5 * (p + 1) * c, 1.0 / (p - 1));
}

// Positive-branch amplitude for a model with lead_sign = +1.
double positive_amplitude(const NonlinearityModel& model, double c) {
    if (c <= 0.0) throw NoSolitaryWave("amplitude: requires c > 0");
    const double a0 = pure_amplitude(model.p, c);
    if (model.pure_power()) return a0;

    const double ceiling = 1e4 * a0 + 10.0;
    double q_lo = 1e-3 * a0;
    int shrink = 0;
    while (Gfun(model, c, q_lo) <= 0.0 && shrink < 40) {
        q_lo *= 0.25;
        ++shrink;
    }
    if (Gfun(model, c, q_lo) <= 0.0)
        throw NoSolitaryWave("amplitude: first integral not positive near 0");

    double q_prev = q_lo;
    double q = q_lo;
    bool found = false;
    while (q < ceiling) {
        q_prev = q;
        q *= 1.02;
        if (Gfun(model, c, q) <= 0.0) {
            found = true;
            break;
        }
    }
    if (!found)
        throw NoSolitaryWave("amplitude: no turning point below search ceiling " +
                             std::to_string(ceiling));

    double lo = q_prev, hi = q;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (Gfun(model, c, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-16 * hi) break;
    }
    double amp = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) {
        const double g = Gfun(model, c, amp);
        const double gp = Gfun_deriv(model, c, amp);
        if (gp == 0.0) break;
        const double next = amp - g / gp;
        if (next > lo * 0.5 && next < hi * 2.0) amp = next;
    }
    // Transversality: the turning point must be a simple root, i.e.
    // f(amp) > c*amp; a tangency would give an infinitely wide front.
    if (eval(model, amp, 0) - c * amp <= 1e-10 * (c * amp + 1.0))
        throw NoSolitaryWave("amplitude: degenerate turning point");
    return amp;
}

// Monotone table of (x, ln q) for x >= 0, q from amp down the tail.
struct QTable {
    std::vector<double> x;
    std::vector<double> lnq;
};

QTable profile_table(const NonlinearityModel& model, double c, double amp, double x_max) {
    QTable tab;
    const double q_switch = 0.5 * amp;
    const double s_max = std::sqrt(1.0 - q_switch / amp);

    // Limiting integrand value at the peak: G(amp(1-s^2)) = s^2 * gt(s) with
    // gt(0) = amp * |G'(amp)|.
    const double gp_amp = -Gfun_deriv(model, c, amp);
    if (gp_amp <= 0.0) throw QuadratureFailure("profile_table: nontransversal peak");

    auto integrand_peak = [&](double s) {
        if (s == 0.0) return 2.0 * std::sqrt(amp / gp_amp);
        const double q = amp * (1.0 - s * s);
        const double G = Gfun(model, c, q);
        if (G <= 0.0)
            throw QuadratureFailure("profile_table: first integral lost positivity at q = " +
                                    std::to_string(q));
        return 2.0 * amp * s / std::sqrt(G);
    };

    const int n_peak = 6000;
    const double ds = s_max / n_peak;
    double x = 0.0;
    tab.x.push_back(0.0);
    tab.lnq.push_back(std::log(amp));
    for (int k = 0; k < n_peak; ++k) {
        const double s0 = k * ds;
        const double s1 = s0 + ds;
        x += ds / 6.0 *
             (integrand_peak(s0) + 4.0 * integrand_peak(s0 + 0.5 * ds) + integrand_peak(s1));
        tab.x.push_back(x);
        tab.lnq.push_back(std::log(amp * (1.0 - s1 * s1)));
    }

    // Tail: march u = ln q downward; dx/du = -q/sqrt(G(q)) -> -1/sqrt(c).
    auto integrand_tail = [&](double u) {
        const double q = std::exp(u);
        const double G = Gfun(model, c, q);
        if (G <= 0.0)
            throw QuadratureFailure("profile_table: first integral lost positivity at q = " +
                                    std::to_string(q));
        return q / std::sqrt(G);
    };
    const double du = std::sqrt(c) * 0.005;
    double u = std::log(q_switch);
    while (x < x_max && u > std::log(amp) - 800.0) {
        const double um = u - 0.5 * du;
        const double u1 = u - du;
        x += du / 6.0 * (integrand_tail(u) + 4.0 * integrand_tail(um) + integrand_tail(u1));
        u = u1;
        tab.x.push_back(x);
        tab.lnq.push_back(u);
    }
    if (x < x_max)
        throw QuadratureFailure("profile_table: tail march exhausted before x_max");
    return tab;
}

// 6-point nonuniform Lagrange interpolation of tab.lnq at position x >= 0.
double table_lnq(const QTable& tab, double x) {
    const auto& X = tab.x;
    const std::size_t n = X.size();
    if (x <= 0.0) return tab.lnq.front();
    if (x >= X.back()) {
        // Linear continuation in ln q (asymptotically exact).
        const double slope =
            (tab.lnq[n - 1] - tab.lnq[n - 2]) / (X[n - 1] - X[n - 2]);
        return tab.lnq[n - 1] + slope * (x - X[n - 1]);
    }
    auto it = std::upper_bound(X.begin(), X.end(), x);
    std::ptrdiff_t i = it - X.begin() - 1;
    std::ptrdiff_t i0 = std::clamp<std::ptrdiff_t>(i - 2, 0, static_cast<std::ptrdiff_t>(n) - 6);
    double out = 0.0;
    for (int a = 0; a < 6; ++a) {
        double term = tab.lnq[i0 + a];
        for (int b = 0; b < 6; ++b) {
            if (a == b) continue;
            term *= (x - X[i0 + b]) / (X[i0 + a] - X[i0 + b]);
        }
        out += term;
    }
    return out;
}

void check_sign_validity(const NonlinearityModel& model, int sign) {
    if (sign != 1 && sign != -1)
        throw ConfigError("soliton sign must be +1 or -1");
    if (sign == -1 && model.p != 3)
        throw ConfigError("negative solitary-wave branch exists only for p = 3");
}

} // namespace

double amplitude(const NonlinearityModel& model, double c, int sign) {
    check_sign_validity(model, sign);
    if (sign == -1) return -positive_amplitude(reflected(model), c);
    return positive_amplitude(model, c);
}

SolitonProfile build_profile(const NonlinearityModel& model, double c, int sign,
                             ProfileGridSpec spec) {
    check_sign_validity(model, sign);
    if (c <= 0.0) throw NoSolitaryWave("build_profile: requires c > 0");

    const NonlinearityModel eff = (sign == -1) ? reflected(model) : model;
    const double amp = positive_amplitude(eff, c);

    double hw = spec.half_width;
    if (hw <= 0.0) hw = std::max(50.0, 40.0 / std::sqrt(c) + 10.0);

    SolitonProfile prof;
    prof.model = model;
    prof.c = c;
    prof.sign = sign;
    prof.amplitude = sign * amp;
    prof.grid = make_symmetric_grid(hw, spec.h);

    const std::size_t n = prof.grid.n;
    const std::size_t mid = n / 2;
    prof.Q.assign(n, 0.0);

    if (eff.pure_power()) {
        const int p = eff.p;
        const double A = pure_amplitude(p, c);
        const double k = 0.5 * (p - 1) * std::sqrt(c);
        const double m = 2.0 / (p - 1);
        for (std::size_t i = mid; i < n; ++i) {
            const double sech = 1.0 / std::cosh(k * prof.grid.x(i));
            prof.Q[i] = A * std::pow(sech, m);
        }
    } else {
        const QTable tab = profile_table(eff, c, amp, hw + 3.0);
        for (std::size_t i = mid; i < n; ++i)
            prof.Q[i] = std::exp(table_lnq(tab, prof.grid.x(i)));
    }
    for (std::size_t i = 0; i < mid; ++i) prof.Q[i] = prof.Q[n - 1 - i];

    // Derivatives from the first integral and the profile equation.
    prof.Qp.assign(n, 0.0);
    prof.Qpp.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double q = prof.Q[i];
        const double G = std::max(Gfun(eff, c, q), 0.0);
        const double sgn_x = (prof.grid.x(i) > 0.0) ? 1.0 : ((prof.grid.x(i) < 0.0) ? -1.0 : 0.0);
        prof.Qp[i] = -sgn_x * std::sqrt(G);
        prof.Qpp[i] = c * q - eval(eff, q, 0);
    }
    if (sign == -1) {
        for (std::size_t i = 0; i < n; ++i) {
            prof.Q[i] = -prof.Q[i];
            prof.Qp[i] = -prof.Qp[i];
            prof.Qpp[i] = -prof.Qpp[i];
        }
    }
    return prof;
}

double SolitonProfile::value(double x) const {
    const double ax = std::abs(x);
    const double L = grid.x_last();
    const std::size_t n = grid.n;
    const std::size_t mid = n / 2;
    const auto half = static_cast<std::ptrdiff_t>(n - mid); // nodes at x >= 0
    if (ax >= L)
        return sign * std::abs(Q[n - 1]) * std::exp(-std::sqrt(c) * (ax - L));
    // 6-point Lagrange on ln|Q| over the even extension: node j < 0 reuses
    // node |j|, which keeps the stencil centered through the peak.
    const double fi = ax / grid.h;
    auto j0 = static_cast<std::ptrdiff_t>(std::floor(fi)) - 2;
    j0 = std::clamp<std::ptrdiff_t>(j0, -2, half - 6);
    const double t = fi - static_cast<double>(j0);
    double out = 0.0;
    for (int a = 0; a < 6; ++a) {
        const std::ptrdiff_t j = j0 + a;
        const std::size_t idx = mid + static_cast<std::size_t>(j < 0 ? -j : j);
        double term = std::log(std::abs(Q[idx]));
        for (int b = 0; b < 6; ++b) {
            if (a == b) continue;
            term *= (t - b) / static_cast<double>(a - b);
        }
        out += term;
    }
    return sign * std::exp(out);
}

double SolitonProfile::deriv(double x) const {
    // First integral with the signed value: c q^2 - 2F(q) is branch-correct
    // for both signs.
    const double q = value(x);
    const double G = std::max(c * q * q - 2.0 * antiderivative(model, q), 0.0);
    const double sgn_x = (x > 0.0) ? 1.0 : ((x < 0.0) ? -1.0 : 0.0);
    return -sgn_x * static_cast<double>(sign) * std::sqrt(G);
}

double SolitonProfile::second(double x) const {
    const double q = value(x);
    return c * q - eval(model, q, 0);
}

ProfileFunctionals functionals(const SolitonProfile& profile) {
    const double h = profile.grid.h;
    ProfileFunctionals out;
    out.integral = trapezoid(profile.Q, h);
    std::vector<double> q2(profile.Q.size()), dq2(profile.Q.size()), Fq(profile.Q.size());
    for (std::size_t i = 0; i < profile.Q.size(); ++i) {
        q2[i] = profile.Q[i] * profile.Q[i];
        dq2[i] = profile.Qp[i] * profile.Qp[i];
        Fq[i] = antiderivative(profile.model, profile.Q[i]);
    }
    out.mass = trapezoid(q2, h);
    out.energy = 0.5 * trapezoid(dq2, h) - trapezoid(Fq, h);
    return out;
}

CDerivatives c_derivatives(const NonlinearityModel& model, double c, int sign,
                           ProfileGridSpec spec) {
    if (spec.half_width <= 0.0) spec.half_width = std::max(50.0, 40.0 / std::sqrt(c) + 10.0);
    const double eps = 1e-4 * c;

    auto build = [&](double cc) { return build_profile(model, cc, sign, spec); };
    const SolitonProfile pp = build(c + eps), pm = build(c - eps);
    const SolitonProfile pp2 = build(c + 2.0 * eps), pm2 = build(c - 2.0 * eps);

    auto richardson = [&](double f_p, double f_m, double f_p2, double f_m2) {
        const double d1 = (f_p - f_m) / (2.0 * eps);
        const double d2 = (f_p2 - f_m2) / (4.0 * eps);
        return (4.0 * d1 - d2) / 3.0;
    };

    const ProfileFunctionals Fp = functionals(pp), Fm = functionals(pm);
    const ProfileFunctionals Fp2 = functionals(pp2), Fm2 = functionals(pm2);

    CDerivatives out;
    out.dIntQ_dc = richardson(Fp.integral, Fm.integral, Fp2.integral, Fm2.integral);
    out.dMass_dc = richardson(Fp.mass, Fm.mass, Fp2.mass, Fm2.mass);
    out.stability_violation = (out.dMass_dc <= 0.0);

    out.lambda.grid = pp.grid;
    out.lambda.values.resize(pp.grid.n);
    for (std::size_t i = 0; i < pp.grid.n; ++i)
        out.lambda.values[i] = richardson(pp.Q[i], pm.Q[i], pp2.Q[i], pm2.Q[i]);
    return out;
}

NonlinearityModel rescale_model(const NonlinearityModel& model, double c1) {
    if (c1 <= 0.0) throw ConfigError("rescale_model: c1 must be positive");
    NonlinearityModel out = model;
    const double p = model.p;
    for (auto& m : out.monomials)
        m.coeff *= std::pow(c1, (m.exponent - p) / (p - 1.0));
    if (model.has_custom) {
        const double alpha = std::pow(c1, 1.0 / (p - 1.0));
        const double lead = std::pow(c1, -p / (p - 1.0));
        auto f1 = model.custom.eval;
        auto F1 = model.custom.antiderivative;
        out.custom.eval = [f1, alpha, lead](double s, int order) {
            return lead * std::pow(alpha, order) * f1(alpha * s, order);
        };
        out.custom.antiderivative = [F1, alpha, lead](double s) {
            return lead / alpha * F1(alpha * s);
        };
    }
    return out;
}

SolitonProfile rescale_profile(const SolitonProfile& profile, double c1) {
    const NonlinearityModel tilde = rescale_model(profile.model, c1);
    const double c_t = profile.c / c1;
    return build_profile(tilde, c_t, profile.sign, ProfileGridSpec{});
}

} // namespace gkdv
