#include "gkdv/pde_integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gkdv/errors.hpp"

namespace gkdv {

namespace {

// C1 ramp rising 0 -> 1 over [0, 1].
double smoothstep(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * (3.0 - 2.0 * s);
}

} // namespace

Grid make_periodic_grid(double L_dom, std::size_t n) {
    if (L_dom <= 0.0 || n < 2 || (n & (n - 1)) != 0)
        throw std::invalid_argument("make_periodic_grid: need L_dom > 0 and n a power of two");
    Grid g;
    g.n = n;
    g.h = L_dom / static_cast<double>(n);
    g.x0 = -0.5 * L_dom;
    return g;
}

FieldState make_state(double L_dom, std::size_t n, double t) {
    FieldState s;
    s.grid = make_periodic_grid(L_dom, n);
    s.t = t;
    s.u.assign(n, 0.0);
    return s;
}

Invariants invariants(const FieldState& state, const NonlinearityModel& model) {
    const auto& u = state.u;
    const double h = state.grid.h;
    Invariants out;
    double fsum = 0.0;
    for (const double ui : u) {
        out.integral += ui;
        out.mass += ui * ui;
        fsum += antiderivative(model, ui);
    }
    const auto ux = spectral_derivative(u, h, 1);
    double dsum = 0.0;
    for (const double d : ux) dsum += d * d;
    out.integral *= h;
    out.mass *= h;
    out.energy = 0.5 * dsum * h - fsum * h;
    return out;
}

FieldState time_reversed(const FieldState& state) {
    FieldState out = state;
    out.t = -state.t;
    const std::size_t n = state.u.size();
    for (std::size_t i = 0; i < n; ++i) out.u[i] = state.u[(n - i) % n];
    return out;
}

double suggested_dt(const FieldState& state, const NonlinearityModel& model) {
    const double k_kept = (2.0 / 3.0) * std::numbers::pi / state.grid.h;
    double fp = 0.0;
    for (const double ui : state.u) fp = std::max(fp, std::abs(eval(model, ui, 1)));
    return std::min(1.0, 0.5 / (k_kept * fp + 1e-300));
}

Etdrk4::Etdrk4(IntegratorSettings settings, const Grid& grid)
    : settings_(std::move(settings)), grid_(grid), fft_(grid.n) {
    if (settings_.dt <= 0.0) throw ConfigError("Etdrk4: dt must be positive");
    if ((grid.n & (grid.n - 1)) != 0) throw ConfigError("Etdrk4: n must be a power of two");

    const std::size_t m = fft_.modes();
    const double L = static_cast<double>(grid_.n) * grid_.h;
    const double dk = 2.0 * std::numbers::pi / L;
    lin_.resize(m);
    mask_.assign(m, 1.0);
    const std::size_t keep = grid_.n / 3; // 2/3 of the n/2 positive modes
    for (std::size_t j = 0; j < m; ++j) {
        const double k = dk * static_cast<double>(j);
        lin_[j] = std::complex<double>(0.0, k * k * k + settings_.frame_speed * k);
        if (settings_.dealias && j > keep) mask_[j] = 0.0;
    }
    mask_[m - 1] = 0.0; // Nyquist never propagates

    v_.resize(m);
    a_.resize(m);
    b_.resize(m);
    c_.resize(m);
    Nu_.resize(m);
    Na_.resize(m);
    Nb_.resize(m);
    Nc_.resize(m);
    phys_.resize(grid_.n);

    if (settings_.sponge_width > 0.0 && settings_.sponge_strength > 0.0) {
        sponge_.resize(grid_.n);
        const double w = settings_.sponge_width;
        const double xl = grid_.x0 + w;
        const double xr = grid_.x0 + L - w;
        for (std::size_t i = 0; i < grid_.n; ++i) {
            const double x = grid_.x(i);
            sponge_[i] = settings_.sponge_strength *
                         (smoothstep((xl - x) / w) + smoothstep((x - xr) / w));
        }
    }
}

void Etdrk4::prepare(double dt) {
    if (dt == dt_tab_) return;
    const std::size_t m = fft_.modes();
    E_.resize(m);
    E2_.resize(m);
    Q_.resize(m);
    f1_.resize(m);
    f2_.resize(m);
    f3_.resize(m);

    constexpr int M = 32;
    std::complex<double> r[M];
    for (int j = 0; j < M; ++j) {
        const double th = std::numbers::pi * (2.0 * j + 1.0) / M;
        r[j] = std::exp(std::complex<double>(0.0, th));
    }

    for (std::size_t i = 0; i < m; ++i) {
        const std::complex<double> z0 = dt * lin_[i];
        E_[i] = std::exp(z0);
        E2_[i] = std::exp(0.5 * z0);
        std::complex<double> q = 0.0, a = 0.0, b = 0.0, c = 0.0;
        for (int j = 0; j < M; ++j) {
            const std::complex<double> z = z0 + r[j];
            const std::complex<double> ez = std::exp(z);
            const std::complex<double> z2 = z * z;
            const std::complex<double> z3 = z2 * z;
            q += (std::exp(0.5 * z) - 1.0) / z;
            a += (-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3;
            b += (2.0 + z + ez * (-2.0 + z)) / z3;
            c += (-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3;
        }
        const double scale = dt / M;
        Q_[i] = scale * q;
        f1_[i] = scale * a;
        f2_[i] = scale * b;
        f3_[i] = scale * c;
    }
    dt_tab_ = dt;
}

// spec holds u-hat on entry; replaced by -ik f(u)-hat, dealiased.
void Etdrk4::nonlinear_rhs(std::vector<std::complex<double>>& spec) {
    fft_.backward(spec, phys_);
    for (double& s : phys_) s = eval(settings_.model, s, 0);
    fft_.forward(phys_, spec);
    const std::size_t m = fft_.modes();
    const double dk = 2.0 * std::numbers::pi / (static_cast<double>(grid_.n) * grid_.h);
    for (std::size_t j = 0; j < m; ++j) {
        const double k = dk * static_cast<double>(j);
        spec[j] *= std::complex<double>(0.0, -k) * mask_[j];
    }
}

void Etdrk4::check_state(const FieldState& state) const {
    if (state.grid.n != grid_.n || state.grid.h != grid_.h || state.grid.x0 != grid_.x0)
        throw GridMismatch("Etdrk4: state grid differs from the construction grid");
    if (state.u.size() != grid_.n)
        throw GridMismatch("Etdrk4: state sample count differs from grid");
}

void Etdrk4::step(FieldState& state) { step(state, settings_.dt); }

void Etdrk4::step(FieldState& state, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("Etdrk4::step: dt must be positive");
    check_state(state);
    prepare(dt);

    const std::size_t m = fft_.modes();
    fft_.forward(state.u, v_);
    for (std::size_t j = 0; j < m; ++j) v_[j] *= mask_[j];

    Nu_ = v_;
    nonlinear_rhs(Nu_);
    for (std::size_t j = 0; j < m; ++j) a_[j] = E2_[j] * v_[j] + Q_[j] * Nu_[j];
    Na_ = a_;
    nonlinear_rhs(Na_);
    for (std::size_t j = 0; j < m; ++j) b_[j] = E2_[j] * v_[j] + Q_[j] * Na_[j];
    Nb_ = b_;
    nonlinear_rhs(Nb_);
    for (std::size_t j = 0; j < m; ++j)
        c_[j] = E2_[j] * a_[j] + Q_[j] * (2.0 * Nb_[j] - Nu_[j]);
    Nc_ = c_;
    nonlinear_rhs(Nc_);
    for (std::size_t j = 0; j < m; ++j)
        v_[j] = E_[j] * v_[j] + f1_[j] * Nu_[j] + 2.0 * f2_[j] * (Na_[j] + Nb_[j]) +
                f3_[j] * Nc_[j];

    fft_.backward(v_, state.u);
    if (!sponge_.empty())
        for (std::size_t i = 0; i < grid_.n; ++i) state.u[i] *= std::exp(-sponge_[i] * dt);
    state.t += dt;

    double peak = 0.0;
    for (const double ui : state.u) {
        if (!std::isfinite(ui))
            throw BlowupDetected("Etdrk4: non-finite sample at t = " + std::to_string(state.t));
        peak = std::max(peak, std::abs(ui));
    }
    if (peak > settings_.blowup_ceiling)
        throw BlowupDetected("Etdrk4: linf(u) = " + std::to_string(peak) + " at t = " +
                             std::to_string(state.t) + " exceeds the ceiling");
}

void Etdrk4::run(FieldState& state, double t_end, const std::vector<Observer>& observers) {
    check_state(state);
    if (t_end < state.t - 1e-12)
        throw std::invalid_argument("Etdrk4::run: t_end precedes state.t");

    std::vector<double> next(observers.size()), last(observers.size());
    for (std::size_t i = 0; i < observers.size(); ++i) {
        observers[i].fn(state);
        next[i] = state.t + observers[i].stride;
        last[i] = state.t;
    }

    const double dt = settings_.dt;
    const double span = t_end - state.t;
    const double tol = 1e-12 * std::max(1.0, std::abs(t_end));
    auto whole = static_cast<long long>(std::floor(span / dt + 1e-12));
    const double rest = span - static_cast<double>(whole) * dt;

    for (long long s = 0; s < whole; ++s) {
        step(state, dt);
        for (std::size_t i = 0; i < observers.size(); ++i) {
            if (observers[i].stride <= 0.0 || state.t + tol >= next[i]) {
                observers[i].fn(state);
                next[i] = state.t + observers[i].stride;
                last[i] = state.t;
            }
        }
    }
    if (rest > tol) {
        step(state, rest);
        prepare(dt); // retabulate so subsequent whole steps reuse the cache
    }
    state.t = t_end;
    for (std::size_t i = 0; i < observers.size(); ++i)
        if (last[i] != state.t) observers[i].fn(state);
}

std::vector<double> exact_two_soliton_p2(double c, double t, const Grid& grid) {
    if (c <= 0.0 || c >= 1.0)
        throw std::invalid_argument("exact_two_soliton_p2: need 0 < c < 1");
    const double rc = std::sqrt(c);
    const double lna = 2.0 * std::log((1.0 - rc) / (1.0 + rc));
    const double kk[4] = {0.0, 1.0, rc, 1.0 + rc};
    std::vector<double> out(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        const double th1 = x - t;
        const double th2 = rc * (x - c * t);
        const double th[4] = {0.0, th1, th2, th1 + th2 + lna};
        double mx = th[0];
        for (int a = 1; a < 4; ++a) mx = std::max(mx, th[a]);
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (int a = 0; a < 4; ++a) {
            const double e = std::exp(th[a] - mx);
            s0 += e;
            s1 += kk[a] * e;
            s2 += kk[a] * kk[a] * e;
        }
        out[i] = 6.0 * (s2 * s0 - s1 * s1) / (s0 * s0);
    }
    return out;
}

TwoSolitonShifts exact_shifts_p2(double c) {
    if (c <= 0.0 || c >= 1.0)
        throw std::invalid_argument("exact_shifts_p2: need 0 < c < 1");
    const double rc = std::sqrt(c);
    TwoSolitonShifts out;
    out.delta1 = 2.0 * std::log((1.0 + rc) / (1.0 - rc));
    out.delta2 = -out.delta1 / rc;
    return out;
}

} // namespace gkdv
