#include "gkdv/pde_integrator.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "gkdv/errors.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/nonlinearity.hpp"
#include "gkdv/soliton_profile.hpp"
#include "test_util.hpp"

using namespace gkdv;

namespace {

std::vector<double> sample_profile(const SolitonProfile& prof, const Grid& g, double center) {
    std::vector<double> out(g.n);
    for (std::size_t i = 0; i < g.n; ++i) out[i] = prof.value(g.x(i) - center);
    return out;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b, double h) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return l2_norm(d, h) / l2_norm(b, h);
}

} // namespace

static void test_state_helpers() {
    const Grid g = make_periodic_grid(80.0, 1024);
    CHECK_CLOSE(static_cast<double>(g.n) * g.h, 80.0, 1e-12);
    CHECK_CLOSE(g.x0, -40.0, 1e-12);
    CHECK_THROWS_AS(make_periodic_grid(80.0, 1000), std::invalid_argument);
    CHECK_THROWS_AS(make_periodic_grid(-1.0, 256), std::invalid_argument);

    FieldState s = make_state(80.0, 512, 1.5);
    CHECK(s.u.size() == 512);
    CHECK(linf_norm(s.u) == 0.0);

    for (std::size_t i = 0; i < s.u.size(); ++i) s.u[i] = std::sin(0.1 * g.x(i % 512));
    const FieldState rr = time_reversed(time_reversed(s));
    CHECK(rr.t == s.t);
    double dev = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i)
        dev = std::max(dev, std::abs(rr.u[i] - s.u[i]));
    CHECK(dev == 0.0);
}

static void test_invariants_closed_forms() {
    const auto model = make_model(2);
    FieldState s = make_state(80.0, 2048);
    const auto q1 = build_profile(model, 1.0);
    s.u = sample_profile(q1, s.grid, 0.0);
    const auto inv = invariants(s, model);
    // E(Q) = (1/2) int Q'^2 - int Q^3/3 = 0.6 - 2.4; int Q'^2 = int Q^2 - 2 int F = 1.2.
    CHECK_CLOSE(inv.integral, 6.0, 1e-10);
    CHECK_CLOSE(inv.mass, 6.0, 1e-10);
    CHECK_CLOSE(inv.energy, -1.8, 1e-10);

    const auto qc = build_profile(model, 0.25);
    s.u = sample_profile(qc, s.grid, 0.0);
    CHECK_CLOSE(invariants(s, model).mass, 6.0 * std::pow(0.25, 1.5), 1e-10);
}

static void test_zero_and_blowup() {
    IntegratorSettings set;
    set.model = make_model(2);
    set.dt = 1e-2;
    FieldState s = make_state(40.0, 256);
    Etdrk4 stepper(set, s.grid);
    stepper.run(s, 5.0);
    CHECK(linf_norm(s.u) == 0.0);
    CHECK_CLOSE(s.t, 5.0, 1e-12);

    for (std::size_t i = 0; i < s.u.size(); ++i)
        s.u[i] = 2e3 * std::exp(-s.grid.x(i) * s.grid.x(i));
    CHECK_THROWS_AS(stepper.step(s), BlowupDetected);
}

static void test_linear_regime() {
    IntegratorSettings set;
    set.model = make_model(2);
    set.dt = 1e-3;
    FieldState s = make_state(40.0, 256);
    const double dk = 2.0 * std::numbers::pi / 40.0;
    const double k5 = 5.0 * dk, k9 = 9.0 * dk;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        const double x = s.grid.x(i);
        s.u[i] = 1e-8 * (std::sin(k5 * x) + 0.3 * std::cos(k9 * x));
    }
    Etdrk4 stepper(set, s.grid);
    stepper.run(s, 3.0);

    // u_t = -u_xxx to this amplitude: each mode advances by exp(i k^3 t).
    double dev = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        const double x = s.grid.x(i);
        const double exact = 1e-8 * (std::sin(k5 * x + k5 * k5 * k5 * 3.0) +
                                     0.3 * std::cos(k9 * x + k9 * k9 * k9 * 3.0));
        dev = std::max(dev, std::abs(s.u[i] - exact));
    }
    CHECK(dev <= 1e-12);
}

static void test_single_soliton_shape() {
    const auto model = make_model(2);
    IntegratorSettings set;
    set.model = model;
    set.dt = 1e-3;
    FieldState s = make_state(80.0, 2048);
    const auto q1 = build_profile(model, 1.0);
    s.u = sample_profile(q1, s.grid, -20.0);
    Etdrk4 stepper(set, s.grid);
    stepper.run(s, 10.0);
    const auto exact = sample_profile(q1, s.grid, -10.0);
    CHECK(rel_l2(s.u, exact, s.grid.h) <= 1e-6);
}

static void test_conservation_and_frame() {
    const auto model = make_model(2);
    IntegratorSettings set;
    set.model = model;
    set.dt = 2e-3;
    set.frame_speed = 1.0; // soliton of speed 1 is stationary in this frame
    FieldState s = make_state(80.0, 1024);
    const auto q1 = build_profile(model, 1.0);
    s.u = sample_profile(q1, s.grid, 0.0);
    const auto start = s.u;
    const auto inv0 = invariants(s, model);

    double mass_drift = 0.0, energy_drift = 0.0;
    Observer track;
    track.stride = 5.0;
    track.fn = [&](const FieldState& f) {
        const auto inv = invariants(f, model);
        mass_drift = std::max(mass_drift, std::abs(inv.mass - inv0.mass) / inv0.mass);
        energy_drift =
            std::max(energy_drift, std::abs(inv.energy - inv0.energy) / std::abs(inv0.energy));
    };
    Etdrk4 stepper(set, s.grid);
    stepper.run(s, 100.0, {track});

    CHECK(mass_drift <= 1e-9);
    CHECK(energy_drift <= 1e-8);
    CHECK(rel_l2(s.u, start, s.grid.h) <= 1e-5);
}

static void test_reversibility() {
    const auto model = make_model(2);
    IntegratorSettings set;
    set.model = model;
    set.dt = 1e-3;
    FieldState s0 = make_state(80.0, 1024);
    const auto q1 = build_profile(model, 1.0);
    s0.u = sample_profile(q1, s0.grid, -10.0);

    Etdrk4 stepper(set, s0.grid);
    FieldState s = s0;
    stepper.run(s, 5.0);
    FieldState r = time_reversed(s);
    stepper.run(r, 0.0);
    const FieldState back = time_reversed(r);
    CHECK_CLOSE(back.t, 0.0, 1e-12);
    CHECK(rel_l2(back.u, s0.u, s0.grid.h) <= 1e-7);
}

static void test_resolution_doubling() {
    const auto model = make_model(2);
    const auto q4 = build_profile(model, 4.0);
    double err[2];
    const std::size_t ns[2] = {256, 512};
    for (int k = 0; k < 2; ++k) {
        IntegratorSettings set;
        set.model = model;
        set.dt = 2e-4;
        FieldState s = make_state(40.0, ns[k]);
        s.u = sample_profile(q4, s.grid, -10.0);
        Etdrk4 stepper(set, s.grid);
        stepper.run(s, 0.5);
        const auto exact = sample_profile(q4, s.grid, -8.0);
        err[k] = rel_l2(s.u, exact, s.grid.h);
    }
    CHECK(err[0] >= 4.0 * err[1]);
    CHECK(err[0] <= 1e-5);
    CHECK(err[1] >= 1e-14);
}

static void test_exact_two_soliton() {
    const double c = 0.25;
    const auto sh = exact_shifts_p2(c);
    CHECK_CLOSE(sh.delta1, 2.0 * std::log(3.0), 1e-12);
    CHECK_CLOSE(sh.delta2, -4.0 * std::log(3.0), 1e-12);
    CHECK_THROWS_AS(exact_shifts_p2(1.5), std::invalid_argument);

    const Grid g = make_periodic_grid(400.0, 8192);
    const double mass_exact = 6.0 + 6.0 * std::pow(c, 1.5);
    for (const double t : {-40.0, 0.0, 17.0}) {
        const auto u = exact_two_soliton_p2(c, t, g);
        double m = 0.0;
        for (const double ui : u) m += ui * ui;
        m *= g.h;
        CHECK_CLOSE(m, mass_exact, 1e-10 * mass_exact);
    }

    // Far in the past the solution is two free solitons; the fast one is
    // unshifted and the slow one carries its full forward pre-shift.
    const auto model = make_model(2);
    const auto q1 = build_profile(model, 1.0);
    const auto qc = build_profile(model, c);
    const double t = -60.0;
    const auto u = exact_two_soliton_p2(c, t, g);
    std::vector<double> pair(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        pair[i] = q1.value(x - t) + qc.value(x - c * t - sh.delta1 / std::sqrt(c));
    }
    std::vector<double> d(g.n);
    for (std::size_t i = 0; i < g.n; ++i) d[i] = u[i] - pair[i];
    CHECK(l2_norm(d, g.h) <= 1e-8);
}

static void test_elastic_collision() {
    const double c = 0.25;
    IntegratorSettings set;
    set.model = make_model(2);
    set.dt = 1e-3;
    FieldState s = make_state(160.0, 4096);
    s.t = -8.0;
    s.u = exact_two_soliton_p2(c, s.t, s.grid);
    Etdrk4 stepper(set, s.grid);
    stepper.run(s, 8.0);
    const auto exact = exact_two_soliton_p2(c, 8.0, s.grid);
    CHECK(rel_l2(s.u, exact, s.grid.h) <= 1e-6);
}

static void test_sponge() {
    const auto model = make_model(2);
    const auto q1 = build_profile(model, 1.0);

    IntegratorSettings set;
    set.model = model;
    set.dt = 1e-3;
    set.sponge_width = 14.0;
    set.sponge_strength = 10.0;
    FieldState s = make_state(80.0, 1024);
    s.u = sample_profile(q1, s.grid, 32.0); // inside the right absorbing zone
    const double m0 = invariants(s, model).mass;
    Etdrk4 damped(set, s.grid);
    damped.run(s, 3.0);
    CHECK(invariants(s, model).mass <= 0.1 * m0);

    set.sponge_width = 0.0;
    set.sponge_strength = 0.0;
    FieldState f = make_state(80.0, 1024);
    f.u = sample_profile(q1, f.grid, 32.0);
    Etdrk4 free(set, f.grid);
    free.run(f, 3.0);
    // Off-center tails wrap with a ~2e-3 kink whose dealiased spillover sets a
    // ~6e-9 drift floor here; centered data conserves to 1e-13 (above).
    CHECK(std::abs(invariants(f, model).mass - m0) <= 1e-7 * m0);
}

static void test_suggested_dt() {
    const auto model = make_model(2);
    FieldState s = make_state(80.0, 1024);
    const auto q1 = build_profile(model, 1.0);
    s.u = sample_profile(q1, s.grid, 0.0);
    const double dt = suggested_dt(s, model);
    CHECK(dt > 0.0);
    CHECK(dt <= 1.0);

    IntegratorSettings set;
    set.model = model;
    set.dt = dt;
    set.frame_speed = 1.0;
    Etdrk4 stepper(set, s.grid);
    const double peak0 = linf_norm(s.u);
    for (int k = 0; k < 100; ++k) stepper.step(s);
    CHECK(linf_norm(s.u) <= 2.0 * peak0);

    CHECK_CLOSE(suggested_dt(make_state(40.0, 256), model), 1.0, 1e-12);
}

int main() {
    test_state_helpers();
    test_invariants_closed_forms();
    test_zero_and_blowup();
    test_linear_regime();
    test_single_soliton_shape();
    test_conservation_and_frame();
    test_reversibility();
    test_resolution_doubling();
    test_exact_two_soliton();
    test_elastic_collision();
    test_sponge();
    test_suggested_dt();
    return test_summary("test_pde_integrator");
}
