#include "gkdv/omega_solver.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

#include "gkdv/errors.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/linearized_operator.hpp"
#include "gkdv/nonlinearity.hpp"
#include "gkdv/soliton_profile.hpp"
#include "test_util.hpp"

using namespace gkdv;

namespace {

ProfileGridSpec fine_spec() {
    ProfileGridSpec spec;
    spec.h = 0.005;
    return spec;
}

OperatorGrid fine_operator(const NonlinearityModel& model, double c) {
    return make_operator(build_profile(model, c, +1, fine_spec()));
}

double parity_defect(const std::vector<double>& v, double h, int wanted_sign) {
    const std::size_t n = v.size();
    std::vector<double> bad(n);
    for (std::size_t i = 0; i < n; ++i)
        bad[i] = 0.5 * (v[i] - wanted_sign * v[n - 1 - i]);
    return l2_norm(bad, h) / (l2_norm(v, h) + 1e-300);
}

} // namespace

static void test_structural_pairings() {
    {
        auto op = fine_operator(make_model(2), 1.0);
        auto st = build_structurals(op);
        CHECK_CLOSE(inner(op, st.Z0, op.Q), -4.5, 4.5e-4);
        CHECK_CLOSE(inner(op, st.Z1, op.Q), -3.0, 3e-4);

        auto lv1 = gkdv::apply(op, st.V1);
        std::vector<double> resid(op.grid.n, 0.0);
        for (std::size_t i = 2; i + 2 < op.grid.n; ++i)
            resid[i] = lv1[i] - op.potential[i];
        CHECK(l2_norm(resid, op.grid.h) <= 1e-10 * l2_norm(op.potential, op.grid.h));
    }
    {
        auto op = fine_operator(make_model(3), 1.0);
        auto st = build_structurals(op);
        CHECK_CLOSE(inner(op, st.Z0, op.Q), -1.0, 1e-4);
        CHECK_CLOSE(inner(op, st.Z1, op.Q), 0.0, 1e-8);
    }
    {
        auto model = make_model(4);
        auto op = fine_operator(model, 1.0);
        auto st = build_structurals(op);
        auto cd = c_derivatives(model, 1.0, +1, fine_spec());
        const double z0q = inner(op, st.Z0, op.Q);
        const double z1q = inner(op, st.Z1, op.Q);
        CHECK_CLOSE(z0q, -0.5 * cd.dMass_dc, 1e-4 * std::abs(cd.dMass_dc));
        CHECK_CLOSE(z1q, -cd.dIntQ_dc, 1e-4 * std::abs(cd.dIntQ_dc));
        CHECK(z0q < 0.0);
        CHECK(z1q > 0.0);
    }
    {
        // Pairings are normalized-frame identities; bring speed 0.8 to 1.
        auto model = rescale_model(make_model(2, {{0.05, 4}}), 0.8);
        auto op = fine_operator(model, 1.0);
        auto st = build_structurals(op);
        auto cd = c_derivatives(model, 1.0, +1, fine_spec());
        CHECK_CLOSE(inner(op, st.Z0, op.Q), -0.5 * cd.dMass_dc,
                    1e-4 * std::abs(cd.dMass_dc));
        CHECK_CLOSE(inner(op, st.Z1, op.Q), -cd.dIntQ_dc, 1e-4 * std::abs(cd.dIntQ_dc));
    }
}

static void test_homogeneous_system() {
    auto op = fine_operator(make_model(2), 1.0);
    std::vector<double> zero(op.grid.n, 0.0);
    auto sol = solve_omega(op, zero, zero);
    CHECK(sol.a == 0.0);
    CHECK(sol.b == 0.0);
    CHECK(linf_norm(sol.A) <= 1e-14);
    CHECK(linf_norm(sol.B_bar) <= 1e-14);
}

static void test_first_order_system() {
    {
        auto model = make_model(2);
        auto op = fine_operator(model, 1.0);
        auto sol = solve_omega(op, rhs_F10(op), rhs_G10(op));
        auto sc = shift_coefficient(model, 1.0);

        CHECK_CLOSE(sol.a, 2.0 / 3.0, 1e-8);
        CHECK_CLOSE(sol.b, -2.0, 1e-8);
        CHECK_CLOSE(sc.a10, 2.0 / 3.0, 1e-6);
        CHECK_CLOSE(sc.delta1, 4.0, 1e-6);
        CHECK(std::abs(sol.a - sc.a10) <= 0.01 * std::abs(sol.a));

        CHECK(sol.diagnostics.residual1 <= 1e-6);
        CHECK(sol.diagnostics.residual2 <= 1e-6);
        CHECK(sol.diagnostics.e_qprime <= 1e-8);
        CHECK(sol.diagnostics.e_infinity <= 1e-8);

        CHECK(parity_defect(sol.A, op.grid.h, +1) <= 1e-12);
        CHECK(parity_defect(sol.B_bar, op.grid.h, -1) <= 1e-12);

        // For f(u) = u^2 the full B is exactly b*phi: B_bar vanishes and
        // B tends to b*phi(inf) = b at c=1.
        const std::size_t last = op.grid.n - 1;
        CHECK(linf_norm(sol.B_bar) <= 1e-9);
        const double phi_last = -op.Qprime[last] / op.Q[last];
        CHECK_CLOSE(sol.B_bar[last] + sol.b * phi_last, sol.b, 1e-6 * std::abs(sol.b));
    }
    {
        auto model = make_model(3);
        auto op = fine_operator(model, 1.0);
        auto sol = solve_omega(op, rhs_F10(op), rhs_G10(op));
        auto sc = shift_coefficient(model, 1.0);
        CHECK(std::abs(sol.a) <= 1e-8);
        CHECK(std::abs(sc.a10) <= 1e-6);
        CHECK(std::abs(sc.delta1) <= 1e-5);
        CHECK_CLOSE(sol.b, -2.0, 1e-8);
        CHECK(linf_norm(sol.B_bar) <= 1e-9);
        CHECK(sol.diagnostics.residual1 <= 1e-6);
        CHECK(sol.diagnostics.residual2 <= 1e-6);
    }
    {
        auto model = make_model(4);
        auto op = fine_operator(model, 1.0);
        auto sol = solve_omega(op, rhs_F10(op), rhs_G10(op));
        auto sc = shift_coefficient(model, 1.0);
        CHECK(sol.a < 0.0);
        CHECK(sc.delta1 < 0.0);
        CHECK(std::abs(sol.a - sc.a10) <= 0.01 * std::abs(sol.a));
        CHECK_CLOSE(sol.a, -2.3960406, 1e-6);
        CHECK_CLOSE(sol.b, -0.9067009, 1e-6);
        CHECK(sol.diagnostics.residual1 <= 1e-6);
        CHECK(sol.diagnostics.residual2 <= 1e-6);

        // Here B_bar is genuinely nonzero and must decay at the boundary.
        const std::size_t last = op.grid.n - 1;
        CHECK(linf_norm(sol.B_bar) > 1.0);
        CHECK(std::abs(sol.B_bar[last]) <= 1e-8 * linf_norm(sol.B_bar));
    }
    {
        auto model = make_model(2, {{0.05, 4}});
        auto op = fine_operator(model, 1.0);
        auto sol = solve_omega(op, rhs_F10(op), rhs_G10(op));
        auto sc = shift_coefficient(model, 1.0);
        CHECK(std::abs(sol.a - sc.a10) <= 0.01 * std::abs(sol.a));
        CHECK(sol.diagnostics.residual1 <= 1e-6);
        CHECK(sol.diagnostics.residual2 <= 1e-6);
    }
}

static void test_input_folding() {
    auto model = make_model(2);
    auto op = fine_operator(model, 1.0);
    auto F = rhs_F10(op);
    auto G = rhs_G10(op);
    auto ref = solve_omega(op, F, G);

    // Contaminate with wrong-parity parts; results must match the folded run.
    auto Fc = F, Gc = G;
    for (std::size_t i = 0; i < op.grid.n; ++i) {
        Fc[i] += 0.3 * G[i];
        Gc[i] += 0.2 * F[i];
    }
    auto sol = solve_omega(op, Fc, Gc);
    CHECK_CLOSE(sol.a, ref.a, 1e-12);
    CHECK_CLOSE(sol.b, ref.b, 1e-12);
    double maxdiff = 0.0;
    for (std::size_t i = 0; i < op.grid.n; ++i)
        maxdiff = std::max(maxdiff, std::abs(sol.A[i] - ref.A[i]));
    CHECK(maxdiff <= 1e-12);
    CHECK(sol.diagnostics.f_asymmetry > 0.05);
    CHECK(sol.diagnostics.g_asymmetry > 0.05);
    CHECK(ref.diagnostics.f_asymmetry <= 1e-12);
}

static void test_degenerate_speed() {
    // f(u) = u^4 + u^7: dMass_dc changes sign between c = 0.2 and c = 0.3.
    // Rescaling puts the crossing speed at 1, where <Z0, Q> = -dMass_dc / 2,
    // so both solver routes must report the degeneracy there.
    auto model = make_model(4, {{1.0, 7}});
    auto dmass = [&](double c) { return c_derivatives(model, c).dMass_dc; };
    double lo = 0.2, hi = 0.3;
    CHECK(dmass(lo) > 0.0);
    CHECK(dmass(hi) < 0.0);
    for (int it = 0; it < 24; ++it) {
        const double mc = 0.5 * (lo + hi);
        if (dmass(mc) > 0.0)
            lo = mc;
        else
            hi = mc;
    }
    const double cstar = 0.5 * (lo + hi);

    auto degen = rescale_model(model, cstar);
    auto op = fine_operator(degen, 1.0);
    CHECK_THROWS_AS(solve_omega(op, rhs_F10(op), rhs_G10(op)), Degenerate);
    CHECK_THROWS_AS(shift_coefficient(degen, 1.0), Degenerate);

    // Away from the crossing both routes work and agree.
    auto healthy = rescale_model(model, 0.1);
    auto op2 = fine_operator(healthy, 1.0);
    auto sol = solve_omega(op2, rhs_F10(op2), rhs_G10(op2));
    auto sc = shift_coefficient(healthy, 1.0);
    CHECK(std::abs(sol.a - sc.a10) <= 0.01 * std::abs(sol.a));
}

static void test_grid_mismatch() {
    auto op = fine_operator(make_model(2), 1.0);
    std::vector<double> bad(op.grid.n + 2, 0.0);
    std::vector<double> good(op.grid.n, 0.0);
    CHECK_THROWS_AS(solve_omega(op, bad, good), GridMismatch);
    CHECK_THROWS_AS(solve_omega(op, good, bad), GridMismatch);
}

int main() {
    test_structural_pairings();
    test_homogeneous_system();
    test_first_order_system();
    test_input_folding();
    test_degenerate_speed();
    test_grid_mismatch();
    return test_summary("test_omega_solver");
}
