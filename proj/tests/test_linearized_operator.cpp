#include "gkdv/linearized_operator.hpp"

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "gkdv/errors.hpp"
#include "gkdv/grid.hpp"
#include "gkdv/nonlinearity.hpp"
#include "gkdv/soliton_profile.hpp"
#include "test_util.hpp"

using namespace gkdv;

namespace {

double rel_l2(const std::vector<double>& a, const std::vector<double>& b, double h) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return l2_norm(d, h) / l2_norm(b, h);
}

std::vector<double> gauss_bump(const Grid& g, double center, double width, double amp) {
    std::vector<double> v(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double s = (g.x(i) - center) / width;
        v[i] = amp * std::exp(-s * s);
    }
    return v;
}

std::vector<double> random_smooth(const Grid& g, std::mt19937& rng, double spread) {
    std::uniform_real_distribution<double> uc(-spread, spread);
    std::uniform_real_distribution<double> uw(1.0, 4.0);
    std::uniform_real_distribution<double> ua(-1.0, 1.0);
    std::vector<double> v(g.n, 0.0);
    for (int b = 0; b < 5; ++b) {
        auto bump = gauss_bump(g, uc(rng), uw(rng), ua(rng));
        for (std::size_t i = 0; i < g.n; ++i) v[i] += bump[i];
    }
    return v;
}

void project_off(const OperatorGrid& op, std::vector<double>& w,
                 const std::vector<double>& dir) {
    const double a = inner(op, w, dir) / inner(op, dir, dir);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= a * dir[i];
}

// h = 0.005 keeps the 4th-order stencil truncation on the steepest profile
// (p = 4) an order below the 1e-7 identity tolerance.
ProfileGridSpec fine_spec() {
    ProfileGridSpec spec;
    spec.h = 0.005;
    return spec;
}

} // namespace

static void test_kernel_and_scaling() {
    for (int p : {2, 3, 4}) {
        auto prof = build_profile(make_model(p), 1.0, +1, fine_spec());
        auto op = make_operator(prof);

        auto lqp = gkdv::apply(op, prof.Qp);
        CHECK(l2_norm(lqp, op.grid.h) <= 1e-7 * l2_norm(prof.Qp, op.grid.h));

        std::vector<double> zero(op.grid.n, 0.0);
        auto lz = gkdv::apply(op, zero);
        CHECK(linf_norm(lz) == 0.0);
    }
    auto prof = build_profile(make_model(2, {{0.05, 4}}), 0.8, +1, fine_spec());
    auto op = make_operator(prof);
    auto lqp = gkdv::apply(op, prof.Qp);
    CHECK(l2_norm(lqp, op.grid.h) <= 1e-7 * l2_norm(prof.Qp, op.grid.h));
}

static void test_lambda_identity() {
    for (int p : {2, 3}) {
        auto model = make_model(p);
        auto prof = build_profile(model, 1.0, +1, fine_spec());
        auto op = make_operator(prof);
        auto cd = c_derivatives(model, 1.0, +1, fine_spec());
        CHECK(cd.lambda.grid.n == op.grid.n);

        auto llam = gkdv::apply(op, cd.lambda.values);
        std::vector<double> resid(op.grid.n);
        for (std::size_t i = 0; i < op.grid.n; ++i) resid[i] = llam[i] + prof.Q[i];
        resid[0] = resid[1] = resid[op.grid.n - 2] = resid[op.grid.n - 1] = 0.0;
        CHECK(l2_norm(resid, op.grid.h) <= 1e-5 * l2_norm(prof.Q, op.grid.h));
    }
}

static void test_grid_mismatch() {
    auto prof = build_profile(make_model(2), 1.0);
    auto op = make_operator(prof);
    std::vector<double> bad(op.grid.n + 1, 0.0);
    CHECK_THROWS_AS(gkdv::apply(op, bad), GridMismatch);
    CHECK_THROWS_AS(solve(op, bad), GridMismatch);
    CHECK_THROWS_AS(inner(op, bad, bad), GridMismatch);
}

static void test_even_solve_anchors() {
    auto model = make_model(2);
    auto prof = build_profile(model, 1.0, +1, fine_spec());
    auto op = make_operator(prof);
    const auto n = op.grid.n;

    auto cd = c_derivatives(model, 1.0, +1, fine_spec());
    std::vector<double> negQ(n);
    for (std::size_t i = 0; i < n; ++i) negQ[i] = -prof.Q[i];
    auto lam = solve(op, negQ, Parity::Even);
    CHECK(rel_l2(lam, cd.lambda.values, op.grid.h) <= 1e-5);

    // L(-LambdaQ - xQ') = 3Q - 2f(Q) at c = 1.
    std::vector<double> rhs(n), v0_expected(n);
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = 3.0 * prof.Q[i] - 2.0 * eval(model, prof.Q[i], 0);
        v0_expected[i] = -cd.lambda.values[i] - op.grid.x(i) * prof.Qp[i];
    }
    auto v0 = solve(op, rhs, Parity::Even);
    double maxdiff = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        maxdiff = std::max(maxdiff, std::abs(v0[i] - v0_expected[i]));
    CHECK(maxdiff <= 1e-5 * linf_norm(v0_expected));
}

static void test_solve_apply_roundtrip() {
    auto prof = build_profile(make_model(2), 1.0);
    auto op = make_operator(prof);
    const auto n = op.grid.n;
    std::mt19937 rng(42);

    auto we = random_smooth(op.grid, rng, 15.0);
    for (std::size_t i = 0; i <= n / 2; ++i) {
        const double sym = 0.5 * (we[i] + we[n - 1 - i]);
        we[i] = sym;
        we[n - 1 - i] = sym;
    }
    auto he = gkdv::apply(op, we);
    auto back_e = solve(op, he, Parity::Even);
    CHECK(rel_l2(back_e, we, op.grid.h) <= 1e-8);

    auto wo = random_smooth(op.grid, rng, 15.0);
    for (std::size_t i = 0; i <= n / 2; ++i) {
        const double asym = 0.5 * (wo[i] - wo[n - 1 - i]);
        wo[i] = asym;
        wo[n - 1 - i] = -asym;
    }
    project_off(op, wo, prof.Qp);
    auto ho = gkdv::apply(op, wo);
    auto back_o = solve(op, ho, Parity::Odd);
    CHECK(rel_l2(back_o, wo, op.grid.h) <= 1e-8);

    // Mixed parity through the Auto path.
    std::vector<double> h(n), w_expected(n);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = he[i] + ho[i];
        w_expected[i] = we[i] + wo[i];
    }
    auto back = solve(op, h);
    CHECK(rel_l2(back, w_expected, op.grid.h) <= 1e-8);
}

static void test_odd_orthogonality_errors() {
    auto prof = build_profile(make_model(2), 1.0);
    auto op = make_operator(prof);
    const auto n = op.grid.n;

    CHECK_THROWS_AS(solve(op, prof.Qp, Parity::Odd), SingularSolve);

    std::mt19937 rng(7);
    auto wo = random_smooth(op.grid, rng, 10.0);
    for (std::size_t i = 0; i <= n / 2; ++i) {
        const double asym = 0.5 * (wo[i] - wo[n - 1 - i]);
        wo[i] = asym;
        wo[n - 1 - i] = -asym;
    }
    project_off(op, wo, prof.Qp);
    auto ho = gkdv::apply(op, wo);

    // Contaminate with a kernel component that is small but above threshold.
    const double nh = l2_norm(ho, op.grid.h);
    const double nq = l2_norm(prof.Qp, op.grid.h);
    std::vector<double> contaminated(n);
    for (std::size_t i = 0; i < n; ++i)
        contaminated[i] = ho[i] + 1e-3 * nh / nq * prof.Qp[i];
    CHECK_THROWS_AS(solve(op, contaminated, Parity::Odd), NotOrthogonal);

    // Solutions carry no kernel component.
    auto w = solve(op, ho, Parity::Odd);
    CHECK(std::abs(inner(op, w, prof.Qp)) <=
          1e-12 * l2_norm(w, op.grid.h) * l2_norm(prof.Qp, op.grid.h));
}

static void test_ground_state() {
    for (int p : {2, 3, 4}) {
        auto prof = build_profile(make_model(p), 1.0, +1, fine_spec());
        auto op = make_operator(prof);
        auto gs = ground_eigenvalue(op);

        const double expected = 0.25 * (p - 1) * (p + 3);
        CHECK_CLOSE(gs.lambda0, expected, 1e-6);

        const std::size_t mid = op.grid.n / 2;
        CHECK(gs.chi0[mid] > 0.0);
        double minval = 1.0;
        for (std::size_t i = 0; i < op.grid.n; ++i)
            minval = std::min(minval, gs.chi0[i]);
        CHECK(minval >= -1e-12);

        auto lchi = gkdv::apply(op, gs.chi0);
        std::vector<double> resid(op.grid.n);
        for (std::size_t i = 0; i < op.grid.n; ++i)
            resid[i] = lchi[i] + gs.lambda0 * gs.chi0[i];
        resid[0] = resid[1] = resid[op.grid.n - 2] = resid[op.grid.n - 1] = 0.0;
        CHECK(l2_norm(resid, op.grid.h) <= 1e-7);

        CHECK_CLOSE(inner(op, gs.chi0, gs.chi0), 1.0, 1e-12);
    }

    // Perturbed model: only positivity and a small residual are known.
    auto prof = build_profile(make_model(2, {{0.05, 4}}), 1.0, +1, fine_spec());
    auto op = make_operator(prof);
    auto gs = ground_eigenvalue(op);
    CHECK(gs.lambda0 > 0.0);
    auto lchi = gkdv::apply(op, gs.chi0);
    std::vector<double> resid(op.grid.n);
    for (std::size_t i = 0; i < op.grid.n; ++i)
        resid[i] = lchi[i] + gs.lambda0 * gs.chi0[i];
    resid[0] = resid[1] = resid[op.grid.n - 2] = resid[op.grid.n - 1] = 0.0;
    CHECK(l2_norm(resid, op.grid.h) <= 1e-7);
}

static void test_truncation_stability() {
    auto model = make_model(2);
    ProfileGridSpec wide;
    wide.half_width = 60.0;
    auto gs50 = ground_eigenvalue(make_operator(build_profile(model, 1.0)));
    auto gs60 = ground_eigenvalue(make_operator(build_profile(model, 1.0, +1, wide)));
    CHECK_CLOSE(gs50.lambda0, gs60.lambda0, 1e-6);
}

static void test_symmetry() {
    auto prof = build_profile(make_model(3), 1.0);
    auto op = make_operator(prof);
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 20; ++trial) {
        auto u = random_smooth(op.grid, rng, 12.0);
        auto v = random_smooth(op.grid, rng, 12.0);
        const double a = inner(op, gkdv::apply(op, u), v);
        const double b = inner(op, u, gkdv::apply(op, v));
        CHECK(std::abs(a - b) <= 1e-10 * (std::abs(a) + std::abs(b) + 1.0));
    }
}

static void test_coercivity_surrogate() {
    auto prof = build_profile(make_model(2), 1.0);
    auto op = make_operator(prof);
    std::mt19937 rng(99);

    auto gs = ground_eigenvalue(op);
    CHECK(inner(op, gs.chi0, gkdv::apply(op, gs.chi0)) < 0.0);

    double min_ratio = 1e30;
    for (int trial = 0; trial < 50; ++trial) {
        auto w = random_smooth(op.grid, rng, 15.0);
        project_off(op, w, prof.Q);
        project_off(op, w, prof.Qp);
        const double num = inner(op, w, gkdv::apply(op, w));
        const double den = inner(op, w, w);
        if (den > 1e-14) min_ratio = std::min(min_ratio, num / den);
    }
    CHECK(min_ratio > 1e-3);
}

int main() {
    test_kernel_and_scaling();
    test_lambda_identity();
    test_grid_mismatch();
    test_even_solve_anchors();
    test_solve_apply_roundtrip();
    test_odd_orthogonality_errors();
    test_ground_state();
    test_truncation_stability();
    test_symmetry();
    test_coercivity_surrogate();
    return test_summary("test_linearized_operator");
}
