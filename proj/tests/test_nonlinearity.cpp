#include "gkdv/nonlinearity.hpp"

#include <cmath>
#include <random>

#include "gkdv/errors.hpp"
#include "test_util.hpp"

using namespace gkdv;

static void test_pure_power_values() {
    auto m2 = make_model(2);
    CHECK_CLOSE(eval(m2, 3.0, 0), 9.0, 1e-14);
    CHECK_CLOSE(antiderivative(m2, 2.0), 8.0 / 3.0, 1e-14);
    CHECK_CLOSE(eval(m2, 1.7, 1), 2.0 * 1.7, 1e-14);
    CHECK_CLOSE(eval(m2, 1.7, 2), 2.0, 1e-14);
    CHECK_CLOSE(eval(m2, 1.7, 3), 0.0, 1e-14);

    auto m3 = make_model(3, {{0.1, 5}});
    CHECK_CLOSE(eval(m3, 1.0, 1), 3.5, 1e-14);
    CHECK_CLOSE(eval(m3, 1.0, 0), 1.1, 1e-14);

    auto m4 = make_model(4);
    CHECK_CLOSE(eval(m4, 2.0, 0), 16.0, 1e-14);
    CHECK_CLOSE(antiderivative(m4, 1.0), 0.2, 1e-14);
}

static void test_validation() {
    CHECK_THROWS_AS(make_model(5), ConfigError);
    CHECK_THROWS_AS(make_model(1), ConfigError);
    CHECK_THROWS_AS(make_model(2, {{0.1, 2}}), ConfigError);
    CHECK_THROWS_AS(make_model(3, {{0.1, 3}}), ConfigError);
    auto m = make_model(2);
    CHECK_THROWS_AS(eval(m, 1.0, 4), ConfigError);
    CHECK_THROWS_AS(eval(m, 1.0, -1), ConfigError);
}

static void test_antiderivative_consistency() {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    const double h = 1e-4;
    for (auto& model : {make_model(2), make_model(3, {{0.1, 5}}),
                        make_model(4, {{-0.02, 6}, {0.3, 7}})}) {
        for (int i = 0; i < 100; ++i) {
            const double s = dist(rng);
            const double lhs = antiderivative(model, s + h) - antiderivative(model, s - h);
            // Taylor remainder (h^3/3) f'' plus slack for round-off.
            const double tol = (std::abs(eval(model, s, 2)) / 3.0 + 1.0) * h * h * h * 1.5;
            CHECK(std::abs(lhs - 2.0 * h * eval(model, s, 0)) <= tol);
        }
    }
}

static void test_derivative_consistency() {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.1, 2.0);
    const double h = 1e-5;
    auto model = make_model(3, {{0.25, 6}});
    for (int i = 0; i < 50; ++i) {
        const double s = dist(rng);
        const double fd1 = (eval(model, s + h, 0) - eval(model, s - h, 0)) / (2.0 * h);
        const double fd2 = (eval(model, s + h, 1) - eval(model, s - h, 1)) / (2.0 * h);
        const double fd3 = (eval(model, s + h, 2) - eval(model, s - h, 2)) / (2.0 * h);
        CHECK(std::abs(fd1 - eval(model, s, 1)) <= 1e-6);
        CHECK(std::abs(fd2 - eval(model, s, 2)) <= 1e-6);
        CHECK(std::abs(fd3 - eval(model, s, 3)) <= 1e-5);
    }
}

static void test_perturbation_smallness() {
    // f1(u)/u^p -> 0 on a geometric sequence of small u.
    auto model = make_model(2, {{0.5, 4}, {1.0, 3}});
    double prev = 1e300;
    for (double u = 0.5; u > 1e-6; u *= 0.5) {
        const double f1 = eval(model, u, 0) - u * u;
        const double ratio = std::abs(f1) / (u * u);
        CHECK(ratio < prev);
        prev = ratio;
    }
    CHECK(prev < 1e-5);
}

static void test_custom_perturbation() {
    // f1 = 0.1 u^5 supplied as a callable; matches the monomial route.
    CustomPerturbation pert;
    pert.eval = [](double s, int order) {
        const double c[4] = {0.1, 0.5, 2.0, 6.0};
        return c[order] * std::pow(s, 5 - order);
    };
    pert.antiderivative = [](double s) { return 0.1 * std::pow(s, 6) / 6.0; };
    auto custom = with_custom(make_model(3), pert);
    auto exact = make_model(3, {{0.1, 5}});
    for (double s : {0.3, 0.9, 1.4}) {
        for (int k = 0; k <= 3; ++k)
            CHECK_CLOSE(eval(custom, s, k), eval(exact, s, k), 1e-12);
        CHECK_CLOSE(antiderivative(custom, s), antiderivative(exact, s), 1e-12);
    }
    CustomPerturbation broken;
    broken.eval = pert.eval;
    CHECK_THROWS_AS(with_custom(make_model(3), broken), ConfigError);
}

static void test_reflected() {
    // g(s) = -f(-s); for p=3 the leading term is s^3 again and even-exponent
    // perturbations flip sign.
    auto model = make_model(3, {{0.1, 4}, {-0.2, 5}});
    auto g = reflected(model);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int i = 0; i < 40; ++i) {
        const double s = dist(rng);
        CHECK_CLOSE(eval(g, s, 0), -eval(model, -s, 0), 1e-13);
        CHECK_CLOSE(antiderivative(g, s), antiderivative(model, -s), 1e-13);
    }
    // Pure odd power is reflection-invariant.
    auto m3 = make_model(3);
    auto g3 = reflected(m3);
    CHECK_CLOSE(eval(g3, 1.3, 0), eval(m3, 1.3, 0), 1e-14);
}

int main() {
    test_pure_power_values();
    test_validation();
    test_antiderivative_consistency();
    test_derivative_consistency();
    test_perturbation_smallness();
    test_custom_perturbation();
    test_reflected();
    return test_summary("test_nonlinearity");
}
