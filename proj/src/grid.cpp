#include "gkdv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "gkdv/errors.hpp"

namespace gkdv {

std::vector<double> Grid::points() const {
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x(i);
    return xs;
}

Grid make_symmetric_grid(double half_width, double h_max) {
    if (half_width <= 0.0 || h_max <= 0.0)
        throw GridMismatch("make_symmetric_grid: nonpositive extent or spacing");
    auto half_count = static_cast<std::size_t>(std::ceil(half_width / h_max));
    if (half_count == 0) half_count = 1;
    const double h = half_width / static_cast<double>(half_count);
    Grid g;
    g.h = h;
    g.n = 2 * half_count + 1;
    g.x0 = -half_width;
    return g;
}

double trapezoid(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

double simpson(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    double s = 0.0;
    std::size_t i = 0;
    // Pairs of intervals [i, i+2].
    for (; i + 2 < n; i += 2) s += f[i] + 4.0 * f[i + 1] + f[i + 2];
    s *= h / 3.0;
    if (i + 2 == n) s += 0.5 * h * (f[n - 2] + f[n - 1]);
    return s;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& f, double h) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = 1; i < f.size(); ++i)
        out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    return out;
}

std::vector<double> cumulative_integral(const std::vector<double>& f, double h) {
    auto out = cumulative_trapezoid(f, h);
    if (f.size() < 5) return out;
    const auto fp = derivative_4th(f, h);
    const double w = h * h / 12.0;
    for (std::size_t i = 1; i < f.size(); ++i) out[i] -= w * (fp[i] - fp[0]);
    return out;
}

std::vector<double> derivative_4th(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    std::vector<double> d(n, 0.0);
    if (n < 5) {
        for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i]) / h;
        if (n >= 2) d[n - 1] = d[n - 2];
        return d;
    }
    for (std::size_t i = 2; i + 2 < n; ++i)
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    auto fwd = [&](std::size_t i) {
        return (-25.0 * f[i] + 48.0 * f[i + 1] - 36.0 * f[i + 2] + 16.0 * f[i + 3] -
                3.0 * f[i + 4]) /
               (12.0 * h);
    };
    auto bwd = [&](std::size_t i) {
        return (25.0 * f[i] - 48.0 * f[i - 1] + 36.0 * f[i - 2] - 16.0 * f[i - 3] +
                3.0 * f[i - 4]) /
               (12.0 * h);
    };
    d[0] = fwd(0);
    d[1] = fwd(1);
    d[n - 2] = bwd(n - 2);
    d[n - 1] = bwd(n - 1);
    return d;
}

std::vector<double> second_derivative_4th(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    std::vector<double> d(n, 0.0);
    const double h2 = h * h;
    if (n < 6) {
        for (std::size_t i = 1; i + 1 < n; ++i)
            d[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) / h2;
        if (n >= 3) {
            d[0] = d[1];
            d[n - 1] = d[n - 2];
        }
        return d;
    }
    for (std::size_t i = 2; i + 2 < n; ++i)
        d[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) /
               (12.0 * h2);
    auto fwd = [&](std::size_t i) {
        return (45.0 * f[i] - 154.0 * f[i + 1] + 214.0 * f[i + 2] - 156.0 * f[i + 3] +
                61.0 * f[i + 4] - 10.0 * f[i + 5]) /
               (12.0 * h2);
    };
    auto bwd = [&](std::size_t i) {
        return (45.0 * f[i] - 154.0 * f[i - 1] + 214.0 * f[i - 2] - 156.0 * f[i - 3] +
                61.0 * f[i - 4] - 10.0 * f[i - 5]) /
               (12.0 * h2);
    };
    d[0] = fwd(0);
    d[1] = fwd(1);
    d[n - 2] = bwd(n - 2);
    d[n - 1] = bwd(n - 1);
    return d;
}

double interp_cubic(const Grid& g, const std::vector<double>& f, double x) {
    if (g.n != f.size() || g.n == 0)
        throw GridMismatch("interp_cubic: grid/sample size mismatch");
    if (g.n < 4) return f[0];

    auto tail_rate = [&](bool right) {
        // Estimate an exponential decay rate from the outermost samples.
        const std::size_t k = std::min<std::size_t>(6, g.n - 1);
        double a, b;
        if (right) {
            a = std::abs(f[g.n - 1 - k]);
            b = std::abs(f[g.n - 1]);
        } else {
            a = std::abs(f[k]);
            b = std::abs(f[0]);
        }
        if (a <= 0.0 || b <= 0.0) return 20.0;
        double r = std::log(a / b) / (static_cast<double>(k) * g.h);
        return std::clamp(r, 0.05, 20.0);
    };

    if (x <= g.x0) {
        if (f.front() == 0.0) return 0.0;
        return f.front() * std::exp(-tail_rate(false) * (g.x0 - x));
    }
    if (x >= g.x_last()) {
        if (f.back() == 0.0) return 0.0;
        return f.back() * std::exp(-tail_rate(true) * (x - g.x_last()));
    }

    double fi = (x - g.x0) / g.h;
    auto i1 = static_cast<std::ptrdiff_t>(std::floor(fi));
    std::ptrdiff_t i0 = i1 - 1;
    if (i0 < 0) i0 = 0;
    if (i0 + 3 >= static_cast<std::ptrdiff_t>(g.n)) i0 = static_cast<std::ptrdiff_t>(g.n) - 4;

    const double t = (x - g.x(static_cast<std::size_t>(i0))) / g.h;
    // Lagrange basis on nodes 0,1,2,3.
    const double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    const double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    const double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    const double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    const auto u0 = static_cast<std::size_t>(i0);
    return l0 * f[u0] + l1 * f[u0 + 1] + l2 * f[u0 + 2] + l3 * f[u0 + 3];
}

double l2_norm(const std::vector<double>& f, double h) {
    double s = 0.0;
    for (double v : f) s += v * v;
    return std::sqrt(s * h);
}

double h1_norm(const std::vector<double>& f, double h) {
    const auto d = derivative_4th(f, h);
    const double a = l2_norm(f, h);
    const double b = l2_norm(d, h);
    return std::sqrt(a * a + b * b);
}

double linf_norm(const std::vector<double>& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

} // namespace gkdv
