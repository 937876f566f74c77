#include "gkdv/linearized_operator.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "gkdv/errors.hpp"
#include "gkdv/nonlinearity.hpp"

namespace gkdv {

namespace detail {

// Column-major LAPACK band storage: A(i,j) at ab[j*ldab + kl + ku + i - j].
struct Banded {
    int n = 0;
    int kl = 2, ku = 2;
    int ldab = 7;
    std::vector<double> ab;
    std::vector<lapack_int> ipiv;
    double anorm = 0.0;
    bool factored = false;

    void init(int n_) {
        n = n_;
        ldab = 2 * kl + ku + 1;
        ab.assign(static_cast<std::size_t>(ldab) * n, 0.0);
        ipiv.assign(n, 0);
        factored = false;
    }
    double& at(int i, int j) {
        return ab[static_cast<std::size_t>(j) * ldab + (kl + ku + i - j)];
    }
    double get(int i, int j) const {
        if (i < 0 || j < 0 || i >= n || j >= n || i - j > kl || j - i > ku) return 0.0;
        return ab[static_cast<std::size_t>(j) * ldab + (kl + ku + i - j)];
    }
    double norm1() const {
        double m = 0.0;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = std::max(0, j - ku); i <= std::min(n - 1, j + kl); ++i)
                s += std::abs(get(i, j));
            m = std::max(m, s);
        }
        return m;
    }
    void factor() {
        anorm = norm1();
        const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab.data(),
                                               ldab, ipiv.data());
        if (info < 0) throw SingularSolve("dgbtrf: invalid argument " + std::to_string(-info));
        if (info > 0) throw SingularSolve("dgbtrf: exact zero pivot at " + std::to_string(info));
        factored = true;
    }
    double rcond() const {
        double rc = 0.0;
        const lapack_int info = LAPACKE_dgbcon(LAPACK_COL_MAJOR, '1', n, kl, ku, ab.data(),
                                               ldab, ipiv.data(), anorm, &rc);
        if (info != 0) throw SingularSolve("dgbcon failed");
        return rc;
    }
    std::vector<double> solve(std::vector<double> rhs, char trans = 'N') const {
        const lapack_int info =
            LAPACKE_dgbtrs(LAPACK_COL_MAJOR, trans, n, kl, ku, 1, ab.data(), ldab,
                           ipiv.data(), rhs.data(), n);
        if (info != 0) throw SingularSolve("dgbtrs failed");
        return rhs;
    }
};

struct OperatorFactorizations {
    Banded even_m, odd_m;
    double even_rcond = 1.0;
    std::vector<double> khatL, khatR; // folded odd near-kernel, left/right
};

namespace {

double vec_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void vec_normalize(std::vector<double>& a) {
    const double n = std::sqrt(vec_dot(a, a));
    if (n > 0.0)
        for (auto& v : a) v /= n;
}

} // namespace

} // namespace detail

namespace {

struct StencilCoeffs {
    double s0, s1, s2;
};

StencilCoeffs stencil(double h) {
    const double w = 1.0 / (12.0 * h * h);
    return {30.0 * w, -16.0 * w, 1.0 * w};
}

// Folded matrices. Half-grid coordinates: even k = 0..mid (node mid+k), odd
// k = 1..mid (row index k-1). The two outermost rows of each are identity
// (full-grid boundary rows).
detail::Banded build_even(const OperatorGrid& op) {
    const auto [s0, s1, s2] = stencil(op.grid.h);
    const auto mid = static_cast<int>(op.grid.n / 2);
    const int m = mid + 1;
    detail::Banded A;
    A.init(m);
    auto d = [&](int k) {
        return s0 + op.c - op.potential[static_cast<std::size_t>(mid + k)];
    };
    A.at(0, 0) = d(0);
    A.at(0, 1) = 2.0 * s1;
    A.at(0, 2) = 2.0 * s2;
    A.at(1, 0) = s1;
    A.at(1, 1) = d(1) + s2;
    A.at(1, 2) = s1;
    A.at(1, 3) = s2;
    for (int k = 2; k <= m - 3; ++k) {
        A.at(k, k - 2) = s2;
        A.at(k, k - 1) = s1;
        A.at(k, k) = d(k);
        A.at(k, k + 1) = s1;
        A.at(k, k + 2) = s2;
    }
    A.at(m - 2, m - 2) = 1.0;
    A.at(m - 1, m - 1) = 1.0;
    return A;
}

detail::Banded build_odd(const OperatorGrid& op) {
    const auto [s0, s1, s2] = stencil(op.grid.h);
    const auto mid = static_cast<int>(op.grid.n / 2);
    const int m = mid; // rows r = k-1
    detail::Banded A;
    A.init(m);
    auto d = [&](int k) {
        return s0 + op.c - op.potential[static_cast<std::size_t>(mid + k)];
    };
    A.at(0, 0) = d(1) - s2;
    A.at(0, 1) = s1;
    A.at(0, 2) = s2;
    if (m > 1) {
        A.at(1, 0) = s1;
        A.at(1, 1) = d(2);
        A.at(1, 2) = s1;
        A.at(1, 3) = s2;
    }
    for (int r = 2; r <= m - 3; ++r) {
        const int k = r + 1;
        A.at(r, r - 2) = s2;
        A.at(r, r - 1) = s1;
        A.at(r, r) = d(k);
        A.at(r, r + 1) = s1;
        A.at(r, r + 2) = s2;
    }
    A.at(m - 2, m - 2) = 1.0;
    A.at(m - 1, m - 1) = 1.0;
    return A;
}

std::vector<double> fold_even(const std::vector<double>& w, std::size_t mid) {
    std::vector<double> out(mid + 1);
    for (std::size_t k = 0; k <= mid; ++k) out[k] = w[mid + k];
    return out;
}

std::vector<double> fold_odd(const std::vector<double>& w, std::size_t mid) {
    std::vector<double> out(mid);
    for (std::size_t k = 1; k <= mid; ++k) out[k - 1] = w[mid + k];
    return out;
}

std::vector<double> unfold_even(const std::vector<double>& half, std::size_t mid) {
    std::vector<double> out(2 * mid + 1);
    for (std::size_t k = 0; k <= mid; ++k) {
        out[mid + k] = half[k];
        out[mid - k] = half[k];
    }
    return out;
}

std::vector<double> unfold_odd(const std::vector<double>& half, std::size_t mid) {
    std::vector<double> out(2 * mid + 1, 0.0);
    for (std::size_t k = 1; k <= mid; ++k) {
        out[mid + k] = half[k - 1];
        out[mid - k] = -half[k - 1];
    }
    return out;
}

} // namespace

OperatorGrid make_operator(const SolitonProfile& profile) {
    OperatorGrid op;
    op.grid = profile.grid;
    op.c = profile.c;
    op.model = profile.model;
    op.Q = profile.Q;
    op.Qprime = profile.Qp;
    op.potential.resize(profile.grid.n);
    for (std::size_t i = 0; i < profile.grid.n; ++i)
        op.potential[i] = eval(profile.model, profile.Q[i], 1);

    auto fact = std::make_shared<detail::OperatorFactorizations>();
    fact->even_m = build_even(op);
    fact->even_m.factor();
    fact->even_rcond = fact->even_m.rcond();

    fact->odd_m = build_odd(op);
    fact->odd_m.factor();

    // Discrete near-kernel of the odd block (continuum kernel Q'): inverse
    // iteration from the folded Q', right and left vectors.
    const std::size_t mid = op.grid.n / 2;
    std::vector<double> r = fold_odd(op.Qprime, mid);
    detail::vec_normalize(r);
    std::vector<double> l = r;
    for (int it = 0; it < 4; ++it) {
        r = fact->odd_m.solve(std::move(r), 'N');
        detail::vec_normalize(r);
        l = fact->odd_m.solve(std::move(l), 'T');
        detail::vec_normalize(l);
    }
    fact->khatR = std::move(r);
    fact->khatL = std::move(l);

    op.fact = std::move(fact);
    return op;
}

std::vector<double> apply(const OperatorGrid& op, const std::vector<double>& w) {
    const std::size_t n = op.grid.n;
    if (w.size() != n) throw GridMismatch("apply: vector length does not match grid");
    const auto [s0, s1, s2] = stencil(op.grid.h);
    std::vector<double> out(n);
    out[0] = w[0];
    out[1] = w[1];
    out[n - 2] = w[n - 2];
    out[n - 1] = w[n - 1];
    for (std::size_t i = 2; i + 2 < n; ++i)
        out[i] = s2 * (w[i - 2] + w[i + 2]) + s1 * (w[i - 1] + w[i + 1]) +
                 (s0 + op.c - op.potential[i]) * w[i];
    return out;
}

double inner(const OperatorGrid& op, const std::vector<double>& u,
             const std::vector<double>& v) {
    if (u.size() != op.grid.n || v.size() != op.grid.n)
        throw GridMismatch("inner: vector length does not match grid");
    std::vector<double> prod(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) prod[i] = u[i] * v[i];
    return trapezoid(prod, op.grid.h);
}

namespace {

std::vector<double> solve_even_part(const OperatorGrid& op, const std::vector<double>& h) {
    if (op.fact->even_rcond < 1e-12)
        throw SingularSolve("even subspace factorization is ill-conditioned, rcond = " +
                            std::to_string(op.fact->even_rcond));
    const std::size_t mid = op.grid.n / 2;
    auto x = op.fact->even_m.solve(fold_even(h, mid));
    return unfold_even(x, mid);
}

std::vector<double> solve_odd_part(const OperatorGrid& op, const std::vector<double>& h) {
    const double nh = std::sqrt(inner(op, h, h));
    if (nh == 0.0) return std::vector<double>(op.grid.n, 0.0);
    const double nq = std::sqrt(inner(op, op.Qprime, op.Qprime));
    const double proj = inner(op, h, op.Qprime) / (nh * nq);
    if (std::abs(proj) > 0.5)
        throw SingularSolve("odd solve: right-hand side is mostly the kernel direction Q'");
    if (std::abs(proj) > 1e-6)
        throw NotOrthogonal("odd solve: <h, Q'> = " + std::to_string(proj) +
                            " relative, exceeds 1e-6");
    return detail::solve_odd_deflated(op, h);
}

} // namespace

namespace detail {

std::vector<double> solve_odd_deflated(const OperatorGrid& op, const std::vector<double>& h) {
    const std::size_t mid = op.grid.n / 2;
    auto hf = fold_odd(h, mid);
    const auto& kl = op.fact->khatL;
    const auto& kr = op.fact->khatR;
    const double a = detail::vec_dot(hf, kl) / detail::vec_dot(kl, kl);
    for (std::size_t i = 0; i < hf.size(); ++i) hf[i] -= a * kl[i];

    auto wf = op.fact->odd_m.solve(std::move(hf));
    const double b = detail::vec_dot(wf, kr) / detail::vec_dot(kr, kr);
    for (std::size_t i = 0; i < wf.size(); ++i) wf[i] -= b * kr[i];

    auto w = unfold_odd(wf, mid);
    // Enforce the continuum constraint <w, Q'> = 0.
    const double g = inner(op, w, op.Qprime) / inner(op, op.Qprime, op.Qprime);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= g * op.Qprime[i];
    return w;
}

} // namespace detail

std::vector<double> solve(const OperatorGrid& op, const std::vector<double>& h,
                          Parity parity) {
    const std::size_t n = op.grid.n;
    if (h.size() != n) throw GridMismatch("solve: vector length does not match grid");
    if (parity == Parity::Even) return solve_even_part(op, h);
    if (parity == Parity::Odd) return solve_odd_part(op, h);

    std::vector<double> he(n), ho(n);
    double ne = 0.0, no = 0.0, nh = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        he[i] = 0.5 * (h[i] + h[n - 1 - i]);
        ho[i] = 0.5 * (h[i] - h[n - 1 - i]);
        ne = std::max(ne, std::abs(he[i]));
        no = std::max(no, std::abs(ho[i]));
        nh = std::max(nh, std::abs(h[i]));
    }
    std::vector<double> out(n, 0.0);
    if (ne > 1e-14 * nh) {
        auto we = solve_even_part(op, he);
        for (std::size_t i = 0; i < n; ++i) out[i] += we[i];
    }
    if (no > 1e-14 * nh) {
        auto wo = solve_odd_part(op, ho);
        for (std::size_t i = 0; i < n; ++i) out[i] += wo[i];
    }
    return out;
}

GroundState ground_eigenvalue(const OperatorGrid& op) {
    const std::size_t n = op.grid.n;
    const std::size_t mid = n / 2;

    // Seed Q^{(p+1)/2}: exact ground state for pure powers.
    std::vector<double> v(n);
    const double expo = 0.5 * (op.model.p + 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(std::abs(op.Q[i]), expo);
    double vn = std::sqrt(inner(op, v, v));
    for (auto& x : v) x /= vn;

    double mu = inner(op, v, gkdv::apply(op, v));

    for (int it = 0; it < 40; ++it) {
        // Shifted even matrix (interior rows only; identity rows stay).
        detail::Banded A = build_even(op);
        const int m = A.n;
        for (int k = 0; k <= m - 3; ++k) A.at(k, k) -= mu;
        try {
            A.factor();
        } catch (const SingularSolve&) {
            mu += 1e-12 * (1.0 + std::abs(mu));
            continue;
        }
        auto yf = A.solve(fold_even(v, mid));
        auto y = unfold_even(yf, mid);
        const double yn = std::sqrt(inner(op, y, y));
        if (!(yn > 0.0) || !std::isfinite(yn)) break;
        for (auto& x : y) x /= yn;
        v = std::move(y);
        const double mu_new = inner(op, v, gkdv::apply(op, v)) / inner(op, v, v);
        const bool done = std::abs(mu_new - mu) <= 1e-13 * (1.0 + std::abs(mu_new));
        mu = mu_new;
        if (done) break;
    }

    if (mu >= 0.0)
        throw NonNegativeGroundState("smallest eigenvalue " + std::to_string(mu) +
                                     " is nonnegative");
    GroundState gs;
    gs.lambda0 = -mu;
    if (v[mid] < 0.0)
        for (auto& x : v) x = -x;
    const double norm = std::sqrt(inner(op, v, v));
    for (auto& x : v) x /= norm;
    gs.chi0 = std::move(v);
    return gs;
}

} // namespace gkdv
