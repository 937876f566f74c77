#pragma once

#include <functional>
#include <vector>

namespace gkdv {

struct Monomial {
    double coeff = 0.0;
    int exponent = 0;
};

// Smooth user-supplied perturbation hook. Must supply its own antiderivative:
// eval(s, order) for order in {0,1,2,3} and antiderivative(s) = integral of
// the order-0 value from 0 to s.
struct CustomPerturbation {
    std::function<double(double, int)> eval;
    std::function<double(double)> antiderivative;
};

// f(u) = u^p + f1(u) with f1 a finite monomial sum (exact evaluation) or a
// user-supplied smooth callable. Immutable after construction.
struct NonlinearityModel {
    int p = 2;
    std::vector<Monomial> monomials;
    bool has_custom = false;
    CustomPerturbation custom;
    // Sign carried by the leading power after reflection; +1 normally. A
    // reflected p=3 model keeps lead_sign = +1 because (-1)^{p+1} = +1.
    double lead_sign = 1.0;

    bool pure_power() const { return monomials.empty() && !has_custom && lead_sign == 1.0; }
};

// Validates p in {2,3,4} and every monomial exponent > p.
NonlinearityModel make_model(int p, const std::vector<Monomial>& monomials = {});

// Attaches a user-supplied perturbation; the callable must provide its own
// antiderivative (no numerical antidifferentiation is performed).
NonlinearityModel with_custom(NonlinearityModel model, CustomPerturbation custom);

// Derivative of order 0..3 of f at s. Exact for monomial perturbations.
double eval(const NonlinearityModel& model, double s, int order = 0);

// F(s) = integral of f from 0 to s.
double antiderivative(const NonlinearityModel& model, double s);

// Reflected model g with g(s) = -f(-s). Used for the negative solitary-wave
// branch at p=3: a negative-amplitude profile of f is the negated positive
// profile of g. For odd p, g has leading term s^p again.
NonlinearityModel reflected(const NonlinearityModel& model);

} // namespace gkdv
