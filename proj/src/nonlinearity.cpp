#include "gkdv/nonlinearity.hpp"

#include <cmath>
#include <string>

#include "gkdv/errors.hpp"

namespace gkdv {

namespace {

// d^order/ds^order of coeff * s^e, exact integer arithmetic on the factors.
double monomial_deriv(double coeff, int e, double s, int order) {
    if (order > e) return 0.0;
    double factor = coeff;
    for (int k = 0; k < order; ++k) factor *= static_cast<double>(e - k);
    return factor * std::pow(s, e - order);
}

} // namespace

NonlinearityModel make_model(int p, const std::vector<Monomial>& monomials) {
    if (p < 2 || p > 4)
        throw ConfigError("make_model: p must be 2, 3, or 4, got " + std::to_string(p));
    for (const auto& m : monomials) {
        if (m.exponent <= p)
            throw ConfigError("make_model: perturbation exponent " +
                              std::to_string(m.exponent) + " must exceed p = " +
                              std::to_string(p));
    }
    NonlinearityModel model;
    model.p = p;
    model.monomials = monomials;
    return model;
}

NonlinearityModel with_custom(NonlinearityModel model, CustomPerturbation custom) {
    if (!custom.eval || !custom.antiderivative)
        throw ConfigError("with_custom: perturbation requires eval and antiderivative");
    model.has_custom = true;
    model.custom = std::move(custom);
    return model;
}

double eval(const NonlinearityModel& model, double s, int order) {
    if (order < 0 || order > 3)
        throw ConfigError("eval: derivative order must be in 0..3");
    double out = model.lead_sign * monomial_deriv(1.0, model.p, s, order);
    for (const auto& m : model.monomials) out += monomial_deriv(m.coeff, m.exponent, s, order);
    if (model.has_custom) out += model.custom.eval(s, order);
    return out;
}

double antiderivative(const NonlinearityModel& model, double s) {
    double out = model.lead_sign * std::pow(s, model.p + 1) / static_cast<double>(model.p + 1);
    for (const auto& m : model.monomials)
        out += m.coeff * std::pow(s, m.exponent + 1) / static_cast<double>(m.exponent + 1);
    if (model.has_custom) out += model.custom.antiderivative(s);
    return out;
}

NonlinearityModel reflected(const NonlinearityModel& model) {
    NonlinearityModel out;
    out.p = model.p;
    // g(s) = -f(-s): each term c*s^e maps to c*(-1)^{e+1} s^e.
    out.lead_sign = model.lead_sign * ((model.p % 2 == 0) ? -1.0 : 1.0);
    out.monomials = model.monomials;
    for (auto& m : out.monomials)
        if (m.exponent % 2 == 0) m.coeff = -m.coeff;
    if (model.has_custom) {
        out.has_custom = true;
        auto f1 = model.custom.eval;
        auto F1 = model.custom.antiderivative;
        out.custom.eval = [f1](double s, int order) {
            const double sgn = (order % 2 == 0) ? -1.0 : 1.0;
            return sgn * f1(-s, order);
        };
        out.custom.antiderivative = [F1](double s) { return F1(-s); };
    }
    return out;
}

} // namespace gkdv
