#include "chanflow/smooth_step.hpp"
#include "chanflow/errors.hpp"
#include "chanflow/poly.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace chanflow {

namespace {

double bump(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return std::exp(-1.0 / (s * (1.0 - s)));
}

double integral(double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(bump, a, b, 15, 1e-14);
}

double normalizer() {
    static const double z = integral(0.0, 1.0);
    return z;
}

} // namespace

double SmoothStep::operator()(double r) const {
    if (!(upper > lower)) throw InvalidModel("SmoothStep needs upper > lower");
    const double t = (r - lower) / (upper - lower);
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    // integrate the shorter side for accuracy near the ends
    if (t <= 0.5) return integral(0.0, t) / normalizer();
    return 1.0 - integral(t, 1.0) / normalizer();
}

std::vector<double> SmoothStep::taylor(double r0, int K) const {
    std::vector<double> c(static_cast<std::size_t>(std::max(K, 1)), 0.0);
    c[0] = (*this)(r0);
    const double L = upper - lower;
    const double t0 = (r0 - lower) / L;
    if (K <= 1 || t0 <= 0.0 || t0 >= 1.0) return c;

    auto basis = MonomialBasis::get(1, K - 1);
    RPoly t = RPoly::variable(basis, 0, t0) * (1.0 / L);
    t[0] = t0;
    RPoly p = t * (1.0 - t);
    RPoly psi = exp(-1.0 * pow(p, -1.0));
    RPoly F = integrate1(psi) * (1.0 / (normalizer() * L));
    for (int k = 1; k < K; ++k) c[static_cast<std::size_t>(k)] = F[static_cast<std::size_t>(k)];
    return c;
}

} // namespace chanflow
