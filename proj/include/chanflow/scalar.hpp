#pragma once

// Uniform access to the value part of double / Dual / RPoly and univariate
// series composition, so model formulas can be written once as templates.

#include "chanflow/dual.hpp"
#include "chanflow/poly.hpp"

#include <vector>

namespace chanflow {

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.value(); }
inline double value_of(const RPoly& x) { return x.constant(); }

// f(x) given Taylor coefficients c of f at value_of(x)
inline double apply_series(double, const std::vector<double>& c) { return c.at(0); }
inline Dual apply_series(const Dual& x, const std::vector<double>& c) {
    return x.chain(c.at(0), c.size() > 1 ? c[1] : 0.0);
}
inline RPoly apply_series(const RPoly& x, const std::vector<double>& c) { return apply_taylor(x, c); }

// number of Taylor coefficients a given scalar type needs
inline int series_order(double) { return 1; }
inline int series_order(const Dual&) { return 2; }
inline int series_order(const RPoly& x) { return x.degree() + 1; }

// constant of the same "shape" as x (needed for RPoly which carries a basis)
inline double constant_like(double, double c) { return c; }
inline Dual constant_like(const Dual&, double c) { return Dual(c); }
inline RPoly constant_like(const RPoly& x, double c) { return RPoly(x.basis(), c); }

using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;

} // namespace chanflow
