#pragma once

#include <vector>

namespace chanflow {

// C∞ monotone cutoff: 0 for r <= lower, 1 for r >= upper, normalized integral of
// exp(-1/(s(1-s))) in between.
struct SmoothStep {
    double lower = 0.5;
    double upper = 1.0;

    double operator()(double r) const;
    // Taylor coefficients in (r - r0), K of them
    std::vector<double> taylor(double r0, int K) const;

    template <class S>
    S apply(const S& r) const;
};

} // namespace chanflow

#include "chanflow/scalar.hpp"

namespace chanflow {

template <class S>
S SmoothStep::apply(const S& r) const {
    return apply_series(r, taylor(value_of(r), series_order(r)));
}

} // namespace chanflow
