#pragma once

#include <vector>

namespace chanflow {

struct ExponentFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double stderr_ = 0.0;
    double x_min = 0.0; // window actually used
    double x_max = 0.0;
    int samples = 0;
};

// least-squares slope of log y against log x over points with x in [lo, hi] and x, y > 0,
// after dropping a `trim` fraction of the points at each end
ExponentFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi,
                       double trim = 0.1);
// same with the whole range
ExponentFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double trim = 0.1);

} // namespace chanflow
