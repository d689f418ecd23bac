#include "chanflow/fit.hpp"

#include "chanflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace chanflow {

ExponentFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi, double trim) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lo && x[i] <= hi) || !(x[i] > 0) || !(y[i] > 0) || !std::isfinite(y[i])) continue;
        pts.emplace_back(std::log(x[i]), std::log(y[i]));
    }
    std::sort(pts.begin(), pts.end());
    std::vector<double> lx, ly;
    for (const auto& [a, c] : pts) lx.push_back(a), ly.push_back(c);
    const std::size_t drop = static_cast<std::size_t>(std::floor(trim * static_cast<double>(lx.size())));
    const std::size_t b = drop, e = lx.size() - drop;
    const int n = static_cast<int>(e > b ? e - b : 0);
    if (n < 10) throw InsufficientSamples(std::to_string(n) + " usable samples in the fit window (need 10)");

    double mx = 0, my = 0;
    for (std::size_t i = b; i < e; ++i) mx += lx[i], my += ly[i];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = b; i < e; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0)) throw InsufficientSamples("degenerate fit window");
    ExponentFit f;
    f.exponent = sxy / sxx;
    f.intercept = my - f.exponent * mx;
    double ss = 0;
    for (std::size_t i = b; i < e; ++i) {
        const double r = ly[i] - f.intercept - f.exponent * lx[i];
        ss += r * r;
    }
    f.stderr_ = n > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
    f.x_min = std::exp(lx[b]);
    f.x_max = std::exp(lx[e - 1]);
    f.samples = n;
    return f;
}

ExponentFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double trim) {
    return fit_loglog(x, y, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), trim);
}

} // namespace chanflow
