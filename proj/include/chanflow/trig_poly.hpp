#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace chanflow {

// f(θ) = a0 + Σ_k (a_k cos kθ + b_k sin kθ), k = 1..K
struct TrigPoly {
    double a0 = 0.0;
    std::vector<double> a; // a[k-1] multiplies cos kθ
    std::vector<double> b; // b[k-1] multiplies sin kθ

    int order() const { return static_cast<int>(std::max(a.size(), b.size())); }
    bool is_constant(double tol = 0.0) const;
    double coef_cos(int k) const { return k >= 1 && k <= static_cast<int>(a.size()) ? a[k - 1] : 0.0; }
    double coef_sin(int k) const { return k >= 1 && k <= static_cast<int>(b.size()) ? b[k - 1] : 0.0; }

    double operator()(double theta) const { return derivative(theta, 0); }
    // p-th derivative in θ
    double derivative(double theta, int p) const;

    // expressions like "2cos", "cos+0.5sin3", "1 - 0.25*cos2"
    static TrigPoly parse(const std::string& expr);
    // flat list [a0, a1, b1, a2, b2, ...]
    static TrigPoly from_coeffs(const std::vector<double>& c);
    std::string to_string() const;
};

// Evaluate f at the angle whose cosine/sine are (c, s), for any scalar type.
template <class S>
S trig_eval(const TrigPoly& f, const S& c, const S& s) {
    S r = c * 0.0 + f.a0;
    S ck = c, sk = s;
    for (int k = 1; k <= f.order(); ++k) {
        if (k > 1) {
            S nc = ck * c - sk * s;
            S ns = sk * c + ck * s;
            ck = nc;
            sk = ns;
        }
        const double ak = f.coef_cos(k), bk = f.coef_sin(k);
        if (ak != 0.0) r = r + ak * ck;
        if (bk != 0.0) r = r + bk * sk;
    }
    return r;
}

} // namespace chanflow
