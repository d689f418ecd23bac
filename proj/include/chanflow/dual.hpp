#pragma once

// Forward-mode first derivatives with a fixed-capacity gradient.

#include <array>
#include <cmath>
#include <stdexcept>

namespace chanflow {

class Dual {
public:
    static constexpr int kMax = 16;

    Dual() = default;
    Dual(double v) : v_(v) {} // NOLINT: implicit from constants
    static Dual variable(double v, int k, int n) {
        if (n > kMax || k < 0 || k >= n) throw std::out_of_range("Dual::variable");
        Dual d(v);
        d.n_ = n;
        d.g_[k] = 1.0;
        return d;
    }

    double value() const { return v_; }
    double d(int k) const { return g_[k]; }
    int size() const { return n_; }

    Dual& operator+=(const Dual& o) {
        v_ += o.v_;
        merge(o);
        for (int k = 0; k < o.n_; ++k) g_[k] += o.g_[k];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v_ -= o.v_;
        merge(o);
        for (int k = 0; k < o.n_; ++k) g_[k] -= o.g_[k];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        merge(o);
        for (int k = 0; k < n_; ++k) g_[k] = g_[k] * o.v_ + v_ * o.g_[k];
        v_ *= o.v_;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        merge(o);
        const double inv = 1.0 / o.v_;
        for (int k = 0; k < n_; ++k) g_[k] = (g_[k] - v_ * inv * o.g_[k]) * inv;
        v_ *= inv;
        return *this;
    }
    friend Dual operator+(Dual a, const Dual& b) { return a += b; }
    friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
    friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
    friend Dual operator/(Dual a, const Dual& b) { return a /= b; }
    Dual operator-() const {
        Dual r(*this);
        r.v_ = -v_;
        for (int k = 0; k < n_; ++k) r.g_[k] = -g_[k];
        return r;
    }

    // f(value) and f'(value)
    Dual chain(double f, double df) const {
        Dual r;
        r.v_ = f;
        r.n_ = n_;
        for (int k = 0; k < n_; ++k) r.g_[k] = df * g_[k];
        return r;
    }

private:
    void merge(const Dual& o) {
        if (o.n_ > n_) {
            for (int k = n_; k < o.n_; ++k) g_[k] = 0.0;
            n_ = o.n_;
        }
    }

    double v_ = 0.0;
    int n_ = 0;
    std::array<double, kMax> g_{};
};

inline Dual exp(const Dual& a) {
    const double e = std::exp(a.value());
    return a.chain(e, e);
}
inline Dual log(const Dual& a) { return a.chain(std::log(a.value()), 1.0 / a.value()); }
inline Dual sqrt(const Dual& a) {
    const double s = std::sqrt(a.value());
    return a.chain(s, 0.5 / s);
}
inline Dual pow(const Dual& a, double e) {
    const double p = std::pow(a.value(), e - 1.0);
    return a.chain(p * a.value(), e * p);
}
inline Dual sin(const Dual& a) { return a.chain(std::sin(a.value()), std::cos(a.value())); }
inline Dual cos(const Dual& a) { return a.chain(std::cos(a.value()), -std::sin(a.value())); }

} // namespace chanflow
