#pragma once

// Truncated multivariate polynomials (jets) over double or complex<double>.
// Monomials are stored densely in graded-lex order: by total degree, then
// lexicographically descending within a degree, so x^2 comes before xy before y^2.

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace chanflow {

using MultiIndex = std::vector<int>;

class MonomialBasis {
public:
    MonomialBasis(int dim, int degree);

    // shared cached instance; safe for concurrent use
    static std::shared_ptr<const MonomialBasis> get(int dim, int degree);

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    std::size_t size() const { return exps_.size(); }
    const MultiIndex& exponent(std::size_t i) const { return exps_[i]; }
    int total_degree(std::size_t i) const { return deg_[i]; }
    // first index of degree m; offset(degree+1) == size()
    std::size_t offset(int m) const { return offsets_[static_cast<std::size_t>(m)]; }
    std::size_t index(const MultiIndex& a) const;
    // index of e_k
    std::size_t variable(int k) const;
    // index of a_i + a_j, or -1 when beyond the degree cap
    long product(std::size_t i, std::size_t j) const;

private:
    std::uint64_t key(const MultiIndex& a) const;

    int dim_;
    int degree_;
    std::uint64_t base_;
    std::vector<MultiIndex> exps_;
    std::vector<int> deg_;
    std::vector<std::size_t> offsets_;
    std::vector<std::uint64_t> keys_;
    std::unordered_map<std::uint64_t, std::size_t> lookup_;
    mutable std::once_flag table_once_;
    mutable std::vector<int> table_;
};

// All multi-indices of length dim with |a| = m, in basis order.
std::vector<MultiIndex> monomials(int dim, int m);
// (m+dim-1)! / ((dim-1)! m!)
std::size_t monomial_count(int dim, int m);
std::string multi_index_key(const MultiIndex& a);

template <class T>
class Poly {
public:
    using Basis = std::shared_ptr<const MonomialBasis>;

    Poly() = default;
    explicit Poly(Basis b, T c = T(0)) : basis_(std::move(b)), c_(basis_->size(), T(0)) {
        c_[0] = c;
    }
    static Poly variable(Basis b, int k, T value = T(0)) {
        Poly p(b, value);
        p.c_[p.basis_->variable(k)] = T(1);
        return p;
    }

    const Basis& basis() const { return basis_; }
    int dim() const { return basis_->dim(); }
    int degree() const { return basis_->degree(); }
    std::size_t size() const { return c_.size(); }

    T& operator[](std::size_t i) { return c_[i]; }
    const T& operator[](std::size_t i) const { return c_[i]; }
    T coeff(const MultiIndex& a) const {
        int d = 0;
        for (int v : a) d += v;
        if (d > degree()) return T(0);
        return c_[basis_->index(a)];
    }
    void set_coeff(const MultiIndex& a, T v) { c_[basis_->index(a)] = v; }
    T constant() const { return c_[0]; }
    const std::vector<T>& coeffs() const { return c_; }
    std::vector<T>& coeffs() { return c_; }

    Poly& operator+=(const Poly& o) {
        check(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        check(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Poly& operator*=(const T& s) {
        for (auto& v : c_) v *= s;
        return *this;
    }
    Poly& operator+=(const T& s) { c_[0] += s; return *this; }
    Poly& operator-=(const T& s) { c_[0] -= s; return *this; }

    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator+(Poly a, const T& s) { return a += s; }
    friend Poly operator+(const T& s, Poly a) { return a += s; }
    friend Poly operator-(Poly a, const T& s) { return a -= s; }
    friend Poly operator-(const T& s, const Poly& a) { return (-a) += s; }
    friend Poly operator*(Poly a, const T& s) { return a *= s; }
    friend Poly operator*(const T& s, Poly a) { return a *= s; }
    friend Poly operator/(Poly a, const T& s) { return a *= (T(1) / s); }
    Poly operator-() const {
        Poly r(*this);
        for (auto& v : r.c_) v = -v;
        return r;
    }

    friend Poly operator*(const Poly& a, const Poly& b) {
        a.check(b);
        const MonomialBasis& B = *a.basis_;
        Poly r(a.basis_);
        const int D = B.degree();
        for (std::size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i] == T(0)) continue;
            const std::size_t jend = B.offset(D - B.total_degree(i) + 1);
            for (std::size_t j = 0; j < jend; ++j) {
                if (b.c_[j] == T(0)) continue;
                r.c_[static_cast<std::size_t>(B.product(i, j))] += a.c_[i] * b.c_[j];
            }
        }
        return r;
    }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }

    // d/dx_k; the top-degree block of the result is zero
    Poly derivative(int k) const {
        const MonomialBasis& B = *basis_;
        Poly r(basis_);
        MultiIndex a;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            const MultiIndex& e = B.exponent(i);
            if (e[k] == 0 || c_[i] == T(0)) continue;
            a = e;
            a[k] -= 1;
            r.c_[B.index(a)] += c_[i] * T(e[k]);
        }
        return r;
    }

    // keep only total degree m
    Poly homogeneous(int m) const {
        Poly r(basis_);
        if (m > degree()) return r;
        for (std::size_t i = basis_->offset(m); i < basis_->offset(m + 1); ++i) r.c_[i] = c_[i];
        return r;
    }
    // keep degrees <= m
    Poly truncated(int m) const {
        Poly r(*this);
        for (std::size_t i = basis_->offset(std::min(m, degree()) + 1); i < c_.size(); ++i) r.c_[i] = T(0);
        return r;
    }
    // same coefficients in another basis of the same dimension (truncating or padding)
    Poly rebased(Basis nb) const {
        if (nb->dim() != dim()) throw std::invalid_argument("rebased: dimension mismatch");
        Poly r(nb);
        const int top = std::min(degree(), nb->degree());
        for (std::size_t i = 0; i < basis_->offset(top + 1); ++i) r.c_[nb->index(basis_->exponent(i))] = c_[i];
        return r;
    }

    template <class P>
    auto evaluate(const P& point) const {
        using R = decltype(T(0) * point[0]);
        const MonomialBasis& B = *basis_;
        const int n = dim(), D = degree();
        std::vector<std::vector<R>> pw(static_cast<std::size_t>(n), std::vector<R>(static_cast<std::size_t>(D + 1)));
        for (int k = 0; k < n; ++k) {
            pw[k][0] = R(1);
            for (int e = 1; e <= D; ++e) pw[k][e] = pw[k][e - 1] * R(point[k]);
        }
        R s(0);
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (c_[i] == T(0)) continue;
            R m = R(c_[i]);
            const MultiIndex& e = B.exponent(i);
            for (int k = 0; k < n; ++k)
                if (e[k]) m *= pw[k][e[k]];
            s += m;
        }
        return s;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : c_) m = std::max(m, static_cast<double>(std::abs(v)));
        return m;
    }
    double max_abs_degree(int m) const {
        if (m > degree()) return 0.0;
        double r = 0.0;
        for (std::size_t i = basis_->offset(m); i < basis_->offset(m + 1); ++i)
            r = std::max(r, static_cast<double>(std::abs(c_[i])));
        return r;
    }

private:
    void check(const Poly& o) const {
        if (basis_ != o.basis_) {
            if (!basis_ || !o.basis_ || basis_->dim() != o.basis_->dim() || basis_->degree() != o.basis_->degree())
                throw std::invalid_argument("Poly: incompatible bases");
        }
    }

    Basis basis_;
    std::vector<T> c_;
};

using RPoly = Poly<double>;
using CPoly = Poly<std::complex<double>>;

// f(p) = sum_k c[k] (p - p0)^k with p0 the constant term; c[k] are Taylor coefficients of f at p0
template <class T>
Poly<T> apply_taylor(const Poly<T>& p, const std::vector<T>& c) {
    Poly<T> nil = p;
    nil[0] = T(0);
    const std::size_t K = std::min<std::size_t>(c.size(), static_cast<std::size_t>(p.degree()) + 1);
    Poly<T> r(p.basis(), K ? c[K - 1] : T(0));
    for (std::size_t k = K; k-- > 1;) {
        r = r * nil;
        r[0] += c[k - 1];
    }
    return r;
}

// Taylor coefficient tables (real) at a point; K = number of coefficients
std::vector<double> taylor_exp(double a, int K);
std::vector<double> taylor_log(double a, int K);
std::vector<double> taylor_pow(double a, double e, int K);
std::vector<double> taylor_sin(double a, int K);
std::vector<double> taylor_cos(double a, int K);

inline RPoly exp(const RPoly& p) { return apply_taylor(p, taylor_exp(p.constant(), p.degree() + 1)); }
inline RPoly log(const RPoly& p) { return apply_taylor(p, taylor_log(p.constant(), p.degree() + 1)); }
inline RPoly pow(const RPoly& p, double e) { return apply_taylor(p, taylor_pow(p.constant(), e, p.degree() + 1)); }
inline RPoly sqrt(const RPoly& p) { return pow(p, 0.5); }
inline RPoly sin(const RPoly& p) { return apply_taylor(p, taylor_sin(p.constant(), p.degree() + 1)); }
inline RPoly cos(const RPoly& p) { return apply_taylor(p, taylor_cos(p.constant(), p.degree() + 1)); }
inline RPoly operator/(const RPoly& a, const RPoly& b) { return a * pow(b, -1.0); }
inline RPoly operator/(double s, const RPoly& b) { return s * pow(b, -1.0); }

// substitute x_k -> subs[k]; subs share one basis which becomes the result basis
template <class T>
Poly<T> compose(const Poly<T>& p, const std::vector<Poly<T>>& subs) {
    if (static_cast<int>(subs.size()) != p.dim()) throw std::invalid_argument("compose: wrong number of substitutions");
    const MonomialBasis& B = *p.basis();
    auto nb = subs.at(0).basis();
    std::vector<Poly<T>> prod(B.size());
    prod[0] = Poly<T>(nb, T(1));
    Poly<T> r(nb, p[0]);
    for (std::size_t i = 1; i < B.size(); ++i) {
        const MultiIndex& e = B.exponent(i);
        int k = 0;
        while (e[k] == 0) ++k;
        MultiIndex lower = e;
        lower[k] -= 1;
        prod[i] = prod[B.index(lower)] * subs[k];
        if (p[i] != T(0)) r += prod[i] * p[i];
    }
    return r;
}

template <class T>
Poly<std::complex<double>> to_complex(const Poly<T>& p) {
    Poly<std::complex<double>> r(p.basis());
    for (std::size_t i = 0; i < p.size(); ++i) r[i] = std::complex<double>(p[i]);
    return r;
}

// univariate antiderivative with zero constant (dimension 1 only)
RPoly integrate1(const RPoly& p);

} // namespace chanflow
