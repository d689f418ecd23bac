#include "chanflow/poly.hpp"

#include <boost/math/special_functions/binomial.hpp>

#include <functional>
#include <map>

namespace chanflow {

namespace {

void enumerate_degree(int dim, int m, std::vector<MultiIndex>& out) {
    MultiIndex a(static_cast<std::size_t>(dim), 0);
    // descending lex: fill first slot as large as possible
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == dim - 1) {
            a[pos] = left;
            out.push_back(a);
            return;
        }
        for (int v = left; v >= 0; --v) {
            a[pos] = v;
            rec(pos + 1, left - v);
        }
    };
    if (dim == 0) return;
    rec(0, m);
}

} // namespace

MonomialBasis::MonomialBasis(int dim, int degree) : dim_(dim), degree_(degree), base_(static_cast<std::uint64_t>(degree) + 1) {
    if (dim < 1 || degree < 0) throw std::invalid_argument("MonomialBasis: need dim >= 1, degree >= 0");
    if (dim * std::log2(static_cast<double>(base_)) > 62.0) throw std::invalid_argument("MonomialBasis: too large to index");
    offsets_.push_back(0);
    for (int m = 0; m <= degree; ++m) {
        enumerate_degree(dim, m, exps_);
        offsets_.push_back(exps_.size());
    }
    deg_.resize(exps_.size());
    keys_.resize(exps_.size());
    lookup_.reserve(exps_.size() * 2);
    for (std::size_t i = 0; i < exps_.size(); ++i) {
        int d = 0;
        for (int v : exps_[i]) d += v;
        deg_[i] = d;
        keys_[i] = key(exps_[i]);
        lookup_.emplace(keys_[i], i);
    }
}

std::uint64_t MonomialBasis::key(const MultiIndex& a) const {
    std::uint64_t k = 0;
    for (int v : a) k = k * base_ + static_cast<std::uint64_t>(v);
    return k;
}

std::size_t MonomialBasis::index(const MultiIndex& a) const {
    if (static_cast<int>(a.size()) != dim_) throw std::invalid_argument("MonomialBasis::index: wrong length");
    for (int v : a)
        if (v < 0 || v > degree_) throw std::out_of_range("MonomialBasis::index: exponent out of range");
    auto it = lookup_.find(key(a));
    if (it == lookup_.end()) throw std::out_of_range("MonomialBasis::index: degree beyond cap");
    return it->second;
}

std::size_t MonomialBasis::variable(int k) const {
    if (k < 0 || k >= dim_ || degree_ < 1) throw std::out_of_range("MonomialBasis::variable");
    return 1 + static_cast<std::size_t>(k);
}

long MonomialBasis::product(std::size_t i, std::size_t j) const {
    if (deg_[i] + deg_[j] > degree_) return -1;
    const std::size_t n = exps_.size();
    if (n <= 1200) {
        std::call_once(table_once_, [this, n] {
            table_.assign(n * n, -1);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) {
                    if (deg_[a] + deg_[b] > degree_) continue;
                    table_[a * n + b] = static_cast<int>(lookup_.at(keys_[a] + keys_[b]));
                }
        });
        return table_[i * n + j];
    }
    // digits never carry since each exponent sum stays <= degree
    return static_cast<long>(lookup_.at(keys_[i] + keys_[j]));
}

std::shared_ptr<const MonomialBasis> MonomialBasis::get(int dim, int degree) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{dim, degree}];
    if (!slot) slot = std::make_shared<const MonomialBasis>(dim, degree);
    return slot;
}

std::vector<MultiIndex> monomials(int dim, int m) {
    std::vector<MultiIndex> out;
    if (dim < 1 || m < 0) return out;
    enumerate_degree(dim, m, out);
    return out;
}

std::size_t monomial_count(int dim, int m) {
    return static_cast<std::size_t>(std::llround(boost::math::binomial_coefficient<double>(
        static_cast<unsigned>(m + dim - 1), static_cast<unsigned>(m))));
}

std::string multi_index_key(const MultiIndex& a) {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(a[i]);
    }
    return s;
}

std::vector<double> taylor_exp(double a, int K) {
    std::vector<double> c(static_cast<std::size_t>(K));
    double v = std::exp(a);
    for (int k = 0; k < K; ++k) {
        c[k] = v;
        v /= (k + 1);
    }
    return c;
}

std::vector<double> taylor_log(double a, int K) {
    std::vector<double> c(static_cast<std::size_t>(K));
    if (K > 0) c[0] = std::log(a);
    double p = 1.0;
    for (int k = 1; k < K; ++k) {
        p /= a;
        c[k] = ((k % 2) ? 1.0 : -1.0) * p / k;
    }
    return c;
}

std::vector<double> taylor_pow(double a, double e, int K) {
    std::vector<double> c(static_cast<std::size_t>(K));
    if (K == 0) return c;
    c[0] = std::pow(a, e);
    // c_k = c_{k-1} (e-k+1) / (k a)
    for (int k = 1; k < K; ++k) c[k] = c[k - 1] * (e - k + 1) / (k * a);
    return c;
}

std::vector<double> taylor_sin(double a, int K) {
    std::vector<double> c(static_cast<std::size_t>(K));
    const double s = std::sin(a), co = std::cos(a);
    double f = 1.0;
    for (int k = 0; k < K; ++k) {
        if (k) f /= k;
        double d = 0;
        switch (k % 4) {
            case 0: d = s; break;
            case 1: d = co; break;
            case 2: d = -s; break;
            default: d = -co; break;
        }
        c[k] = d * f;
    }
    return c;
}

std::vector<double> taylor_cos(double a, int K) {
    std::vector<double> c(static_cast<std::size_t>(K));
    const double s = std::sin(a), co = std::cos(a);
    double f = 1.0;
    for (int k = 0; k < K; ++k) {
        if (k) f /= k;
        double d = 0;
        switch (k % 4) {
            case 0: d = co; break;
            case 1: d = -s; break;
            case 2: d = -co; break;
            default: d = s; break;
        }
        c[k] = d * f;
    }
    return c;
}

RPoly integrate1(const RPoly& p) {
    if (p.dim() != 1) throw std::invalid_argument("integrate1: univariate only");
    RPoly r(p.basis());
    for (int k = p.degree(); k >= 1; --k) r[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(k - 1)] / k;
    return r;
}

} // namespace chanflow
