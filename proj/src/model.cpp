#include "chanflow/model.hpp"
#include "chanflow/scalar.hpp"

#include <cmath>
#include <random>
#include <type_traits>

namespace chanflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class S>
S dot(const std::vector<S>& a, const std::vector<S>& b) {
    S r = a[0] * b[0];
    for (std::size_t i = 1; i < a.size(); ++i) r = r + a[i] * b[i];
    return r;
}

template <class S>
S sq(const std::vector<S>& a) { return dot(a, a); }

int family_dim(const Family& f) {
    return std::visit(overloaded{
                          [](const MetricExample11&) { return 2; },
                          [](const MorseSphere& m) { return m.n; },
                          [](const Riema2&) { return 2; },
                          [](const Riema3&) { return 2; },
                          [](const Spiral&) { return 2; },
                          [](const SpiralConjugate&) { return 2; },
                          [](const Homogenized& h) { return h.inner ? h.inner->dim() : 0; },
                          [](const Generic& g) { return g.n; },
                      },
                      f);
}

void validate(const Family& f) {
    std::visit(overloaded{
                   [](const MetricExample11& m) {
                       if (!(m.a > 0)) throw InvalidModel("metric11 needs a > 0");
                   },
                   [](const MorseSphere& m) {
                       if (m.n < 2) throw InvalidModel("morse needs n >= 2");
                       if (!m.local) {
                           if (m.n != 2) throw InvalidModel("global trig potential only for n = 2; give critical-point data otherwise");
                           return;
                       }
                       if (m.omega.size() != m.n || std::abs(m.omega.norm() - 1.0) > 1e-12)
                           throw InvalidModel("morse critical point must be a unit vector of length n");
                       if (m.q.size() != m.n - 1) throw InvalidModel("morse needs n-1 Hessian eigenvalues");
                       if (m.tangent.rows() != m.n || m.tangent.cols() != m.n - 1)
                           throw InvalidModel("morse tangent basis has wrong shape");
                   },
                   [](const Riema2& m) {
                       if (!(m.a > 0)) throw InvalidModel("riema2 needs a > 0");
                   },
                   [](const Riema3& m) {
                       if (!(m.b > 0)) throw InvalidModel("riema3 needs b > 0");
                       if (!(m.kappa < 2)) throw InvalidModel("riema3 needs kappa < 2");
                       if (!(m.kappa * (m.b - 1) < 0)) throw InvalidModel("riema3 needs kappa (b - 1) < 0");
                   },
                   [](const Spiral& m) {
                       if (!(m.c > 0)) throw InvalidModel("spiral needs c > 0");
                       if (m.f.is_constant()) throw InvalidModel("spiral needs a non-constant f");
                   },
                   [](const SpiralConjugate& m) {
                       if (!(m.c > 0)) throw InvalidModel("spiral needs c > 0");
                       if (m.f.is_constant()) throw InvalidModel("spiral needs a non-constant f");
                   },
                   [](const Homogenized& h) {
                       if (!h.inner) throw InvalidModel("homogenized model without inner model");
                       if (!(h.s != 0.0) || !std::isfinite(h.s)) throw InvalidModel("homogenization exponent must be finite and non-zero");
                   },
                   [](const Generic& g) {
                       if (g.n < 2) throw InvalidModel("generic model needs n >= 2");
                       if (!g.h) throw InvalidModel("generic model without a Hamiltonian");
                   },
               },
               f);
}

} // namespace

MorseSphere MorseSphere::global(const TrigPoly& V) {
    MorseSphere m;
    m.n = 2;
    m.V = V;
    return m;
}

MorseSphere MorseSphere::critical(const Vec& omega, double V0, const Vec& q) {
    MorseSphere m;
    m.n = static_cast<int>(omega.size());
    m.local = true;
    m.omega = omega.normalized();
    m.V0 = V0;
    m.q = q;
    // orthonormal complement of ω via Householder QR
    Mat Q = Eigen::HouseholderQR<Mat>(m.omega).householderQ() * Mat::Identity(m.n, m.n);
    m.tangent = Q.rightCols(m.n - 1);
    return m;
}

Model::Model(Family f, std::optional<SmoothStep> regularization) : family_(std::move(f)), reg_(regularization) {
    validate(family_);
    n_ = family_dim(family_);
    if (reg_ && !(reg_->upper > reg_->lower && reg_->lower >= 0.0))
        throw InvalidModel("regularization needs 0 <= lower < upper");
}

std::string Model::name() const {
    return std::visit(overloaded{
                          [](const MetricExample11&) { return std::string("metric11"); },
                          [](const MorseSphere&) { return std::string("morse"); },
                          [](const Riema2&) { return std::string("riema2"); },
                          [](const Riema3&) { return std::string("riema3"); },
                          [](const Spiral&) { return std::string("spiral"); },
                          [](const SpiralConjugate&) { return std::string("spiral_conjugate"); },
                          [](const Homogenized& h) { return "homogenized(" + h.inner->name() + ")"; },
                          [](const Generic& g) { return g.label; },
                      },
                      family_);
}

bool Model::degree_zero() const {
    return std::visit(overloaded{
                          [](const MetricExample11&) { return true; },
                          [this](const MorseSphere&) { return !reg_; },
                          [](const Riema2&) { return false; },
                          [](const Riema3&) { return false; },
                          [](const Spiral&) { return false; },
                          [](const SpiralConjugate&) { return true; },
                          [](const Homogenized&) { return true; },
                          [](const Generic& g) { return g.degree_zero; },
                      },
                      family_);
}

template <class S>
S Model::evaluate(const std::vector<S>& x, const std::vector<S>& xi) const {
    if (static_cast<int>(x.size()) != n_ || static_cast<int>(xi.size()) != n_)
        throw std::invalid_argument("Model::evaluate: dimension mismatch");
    const S r2 = sq(x);
    const bool at_origin = value_of(r2) == 0.0;
    const bool regularized = reg_.has_value() && std::holds_alternative<MorseSphere>(family_);
    if (at_origin && !regularized) throw EvaluationAtSingularity("|x| = 0 for model " + name());

    const S p2 = sq(xi);
    return std::visit(
        overloaded{
            [&](const MetricExample11& m) -> S {
                const S metric = 1.0 + m.a * x[1] * x[1] / r2;
                return 0.5 * xi[0] * xi[0] / metric + 0.5 * xi[1] * xi[1];
            },
            [&](const MorseSphere& m) -> S {
                if (at_origin) return 0.5 * p2;
                const S r = sqrt(r2);
                S V;
                if (!m.local) {
                    V = trig_eval(m.V, x[0] / r, x[1] / r);
                } else {
                    V = constant_like(r, m.V0);
                    for (int j = 0; j < m.n - 1; ++j) {
                        S t = x[0] * m.tangent(0, j);
                        for (int i = 1; i < m.n; ++i) t = t + x[i] * m.tangent(i, j);
                        t = t / r;
                        V = V + 0.5 * m.q[j] * t * t;
                    }
                }
                if (reg_) V = reg_->apply(r) * V;
                return 0.5 * p2 + V;
            },
            [&](const Riema2& m) -> S {
                const S den = r2 - m.a * xi[1] * xi[1];
                if (!(value_of(den) > 0.0)) throw EvaluationAtSingularity("riema2: |x|^2 - a xi_2^2 <= 0");
                return 0.5 * p2 / den;
            },
            [&](const Riema3& m) -> S {
                const S base = x[0] * x[0] + m.b * x[1] * x[1];
                return 0.5 * pow(base, 0.5 * m.kappa) * p2;
            },
            [&](const Spiral& m) -> S {
                const S r = sqrt(r2);
                const S c1 = x[0] / r, s1 = x[1] / r;
                const S phi = m.c * log(r);
                const S cp = cos(phi), sp = sin(phi);
                // angle θ − c ln r
                const S cs = c1 * cp + s1 * sp;
                const S ss = s1 * cp - c1 * sp;
                return 0.5 * exp(trig_eval(m.f, cs, ss)) * p2;
            },
            [&](const SpiralConjugate& m) -> S {
                const S r = sqrt(r2);
                const S c1 = x[0] / r, s1 = x[1] / r;
                const S radial = xi[0] * c1 + xi[1] * s1;
                const S angular = xi[1] * c1 - xi[0] * s1;
                const S first = radial - m.c * angular;
                return 0.5 * exp(trig_eval(m.f, c1, s1)) * (first * first + angular * angular);
            },
            [&](const Homogenized& h) -> S {
                const S r = sqrt(r2);
                std::vector<S> xh(x.size()), xn(xi.size());
                for (std::size_t i = 0; i < x.size(); ++i) xh[i] = x[i] / r;
                const S p = dot(xh, xi);
                const double f = 1.0 / h.s - 1.0;
                for (std::size_t i = 0; i < xi.size(); ++i) xn[i] = xi[i] + f * p * xh[i];
                return h.inner->evaluate(xh, xn);
            },
            [&](const Generic& g) -> S {
                if constexpr (std::is_same_v<S, double>) {
                    Vec xv(n_), pv(n_);
                    for (int i = 0; i < n_; ++i) {
                        xv[i] = x[i];
                        pv[i] = xi[i];
                    }
                    return g.h(xv, pv);
                } else {
                    throw InvalidModel("generic callable model has no jet evaluation; use finite differences");
                }
            },
        },
        family_);
}

template double Model::evaluate<double>(const std::vector<double>&, const std::vector<double>&) const;
template Dual Model::evaluate<Dual>(const std::vector<Dual>&, const std::vector<Dual>&) const;
template RPoly Model::evaluate<RPoly>(const std::vector<RPoly>&, const std::vector<RPoly>&) const;

namespace {

void check_point(const Model& m, const PhasePoint& p) {
    if (p.x.size() != m.dim() || p.xi.size() != m.dim())
        throw std::invalid_argument("phase point dimension does not match model");
}

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

} // namespace

double eval_h(const Model& m, const PhasePoint& p) {
    check_point(m, p);
    return m.evaluate(to_std(p.x), to_std(p.xi));
}

Gradient grad(const Model& m, const PhasePoint& p) {
    check_point(m, p);
    const int n = m.dim();
    if (!m.is_builtin()) {
        const auto& g = std::get<Generic>(m.family());
        if (!g.grad) return fd_grad(m, p);
        Gradient out{Vec(n), Vec(n)};
        g.grad(p.x, p.xi, out.gx, out.gxi);
        return out;
    }
    if (2 * n > Dual::kMax) throw InvalidModel("dimension too large for forward-mode gradients");
    std::vector<Dual> x(n), xi(n);
    for (int i = 0; i < n; ++i) {
        x[i] = Dual::variable(p.x[i], i, 2 * n);
        xi[i] = Dual::variable(p.xi[i], n + i, 2 * n);
    }
    const Dual h = m.evaluate(x, xi);
    Gradient out{Vec(n), Vec(n)};
    for (int i = 0; i < n; ++i) {
        out.gx[i] = h.d(i);
        out.gxi[i] = h.d(n + i);
    }
    return out;
}

Gradient fd_grad(const Model& m, const PhasePoint& p) {
    check_point(m, p);
    const int n = m.dim();
    std::vector<double> z(2 * n);
    for (int i = 0; i < n; ++i) {
        z[i] = p.x[i];
        z[n + i] = p.xi[i];
    }
    auto f = [&](const std::vector<double>& w) {
        std::vector<double> x(w.begin(), w.begin() + n), xi(w.begin() + n, w.end());
        return m.evaluate(x, xi);
    };
    auto d4 = [&](int k, double h) {
        std::vector<double> w = z;
        auto at = [&](double t) {
            w[k] = z[k] + t;
            return f(w);
        };
        return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    };
    Gradient out{Vec(n), Vec(n)};
    for (int k = 0; k < 2 * n; ++k) {
        const double h = 1e-4 * (1.0 + std::abs(z[k]));
        const double d1 = d4(k, h), d2 = d4(k, 0.5 * h);
        const double d = (16.0 * d2 - d1) / 15.0;
        if (k < n)
            out.gx[k] = d;
        else
            out.gxi[k - n] = d;
    }
    return out;
}

Mat hessian(const Model& m, const PhasePoint& p) {
    check_point(m, p);
    const int n = m.dim();
    Mat H(2 * n, 2 * n);
    if (m.is_builtin()) {
        auto basis = MonomialBasis::get(2 * n, 2);
        std::vector<RPoly> x, xi;
        for (int i = 0; i < n; ++i) {
            x.push_back(RPoly::variable(basis, i, p.x[i]));
            xi.push_back(RPoly::variable(basis, n + i, p.xi[i]));
        }
        const RPoly h = m.evaluate(x, xi);
        for (int i = 0; i < 2 * n; ++i)
            for (int j = i; j < 2 * n; ++j) {
                MultiIndex a(2 * n, 0);
                a[i] += 1;
                a[j] += 1;
                const double c = h.coeff(a);
                H(i, j) = H(j, i) = (i == j) ? 2.0 * c : c;
            }
        return H;
    }
    // central differences of the gradient
    for (int k = 0; k < 2 * n; ++k) {
        PhasePoint a = p, b = p;
        double& za = k < n ? a.x[k] : a.xi[k - n];
        double& zb = k < n ? b.x[k] : b.xi[k - n];
        const double h = 1e-4 * (1.0 + std::abs(za));
        za += h;
        zb -= h;
        const Gradient ga = grad(m, a), gb = grad(m, b);
        for (int i = 0; i < n; ++i) {
            H(i, k) = (ga.gx[i] - gb.gx[i]) / (2 * h);
            H(n + i, k) = (ga.gxi[i] - gb.gxi[i]) / (2 * h);
        }
    }
    return 0.5 * (H + H.transpose());
}

HomogeneityReport check_homogeneity(const Model& m, int sample_count, const std::vector<double>& scales, double r0,
                                    double tol, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> radius(1.0, 3.0);
    std::uniform_real_distribution<double> mom(-0.5, 0.5);
    const int n = m.dim();
    HomogeneityReport rep;
    rep.tolerance = tol;
    for (int s = 0; s < sample_count; ++s) {
        PhasePoint p{Vec(n), Vec(n)};
        for (int i = 0; i < n; ++i) p.x[i] = gauss(rng);
        p.x *= (r0 + radius(rng)) / p.x.norm();
        for (int i = 0; i < n; ++i) p.xi[i] = mom(rng);
        double h0;
        try {
            h0 = eval_h(m, p);
        } catch (const EvaluationAtSingularity&) {
            continue;
        }
        bool used = false;
        for (double lam : scales) {
            PhasePoint q{lam * p.x, p.xi};
            if (q.x.norm() <= r0) continue;
            try {
                rep.max_deviation = std::max(rep.max_deviation, std::abs(eval_h(m, q) - h0));
                used = true;
            } catch (const EvaluationAtSingularity&) {
            }
        }
        if (used) ++rep.samples_used;
    }
    rep.pass = rep.samples_used > 0 && rep.max_deviation < tol;
    return rep;
}

Model degree_zero_form(const Model& m) {
    if (const auto* r3 = std::get_if<Riema3>(&m.family()))
        return Model(Homogenized{std::make_shared<const Model>(m), 2.0 / (2.0 - r3->kappa)});
    if (std::holds_alternative<Riema2>(m.family())) return Model(Homogenized{std::make_shared<const Model>(m), 0.5});
    if (const auto* sp = std::get_if<Spiral>(&m.family())) return Model(SpiralConjugate{sp->f, sp->c});
    return m;
}

} // namespace chanflow
