#include "chanflow/geometry.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <random>

namespace chanflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Ω for ω = Σ dξ_j ∧ dx_j in the antisymmetric-matrix convention used for dθ
Mat omega_matrix(int n) {
    Mat O = Mat::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        O(j, n + j) = -1.0;
        O(n + j, j) = 1.0;
    }
    return O;
}

// i_v ω = Σ (v_ξ dx − v_x dξ)
Vec contract(const ScalingField& v, const Vec& z) {
    const int n = static_cast<int>(z.size()) / 2;
    const Vec f = apply_field(v, z);
    Vec th(2 * n);
    th.head(n) = f.tail(n);
    th.tail(n) = -f.head(n);
    return th;
}

Vec hamilton_field(const Model& m, const Vec& z) {
    const int n = m.dim();
    const Gradient g = grad(m, PhasePoint{z.head(n), z.tail(n)});
    Vec vh(2 * n);
    vh.head(n) = g.gxi;
    vh.tail(n) = -g.gx;
    return vh;
}

struct Sampler {
    std::mt19937_64 rng;
    int n;
    PhasePoint next() {
        std::uniform_real_distribution<double> u(-1.0, 1.0), r(1.0, 3.0);
        Vec x(n), xi(n);
        for (int i = 0; i < n; ++i) x(i) = u(rng), xi(i) = u(rng);
        if (x.norm() < 1e-3) x(0) = 1.0;
        x *= r(rng) / x.norm();
        return {x, xi};
    }
};

double spot_check(const Model& m, double k1, double k2, unsigned long long seed) {
    Sampler smp{std::mt19937_64(seed), m.dim()};
    const double lams[] = {0.5, 2.0, 3.0};
    double worst = 0.0;
    int used = 0;
    for (int trial = 0; trial < 64 && used < 16; ++trial) {
        const PhasePoint p = smp.next();
        try {
            const double h0 = eval_h(m, p);
            for (double l1 : lams)
                for (double l2 : lams) {
                    const double lhs = eval_h(m, PhasePoint{l1 * p.x, l2 * p.xi});
                    const double rhs = std::pow(l1, k1) * std::pow(l2, k2) * h0;
                    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
                }
            ++used;
        } catch (const EvaluationAtSingularity&) {
        }
    }
    if (used == 0) throw HomogeneityPreconditionFailed("no regular sample points for the homogeneity spot check");
    return worst;
}

HomogenizeResult finish(const Model& m, double s, double dev, unsigned long long seed) {
    if (dev > 1e-8)
        throw HomogeneityPreconditionFailed("scaling relation violated by " + std::to_string(dev));
    auto inner = std::make_shared<const Model>(m);
    Model ht(Homogenized{inner, s});
    HomogenizeResult r{ht, s, dev, check_homogeneity(ht, 64, {0.5, 2.0, 10.0}, 0.0, 1e-8, seed)};
    return r;
}

} // namespace

std::string field_name(const ScalingField& v) {
    return std::visit(overloaded{
                          [](const EulerField&) { return std::string("euler"); },
                          [](const PhaseScalingField& f) { return "phase_scaling(s=" + std::to_string(f.s) + ")"; },
                          [](const SpiralField& f) { return "spiral(c=" + std::to_string(f.c) + ")"; },
                      },
                      v);
}

Mat field_matrix(const ScalingField& v, int n) {
    Mat M = Mat::Zero(2 * n, 2 * n);
    std::visit(overloaded{
                   [&](const EulerField&) { M.topLeftCorner(n, n).setIdentity(); },
                   [&](const PhaseScalingField& f) {
                       M.topLeftCorner(n, n) = f.s * Mat::Identity(n, n);
                       M.bottomRightCorner(n, n) = (1.0 - f.s) * Mat::Identity(n, n);
                   },
                   [&](const SpiralField& f) {
                       if (n != 2) throw std::invalid_argument("spiral field needs n = 2");
                       M(0, 0) = 1.0, M(0, 1) = -f.c;
                       M(1, 0) = f.c, M(1, 1) = 1.0;
                       M(2, 3) = -f.c;
                       M(3, 2) = f.c;
                   },
               },
               v);
    return M;
}

Vec apply_field(const ScalingField& v, const Vec& z) {
    return field_matrix(v, static_cast<int>(z.size()) / 2) * z;
}

AlphaEstimate lie_derivative_alpha(const ScalingField& v, const Vec& z, double step) {
    const int N = static_cast<int>(z.size()), n = N / 2;
    const double h = step * (1.0 + z.norm());
    Mat Jt(N, N); // Jt(a, b) = ∂_a θ_b
    for (int a = 0; a < N; ++a) {
        Vec zp = z, zm = z;
        zp(a) += h;
        zm(a) -= h;
        Jt.row(a) = ((contract(v, zp) - contract(v, zm)) / (2 * h)).transpose();
    }
    const Mat W = Jt - Jt.transpose();
    const Mat O = omega_matrix(n);
    AlphaEstimate e;
    e.alpha = (W.array() * O.array()).sum() / O.squaredNorm();
    e.residual = (W - e.alpha * O).norm();
    return e;
}

std::vector<AlphaEstimate> lie_derivative_alpha(const ScalingField& v, const std::vector<Vec>& points, double step) {
    std::vector<AlphaEstimate> out;
    out.reserve(points.size());
    for (const auto& z : points) out.push_back(lie_derivative_alpha(v, z, step));
    return out;
}

CommutatorReport commutator_check(const ScalingField& v, const Model& m, const std::vector<PhasePoint>& points,
                                  double vh_tol) {
    CommutatorReport rep;
    rep.vh_tol = vh_tol;
    const int n = m.dim();
    for (const auto& p : points) {
        Vec z(2 * n);
        z << p.x, p.xi;
        const Gradient g = grad(m, p);
        Vec dh(2 * n);
        dh << g.gx, g.gxi;
        const Vec vz = apply_field(v, z);
        CommutatorPoint cp;
        cp.vh = std::abs(vz.dot(dh)) / std::max(vz.norm() * dh.norm(), 1e-300);
        rep.max_vh = std::max(rep.max_vh, cp.vh);
        if (cp.vh > vh_tol) {
            cp.skipped = true;
            rep.vh_violated = true;
            rep.points.push_back(cp);
            continue;
        }
        const Vec vh = hamilton_field(m, z);
        const double e1 = 1e-4 * (1.0 + z.norm()) / std::max(vz.norm(), 1e-300);
        const Vec dvh_v = (hamilton_field(m, z + e1 * vz) - hamilton_field(m, z - e1 * vz)) / (2 * e1);
        const double e2 = 1e-4 * (1.0 + z.norm()) / std::max(vh.norm(), 1e-300);
        const Vec dv_vh = (apply_field(v, z + e2 * vh) - apply_field(v, z - e2 * vh)) / (2 * e2);
        cp.alpha = lie_derivative_alpha(v, z).alpha;
        cp.residual = (dvh_v - dv_vh + cp.alpha * vh).norm() / std::max(vh.norm(), 1e-300);
        rep.max_residual = std::max(rep.max_residual, cp.residual);
        rep.points.push_back(cp);
    }
    return rep;
}

FlowFactor conformal_flow_factor(const ScalingField& v, const Vec& z, double t, unsigned long long seed) {
    const int N = static_cast<int>(z.size()), n = N / 2;
    const Mat M = field_matrix(v, n);
    const Mat J = (t * M).exp();
    const Mat O = omega_matrix(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec a(N), b(N);
    double base = 0.0;
    do {
        for (int i = 0; i < N; ++i) a(i) = u(rng), b(i) = u(rng);
        base = a.dot(O * b);
    } while (std::abs(base) < 0.1);
    FlowFactor f;
    f.measured = (J * a).dot(O * (J * b)) / base;
    auto alpha_at = [&](double s) { return lie_derivative_alpha(v, Vec((s * M).exp() * z)).alpha; };
    const double integral =
        t == 0.0 ? 0.0 : boost::math::quadrature::gauss<double, 15>::integrate(alpha_at, std::min(0.0, t), std::max(0.0, t)) *
                             (t < 0 ? -1.0 : 1.0);
    f.predicted = std::exp(integral);
    f.rel_error = std::abs(f.measured - f.predicted) / std::abs(f.predicted);
    return f;
}

HomogenizeResult homogenize_two_param(const Model& m, double kappa1, double kappa2, unsigned long long seed) {
    if (kappa2 == 0.0) throw HomogeneityPreconditionFailed("kappa2 must be non-zero");
    if (kappa1 == kappa2) throw HomogeneityPreconditionFailed("kappa1 must differ from kappa2");
    const double dev = spot_check(m, kappa1, kappa2, seed);
    return finish(m, kappa2 / (kappa2 - kappa1), dev, seed);
}

HomogenizeResult homogenize_joint(const Model& m, unsigned long long seed) {
    Sampler smp{std::mt19937_64(seed), m.dim()};
    double worst = 0.0;
    int used = 0;
    for (int trial = 0; trial < 64 && used < 16; ++trial) {
        const PhasePoint p = smp.next();
        try {
            const double h0 = eval_h(m, p);
            for (double l : {0.5, 2.0, 3.0})
                worst = std::max(worst, std::abs(eval_h(m, PhasePoint{l * p.x, l * p.xi}) - h0) / (1.0 + std::abs(h0)));
            ++used;
        } catch (const EvaluationAtSingularity&) {
        }
    }
    if (used == 0) throw HomogeneityPreconditionFailed("no regular sample points for the joint scaling check");
    return finish(m, 0.5, worst, seed);
}

std::pair<double, double> riema3_reference_eigenvalues(double b, double kappa, double E) {
    const double pre = -(2.0 - kappa) / 4.0 * std::sqrt(2.0 * E);
    const double disc = 1.0 - 8.0 * kappa * (b - 1.0) / ((2.0 - kappa) * (2.0 - kappa));
    if (disc < 0) throw std::domain_error("complex reference eigenvalues");
    const double r = std::sqrt(disc);
    return {pre * (1.0 + r), pre * (1.0 - r)};
}

SpiralReport spiral_analysis(const TrigPoly& f, double c, double E) {
    if (f.is_constant()) throw InvalidModel("spiral analysis needs a non-constant f");
    if (!(c > 0)) throw InvalidModel("spiral analysis needs c > 0");
    if (!(E > 0)) throw InvalidModel("spiral analysis needs E > 0");
    const double two_pi = boost::math::constants::two_pi<double>();
    const double target = 2.0 * c / (1.0 + c * c);
    auto F = [&](double th) { return -f.derivative(th, 1) - target; };
    auto dF = [&](double th) { return -f.derivative(th, 2); };

    const int K = 4096;
    std::vector<double> grid(K + 1), val(K + 1);
    for (int i = 0; i <= K; ++i) grid[i] = two_pi * i / K, val[i] = F(grid[i]);
    std::vector<std::pair<double, bool>> roots; // θ, tangential
    auto add = [&](double th, bool tangential) {
        th = std::fmod(th, two_pi);
        if (th < 0) th += two_pi;
        for (const auto& r : roots) {
            const double d = std::abs(r.first - th);
            if (std::min(d, two_pi - d) < 1e-9) return;
        }
        roots.emplace_back(th, tangential);
    };
    for (int i = 0; i < K; ++i) {
        const double a = val[i], b = val[i + 1];
        if (a == 0.0) {
            add(grid[i], std::abs(dF(grid[i])) < 1e-8);
            continue;
        }
        if (a * b < 0) {
            boost::uintmax_t it = 100;
            auto r = boost::math::tools::toms748_solve(F, grid[i], grid[i + 1], a, b,
                                                       boost::math::tools::eps_tolerance<double>(52), it);
            double th = 0.5 * (r.first + r.second);
            for (int k = 0; k < 3; ++k) {
                const double d = dF(th);
                if (d == 0.0) break;
                const double nt = th - F(th) / d;
                if (nt < grid[i] || nt > grid[i + 1]) break;
                th = nt;
            }
            add(th, std::abs(dF(th)) < 1e-8);
            continue;
        }
        // local minimum of |F| without sign change: polish an extremum of F and accept double roots
        const double prev = val[(i + K - 1) % K];
        if (std::abs(a) <= std::abs(prev) && std::abs(a) <= std::abs(b) && std::abs(a) < 1e-4) {
            double th = grid[i];
            for (int k = 0; k < 50; ++k) {
                const double d2 = -f.derivative(th, 3);
                if (d2 == 0.0) break;
                const double step = dF(th) / d2;
                th -= step;
                if (std::abs(step) < 1e-15) break;
            }
            if (std::abs(F(th)) < 1e-10) add(th, true);
        }
    }
    std::sort(roots.begin(), roots.end());

    SpiralReport rep;
    rep.no_roots = roots.empty();
    for (const auto& [th, tangential] : roots) {
        SpiralRoot r;
        r.theta0 = th;
        r.r0 = std::exp(-th / c);
        r.f0 = f(th);
        r.f2 = f.derivative(th, 2);
        r.rho0 = std::sqrt(2.0 * E / (1.0 + c * c) * std::exp(-r.f0));
        const double disc = 1.0 - 2.0 * (1.0 + c * c) * (1.0 + c * c) * r.f2;
        const cd root = disc >= 0 ? cd(std::sqrt(disc), 0.0) : cd(0.0, std::sqrt(-disc));
        r.eig1 = -0.5 * r.rho0 * (1.0 + root);
        r.eig2 = -0.5 * r.rho0 * (1.0 - root);
        r.degenerate = tangential || std::abs(r.f2) < 1e-12;
        if (r.degenerate)
            r.cls = "degenerate";
        else if (disc < 0)
            r.cls = "stable_focus";
        else if (r.f2 < 0)
            r.cls = "saddle";
        else
            r.cls = "stable_node";
        rep.roots.push_back(r);
    }
    return rep;
}

} // namespace chanflow
