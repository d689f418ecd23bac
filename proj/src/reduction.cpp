#include "chanflow/reduction.hpp"
#include "chanflow/scalar.hpp"

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/factorials.hpp>

#include <cmath>
#include <limits>

namespace chanflow {

namespace {

double safe_norm(const Vec& F) {
    double r = F.lpNorm<Eigen::Infinity>();
    return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
}

} // namespace

Vec channel_residual(const Model& m, double E, const Vec& omega, const Vec& xi, double k) {
    const int n = m.dim();
    PhasePoint p{omega, xi};
    const Gradient g = grad(m, p);
    Vec F(2 * n + 2);
    F[0] = eval_h(m, p) - E;
    F.segment(1, n) = g.gx;
    F.segment(1 + n, n) = g.gxi - k * omega;
    F[2 * n + 1] = omega.squaredNorm() - 1.0;
    return F;
}

ChannelPoint find_channel_point(const Model& m, double E, const ChannelGuess& guess, const NewtonOptions& opt) {
    const int n = m.dim();
    if (guess.omega.size() != n || guess.xi.size() != n) throw std::invalid_argument("channel guess has wrong dimension");
    Vec z(2 * n + 1);
    z << guess.omega, guess.xi, guess.k;

    auto residual = [&](const Vec& v) -> Vec {
        try {
            return channel_residual(m, E, v.head(n), v.segment(n, n), v[2 * n]);
        } catch (const EvaluationAtSingularity&) {
            return Vec::Constant(2 * n + 2, std::numeric_limits<double>::infinity());
        }
    };

    Vec F = residual(z);
    double fn = safe_norm(F);
    if (!std::isfinite(fn)) throw NewtonDiverged("channel equations cannot be evaluated at the initial guess");
    int it = 0;
    for (; it < opt.max_iter && fn >= opt.tol; ++it) {
        const Vec omega = z.head(n), xi = z.segment(n, n);
        const double k = z[2 * n];
        const PhasePoint p{omega, xi};
        const Gradient g = grad(m, p);
        const Mat H = hessian(m, p);
        Mat J = Mat::Zero(2 * n + 2, 2 * n + 1);
        J.block(0, 0, 1, n) = g.gx.transpose();
        J.block(0, n, 1, n) = g.gxi.transpose();
        J.block(1, 0, n, 2 * n) = H.topRows(n);
        J.block(1 + n, 0, n, 2 * n) = H.bottomRows(n);
        J.block(1 + n, 0, n, n) -= k * Mat::Identity(n, n);
        J.block(1 + n, 2 * n, n, 1) = -omega;
        J.block(2 * n + 1, 0, 1, n) = 2.0 * omega.transpose();

        const Vec step = -Eigen::CompleteOrthogonalDecomposition<Mat>(J).solve(F);
        if (!step.allFinite()) throw NewtonDiverged("non-finite Newton step");
        double t = 1.0;
        bool accepted = false;
        for (int hv = 0; hv <= opt.max_halvings; ++hv, t *= 0.5) {
            const Vec zt = z + t * step;
            const Vec Ft = residual(zt);
            const double ft = safe_norm(Ft);
            if (ft < fn) {
                z = zt;
                F = Ft;
                fn = ft;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (fn < 100 * opt.tol) break;
            throw NewtonDiverged("line search failed at residual " + std::to_string(fn));
        }
    }
    if (fn >= opt.tol && !(fn < 100 * opt.tol))
        throw NewtonDiverged("no convergence after " + std::to_string(it) + " iterations, residual " + std::to_string(fn));

    ChannelPoint c;
    c.E = E;
    c.omega = z.head(n).normalized();
    c.xi = z.segment(n, n);
    c.k = z[2 * n];
    c.iterations = it;
    if (!(c.k > 0.0)) throw NonTransversal("k = " + std::to_string(c.k) + " <= 0 at E = " + std::to_string(E));
    c.residual = safe_norm(channel_residual(m, E, c.omega, c.xi, c.k));
    return c;
}

namespace {

double angle_guess_trig(const TrigPoly& V, double E) {
    // critical points of V: prefer V'' < 0 below the energy, then any below the energy
    const int N = 4096;
    std::vector<double> roots;
    for (int i = 0; i < N; ++i) {
        double a = 2 * M_PI * i / N, b = 2 * M_PI * (i + 1) / N;
        double fa = V.derivative(a, 1), fb = V.derivative(b, 1);
        if (fa == 0.0) {
            roots.push_back(a);
            continue;
        }
        if (fa * fb < 0) {
            for (int j = 0; j < 60; ++j) {
                double mid = 0.5 * (a + b), fm = V.derivative(mid, 1);
                if (fa * fm <= 0) {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
    }
    for (double t : roots)
        if (V.derivative(t, 2) < 0 && V(t) < E) return t;
    for (double t : roots)
        if (V(t) < E) return t;
    return 0.0;
}

double spiral_root_guess(const TrigPoly& f, double c) {
    const double target = 2 * c / (1 + c * c);
    const int N = 4096;
    for (int i = 0; i < N; ++i) {
        double a = 2 * M_PI * i / N, b = 2 * M_PI * (i + 1) / N;
        double fa = -f.derivative(a, 1) - target, fb = -f.derivative(b, 1) - target;
        if (fa == 0.0 || fa * fb < 0) return a;
    }
    return 0.0;
}

} // namespace

ChannelGuess default_guess(const Model& m, double E, std::optional<double> theta0) {
    const int n = m.dim();
    ChannelGuess g;
    g.omega = Vec::Zero(n);
    g.omega[0] = 1.0;
    const double p = std::sqrt(2 * std::max(E, 1e-300));
    g.xi = p * g.omega;
    g.k = p;
    const Family& fam = m.family();
    if (const auto* ms = std::get_if<MorseSphere>(&fam)) {
        double V0 = 0.0;
        if (ms->local) {
            g.omega = ms->omega;
            V0 = ms->V0;
        } else {
            const double th = theta0 ? *theta0 : angle_guess_trig(ms->V, E);
            g.omega = Vec(2);
            g.omega << std::cos(th), std::sin(th);
            V0 = ms->V(th);
        }
        g.k = std::sqrt(2 * std::max(E - V0, 1e-12));
        g.xi = g.k * g.omega;
    } else if (const auto* sc = std::get_if<SpiralConjugate>(&fam)) {
        const double th = theta0 ? *theta0 : spiral_root_guess(sc->f, sc->c);
        Vec rh(2), ah(2);
        rh << std::cos(th), std::sin(th);
        ah << -std::sin(th), std::cos(th);
        const double c = sc->c;
        const double f0 = sc->f(th);
        const double rho = std::sqrt(2 * E * std::exp(-f0) / (1 + c * c));
        g.omega = rh;
        g.xi = rho * ((1 + c * c) * rh + c * ah);
        g.k = std::exp(f0) * rho;
    } else if (const auto* hz = std::get_if<Homogenized>(&fam)) {
        if (theta0 && n == 2) g.omega << std::cos(*theta0), std::sin(*theta0);
        g.xi = hz->s * p * g.omega;
        g.k = p / hz->s;
    } else if (theta0 && n == 2) {
        g.omega << std::cos(*theta0), std::sin(*theta0);
        g.xi = p * g.omega;
    }
    return g;
}

ChannelCurve continue_channel(const Model& m, double E0, double E1, const ChannelGuess& seed, int steps,
                              const NewtonOptions& opt) {
    if (steps < 1) throw std::invalid_argument("continue_channel needs steps >= 1");
    ChannelCurve curve;
    double last_good = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i <= steps; ++i) {
        const double E = E0 + (E1 - E0) * i / steps;
        ChannelGuess g = seed;
        const auto& P = curve.points;
        if (P.size() == 1) {
            g = {P[0].omega, P[0].xi, P[0].k};
            // free-particle style scaling of momentum with the energy
            if (P[0].E > 0 && E > 0) {
                const double s = std::sqrt(E / P[0].E);
                g.xi *= s;
            }
        } else if (P.size() >= 2) {
            const auto& a = P[P.size() - 2];
            const auto& b = P.back();
            const double t = (E - b.E) / (b.E - a.E);
            g.omega = (b.omega + t * (b.omega - a.omega)).normalized();
            g.xi = b.xi + t * (b.xi - a.xi);
            g.k = b.k + t * (b.k - a.k);
        }
        try {
            ChannelPoint c = find_channel_point(m, E, g, opt);
            if (!P.empty() && (c.omega - P.back().omega).norm() >= 0.2)
                throw BranchLost("direction jumped by " + std::to_string((c.omega - P.back().omega).norm()), last_good);
            curve.points.push_back(std::move(c));
            last_good = E;
        } catch (const BranchLost&) {
            throw;
        } catch (const Error& e) {
            throw BranchLost(std::string("continuation failed at E = ") + std::to_string(E) + " (" + e.what() + ")",
                             last_good);
        }
    }
    return curve;
}

Frame make_frame(const Vec& omega) {
    const int n = static_cast<int>(omega.size());
    const Vec w = omega.normalized();
    Mat B(n, n);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::vector<Vec> acc{w};
    for (int col = 0; col < n - 1; ++col) {
        // pivot: the standard vector with the largest remaining component
        int best = -1;
        double best_norm = -1;
        Vec best_v;
        for (int j = 0; j < n; ++j) {
            if (used[j]) continue;
            Vec v = Vec::Unit(n, j);
            for (const Vec& a : acc) v -= a.dot(v) * a;
            for (const Vec& a : acc) v -= a.dot(v) * a;
            const double nv = v.norm();
            if (nv > best_norm + 1e-12) {
                best_norm = nv;
                best = j;
                best_v = v;
            }
        }
        used[best] = true;
        best_v /= best_norm;
        B.col(col) = best_v;
        acc.push_back(best_v);
    }
    B.col(n - 1) = w;
    return Frame{B};
}

Frame make_frame(const Vec& omega, const Frame& previous) {
    const int n = static_cast<int>(omega.size());
    const Vec w = omega.normalized();
    Mat B(n, n);
    std::vector<Vec> acc{w};
    for (int col = 0; col < n - 1; ++col) {
        Vec v = previous.basis.col(col);
        for (const Vec& a : acc) v -= a.dot(v) * a;
        for (const Vec& a : acc) v -= a.dot(v) * a;
        const double nv = v.norm();
        if (nv < 1e-6) return make_frame(omega);
        v /= nv;
        if (v.dot(previous.basis.col(col)) < 0) v = -v;
        B.col(col) = v;
        acc.push_back(v);
    }
    B.col(n - 1) = w;
    return Frame{B};
}

std::vector<Frame> build_frame(const ChannelCurve& curve) {
    std::vector<Frame> out;
    for (const auto& p : curve.points) out.push_back(out.empty() ? make_frame(p.omega) : make_frame(p.omega, out.back()));
    return out;
}

double solve_mu(const Model& m, const ChannelPoint& c, const Frame& f, const Vec& u, const Vec& eta,
                const ReductionOptions& opt) {
    const int n = m.dim();
    if (u.size() != n - 1 || eta.size() != n - 1) throw std::invalid_argument("solve_mu: wrong transverse dimension");
    const double wn = std::sqrt(u.squaredNorm() + eta.squaredNorm());
    if (!(wn <= opt.radius)) throw ImplicitSolveFailed("|w| = " + std::to_string(wn) + " outside chart radius");
    const Mat P = f.transverse();
    const Vec omega = f.direction();
    const Vec x = omega + P * u;
    const Vec base = c.xi + P * eta;
    double mu = 0.0;
    const double tol = opt.mu_tol * (1.0 + std::abs(c.E));
    for (int it = 0; it < opt.mu_max_iter; ++it) {
        double h, dh;
        if (m.is_builtin()) {
            std::vector<Dual> xd(n), pd(n);
            const Dual md = Dual::variable(mu, 0, 1);
            for (int i = 0; i < n; ++i) {
                xd[i] = Dual(x[i]);
                pd[i] = base[i] + md * omega[i];
            }
            const Dual hv = m.evaluate(xd, pd);
            h = hv.value();
            dh = hv.d(0);
        } else {
            PhasePoint p{x, base + mu * omega};
            h = eval_h(m, p);
            dh = grad(m, p).gxi.dot(omega);
        }
        const double r = h - c.E;
        if (!std::isfinite(r) || !(dh > 0.0))
            throw ImplicitSolveFailed("non-transversal implicit solve (d_mu h = " + std::to_string(dh) + ")");
        const double step = r / dh;
        mu -= step;
        if (std::abs(r) < tol && std::abs(step) < 1e-14 * (1.0 + std::abs(mu))) return mu;
        if (std::abs(mu) > 1e3 * (1.0 + c.k)) break;
    }
    throw ImplicitSolveFailed("implicit solve for mu did not converge");
}

RPoly taylor_g(const Model& m, const ChannelPoint& c, const Frame& f, int order, const ReductionOptions& opt) {
    if (!m.is_builtin()) return taylor_g_fd(m, c, f, order, opt);
    const int n = m.dim(), d = n - 1;
    auto basis = MonomialBasis::get(2 * d, order);
    const Mat P = f.transverse();
    const Vec omega = f.direction();
    std::vector<RPoly> x(n, RPoly(basis)), base(n, RPoly(basis));
    for (int i = 0; i < n; ++i) {
        x[i] = RPoly(basis, omega[i]);
        base[i] = RPoly(basis, c.xi[i]);
        for (int j = 0; j < d; ++j) {
            x[i][basis->variable(j)] = P(i, j);
            base[i][basis->variable(d + j)] = P(i, j);
        }
    }
    RPoly mu(basis);
    std::vector<RPoly> xi(n, RPoly(basis));
    // each sweep fixes one more degree since ∂_μh − k vanishes at the origin
    for (int it = 0; it <= order + 1; ++it) {
        for (int i = 0; i < n; ++i) xi[i] = base[i] + mu * omega[i];
        RPoly H = m.evaluate(x, xi);
        H[0] -= c.E;
        mu -= H * (1.0 / c.k);
        if (H.max_abs() < 1e-15 * (1.0 + std::abs(c.E))) break;
    }
    return -mu;
}

RPoly taylor_g_fd(const Model& m, const ChannelPoint& c, const Frame& f, int order, const ReductionOptions& opt) {
    const int n = m.dim(), d = n - 1, D = 2 * d;
    auto basis = MonomialBasis::get(D, order);
    RPoly g(basis);
    auto gval = [&](const Vec& w) { return -solve_mu(m, c, f, w.head(d), w.tail(d), opt); };

    for (std::size_t idx = 0; idx < basis->size(); ++idx) {
        const MultiIndex& a = basis->exponent(idx);
        const int p = basis->total_degree(idx);
        if (p == 0) {
            g[idx] = gval(Vec::Zero(D));
            continue;
        }
        // tensor product of central p_i-th difference stencils (nodes at (p_i/2 − j) h)
        auto estimate = [&](double h) {
            std::vector<int> dims;
            for (int i = 0; i < D; ++i)
                if (a[i]) dims.push_back(i);
            std::vector<int> j(dims.size(), 0);
            double sum = 0.0;
            while (true) {
                Vec w = Vec::Zero(D);
                double wt = 1.0;
                for (std::size_t q = 0; q < dims.size(); ++q) {
                    const int pi = a[dims[q]];
                    w[dims[q]] = (0.5 * pi - j[q]) * h;
                    wt *= ((j[q] % 2) ? -1.0 : 1.0) *
                          boost::math::binomial_coefficient<double>(static_cast<unsigned>(pi), static_cast<unsigned>(j[q]));
                }
                sum += wt * gval(w);
                std::size_t q = 0;
                for (; q < dims.size(); ++q) {
                    if (++j[q] <= a[dims[q]]) break;
                    j[q] = 0;
                }
                if (q == dims.size()) break;
            }
            double fact = 1.0;
            for (int i = 0; i < D; ++i) fact *= boost::math::factorial<double>(static_cast<unsigned>(a[i]));
            return sum / (std::pow(h, p) * fact);
        };
        const double h0 = 2.0 * std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (p + 4));
        const double e1 = estimate(h0), e2 = estimate(0.5 * h0), e3 = estimate(0.25 * h0);
        const double r1 = (4 * e2 - e1) / 3, r2 = (4 * e3 - e2) / 3;
        const double best = (16 * r2 - r1) / 15;
        // error estimate of the last extrapolation stage
        const double disagreement = std::abs(best - r2);
        if (disagreement > 1e-6 * std::max(1.0, std::abs(best)))
            throw JetIllConditioned("Richardson disagreement " + std::to_string(disagreement) + " at multi-index " +
                                    multi_index_key(a));
        g[idx] = best;
    }
    return g;
}

Mat hessian_from_taylor(const RPoly& g) {
    const int D = g.dim();
    Mat A(D, D);
    for (int i = 0; i < D; ++i)
        for (int j = i; j < D; ++j) {
            MultiIndex a(static_cast<std::size_t>(D), 0);
            a[i] += 1;
            a[j] += 1;
            const double v = g.coeff(a);
            A(i, j) = A(j, i) = (i == j) ? 2 * v : v;
        }
    return A;
}

Mat matrix_B(const Mat& A) {
    const int D = static_cast<int>(A.rows());
    if (D % 2 || A.cols() != D) throw std::invalid_argument("matrix_B: A must be square of even size");
    const int d = D / 2;
    Mat J = Mat::Zero(D, D);
    J.block(0, d, d, d) = Mat::Identity(d, d);
    J.block(d, 0, d, d) = -Mat::Identity(d, d);
    Mat B = J * A;
    B.block(0, 0, d, d) -= Mat::Identity(d, d);
    return B;
}

LocalModel build_local_model(const Model& m, const ChannelPoint& c, const Frame& f, int order,
                             const ReductionOptions& opt) {
    if (order < 2) throw std::invalid_argument("build_local_model needs order >= 2");
    LocalModel lm{m, c, f, taylor_g(m, c, f, order, opt), Mat(), Mat(), opt};
    lm.A = hessian_from_taylor(lm.g_taylor);
    lm.B = matrix_B(lm.A);
    return lm;
}

Vec reduced_field(const LocalModel& lm, const Vec& w) {
    const int d = lm.dim() / 2;
    const Vec u = w.head(d), eta = w.tail(d);
    const PhasePoint p = from_chart(lm, w, 1.0);
    const Gradient g = grad(lm.model, p);
    const Mat P = lm.frame.transverse();
    const double dmu = g.gxi.dot(lm.frame.direction());
    Vec out(2 * d);
    out.head(d) = P.transpose() * g.gxi / dmu - u;
    out.tail(d) = -(P.transpose() * g.gx) / dmu;
    return out;
}

Mat reduced_jacobian_fd(const LocalModel& lm, const Vec& w, double h) {
    const int D = lm.dim();
    Mat J(D, D);
    for (int k = 0; k < D; ++k) {
        Vec a = w, b = w;
        a[k] += h;
        b[k] -= h;
        J.col(k) = (reduced_field(lm, a) - reduced_field(lm, b)) / (2 * h);
    }
    return J;
}

std::vector<RPoly> field_taylor(const RPoly& g, int order) {
    const int D = g.dim(), d = D / 2;
    if (g.degree() < order + 1) throw std::invalid_argument("field_taylor: g degree too low for requested order");
    auto basis = MonomialBasis::get(D, order);
    std::vector<RPoly> F;
    for (int j = 0; j < d; ++j) {
        RPoly fu = g.derivative(d + j).rebased(basis);
        fu[basis->variable(j)] -= 1.0;
        F.push_back(fu);
    }
    for (int j = 0; j < d; ++j) F.push_back(-g.derivative(j).rebased(basis));
    return F;
}

ChartPoint to_chart(const LocalModel& lm, const PhasePoint& p) {
    const Vec omega = lm.frame.direction();
    const double xn = omega.dot(p.x);
    if (!(xn > 0)) throw ChartExit("x_n <= 0: point is not in the channel chart");
    const Mat P = lm.frame.transverse();
    ChartPoint c;
    c.xn = xn;
    c.tau = std::log(xn);
    const int d = lm.dim() / 2;
    c.w.resize(2 * d);
    c.w.head(d) = P.transpose() * p.x / xn;
    c.w.tail(d) = P.transpose() * (p.xi - lm.channel.xi);
    return c;
}

PhasePoint from_chart(const LocalModel& lm, const Vec& w, double xn) {
    const int d = lm.dim() / 2;
    const Vec u = w.head(d), eta = w.tail(d);
    const double mu = solve_mu(lm.model, lm.channel, lm.frame, u, eta, lm.options);
    const Mat P = lm.frame.transverse();
    const Vec omega = lm.frame.direction();
    return PhasePoint{xn * (omega + P * u), lm.channel.xi + P * eta + mu * omega};
}

double mu_derivative(const LocalModel& lm, const PhasePoint& p) {
    return grad(lm.model, p).gxi.dot(lm.frame.direction());
}

} // namespace chanflow
