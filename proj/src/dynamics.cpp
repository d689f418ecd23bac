#include "chanflow/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace chanflow {

std::vector<double> log_spaced(double a, double b, int count) {
    if (!(a > 0) || !(b > a) || count < 2) throw std::invalid_argument("log_spaced: need 0 < a < b and count >= 2");
    std::vector<double> t(static_cast<std::size_t>(count));
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / (count - 1));
    t.front() = a;
    t.back() = b;
    return t;
}

ObservableSeries observables(const Trajectory& traj, const LocalModel& lm, const Spectrum& s,
                             const NormalFormGamma* nf) {
    ObservableSeries o;
    const std::size_t n = traj.t.size();
    for (auto* v : {&o.t, &o.tau, &o.q_s, &o.q_u, &o.q_minus, &o.q_plus, &o.gamma_abs, &o.Gamma_abs, &o.clock})
        v->reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ChartPoint cp = to_chart(lm, traj.z[i]);
        if (cp.w.norm() > lm.options.radius)
            throw ChartExit("sample at t = " + std::to_string(traj.t[i]) + " lies outside the chart");
        const CVec g = s.Tinv * cp.w.cast<cd>();
        double qs = 0, qu = 0;
        for (int k = 0; k < g.size(); ++k) (k < s.ns ? qs : qu) += std::norm(g(k));
        o.t.push_back(traj.t[i]);
        o.tau.push_back(cp.tau);
        o.q_s.push_back(qs);
        o.q_u.push_back(qu);
        o.q_minus.push_back(qu - qs);
        o.q_plus.push_back(qs + qu);
        o.gamma_abs.push_back(g.norm());
        o.Gamma_abs.push_back(nf ? std::abs(nf->gamma.evaluate(g)) : 0.0);
        o.clock.push_back(traj.t[i] * mu_derivative(lm, traj.z[i]) / cp.xn);
        o.gamma.push_back(g);
    }
    return o;
}

namespace {

struct Escape {
    double sign = 0.0;
    double magnitude = 0.0;
};

Escape escape(const LocalModel& lm, const Spectrum& s, const Vec& w0, const ShootOptions& opt) {
    const auto tr = integrate_reduced(lm, w0, 0.0, opt.tau_horizon, opt.integrate, true);
    const Vec& w = tr.w.back();
    const CVec g = s.Tinv * w.cast<cd>();
    const double comp = g(s.ns).real();
    double mag = 0.0;
    for (int k = s.ns; k < g.size(); ++k) mag = std::max(mag, std::abs(g(k)));
    // a chart exit counts as full escape in the direction of the last sample
    if (tr.exited) mag = std::numeric_limits<double>::infinity();
    return {comp >= 0 ? 1.0 : -1.0, mag};
}

} // namespace

ShootResult shoot_stable(const LocalModel& lm, const Spectrum& s, double amplitude, const ShootOptions& opt,
                         double xn0) {
    if (!(amplitude > 0)) throw std::invalid_argument("shoot_stable: amplitude must be positive");
    if (s.ns < 1) throw NoStableDirections("no stable eigenvalues to shoot along");
    Vec es = s.T.col(0).real();
    es /= es.norm();
    ShootResult r;
    if (s.nu == 0) {
        r.w0 = amplitude * es;
        r.init = from_chart(lm, r.w0, xn0);
        return r;
    }
    Vec eu = s.T.col(s.ns).real();
    if (eu.norm() < 1e-12) eu = s.T.col(s.ns).imag();
    eu /= eu.norm();

    auto at = [&](double c) { return Vec(amplitude * es + c * eu); };
    double lo = -amplitude, hi = amplitude;
    Escape elo = escape(lm, s, at(lo), opt), ehi = escape(lm, s, at(hi), opt);
    int widen = 0;
    while (elo.sign == ehi.sign) {
        if (++widen > 4) throw RefinementFailed("no sign change of the unstable component in the initial bracket");
        lo *= 0.5;
        hi *= 0.5;
        elo = escape(lm, s, at(lo), opt);
        ehi = escape(lm, s, at(hi), opt);
    }
    double mid = 0.5 * (lo + hi);
    Escape em{};
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        mid = 0.5 * (lo + hi);
        em = escape(lm, s, at(mid), opt);
        if (em.sign == elo.sign) {
            lo = mid;
            elo = em;
        } else {
            hi = mid;
            ehi = em;
        }
        if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * amplitude) break;
    }
    // the bracket endpoint with the smaller escape is the better orbit when the midpoint stalls
    if (!(em.magnitude < opt.accept * amplitude)) {
        const Escape a = escape(lm, s, at(lo), opt), b = escape(lm, s, at(hi), opt);
        if (a.magnitude < em.magnitude) mid = lo, em = a;
        if (b.magnitude < em.magnitude) mid = hi, em = b;
    }
    if (!(em.magnitude < opt.accept * amplitude))
        throw RefinementFailed("unstable component " + std::to_string(em.magnitude) + " at the horizon after " +
                               std::to_string(it) + " bisection steps");
    r.w0 = at(mid);
    r.init = from_chart(lm, r.w0, xn0);
    r.unstable_coefficient = mid;
    r.gamma_u_horizon = em.magnitude;
    r.iterations = it;
    r.refined = true;
    return r;
}

std::vector<double> clock_series(const Trajectory& traj, const LocalModel& lm) {
    std::vector<double> c;
    c.reserve(traj.t.size());
    const Vec& om = lm.channel.omega;
    for (std::size_t i = 0; i < traj.t.size(); ++i)
        c.push_back(traj.t[i] * mu_derivative(lm, traj.z[i]) / traj.z[i].x.dot(om));
    return c;
}

ClockReport clock_check(const Trajectory& traj, const LocalModel& lm) {
    ClockReport r;
    r.values = clock_series(traj, lm);
    if (r.values.empty()) return r;
    r.final_deviation = std::abs(r.values.back() - 1.0);
    const double t_end = traj.t.back();
    for (std::size_t i = 0; i < r.values.size(); ++i)
        if (traj.t[i] >= t_end / 10) r.final_decade_deviation = std::max(r.final_decade_deviation, std::abs(r.values[i] - 1.0));
    return r;
}

double channel_distance(const Trajectory& traj, const ChannelPoint& c) {
    const PhasePoint& p = traj.z.back();
    return (p.x / p.x.norm() - c.omega).norm() + (p.xi - c.xi).norm();
}

MonotoneReport check_q_minus_monotone(const ObservableSeries& obs, double tol, double burn_level, double t_min) {
    MonotoneReport r;
    std::size_t start = obs.size();
    for (std::size_t i = 0; i < obs.size(); ++i)
        if (obs.t[i] >= t_min && obs.q_plus[i] < burn_level) {
            start = i;
            break;
        }
    if (start >= obs.size()) return r;
    r.burn_in_t = obs.t[start];
    for (std::size_t i = start + 1; i < obs.size(); ++i) {
        const double dec = obs.q_minus[i - 1] - obs.q_minus[i];
        const double rel = obs.q_plus[i] > 0 ? dec / obs.q_plus[i] : (dec > 0 ? INFINITY : 0.0);
        r.worst_relative_decrease = std::max(r.worst_relative_decrease, rel);
        if (dec > tol * obs.q_plus[i]) ++r.violations;
    }
    r.pass = r.violations == 0;
    return r;
}

} // namespace chanflow
