#include "chanflow/dynamics.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>

namespace chanflow {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

namespace {

// Drives a dense-output dopri5 stepper from t0 to t1. `on_step` sees each accepted step end
// and may return false to stop; `emit` receives output samples.
template <class System, class OnStep, class Emit>
void drive(System sys, State x0, double t0, double t1, const IntegrateOptions& opt, OnStep on_step, Emit emit) {
    auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
    stepper.initialize(x0, t0, std::min(opt.dt0, t1 - t0));
    std::vector<double> samples;
    for (double s : opt.sample_times)
        if (s >= t0 && s <= t1) samples.push_back(s);
    std::sort(samples.begin(), samples.end());
    std::size_t next = 0;
    State buf(x0.size());
    if (samples.empty() || samples.front() > t0) emit(t0, x0);
    if (!samples.empty() && samples.front() == t0) emit(t0, x0), ++next;

    while (stepper.current_time() < t1) {
        std::pair<double, double> span;
        try {
            span = stepper.do_step(sys);
        } catch (const odeint::step_adjustment_error& e) {
            throw StepUnderflow(std::string("step size control failed: ") + e.what());
        }
        const double h = span.second - span.first;
        if (h < opt.min_step * std::max(1.0, std::abs(span.second)))
            throw StepUnderflow("step " + std::to_string(h) + " at t = " + std::to_string(span.second));
        const double end = std::min(span.second, t1);
        if (samples.empty()) {
            if (span.second <= t1) {
                emit(span.second, stepper.current_state());
            } else {
                stepper.calc_state(t1, buf);
                emit(t1, buf);
            }
        } else {
            while (next < samples.size() && samples[next] <= end) {
                stepper.calc_state(samples[next], buf);
                emit(samples[next], buf);
                ++next;
            }
        }
        if (!on_step(stepper.current_time(), stepper.current_state())) return;
    }
}

PhasePoint unpack(const State& s, int n) {
    PhasePoint p{Vec(n), Vec(n)};
    for (int i = 0; i < n; ++i) {
        p.x(i) = s[static_cast<std::size_t>(i)];
        p.xi(i) = s[static_cast<std::size_t>(n + i)];
    }
    return p;
}

} // namespace

Trajectory integrate_full(const Model& m, const PhasePoint& init, double t0, double t1, const IntegrateOptions& opt) {
    if (!(t1 > t0)) throw std::invalid_argument("integrate_full: empty time span");
    const int n = m.dim();
    State x0(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        x0[static_cast<std::size_t>(i)] = init.x(i);
        x0[static_cast<std::size_t>(n + i)] = init.xi(i);
    }
    Trajectory tr;
    tr.energy = eval_h(m, init);
    tr.energy_budget = opt.budget_factor * (1.0 + std::abs(tr.energy)) * std::sqrt(t1 - t0);

    auto sys = [&](const State& s, State& ds, double) {
        const Gradient g = grad(m, unpack(s, n));
        for (int i = 0; i < n; ++i) {
            ds[static_cast<std::size_t>(i)] = g.gxi(i);
            ds[static_cast<std::size_t>(n + i)] = -g.gx(i);
        }
    };
    auto on_step = [&](double t, const State& s) {
        ++tr.steps;
        const double dev = std::abs(eval_h(m, unpack(s, n)) - tr.energy);
        tr.energy_drift = std::max(tr.energy_drift, dev);
        if (tr.energy_drift > tr.energy_budget)
            throw EnergyBudgetExceeded("|h - E| = " + std::to_string(tr.energy_drift) + " exceeds budget " +
                                       std::to_string(tr.energy_budget) + " at t = " + std::to_string(t));
        return true;
    };
    auto emit = [&](double t, const State& s) {
        tr.t.push_back(t);
        tr.z.push_back(unpack(s, n));
    };
    drive(sys, x0, t0, t1, opt, on_step, emit);
    return tr;
}

ReducedTrajectory integrate_reduced(const LocalModel& lm, const Vec& w0, double tau0, double tau1,
                                    const IntegrateOptions& opt, bool allow_exit) {
    if (!(tau1 > tau0)) throw std::invalid_argument("integrate_reduced: empty time span");
    const double radius = lm.options.radius;
    if (w0.norm() > radius) throw ChartExit("initial point outside the chart radius");
    const std::size_t N = static_cast<std::size_t>(w0.size());
    ReducedTrajectory tr;
    State x0(w0.data(), w0.data() + N);

    struct Exit {};
    auto sys = [&](const State& s, State& ds, double) {
        Vec w = Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(N));
        if (w.norm() > radius) throw Exit{};
        Vec f;
        try {
            f = reduced_field(lm, w);
        } catch (const ImplicitSolveFailed&) {
            throw Exit{};
        }
        for (std::size_t i = 0; i < N; ++i) ds[i] = f(static_cast<Eigen::Index>(i));
    };
    auto on_step = [&](double, const State& s) {
        if (Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(N)).norm() > radius) throw Exit{};
        return true;
    };
    auto emit = [&](double tau, const State& s) {
        Vec w = Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(N));
        if (w.norm() > radius) throw Exit{};
        tr.tau.push_back(tau);
        tr.w.push_back(std::move(w));
    };
    try {
        drive(sys, x0, tau0, tau1, opt, on_step, emit);
    } catch (const Exit&) {
        if (!allow_exit)
            throw ChartExit("reduced orbit left the chart radius " + std::to_string(radius) + " after tau = " +
                            std::to_string(tr.tau.empty() ? tau0 : tr.tau.back()));
        tr.exited = true;
    }
    return tr;
}

} // namespace chanflow
