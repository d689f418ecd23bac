#pragma once

#include "chanflow/normalform.hpp"
#include "chanflow/reduction.hpp"
#include "chanflow/spectral.hpp"

#include <vector>

namespace chanflow {

struct IntegrateOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double dt0 = 1e-3;
    double min_step = 1e-13;       // relative to max(1, |t|)
    double budget_factor = 1e-7;   // energy budget = factor·(1+|E|)·√span
    std::vector<double> sample_times; // output times inside the span; empty means every accepted step
};

struct Trajectory {
    std::vector<double> t;
    std::vector<PhasePoint> z;
    double energy = 0.0;
    double energy_drift = 0.0;
    double energy_budget = 0.0;
    long steps = 0;
};

// Hamilton's equations dx/dt = ∇_ξh, dξ/dt = −∇_x h with a dense-output Dormand–Prince 5(4) stepper
Trajectory integrate_full(const Model& m, const PhasePoint& init, double t0, double t1, const IntegrateOptions& opt = {});

struct ReducedTrajectory {
    std::vector<double> tau;
    std::vector<Vec> w;
    bool exited = false; // integration stopped at the chart boundary (only when not throwing)
};

// dw/dτ = reduced_field(w); ChartExit when |w| leaves the chart radius unless allow_exit
ReducedTrajectory integrate_reduced(const LocalModel& lm, const Vec& w0, double tau0, double tau1,
                                    const IntegrateOptions& opt = {}, bool allow_exit = false);

struct ObservableSeries {
    std::vector<double> t, tau, q_s, q_u, q_minus, q_plus, gamma_abs, Gamma_abs, clock;
    std::vector<CVec> gamma;
    std::size_t size() const { return t.size(); }
};

// nf may be null, in which case Gamma_abs is left at zero
ObservableSeries observables(const Trajectory& traj, const LocalModel& lm, const Spectrum& s,
                             const NormalFormGamma* nf = nullptr);

struct ShootOptions {
    double tau_horizon = 8.0;
    int max_iter = 80;
    double accept = 1e-4; // |γ^u(τ_H)| < accept·amplitude
    IntegrateOptions integrate = [] {
        IntegrateOptions o;
        o.abs_tol = 1e-18;
        return o;
    }();
};

struct ShootResult {
    Vec w0;
    PhasePoint init;
    double unstable_coefficient = 0.0;
    double gamma_u_horizon = 0.0;
    int iterations = 0;
    bool refined = false; // false when there is no unstable direction
};

// approximate stable-manifold point at x_n = xn0 by bisection on the escape sign of the unstable component
ShootResult shoot_stable(const LocalModel& lm, const Spectrum& s, double amplitude, const ShootOptions& opt = {},
                         double xn0 = 1.0);

// t·∂_μh/x_n per sample
std::vector<double> clock_series(const Trajectory& traj, const LocalModel& lm);

struct ClockReport {
    std::vector<double> values;
    double final_deviation = 0.0;       // |value − 1| at the last sample
    double final_decade_deviation = 0.0; // max |value − 1| over t in [t_end/10, t_end]
};
ClockReport clock_check(const Trajectory& traj, const LocalModel& lm);

// |x̂ − ω| + |ξ − ξ_E| at the last sample
double channel_distance(const Trajectory& traj, const ChannelPoint& c);

struct MonotoneReport {
    double burn_in_t = 0.0;
    double worst_relative_decrease = 0.0; // max over steps of (q⁻_{i−1} − q⁻_i)/q⁺_i after burn-in
    int violations = 0;                   // steps with decrease above tol·q⁺
    bool pass = false;
};
// burn-in: first sample with q⁺ < burn_level (and t ≥ t_min)
MonotoneReport check_q_minus_monotone(const ObservableSeries& obs, double tol = 1e-8, double burn_level = 1e-2,
                                      double t_min = 0.0);

std::vector<double> log_spaced(double a, double b, int count);

} // namespace chanflow
