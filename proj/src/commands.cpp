#include "chanflow/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace chanflow {

namespace {

double need_energy(const RunConfig& cfg) {
    if (!cfg.energy) throw ConfigError("--energy is required");
    return *cfg.energy;
}

json tolerances() {
    const NewtonOptions nw;
    const DecomposeOptions dc;
    const NormalFormOptions nf;
    return {{"newton", nw.tol},          {"hyperbolicity", dc.hyper_tol}, {"cluster", dc.cluster_tol},
            {"pairing", 1e-6},           {"block", dc.block_tol},         {"resonance_singular_rel", nf.singular_rel},
            {"homological_residual", nf.solve_tol}, {"post_check", nf.post_tol}};
}

json header(const std::string& command, const RunConfig& cfg) {
    json j{{"spec_version", kSpecVersion}, {"command", command}};
    if (!cfg.family.empty()) {
        const Model raw = build_model(cfg);
        j["model"] = model_echo(raw);
        if (!raw.degree_zero()) j["pipeline_model"] = model_echo(pipeline_model(raw));
    }
    j["tolerances"] = tolerances();
    return j;
}

std::filesystem::path out_dir(const RunConfig& cfg) {
    std::filesystem::path p(cfg.out);
    std::filesystem::create_directories(p);
    return p;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j) {
    if (cfg.out.empty()) return;
    std::ofstream os(out_dir(cfg) / name);
    os << j.dump(2) << '\n';
}

template <class Fn>
void write_file(const RunConfig& cfg, const std::string& name, Fn&& fn) {
    if (cfg.out.empty()) return;
    std::ofstream os(out_dir(cfg) / name);
    fn(os);
}

template <class Fn>
json guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        return {{"error", e.kind()}, {"message", e.what()}};
    }
}

} // namespace

Pipeline run_pipeline(const RunConfig& cfg, int order) {
    const Model pm = pipeline_model(build_model(cfg));
    const double E = need_energy(cfg);
    const ChannelPoint c = find_channel_point(pm, E, default_guess(pm, E, cfg.theta0));
    LocalModel lm = build_local_model(pm, c, make_frame(c.omega), order);
    Spectrum s = decompose(lm.B);
    return {pm, c, std::move(lm), std::move(s)};
}

json cmd_analyze(const RunConfig& cfg) {
    json j = header("analyze", cfg);
    const Pipeline p = run_pipeline(cfg, std::max(2, cfg.order));
    j["channel"] = to_json(p.channel);
    j["frame"] = to_json(p.local.frame.basis);
    j["A"] = to_json(p.local.A);
    j["B"] = to_json(p.local.B);
    j["spectrum"] = to_json(p.spectrum);
    j["pairing"] = to_json(check_pairing(p.spectrum));
    j["classification"] = classify(p.spectrum);
    j["m0"] = p.spectrum.ns > 0 ? json(compute_m0(p.spectrum)) : json(nullptr);
    write_json(cfg, "analyze.json", j);
    return j;
}

json cmd_resonances(const RunConfig& cfg) {
    if (cfg.grid.empty()) throw ConfigError("--grid is required");
    const Grid grid = parse_grid(cfg.grid);
    if (grid.name != "energy") need_energy(cfg);
    const RunConfig first = with_value(cfg, grid.name, grid.values.front());
    build_model(first);
    json j = header("resonances", first);
    ResonanceOptions ro;
    ro.m_max = cfg.m_max;
    ro.tol = cfg.res_tol;
    if (cfg.all_targets) ro.targets.clear();
    auto spectrum_at = [&](double v) { return run_pipeline(with_value(cfg, grid.name, v), 2).spectrum.beta; };
    std::cerr << "scanning " << grid.values.size() << " values of " << grid.name << " with m_max = " << ro.m_max
              << '\n';
    const ScanReport rep = scan_resonances(grid.values, spectrum_at, ro, cfg.jobs);
    json pts = json::array();
    for (const auto& p : rep.points) {
        json q{{"value", p.value}, {"eigenvalues", to_json(p.beta)}};
        q["min_order"] = p.min_order ? json(*p.min_order) : json(nullptr);
        json hits = json::array();
        for (const auto& h : p.hits)
            hits.push_back({{"alpha", multi_index_key(h.alpha)}, {"order", h.order}, {"target", h.target_index},
                            {"residual", h.residual}});
        q["hits"] = hits;
        if (!p.error.empty()) q["error"] = {{"name", p.error}, {"message", p.error_message}};
        pts.push_back(q);
    }
    json win = json::array();
    for (const auto& [lo, hi] : rep.free_windows) win.push_back({lo, hi});
    j["grid"] = {{"parameter", grid.name}, {"values", grid.values}};
    j["m_max"] = ro.m_max;
    j["points"] = pts;
    j["resonance_free_windows"] = win;
    write_json(cfg, "resonances.json", j);
    write_file(cfg, "resonances.csv", [&](std::ostream& os) { write_resonance_csv(os, rep); });
    return j;
}

json cmd_normalform(const RunConfig& cfg) {
    json j = header("normalform", cfg);
    Pipeline p = run_pipeline(cfg, 2);
    const int m0 = cfg.m0 ? *cfg.m0 : compute_m0(p.spectrum);
    if (m0 < 1 || m0 > 20) throw ConfigError("m0 must lie in [1, 20]");
    p.local = build_local_model(p.model, p.channel, p.local.frame, std::max(cfg.order, 2 * m0 + 1));
    const NormalFormGamma nf = build_gamma(p.local, p.spectrum, m0);
    const CPoly rem = residual_decay(nf, p.local, p.spectrum);
    json decay = json::object();
    for (int m = m0 + 1; m <= 2 * m0; ++m) decay[std::to_string(m)] = rem.max_abs_degree(m);
    j["channel"] = to_json(p.channel);
    j["spectrum"] = to_json(p.spectrum);
    j["m0_rule"] = compute_m0(p.spectrum);
    j["normal_form"] = to_json(nf);
    j["remainder_max_coefficient"] = decay;
    write_json(cfg, "normalform.json", j);
    return j;
}

json cmd_simulate(const RunConfig& cfg) {
    json j = header("simulate", cfg);
    if (!(cfg.tmax > 1) || cfg.samples < 10) throw ConfigError("simulate needs --tmax > 1 and --samples >= 10");
    Pipeline p = run_pipeline(cfg, 2);
    const int m0 = cfg.m0 ? *cfg.m0 : compute_m0(p.spectrum);
    p.local = build_local_model(p.model, p.channel, p.local.frame, std::max(cfg.order, m0 + 1));
    const NormalFormGamma nf = build_gamma(p.local, p.spectrum, m0);

    Vec w0;
    PhasePoint init;
    if (cfg.shoot) {
        std::cerr << "refining the stable-manifold initial point\n";
        const ShootResult sr = shoot_stable(p.local, p.spectrum, cfg.amplitude);
        w0 = sr.w0;
        init = sr.init;
        j["shoot"] = {{"refined", sr.refined},
                      {"iterations", sr.iterations},
                      {"unstable_coefficient", sr.unstable_coefficient},
                      {"gamma_u_horizon", sr.gamma_u_horizon}};
    } else {
        Vec es = p.spectrum.T.col(0).real();
        w0 = cfg.amplitude * es / es.norm();
        init = from_chart(p.local, w0, 1.0);
    }
    j["w0"] = to_json(w0);

    IntegrateOptions io;
    io.rel_tol = cfg.rel_tol;
    io.sample_times = log_spaced(std::min(1.0, cfg.tmax / 10), cfg.tmax, cfg.samples);
    io.sample_times.insert(io.sample_times.begin(), 0.0);
    std::cerr << "integrating to t = " << cfg.tmax << '\n';
    const Trajectory tr = integrate_full(p.model, init, 0.0, cfg.tmax, io);
    const ObservableSeries obs = observables(tr, p.local, p.spectrum, &nf);

    const double lo = cfg.tmax / 100;
    json fits;
    fits["window"] = {lo, cfg.tmax};
    fits["gamma_abs"] = guarded([&] { return to_json(fit_loglog(obs.t, obs.gamma_abs, lo, cfg.tmax)); });
    fits["Gamma_abs"] = guarded([&] { return to_json(fit_loglog(obs.t, obs.Gamma_abs, lo, cfg.tmax)); });
    fits["q_s"] = guarded([&] { return to_json(fit_loglog(obs.t, obs.q_s, lo, cfg.tmax)); });
    fits["q_u_vs_q_s"] = guarded([&] {
        std::vector<double> qs, qu;
        for (std::size_t i = 0; i < obs.size(); ++i)
            if (obs.t[i] >= lo) qs.push_back(obs.q_s[i]), qu.push_back(obs.q_u[i]);
        return to_json(fit_loglog(qs, qu));
    });
    fits["predicted"] = {{"gamma_abs", p.spectrum.beta_s().empty() ? 0.0 : p.spectrum.beta[0].real()},
                         {"Gamma_abs", nf.beta1.real()}};
    const MonotoneReport mono = check_q_minus_monotone(obs, 1e-8, 1e-2, lo);
    const ClockReport clk = clock_check(tr, p.local);
    j["fits"] = fits;
    j["q_minus_monotone"] = {{"pass", mono.pass},
                             {"burn_in_t", mono.burn_in_t},
                             {"violations", mono.violations},
                             {"worst_relative_decrease", mono.worst_relative_decrease}};
    j["clock"] = {{"final", clk.values.empty() ? 0.0 : clk.values.back()},
                  {"final_deviation", clk.final_deviation},
                  {"final_decade_deviation", clk.final_decade_deviation}};
    j["energy"] = {{"value", tr.energy}, {"drift", tr.energy_drift}, {"budget", tr.energy_budget}};
    j["channel_distance"] = channel_distance(tr, p.channel);
    j["steps"] = tr.steps;
    write_json(cfg, "simulate.json", j);
    write_file(cfg, "observables.csv", [&](std::ostream& os) { write_observable_csv(os, obs); });
    return j;
}

json cmd_geometry(const RunConfig& cfg) {
    json j{{"spec_version", kSpecVersion}, {"command", "geometry"}, {"tolerances", tolerances()}};
    if (cfg.spiral) {
        RunConfig c = cfg;
        c.family = "spiral";
        const Model m = build_model(c);
        const auto& sp = std::get<Spiral>(m.family());
        const double E = need_energy(cfg);
        const SpiralReport rep = spiral_analysis(sp.f, sp.c, E);
        j["model"] = model_echo(m);
        j["energy"] = E;
        j["no_roots"] = rep.no_roots;
        json roots = json::array();
        for (const auto& r : rep.roots) roots.push_back(to_json(r));
        j["roots"] = roots;
        write_json(cfg, "geometry.json", j);
        write_file(cfg, "spiral.csv", [&](std::ostream& os) { write_spiral_csv(os, rep); });
        return j;
    }

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Vec> pts;
    for (int i = 0; i < 100; ++i) {
        Vec z(4);
        for (int k = 0; k < 4; ++k) z(k) = u(rng);
        pts.push_back(z);
    }
    json fields = json::array();
    for (const ScalingField& v : {ScalingField{EulerField{}}, ScalingField{PhaseScalingField{0.5}},
                                  ScalingField{PhaseScalingField{2.0 / 3.0}}, ScalingField{SpiralField{1.0}}}) {
        double amax = 0, rmax = 0;
        for (const auto& e : lie_derivative_alpha(v, pts))
            amax = std::max(amax, std::abs(e.alpha - 1.0)), rmax = std::max(rmax, e.residual);
        const FlowFactor ff = conformal_flow_factor(v, pts.front(), std::log(2.0), cfg.seed);
        fields.push_back({{"field", field_name(v)},
                          {"max_alpha_deviation", amax},
                          {"max_residual", rmax},
                          {"flow_factor", {{"t", std::log(2.0)}, {"measured", ff.measured}, {"predicted", ff.predicted}}}});
    }
    j["scaling_fields"] = fields;

    if (!cfg.family.empty()) {
        const Model m = build_model(cfg);
        j["model"] = model_echo(m);
        std::optional<HomogenizeResult> hr;
        ScalingField v = EulerField{};
        if (const auto* r3 = std::get_if<Riema3>(&m.family())) {
            hr = homogenize_two_param(m, r3->kappa, 2.0, cfg.seed);
            v = PhaseScalingField{hr->s};
        } else if (std::holds_alternative<Riema2>(m.family())) {
            hr = homogenize_joint(m, cfg.seed);
            v = PhaseScalingField{hr->s};
        } else if (!m.degree_zero()) {
            throw ConfigError("geometry checks support degree-zero models, riema2 and riema3");
        }
        if (hr) j["homogenization"] = {{"s", hr->s}, {"precondition_deviation", hr->precondition_deviation},
                                      {"degree_zero_check", to_json(hr->check)}};
        std::vector<PhasePoint> php;
        std::uniform_real_distribution<double> rr(1.0, 3.0), ang(0.0, 6.283185307179586), xv(-1.0, 1.0);
        for (int i = 0; i < 20; ++i) {
            const double r = rr(rng), a = ang(rng);
            Vec x(2), xi(2);
            x << r * std::cos(a), r * std::sin(a);
            xi << xv(rng), xv(rng);
            php.push_back({x, xi});
        }
        const CommutatorReport cr = commutator_check(v, m, php);
        j["commutator"] = {{"field", field_name(v)},
                           {"vh_violated", cr.vh_violated},
                           {"max_vh", cr.max_vh},
                           {"max_residual", cr.max_residual}};
    }
    write_json(cfg, "geometry.json", j);
    return j;
}

json error_json(const std::string& kind, const std::string& message, int exit_code) {
    return {{"spec_version", kSpecVersion}, {"error", kind}, {"message", message}, {"exit_code", exit_code}};
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"chanflow: classical channel analysis for Hamiltonians at spatial infinity"};
    app.require_subcommand(1);
    app.footer("CSV schemas:\n"
               "  resonances.csv  : grid_value,min_order,alpha,target,residual\n"
               "  observables.csv : t,tau,q_s,q_u,q_minus,q_plus,gamma_abs,Gamma_abs,clock\n"
               "  spiral.csv      : theta0,f0,f2,rho0,eig_re_1,eig_im_1,eig_re_2,eig_im_2,class\n"
               "Exit codes: 0 success, 2 solver error, 3 configuration error.");

    struct Flags {
        std::string config, model, V, f, grid, out;
        std::optional<double> a, b, kappa, c, energy, theta0, tmax, amplitude, tol, rel_tol;
        std::optional<int> order, mmax, m0, samples, jobs;
        std::optional<unsigned long long> seed;
        std::vector<double> trig_coeffs;
        bool regularize = false, all_targets = false, shoot = false, spiral = false, error_json = false;
    } fl;

    auto common = [&](CLI::App* s) {
        s->add_option("--config", fl.config, "TOML config file (flags override its keys)");
        s->add_option("--model", fl.model, "metric11 | morse | riema2 | riema3 | spiral | spiral_conjugate");
        s->add_option("--a", fl.a, "parameter a (metric11, riema2)");
        s->add_option("--b", fl.b, "parameter b (riema3)");
        s->add_option("--kappa", fl.kappa, "parameter kappa (riema3)");
        s->add_option("--c", fl.c, "parameter c (spiral)");
        s->add_option("--V", fl.V, "potential on the circle, e.g. \"cos\" (morse)");
        s->add_option("--f", fl.f, "metric exponent, e.g. \"2cos\" (spiral)");
        s->add_option("--trig-coeffs", fl.trig_coeffs, "trig coefficients a0 a1 b1 a2 b2 ...");
        s->add_flag("--regularize", fl.regularize, "smooth cutoff near x = 0 (morse)");
        s->add_option("--energy", fl.energy, "energy E");
        s->add_option("--theta0", fl.theta0, "critical angle to start the channel search from");
        s->add_option("--order", fl.order, "Taylor order of the reduction");
        s->add_option("--out", fl.out, "output directory for JSON/CSV reports");
        s->add_option("--jobs", fl.jobs, "worker count for grid sweeps");
        s->add_option("--seed", fl.seed, "random seed");
        s->add_flag("--error-json", fl.error_json, "print errors as JSON on stdout");
    };
    CLI::App* an = app.add_subcommand("analyze", "channel point, linearization, spectrum, m0");
    CLI::App* rs = app.add_subcommand("resonances", "resonance scan over a parameter or energy grid");
    CLI::App* nfc = app.add_subcommand("normalform", "normal-form observable coefficients");
    CLI::App* sim = app.add_subcommand("simulate", "orbit integration, observables and decay fits");
    CLI::App* geo = app.add_subcommand("geometry", "scaling-field checks, homogenization, spiral analysis");
    for (auto* s : {an, rs, nfc, sim, geo}) common(s);
    rs->add_option("--grid", fl.grid, "name=lo:hi:step or name=v1,v2,... (a, b, kappa, c, energy)");
    rs->add_option("--mmax", fl.mmax, "largest resonance order (2..20)");
    rs->add_option("--tol", fl.tol, "resonance tolerance");
    rs->add_flag("--all-targets", fl.all_targets, "test every eigenvalue, not only the first stable one");
    nfc->add_option("--m0", fl.m0, "normal-form order (default from the m0 rule)");
    sim->add_option("--m0", fl.m0, "normal-form order (default from the m0 rule)");
    sim->add_flag("--shoot", fl.shoot, "refine the initial point onto the stable manifold");
    sim->add_option("--tmax", fl.tmax, "final time");
    sim->add_option("--amplitude", fl.amplitude, "initial transverse amplitude");
    sim->add_option("--samples", fl.samples, "number of log-spaced output samples");
    sim->add_option("--rel-tol", fl.rel_tol, "integrator relative tolerance");
    geo->add_flag("--spiral", fl.spiral, "spiral channel analysis (needs --f, --c, --energy)");

    auto usage = [&](std::ostream& os) {
        for (auto* s : app.get_subcommands()) os << s->help();
        if (app.get_subcommands().empty()) os << app.help();
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        usage(std::cerr);
        if (fl.error_json) std::cout << error_json("ConfigError", e.what(), 3).dump() << '\n';
        return 3;
    }

    RunConfig cfg;
    try {
        if (!fl.config.empty()) load_config_file(fl.config, cfg);
        if (!fl.model.empty()) cfg.family = fl.model;
        for (auto [name, v] : {std::pair{"a", fl.a}, std::pair{"b", fl.b}, std::pair{"kappa", fl.kappa}, std::pair{"c", fl.c}})
            if (v) cfg.params[name] = *v;
        if (!fl.V.empty()) cfg.trig = fl.V;
        if (!fl.f.empty()) cfg.trig = fl.f;
        if (!fl.trig_coeffs.empty()) cfg.trig_coeffs = fl.trig_coeffs;
        if (fl.regularize) cfg.regularize = true;
        if (fl.energy) cfg.energy = fl.energy;
        if (fl.theta0) cfg.theta0 = fl.theta0;
        if (fl.order) cfg.order = *fl.order;
        if (!fl.out.empty()) cfg.out = fl.out;
        if (fl.jobs) cfg.jobs = *fl.jobs;
        if (fl.seed) cfg.seed = *fl.seed;
        if (fl.error_json) cfg.error_json = true;
        if (!fl.grid.empty()) cfg.grid = fl.grid;
        if (fl.mmax) cfg.m_max = *fl.mmax;
        if (fl.tol) cfg.res_tol = *fl.tol;
        if (fl.all_targets) cfg.all_targets = true;
        if (fl.m0) cfg.m0 = fl.m0;
        if (fl.shoot) cfg.shoot = true;
        if (fl.tmax) cfg.tmax = *fl.tmax;
        if (fl.amplitude) cfg.amplitude = *fl.amplitude;
        if (fl.samples) cfg.samples = *fl.samples;
        if (fl.rel_tol) cfg.rel_tol = *fl.rel_tol;
        if (fl.spiral) cfg.spiral = true;
        if (cfg.jobs < 1) throw ConfigError("--jobs must be >= 1");
        if (!(cfg.res_tol > 0) || !(cfg.rel_tol > 0) || !(cfg.amplitude > 0))
            throw ConfigError("tolerances and amplitude must be positive");
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        usage(std::cerr);
        if (fl.error_json || cfg.error_json) std::cout << error_json(e.kind(), e.what(), 3).dump() << '\n';
        return 3;
    }

    try {
        json out;
        if (an->parsed()) out = cmd_analyze(cfg);
        else if (rs->parsed()) out = cmd_resonances(cfg);
        else if (nfc->parsed()) out = cmd_normalform(cfg);
        else if (sim->parsed()) out = cmd_simulate(cfg);
        else out = cmd_geometry(cfg);
        if (cfg.out.empty()) std::cout << out.dump(2) << '\n';
        else std::cerr << "reports written to " << cfg.out << '\n';
        return 0;
    } catch (const Error& e) {
        const int code = e.is_config() ? 3 : 2;
        std::cerr << "error: " << e.what() << "\n";
        if (code == 3) usage(std::cerr);
        const json ej = error_json(e.kind(), e.what(), code);
        if (cfg.error_json) std::cout << ej.dump() << '\n';
        if (!cfg.out.empty()) write_json(cfg, "error.json", ej);
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        const json ej = error_json("InternalError", e.what(), 2);
        if (cfg.error_json) std::cout << ej.dump() << '\n';
        return 2;
    }
}

} // namespace chanflow
