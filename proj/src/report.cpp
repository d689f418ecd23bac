#include "chanflow/report.hpp"

#include <cstdio>

namespace chanflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void csv_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
}

} // namespace

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json to_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
    return a;
}

json to_json(cd z) { return json::array({z.real(), z.imag()}); }

json to_json(const std::vector<cd>& v) {
    json a = json::array();
    for (const auto& z : v) a.push_back(to_json(z));
    return a;
}

json to_json(const ChannelPoint& c) {
    return {{"energy", c.E}, {"omega", to_json(c.omega)}, {"xi", to_json(c.xi)},
            {"k", c.k},      {"residual", c.residual},    {"iterations", c.iterations}};
}

json to_json(const Spectrum& s) {
    return {{"eigenvalues", to_json(s.beta)},
            {"n_stable", s.ns},
            {"n_unstable", s.nu},
            {"classification", classify(s)},
            {"block_residual", s.block_residual},
            {"nilpotent_norm", s.nilpotent_norm},
            {"tracked_eigenvalue", to_json(s.lambda_tracked)}};
}

json to_json(const PairingReport& p) {
    return {{"max_distance", p.max_distance}, {"pass", p.pass}};
}

json to_json(const ExponentFit& f) {
    return {{"exponent", f.exponent}, {"stderr", f.stderr_}, {"window", {f.x_min, f.x_max}}, {"samples", f.samples}};
}

json to_json(const NormalFormGamma& nf) {
    json coeffs = json::object();
    for (int m = 1; m <= nf.m0; ++m) {
        json order = json::object();
        for (const auto& [a, c] : nf.coefficients(m))
            if (c != cd(0)) order[multi_index_key(a)] = to_json(c);
        coeffs[std::to_string(m)] = order;
    }
    json res = json::array();
    for (double r : nf.order_residual) res.push_back(r);
    return {{"m0", nf.m0},
            {"beta1", to_json(nf.beta1)},
            {"dim", nf.dim},
            {"coefficients", coeffs},
            {"order_residual", res},
            {"post_residual", nf.post_residual},
            {"c_l", to_json(nf.c_l)},
            {"c_l_coordinate", nf.l_index},
            {"c_l_from_eta", nf.c_l_from_eta}};
}

json to_json(const HomogeneityReport& r) {
    return {{"max_deviation", r.max_deviation},
            {"samples_used", r.samples_used},
            {"tolerance", r.tolerance},
            {"pass", r.pass}};
}

json to_json(const SpiralRoot& r) {
    return {{"theta0", r.theta0}, {"r0", r.r0},        {"f0", r.f0},           {"f2", r.f2},
            {"rho0", r.rho0},     {"eig1", to_json(r.eig1)}, {"eig2", to_json(r.eig2)}, {"class", r.cls},
            {"degenerate", r.degenerate}};
}

json model_echo(const Model& m) {
    json j{{"family", m.name()}, {"dimension", m.dim()}};
    json p = json::object();
    std::visit(overloaded{
                   [&](const MetricExample11& f) { p["a"] = f.a; },
                   [&](const MorseSphere& f) {
                       if (f.local) {
                           p["omega"] = to_json(f.omega);
                           p["V0"] = f.V0;
                           p["q"] = to_json(f.q);
                       } else {
                           p["V"] = f.V.to_string();
                       }
                   },
                   [&](const Riema2& f) { p["a"] = f.a; },
                   [&](const Riema3& f) {
                       p["b"] = f.b;
                       p["kappa"] = f.kappa;
                   },
                   [&](const Spiral& f) {
                       p["f"] = f.f.to_string();
                       p["c"] = f.c;
                   },
                   [&](const SpiralConjugate& f) {
                       p["f"] = f.f.to_string();
                       p["c"] = f.c;
                   },
                   [&](const Homogenized& f) {
                       p["s"] = f.s;
                       p["inner"] = model_echo(*f.inner);
                   },
                   [&](const Generic& f) { p["label"] = f.label; },
               },
               m.family());
    j["params"] = p;
    if (m.regularization()) j["regularize"] = {m.regularization()->lower, m.regularization()->upper};
    return j;
}

void write_resonance_csv(std::ostream& os, const ScanReport& rep) {
    csv_row(os, kResonanceColumns);
    for (const auto& p : rep.points) {
        const std::string mo = p.min_order ? std::to_string(*p.min_order) : "";
        if (!p.error.empty()) {
            csv_row(os, {fmt(p.value), "", "error:" + p.error, "", ""});
            continue;
        }
        if (p.hits.empty()) {
            csv_row(os, {fmt(p.value), "", "", "", ""});
            continue;
        }
        for (const auto& h : p.hits)
            csv_row(os, {fmt(p.value), mo, "\"" + multi_index_key(h.alpha) + "\"", std::to_string(h.target_index),
                         fmt(h.residual)});
    }
}

void write_observable_csv(std::ostream& os, const ObservableSeries& o) {
    csv_row(os, kObservableColumns);
    for (std::size_t i = 0; i < o.size(); ++i)
        csv_row(os, {fmt(o.t[i]), fmt(o.tau[i]), fmt(o.q_s[i]), fmt(o.q_u[i]), fmt(o.q_minus[i]), fmt(o.q_plus[i]),
                     fmt(o.gamma_abs[i]), fmt(o.Gamma_abs[i]), fmt(o.clock[i])});
}

void write_spiral_csv(std::ostream& os, const SpiralReport& rep) {
    csv_row(os, kSpiralColumns);
    for (const auto& r : rep.roots)
        csv_row(os, {fmt(r.theta0), fmt(r.f0), fmt(r.f2), fmt(r.rho0), fmt(r.eig1.real()), fmt(r.eig1.imag()),
                     fmt(r.eig2.real()), fmt(r.eig2.imag()), r.cls});
}

} // namespace chanflow
