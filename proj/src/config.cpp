#include "chanflow/config.hpp"

#include "chanflow/trig_poly.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace chanflow {

namespace {

std::string unquote(std::string s) {
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
    return s;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(unquote(v), &pos);
        if (pos != unquote(v).size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not a number: '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("config key " + key + ": not an integer: '" + v + "'");
    return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    std::string s = unquote(v);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("config key " + key + ": not a boolean: '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::vector<std::string>&)>;

const std::string& single(const std::string& key, const std::vector<std::string>& in) {
    if (in.size() != 1) throw ConfigError("config key " + key + " expects a single value");
    return in.front();
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto dbl = [](double RunConfig::*f) {
            return [f](RunConfig& c, const std::string& k, const std::vector<std::string>& in) {
                c.*f = to_double(k, single(k, in));
            };
        };
        auto integer = [](int RunConfig::*f) {
            return [f](RunConfig& c, const std::string& k, const std::vector<std::string>& in) {
                c.*f = to_int(k, single(k, in));
            };
        };
        auto boolean = [](bool RunConfig::*f) {
            return [f](RunConfig& c, const std::string& k, const std::vector<std::string>& in) {
                c.*f = to_bool(k, single(k, in));
            };
        };
        auto str = [](std::string RunConfig::*f) {
            return [f](RunConfig& c, const std::string& k, const std::vector<std::string>& in) {
                c.*f = unquote(single(k, in));
            };
        };
        auto param = [](const std::string& name) {
            return [name](RunConfig& c, const std::string& k, const std::vector<std::string>& in) {
                c.params[name] = to_double(k, single(k, in));
            };
        };
        t["spec_version"] = [](RunConfig& c, const std::string& k, const std::vector<std::string>& in) {
            c.spec_version = to_int(k, single(k, in));
            if (c.spec_version != 1) throw ConfigError("unsupported spec_version " + std::to_string(c.spec_version));
        };
        t["model.family"] = str(&RunConfig::family);
        for (const char* p : {"a", "b", "kappa", "c"}) t[std::string("model.params.") + p] = param(p);
        t["model.params.V"] = str(&RunConfig::trig);
        t["model.params.f"] = str(&RunConfig::trig);
        t["model.trig_coeffs"] = [](RunConfig& c, const std::string& k, const std::vector<std::string>& in) {
            c.trig_coeffs.clear();
            for (const auto& v : in) c.trig_coeffs.push_back(to_double(k, v));
        };
        t["model.regularize"] = boolean(&RunConfig::regularize);
        t["model.reg_lower"] = dbl(&RunConfig::reg_lower);
        t["model.reg_upper"] = dbl(&RunConfig::reg_upper);
        t["channel.energy"] = [](RunConfig& c, const std::string& k, const std::vector<std::string>& in) {
            c.energy = to_double(k, single(k, in));
        };
        t["channel.theta0"] = [](RunConfig& c, const std::string& k, const std::vector<std::string>& in) {
            c.theta0 = to_double(k, single(k, in));
        };
        t["channel.order"] = integer(&RunConfig::order);
        t["resonances.grid"] = str(&RunConfig::grid);
        t["resonances.mmax"] = integer(&RunConfig::m_max);
        t["resonances.tol"] = dbl(&RunConfig::res_tol);
        t["resonances.all_targets"] = boolean(&RunConfig::all_targets);
        t["normalform.m0"] = [](RunConfig& c, const std::string& k, const std::vector<std::string>& in) {
            c.m0 = to_int(k, single(k, in));
        };
        t["simulate.shoot"] = boolean(&RunConfig::shoot);
        t["simulate.tmax"] = dbl(&RunConfig::tmax);
        t["simulate.amplitude"] = dbl(&RunConfig::amplitude);
        t["simulate.samples"] = integer(&RunConfig::samples);
        t["simulate.rel_tol"] = dbl(&RunConfig::rel_tol);
        t["geometry.spiral"] = boolean(&RunConfig::spiral);
        t["run.out"] = str(&RunConfig::out);
        t["run.jobs"] = integer(&RunConfig::jobs);
        t["run.seed"] = [](RunConfig& c, const std::string& k, const std::vector<std::string>& in) {
            c.seed = static_cast<unsigned long long>(to_double(k, single(k, in)));
        };
        t["run.error_json"] = boolean(&RunConfig::error_json);
        return t;
    }();
    return table;
}

} // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, fn] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_file(path);
    } catch (const CLI::Error& e) {
        throw ConfigError("cannot read config file " + path + ": " + e.what());
    }
    for (const auto& it : items) {
        if (it.name == "++" || it.name == "--") continue; // section markers
        const std::string key = it.fullname();
        auto f = setters().find(key);
        if (f == setters().end()) throw ConfigError("unknown config key '" + key + "'");
        f->second(cfg, key, it.inputs);
    }
}

namespace {

double need(const RunConfig& cfg, const std::string& p) {
    auto it = cfg.params.find(p);
    if (it == cfg.params.end()) throw ConfigError("model " + cfg.family + " needs parameter --" + p);
    return it->second;
}

TrigPoly need_trig(const RunConfig& cfg, const std::string& flag) {
    if (!cfg.trig_coeffs.empty()) return TrigPoly::from_coeffs(cfg.trig_coeffs);
    if (cfg.trig.empty()) throw ConfigError("model " + cfg.family + " needs --" + flag + " or model.trig_coeffs");
    return TrigPoly::parse(cfg.trig);
}

} // namespace

Model build_model(const RunConfig& cfg) {
    if (cfg.family.empty()) throw ConfigError("a model family is required (--model)");
    std::optional<SmoothStep> reg;
    if (cfg.regularize) reg = SmoothStep{cfg.reg_lower, cfg.reg_upper};
    const std::string& f = cfg.family;
    if (f == "metric11") return Model(MetricExample11{need(cfg, "a")}, reg);
    if (f == "morse") return Model(MorseSphere::global(need_trig(cfg, "V")), reg);
    if (f == "riema2") return Model(Riema2{need(cfg, "a")}, reg);
    if (f == "riema3") return Model(Riema3{need(cfg, "b"), need(cfg, "kappa")}, reg);
    if (f == "spiral") return Model(Spiral{need_trig(cfg, "f"), need(cfg, "c")}, reg);
    if (f == "spiral_conjugate") return Model(SpiralConjugate{need_trig(cfg, "f"), need(cfg, "c")}, reg);
    throw ConfigError("unknown model family '" + f + "' (metric11, morse, riema2, riema3, spiral, spiral_conjugate)");
}

Model pipeline_model(const Model& m) { return m.degree_zero() ? m : degree_zero_form(m); }

Grid parse_grid(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("grid must look like name=lo:hi:step or name=v1,v2,...");
    Grid g;
    g.name = spec.substr(0, eq);
    static const std::vector<std::string> allowed{"a", "b", "kappa", "c", "energy"};
    if (std::find(allowed.begin(), allowed.end(), g.name) == allowed.end())
        throw ConfigError("grid parameter must be one of a, b, kappa, c, energy; got '" + g.name + "'");
    const std::string body = spec.substr(eq + 1);
    if (body.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(body);
        std::string tok;
        while (std::getline(ss, tok, ':')) parts.push_back(to_double("grid", tok));
        if (parts.size() != 3) throw ConfigError("range grid needs lo:hi:step");
        const double lo = parts[0], hi = parts[1], step = parts[2];
        if (!(step > 0) || hi < lo) throw ConfigError("range grid needs step > 0 and hi >= lo");
        const long n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
        if (n > 1000000) throw ConfigError("grid too large");
        for (long i = 0; i <= n; ++i) g.values.push_back(lo + static_cast<double>(i) * step);
    } else {
        std::stringstream ss(body);
        std::string tok;
        while (std::getline(ss, tok, ',')) g.values.push_back(to_double("grid", tok));
    }
    if (g.values.empty()) throw ConfigError("empty grid");
    return g;
}

RunConfig with_value(const RunConfig& cfg, const std::string& name, double value) {
    RunConfig c = cfg;
    if (name == "energy")
        c.energy = value;
    else
        c.params[name] = value;
    return c;
}

} // namespace chanflow
