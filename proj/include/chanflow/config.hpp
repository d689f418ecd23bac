#pragma once

#include "chanflow/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chanflow {

struct RunConfig {
    int spec_version = 1;

    // model
    std::string family;
    std::map<std::string, double> params;     // a, b, kappa, c
    std::string trig;                         // V (morse) or f (spiral) expression
    std::vector<double> trig_coeffs;          // alternative to `trig`: [a0, a1, b1, a2, b2, ...]
    bool regularize = false;
    double reg_lower = 0.5;
    double reg_upper = 1.0;

    // channel and reduction
    std::optional<double> energy;
    std::optional<double> theta0;
    int order = 8;

    // resonances
    std::string grid;
    int m_max = 5;
    double res_tol = 1e-9;
    bool all_targets = false;

    // normal form
    std::optional<int> m0;

    // simulate
    bool shoot = false;
    double tmax = 1e4;
    double amplitude = 0.05;
    int samples = 400;
    double rel_tol = 1e-12;

    // geometry
    bool spiral = false;

    // run
    std::string out;
    int jobs = 1;
    unsigned long long seed = 12345;
    bool error_json = false;
};

// keys accepted in config files (section.key)
const std::vector<std::string>& config_keys();

// reads a TOML/INI style file into cfg; unknown keys and bad values raise ConfigError
void load_config_file(const std::string& path, RunConfig& cfg);

// the model described by cfg (raw family, before any degree-zero transform)
Model build_model(const RunConfig& cfg);
// the model fed to the channel pipeline: degree-zero families as given, others homogenized
Model pipeline_model(const Model& m);

struct Grid {
    std::string name;             // a, b, kappa, c or energy
    std::vector<double> values;
};
// "a=0.5:3:0.25" (inclusive range) or "a=0.75,2,1.4142"
Grid parse_grid(const std::string& spec);

// copy of cfg with one named parameter (or the energy) replaced
RunConfig with_value(const RunConfig& cfg, const std::string& name, double value);

} // namespace chanflow
