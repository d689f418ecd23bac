#pragma once

#include "chanflow/config.hpp"
#include "chanflow/report.hpp"

namespace chanflow {

// channel point, local model and spectrum for one configuration
struct Pipeline {
    Model model;
    ChannelPoint channel;
    LocalModel local;
    Spectrum spectrum;
};
Pipeline run_pipeline(const RunConfig& cfg, int order);

// each command returns its JSON report and writes its files under cfg.out when set
json cmd_analyze(const RunConfig& cfg);
json cmd_resonances(const RunConfig& cfg);
json cmd_normalform(const RunConfig& cfg);
json cmd_simulate(const RunConfig& cfg);
json cmd_geometry(const RunConfig& cfg);

json error_json(const std::string& kind, const std::string& message, int exit_code);

// full command-line entry point; returns the process exit code (0 ok, 2 solver error, 3 config error)
int run_cli(int argc, const char* const* argv);

} // namespace chanflow
