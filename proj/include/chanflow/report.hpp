#pragma once

#include "chanflow/dynamics.hpp"
#include "chanflow/fit.hpp"
#include "chanflow/geometry.hpp"
#include "chanflow/normalform.hpp"
#include "chanflow/resonance.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace chanflow {

using json = nlohmann::ordered_json;

inline constexpr int kSpecVersion = 1;

// column headers of the CSV outputs
inline const std::vector<std::string> kResonanceColumns{"grid_value", "min_order", "alpha", "target", "residual"};
inline const std::vector<std::string> kObservableColumns{"t",      "tau",       "q_s",       "q_u",  "q_minus",
                                                         "q_plus", "gamma_abs", "Gamma_abs", "clock"};
inline const std::vector<std::string> kSpiralColumns{"theta0",   "f0",       "f2",       "rho0", "eig_re_1",
                                                     "eig_im_1", "eig_re_2", "eig_im_2", "class"};

// shortest round-trip text for a double ("%.17g")
std::string fmt(double v);

json to_json(const Vec& v);
json to_json(const Mat& m);
json to_json(cd z);
json to_json(const std::vector<cd>& v);
json to_json(const ChannelPoint& c);
json to_json(const Spectrum& s);
json to_json(const PairingReport& p);
json to_json(const ExponentFit& f);
json to_json(const NormalFormGamma& nf);
json to_json(const HomogeneityReport& r);
json to_json(const SpiralRoot& r);
json model_echo(const Model& m);

void write_resonance_csv(std::ostream& os, const ScanReport& rep);
void write_observable_csv(std::ostream& os, const ObservableSeries& obs);
void write_spiral_csv(std::ostream& os, const SpiralReport& rep);

} // namespace chanflow
