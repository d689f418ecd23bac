#pragma once

#include "chanflow/poly.hpp"
#include "chanflow/spectral.hpp"

#include <boost/rational.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace chanflow {

struct ResonanceHit {
    int target_index = 0;
    MultiIndex alpha;
    int order = 0;
    double residual = 0.0; // |β_j − β·α|
};

struct ResonanceOptions {
    int m_max = 5;
    double tol = 1e-9;
    std::vector<int> targets{0}; // empty means every eigenvalue
    double candidate_cap = 5e7;
};

// all α with 2 <= |α| <= m_max and |β_j − β·α| < tol, ordered by target, order, basis order
std::vector<ResonanceHit> detect_resonances(const std::vector<cd>& beta, const ResonanceOptions& opt = {});

using Rational = boost::rational<long long>;
struct RationalComplex {
    Rational re;
    Rational im;
};

// exact decision of β_j = β·α for rational input (residual reported as 0)
std::vector<ResonanceHit> detect_resonances_exact(const std::vector<RationalComplex>& beta, int m_max,
                                                  const std::vector<int>& targets = {0});

std::optional<int> minimal_order(const std::vector<ResonanceHit>& hits, int target = 0);

struct ScanPoint {
    double value = 0.0;
    std::vector<cd> beta;
    std::optional<int> min_order;
    std::vector<ResonanceHit> hits;
    std::string error; // error name when the point could not be analyzed
    std::string error_message;
};

struct ScanReport {
    std::vector<ScanPoint> points;
    // maximal runs of consecutive grid values without hits (and without errors)
    std::vector<std::pair<double, double>> free_windows;
};

// spectrum_at(value) returns the ordered eigenvalue vector (stable first); errors are recorded per point
ScanReport scan_resonances(const std::vector<double>& grid, const std::function<std::vector<cd>(double)>& spectrum_at,
                           const ResonanceOptions& opt, int jobs = 1);

} // namespace chanflow
