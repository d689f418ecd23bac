#pragma once

#include <stdexcept>
#include <string>

namespace chanflow {

// Base class for all solver errors; kind() is the stable error name used in reports.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }
    // config-type errors map to exit code 3, everything else to 2
    virtual bool is_config() const noexcept { return false; }

private:
    std::string kind_;
};

#define CHANFLOW_ERROR(Name)                                                  \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& msg) : Error(#Name, msg) {}          \
    };

CHANFLOW_ERROR(EvaluationAtSingularity)
CHANFLOW_ERROR(NewtonDiverged)
CHANFLOW_ERROR(NonTransversal)
CHANFLOW_ERROR(ImplicitSolveFailed)
CHANFLOW_ERROR(JetIllConditioned)
CHANFLOW_ERROR(HyperbolicityViolated)
CHANFLOW_ERROR(DefectiveBeyondTolerance)
CHANFLOW_ERROR(EigenvalueCollision)
CHANFLOW_ERROR(CombinatorialBudgetExceeded)
CHANFLOW_ERROR(NoStableDirections)
CHANFLOW_ERROR(EnergyBudgetExceeded)
CHANFLOW_ERROR(StepUnderflow)
CHANFLOW_ERROR(ChartExit)
CHANFLOW_ERROR(InsufficientSamples)
CHANFLOW_ERROR(RefinementFailed)
CHANFLOW_ERROR(HomogeneityPreconditionFailed)

#undef CHANFLOW_ERROR

class BranchLost : public Error {
public:
    BranchLost(const std::string& msg, double last_good_energy)
        : Error("BranchLost", msg), last_good_energy_(last_good_energy) {}
    double last_good_energy() const noexcept { return last_good_energy_; }

private:
    double last_good_energy_;
};

class ResonanceDetected : public Error {
public:
    ResonanceDetected(const std::string& msg, int order)
        : Error("ResonanceDetected", msg), order_(order) {}
    int order() const noexcept { return order_; }

private:
    int order_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("ConfigError", msg) {}
    bool is_config() const noexcept override { return true; }
};

class InvalidModel : public Error {
public:
    explicit InvalidModel(const std::string& msg) : Error("InvalidModel", msg) {}
    bool is_config() const noexcept override { return true; }
};

} // namespace chanflow
