#pragma once

// Conformal scaling fields, Lie-derivative and bracket checks, two-parameter
// homogenization and the logarithmic-spiral channel analysis.

#include "chanflow/model.hpp"
#include "chanflow/spectral.hpp"
#include "chanflow/trig_poly.hpp"

#include <string>
#include <variant>
#include <vector>

namespace chanflow {

// Σ x_j ∂_{x_j}
struct EulerField {};
// Σ (s x_j ∂_{x_j} + (1−s) ξ_j ∂_{ξ_j})
struct PhaseScalingField {
    double s = 0.5;
};
// (x₁−cx₂)∂_{x₁} + (cx₁+x₂)∂_{x₂} − cξ₂∂_{ξ₁} + cξ₁∂_{ξ₂}; n = 2 only
struct SpiralField {
    double c = 1.0;
};
using ScalingField = std::variant<EulerField, PhaseScalingField, SpiralField>;

std::string field_name(const ScalingField& v);
// the field is z ↦ M z on phase space, z = (x, ξ)
Mat field_matrix(const ScalingField& v, int n);
Vec apply_field(const ScalingField& v, const Vec& z);

struct AlphaEstimate {
    double alpha = 0.0;
    double residual = 0.0; // ‖d(i_v ω) − α ω‖_F
};

// L_v ω = d(i_v ω) with ω = Σ dξ_j ∧ dx_j, by central differences of the 1-form coefficients
AlphaEstimate lie_derivative_alpha(const ScalingField& v, const Vec& z, double step = 1e-5);
std::vector<AlphaEstimate> lie_derivative_alpha(const ScalingField& v, const std::vector<Vec>& points,
                                                double step = 1e-5);

struct CommutatorPoint {
    double vh = 0.0;          // |v·∇h| / (|v||∇h|)
    bool skipped = false;     // vh = 0 failed, bracket not evaluated
    double alpha = 0.0;
    double residual = 0.0;    // |[v, v_h] + α v_h| / |v_h|
};
struct CommutatorReport {
    std::vector<CommutatorPoint> points;
    double max_residual = 0.0;     // over evaluated points
    double max_vh = 0.0;
    bool vh_violated = false;
    double vh_tol = 1e-8;
};
CommutatorReport commutator_check(const ScalingField& v, const Model& m, const std::vector<PhasePoint>& points,
                                  double vh_tol = 1e-8);

struct FlowFactor {
    double measured = 0.0;   // ω(J u, J w) / ω(u, w), J = flow Jacobian
    double predicted = 0.0;  // exp ∫₀ᵗ α(φ_s(z)) ds
    double rel_error = 0.0;
};
FlowFactor conformal_flow_factor(const ScalingField& v, const Vec& z, double t, unsigned long long seed = 7);

struct HomogenizeResult {
    Model model;
    double s = 0.0;
    double precondition_deviation = 0.0;
    HomogeneityReport check;
};

// h(λ₁x, λ₂ξ) = λ₁^{κ₁} λ₂^{κ₂} h(x, ξ) ⟹ h̃(x, ξ) = h(x̂, ξ + (1/s − 1)⟨x̂, ξ⟩x̂), s = κ₂/(κ₂ − κ₁)
HomogenizeResult homogenize_two_param(const Model& m, double kappa1, double kappa2, unsigned long long seed = 11);
// h(λx, λξ) = h(x, ξ) ⟹ same change of variables with s = ½
HomogenizeResult homogenize_joint(const Model& m, unsigned long long seed = 11);

// reference eigenvalues −(2−κ)/4 √(2E) {1 ± √(1 − 8κ(b−1)/(2−κ)²)} for ½(x₁² + b x₂²)^{κ/2}|ξ|²
std::pair<double, double> riema3_reference_eigenvalues(double b, double kappa, double E);

struct SpiralRoot {
    double theta0 = 0.0;
    double r0 = 0.0;   // exp(−θ₀/c), one representative of the family
    double f0 = 0.0;
    double f2 = 0.0;
    double rho0 = 0.0;
    cd eig1, eig2;
    std::string cls;   // saddle, stable_focus, stable_node, degenerate
    bool degenerate = false;
};
struct SpiralReport {
    std::vector<SpiralRoot> roots;
    bool no_roots = false;
};
// roots of −f′(θ) = 2c/(1+c²) on [0, 2π) with the linearized reduced eigenvalues at each
SpiralReport spiral_analysis(const TrigPoly& f, double c, double E);

} // namespace chanflow
