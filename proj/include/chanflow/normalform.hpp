#pragma once

// Poincaré recursion for the scalar observable Γ = γ₁ + Σ c_α γ^α in the
// eigen-coordinates γ = T⁻¹w of the reduced field. Everything runs in τ-time.

#include "chanflow/poly.hpp"
#include "chanflow/reduction.hpp"
#include "chanflow/spectral.hpp"

#include <vector>

namespace chanflow {

struct NormalFormOptions {
    double singular_rel = 1e-8;  // σ_min(B̃ − β₁I) below this times ‖B̃‖_F is a resonance
    double solve_tol = 1e-10;
    double post_tol = 1e-9;
};

struct NormalFormGamma {
    int m0 = 0;
    int dim = 0;
    cd beta1;
    CPoly gamma;                          // γ^(m0) in γ coordinates, degree m0
    std::vector<std::vector<cd>> d;       // per order m = 2..m0 (index m−2): order-m data with R_m = β₁ d
    std::vector<double> order_residual;   // ‖(B̃ − β₁I)c + β₁d‖ per order
    double post_residual = 0.0;           // max coefficient of dΓ/dτ − β₁Γ through order m0
    CMat Tinv;
    CVec base;                            // first row of T⁻¹
    cd c_l;                               // normalisation for the real observable
    int l_index = 0;                      // coordinate of w used for c_l
    bool c_l_from_eta = true;

    // coefficients of order m as (multi-index, value) pairs
    std::vector<std::pair<MultiIndex, cd>> coefficients(int m) const;
};

// reduced field in γ coordinates from its Taylor polynomials in w
std::vector<CPoly> field_in_gamma(const std::vector<RPoly>& field_w, const Spectrum& s);
// same from a local model, Taylor degree `degree` (recomputes the g jet when needed)
std::vector<CPoly> field_in_gamma(const LocalModel& lm, const Spectrum& s, int degree);

// matrix of c ↦ order-m part of ∇(Σ c_α γ^α)·(Dγ) on the order-m monomials
CMat homological_matrix(const CMat& D, int m);

// solves (B̃ − β₁I)c = −β₁ d; throws ResonanceDetected(order m) when near-singular
std::vector<cd> solve_order(int m, const std::vector<cd>& d, cd beta1, const CMat& Btilde,
                            const NormalFormOptions& opt = {}, double* residual = nullptr);

NormalFormGamma build_gamma(const std::vector<CPoly>& field_gamma, const CMat& D, cd beta1, int m0,
                            const NormalFormOptions& opt = {});
NormalFormGamma build_gamma(const LocalModel& lm, const Spectrum& s, int m0, const NormalFormOptions& opt = {});

// ∇p · G truncated to the basis of p
CPoly lie_derivative(const CPoly& p, const std::vector<CPoly>& field);

CVec to_gamma(const NormalFormGamma& nf, const Vec& w);
cd eval_gamma(const NormalFormGamma& nf, const Vec& w);
// Re(Γ / c_l)
double real_observable(const NormalFormGamma& nf, const Vec& w);

// dΓ/dτ − β₁Γ restricted to orders m0+1 .. 2m0; exact when field_gamma reaches degree 2m0
CPoly residual_decay(const NormalFormGamma& nf, const std::vector<CPoly>& field_gamma);
CPoly residual_decay(const NormalFormGamma& nf, const LocalModel& lm, const Spectrum& s);

} // namespace chanflow
