#pragma once

#include "chanflow/errors.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace chanflow {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

struct DecomposeOptions {
    double hyper_tol = 1e-6;
    double cluster_tol = 1e-7;
    double nilpotent_max = 0.1;
    double block_tol = 1e-8;
    double cond_max = 1e10;
    double separation_max = 1e4; // bound on the block-separating transform, relative to |B|
};

// B = T D T⁻¹ with D = diag(B^s, B^u) block diagonal; stable columns first.
struct Spectrum {
    std::vector<cd> beta; // eigenvalues in column order
    int ns = 0;
    int nu = 0;
    CMat T;
    CMat Tinv;
    CMat D;                    // block-diagonal part of T⁻¹ B T (each cluster lower triangular)
    std::vector<int> cluster;  // cluster id per column
    CVec v_row;                // first row of T⁻¹, left eigenvector for lambda_tracked
    cd lambda_tracked;
    double block_residual = 0.0;  // off-block norm of T⁻¹ B T
    double nilpotent_norm = 0.0;  // largest within-cluster strictly lower norm

    std::vector<cd> beta_s() const { return {beta.begin(), beta.begin() + ns}; }
    std::vector<cd> beta_u() const { return {beta.begin() + ns, beta.end()}; }
};

Spectrum decompose(const Eigen::MatrixXd& B, const DecomposeOptions& opt = {});
Spectrum decompose(const CMat& B, const DecomposeOptions& opt = {});

struct PairingReport {
    std::vector<double> distance; // per eigenvalue, to the nearest −1−λ candidate
    double max_distance = 0.0;
    bool pass = false;
};

PairingReport check_pairing(const std::vector<cd>& eigenvalues, double tol = 1e-6);
inline PairingReport check_pairing(const Spectrum& s, double tol = 1e-6) { return check_pairing(s.beta, tol); }

// "saddle" (both signs), "stable" (all Re < 0), "unstable" (all Re > 0)
std::string classify(const Spectrum& s);

struct TrackedEigen {
    double E = 0.0;
    cd lambda;
    CVec v;                   // left eigenvector (unit norm, reference component real positive)
    double overlap = 1.0;     // |⟨v_prev, v⟩|
    double separation = 0.0;  // distance to the nearest other eigenvalue
    bool below_minus_one = false; // Re λ < −1
};

struct TrackOptions {
    int target = 0; // column index in the first point's ordered spectrum
    double collision_tol = 1e-6;
    DecomposeOptions decompose;
};

std::vector<TrackedEigen> track_eigenvector(const std::vector<double>& energies, const std::vector<Eigen::MatrixXd>& Bs,
                                            const TrackOptions& opt = {});

// smallest integer strictly greater than max(4, max_j (1 + Re β_j)/(−Re β_j)) over stable β_j
int compute_m0(const std::vector<cd>& beta_s);
inline int compute_m0(const Spectrum& s) { return compute_m0(s.beta_s()); }

} // namespace chanflow
