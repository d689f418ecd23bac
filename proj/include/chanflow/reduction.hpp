#pragma once

#include "chanflow/model.hpp"
#include "chanflow/poly.hpp"

#include <optional>
#include <vector>

namespace chanflow {

struct ChannelPoint {
    double E = 0.0;
    Vec omega;
    Vec xi;
    double k = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

struct ChannelGuess {
    Vec omega;
    Vec xi;
    double k = 1.0;
};

struct ChannelCurve {
    std::vector<ChannelPoint> points;
};

// Orthonormal basis of R^n, last column = channel direction; the first n-1
// columns span the transverse space.
struct Frame {
    Mat basis;
    int n() const { return static_cast<int>(basis.rows()); }
    Mat transverse() const { return basis.leftCols(basis.cols() - 1); }
    Vec direction() const { return basis.col(basis.cols() - 1); }
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 50;
    int max_halvings = 8;
};

ChannelPoint find_channel_point(const Model& m, double E, const ChannelGuess& guess, const NewtonOptions& opt = {});
// Residual vector of the 2n+2 channel equations.
Vec channel_residual(const Model& m, double E, const Vec& omega, const Vec& xi, double k);
// default starting point per family (Morse uses critical point θ0 if given)
ChannelGuess default_guess(const Model& m, double E, std::optional<double> theta0 = std::nullopt);

ChannelCurve continue_channel(const Model& m, double E0, double E1, const ChannelGuess& seed, int steps,
                              const NewtonOptions& opt = {});

Frame make_frame(const Vec& omega);
// continue a frame: Gram–Schmidt of the previous transverse vectors against the new direction
Frame make_frame(const Vec& omega, const Frame& previous);
std::vector<Frame> build_frame(const ChannelCurve& curve);

struct ReductionOptions {
    double radius = 0.3;
    double mu_tol = 1e-12;
    int mu_max_iter = 40;
};

// μ with h(x_n(ω + P u), ξ_E + P η + μ ω) = E; equals −g(u, η, E)
double solve_mu(const Model& m, const ChannelPoint& c, const Frame& f, const Vec& u, const Vec& eta,
                const ReductionOptions& opt = {});

// Taylor polynomial of g in w = (u, η) up to total degree `order`
RPoly taylor_g(const Model& m, const ChannelPoint& c, const Frame& f, int order, const ReductionOptions& opt = {});
// nested central differences of solve_mu with Richardson extrapolation (also used as an oracle)
RPoly taylor_g_fd(const Model& m, const ChannelPoint& c, const Frame& f, int order, const ReductionOptions& opt = {});

struct LocalModel {
    Model model;
    ChannelPoint channel;
    Frame frame;
    RPoly g_taylor;
    Mat A;
    Mat B;
    ReductionOptions options;

    int dim() const { return static_cast<int>(A.rows()); }
};

LocalModel build_local_model(const Model& m, const ChannelPoint& c, const Frame& f, int order = 8,
                             const ReductionOptions& opt = {});
Mat hessian_from_taylor(const RPoly& g);
// B = [[0, I], [−I, 0]] A − diag(I, 0)
Mat matrix_B(const Mat& A);
inline Mat matrix_B(const LocalModel& lm) { return matrix_B(lm.A); }

// exact nonlinear reduced field (∇_η g − u, −∇_u g) at w = (u, η)
Vec reduced_field(const LocalModel& lm, const Vec& w);
// Jacobian of reduced_field at w by central differences
Mat reduced_jacobian_fd(const LocalModel& lm, const Vec& w, double h = 1e-6);
// Taylor polynomials of the reduced field up to degree `order` (needs g to degree order+1)
std::vector<RPoly> field_taylor(const RPoly& g, int order);

struct ChartPoint {
    Vec w;
    double tau = 0.0;
    double xn = 1.0;
};

ChartPoint to_chart(const LocalModel& lm, const PhasePoint& p);
// phase point at x_n with transverse data w on the energy shell
PhasePoint from_chart(const LocalModel& lm, const Vec& w, double xn = 1.0);
// ∂_μ h = ω · ∇_ξ h
double mu_derivative(const LocalModel& lm, const PhasePoint& p);

} // namespace chanflow
