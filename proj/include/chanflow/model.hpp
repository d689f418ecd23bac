#pragma once

#include "chanflow/dual.hpp"
#include "chanflow/errors.hpp"
#include "chanflow/poly.hpp"
#include "chanflow/smooth_step.hpp"
#include "chanflow/trig_poly.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace chanflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct PhasePoint {
    Vec x;
    Vec xi;
};

class Model;

// h = ½(1 + a x₂²/|x|²)⁻¹ ξ₁² + ½ ξ₂²
struct MetricExample11 {
    double a = 1.0;
};

// h = ½|ξ|² + V(x̂). For n = 2 V is a trig polynomial in the polar angle; otherwise
// V is given near one critical point ω by V0 + ½ Σ q_j (x̂·e_j)² with e_j ⊥ ω.
struct MorseSphere {
    int n = 2;
    TrigPoly V;
    bool local = false;
    Vec omega;
    double V0 = 0.0;
    Mat tangent; // n x (n-1), columns e_j
    Vec q;

    static MorseSphere global(const TrigPoly& V);
    static MorseSphere critical(const Vec& omega, double V0, const Vec& q);
};

// h = ½(|x|² − a ξ₂²)⁻¹ |ξ|²
struct Riema2 {
    double a = 1.0;
};

// h = ½(x₁² + b x₂²)^{κ/2} |ξ|²
struct Riema3 {
    double b = 2.0;
    double kappa = -1.0;
};

// h = ½ exp(f(θ − c ln r)) |ξ|²
struct Spiral {
    TrigPoly f;
    double c = 1.0;
};

// degree-zero conjugate of Spiral: ½ e^{f(θ)} ((ξ·r̂ − c ξ·θ̂)² + (ξ·θ̂)²)
struct SpiralConjugate {
    TrigPoly f;
    double c = 1.0;
};

// h̃(x, ξ) = h(x̂, ξ + (1/s − 1)⟨x̂, ξ⟩ x̂)
struct Homogenized {
    std::shared_ptr<const Model> inner;
    double s = 0.5;
};

struct Generic {
    using Fn = std::function<double(const Vec& x, const Vec& xi)>;
    using GradFn = std::function<void(const Vec& x, const Vec& xi, Vec& gx, Vec& gxi)>;
    int n = 2;
    Fn h;
    GradFn grad; // optional
    bool degree_zero = true;
    std::string label = "generic";
};

using Family = std::variant<MetricExample11, MorseSphere, Riema2, Riema3, Spiral, SpiralConjugate, Homogenized, Generic>;

class Model {
public:
    explicit Model(Family f, std::optional<SmoothStep> regularization = std::nullopt);

    int dim() const { return n_; }
    const Family& family() const { return family_; }
    const std::optional<SmoothStep>& regularization() const { return reg_; }
    std::string name() const;
    // built-in formula (jets and exact gradients available)
    bool is_builtin() const { return !std::holds_alternative<Generic>(family_); }
    // declared h(λx, ξ) = h(x, ξ)
    bool degree_zero() const;

    template <class S>
    S evaluate(const std::vector<S>& x, const std::vector<S>& xi) const;

private:
    Family family_;
    std::optional<SmoothStep> reg_;
    int n_ = 2;
};

double eval_h(const Model& m, const PhasePoint& p);

struct Gradient {
    Vec gx;
    Vec gxi;
};

// exact (forward-mode) for built-ins; analytic or finite differences for generic callables
Gradient grad(const Model& m, const PhasePoint& p);
// 4th-order central differences, Richardson-extrapolated, step 1e-4(1+|coordinate|)
Gradient fd_grad(const Model& m, const PhasePoint& p);
// 2n x 2n in (x, ξ) ordering
Mat hessian(const Model& m, const PhasePoint& p);

struct HomogeneityReport {
    double max_deviation = 0.0;
    int samples_used = 0;
    double tolerance = 0.0;
    bool pass = false;
};

HomogeneityReport check_homogeneity(const Model& m, int sample_count, const std::vector<double>& scales,
                                    double r0 = 0.0, double tol = 1e-8, unsigned long long seed = 12345);

// Homogenized wrappers for families that are not degree-zero in x.
// Riema3: s = 2/(2−κ); Riema2: joint homogeneity, s = ½; Spiral: SpiralConjugate.
Model degree_zero_form(const Model& m);

} // namespace chanflow
