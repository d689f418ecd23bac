#pragma once

#include "chanflow/dynamics.hpp"
#include "chanflow/normalform.hpp"
#include "chanflow/reduction.hpp"
#include "chanflow/spectral.hpp"

#include <initializer_list>
#include <random>

namespace chanflow::test {

inline Vec vec(std::initializer_list<double> v) {
    Vec r(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) r[i++] = x;
    return r;
}

inline Model free_model() { return Model(MorseSphere::global(TrigPoly{})); }
inline Model morse_cos() { return Model(MorseSphere::global(TrigPoly::parse("cos"))); }

// V = cos θ + b sin³θ: critical at θ = 0 with V″ = −1 and V‴ = 6b, so the reduced
// field has non-vanishing even-order terms
inline Model morse_asymmetric(double b) {
    return Model(MorseSphere::global(TrigPoly::from_coeffs({0.0, 1.0, 0.75 * b, 0.0, 0.0, 0.0, -0.25 * b})));
}

struct Local {
    ChannelPoint channel;
    LocalModel lm;
    Spectrum s;
};

// decompose = false leaves the spectrum empty (for non-hyperbolic channels such as the free particle)
inline Local local_at(const Model& m, double E, int order, std::optional<double> theta0 = std::nullopt,
                      bool decompose_B = true) {
    ChannelPoint c = find_channel_point(m, E, default_guess(m, E, theta0));
    LocalModel lm = build_local_model(m, c, make_frame(c.omega), order);
    Spectrum s = decompose_B ? decompose(lm.B) : Spectrum{};
    return {c, std::move(lm), std::move(s)};
}

inline std::vector<PhasePoint> random_points(int count, unsigned seed, double rmin, double rmax, double pmax) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> r(rmin, rmax), ang(0.0, 2 * M_PI), p(-pmax, pmax);
    std::vector<PhasePoint> out;
    for (int i = 0; i < count; ++i) {
        const double rr = r(rng), a = ang(rng);
        out.push_back({vec({rr * std::cos(a), rr * std::sin(a)}), vec({p(rng), p(rng)})});
    }
    return out;
}

} // namespace chanflow::test
