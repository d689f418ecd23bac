#include <doctest.h>

#include "chanflow/geometry.hpp"
#include "support.hpp"

using namespace chanflow;
using chanflow::test::vec;

namespace {

std::vector<Vec> phase_points(int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Vec> out;
    for (int i = 0; i < count; ++i) out.push_back(vec({u(rng), u(rng), u(rng), u(rng)}));
    return out;
}

std::vector<ScalingField> all_fields() {
    return {EulerField{}, PhaseScalingField{0.5}, PhaseScalingField{2.0 / 3.0}, SpiralField{1.0}, SpiralField{-0.3}};
}

// ratio of the larger to the smaller stable-side eigenvalue magnitude
double eigen_ratio(cd a, cd b) { return std::abs(a) / std::abs(b); }

} // namespace

TEST_CASE("scaling fields are conformally symplectic with factor one") {
    for (const auto& v : all_fields()) {
        CAPTURE(field_name(v));
        for (const auto& e : lie_derivative_alpha(v, phase_points(100, 3))) {
            CHECK(e.alpha == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(e.residual < 1e-8);
        }
    }
    // linear fields: the matrix reproduces the action
    const Vec z = vec({0.3, -1.1, 0.7, 0.2});
    for (const auto& v : all_fields()) CHECK((field_matrix(v, 2) * z - apply_field(v, z)).norm() < 1e-15);
    CHECK((apply_field(EulerField{}, z) - vec({0.3, -1.1, 0.0, 0.0})).norm() == 0.0);
    CHECK((apply_field(PhaseScalingField{0.25}, z) - vec({0.075, -0.275, 0.525, 0.15})).norm() < 1e-15);
}

TEST_CASE("flow of a scaling field scales the symplectic form by exp(t)") {
    const Vec z = vec({0.4, -0.8, 1.2, 0.5});
    for (const auto& v : all_fields()) {
        CAPTURE(field_name(v));
        for (double t : {-2.0, -0.5, 0.0, 0.7, 2.0}) {
            const FlowFactor f = conformal_flow_factor(v, z, t);
            CHECK(f.predicted == doctest::Approx(std::exp(t)).epsilon(1e-10));
            CHECK(f.rel_error < 1e-8);
        }
    }
    CHECK(conformal_flow_factor(EulerField{}, z, 1.0).measured == doctest::Approx(M_E).epsilon(1e-8));
    CHECK(conformal_flow_factor(EulerField{}, z, 0.0).measured == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("commutator of the scaling field with the Hamiltonian field") {
    const auto pts = test::random_points(20, 13, 0.5, 3.0, 1.5);
    SUBCASE("Euler field and a degree-zero Morse model") {
        const auto r = commutator_check(EulerField{}, test::morse_cos(), pts);
        CHECK_FALSE(r.vh_violated);
        CHECK(r.max_vh < 1e-12);
        CHECK(r.max_residual < 1e-6);
        for (const auto& p : r.points) CHECK(p.alpha == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("phase scaling with s = 2/(2 − κ) on Riema3") {
        const auto r = commutator_check(PhaseScalingField{2.0 / 3.0}, Model(Riema3{2.0, -1.0}), pts);
        CHECK_FALSE(r.vh_violated);
        CHECK(r.max_residual < 1e-6);
    }
    SUBCASE("the Euler field does not annihilate raw Riema3") {
        const auto r = commutator_check(EulerField{}, Model(Riema3{2.0, -1.0}), pts);
        CHECK(r.vh_violated);
        CHECK(r.max_vh > 0.1);
        for (const auto& p : r.points) CHECK(p.skipped);
    }
}

TEST_CASE("homogenization") {
    SUBCASE("two-parameter Riema3") {
        const Model raw(Riema3{2.0, -1.0});
        const HomogenizeResult h = homogenize_two_param(raw, -1.0, 2.0);
        CHECK(h.s == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
        CHECK(h.precondition_deviation < 1e-12);
        CHECK(h.check.pass);
        CHECK(h.check.max_deviation < 1e-8);
        CHECK(h.model.degree_zero());
        // h̃ agrees with h on the unit circle when the radial momentum is rescaled
        const PhasePoint p{vec({0.6, 0.8}), vec({0.3, -0.4})};
        const double radial = p.x.dot(p.xi);
        const PhasePoint q{p.x, p.xi + (1 / h.s - 1) * radial * p.x};
        CHECK(eval_h(h.model, p) == doctest::Approx(eval_h(raw, q)).epsilon(1e-14));
        // matches the degree-zero form chosen for the family
        const Model dz = degree_zero_form(raw);
        for (const auto& pt : test::random_points(20, 2, 0.5, 2.0, 1.0))
            CHECK(eval_h(dz, pt) == doctest::Approx(eval_h(h.model, pt)).epsilon(1e-13));
    }
    SUBCASE("joint scaling for Riema2") {
        const HomogenizeResult h = homogenize_joint(Model(Riema2{0.7}));
        CHECK(h.s == 0.5);
        CHECK(h.precondition_deviation < 1e-12);
        CHECK(h.check.pass);
    }
    SUBCASE("κ₁ = 0 leaves a degree-zero model unchanged") {
        const Model m(MetricExample11{1.5});
        const HomogenizeResult h = homogenize_two_param(m, 0.0, 2.0);
        CHECK(h.s == 1.0);
        for (const auto& p : test::random_points(30, 8, 0.5, 3.0, 1.0))
            CHECK(eval_h(h.model, p) == doctest::Approx(eval_h(m, p)).epsilon(1e-13));
    }
    SUBCASE("wrong degrees are rejected") {
        CHECK_THROWS_AS(homogenize_two_param(Model(Riema3{2.0, -1.0}), 1.0, 2.0), HomogeneityPreconditionFailed);
        CHECK_THROWS_AS(homogenize_two_param(Model(Riema3{2.0, -1.0}), 2.0, 2.0), HomogeneityPreconditionFailed);
        CHECK_THROWS_AS(homogenize_two_param(Model(Riema3{2.0, -1.0}), -1.0, 0.0), HomogeneityPreconditionFailed);
        CHECK_THROWS_AS(homogenize_joint(Model(Riema3{2.0, -1.0})), HomogeneityPreconditionFailed);
    }
}

TEST_CASE("Riema3 reference eigenvalues through the pipeline") {
    const double E = 0.5;
    const Model m = homogenize_two_param(Model(Riema3{2.0, -1.0}), -1.0, 2.0).model;
    const auto loc = test::local_at(m, E, 2);
    const auto [r1, r2] = riema3_reference_eigenvalues(2.0, -1.0, E);
    // −(2−κ)/4·√(2E)·(1 ± √(1 − 8κ(b−1)/(2−κ)²)) with b = 2, κ = −1
    CHECK(r1 == doctest::Approx(-0.75 * (1 + std::sqrt(17.0 / 9.0))).epsilon(1e-14));
    CHECK(r2 == doctest::Approx(-0.75 * (1 - std::sqrt(17.0 / 9.0))).epsilon(1e-14));
    REQUIRE(loc.s.beta.size() == 2);
    CHECK(check_pairing(loc.s).max_distance < 1e-8);
    const double ref = eigen_ratio(r1, r2);
    const double got = eigen_ratio(loc.s.beta[0], loc.s.beta[1]);
    CHECK(std::abs(got / ref - 1) < 1e-4);
    CHECK(classify(loc.s) == "saddle");
}

TEST_CASE("logarithmic spiral channels") {
    SUBCASE("f = 2cos, c = 1") {
        const SpiralReport rep = spiral_analysis(TrigPoly::parse("2cos"), 1.0, 1.0);
        REQUIRE(rep.roots.size() == 2);
        const SpiralRoot& a = rep.roots[0];
        CHECK(std::abs(a.theta0 - M_PI / 6) < 1e-10);
        CHECK(std::abs(rep.roots[1].theta0 - 5 * M_PI / 6) < 1e-10);
        const double rho0 = std::exp(-std::sqrt(3.0) / 2);
        CHECK(std::abs(a.rho0 - rho0) < 1e-12);
        const double s = std::sqrt(1 + 8 * std::sqrt(3.0));
        CHECK(std::abs(a.eig1 - cd(-rho0 / 2 * (1 + s))) < 1e-8);
        CHECK(std::abs(a.eig2 - cd(-rho0 / 2 * (1 - s))) < 1e-8);
        CHECK(a.cls == "saddle");
        CHECK(rep.roots[1].cls == "stable_focus");
        CHECK(a.r0 == doctest::Approx(std::exp(-M_PI / 6)));
    }
    SUBCASE("no roots when the slope never reaches 2c/(1+c²)") {
        const SpiralReport rep = spiral_analysis(TrigPoly::parse("0.1cos"), 10.0, 1.0);
        CHECK(rep.no_roots);
        CHECK(rep.roots.empty());
    }
    SUBCASE("tangential roots are flagged degenerate") {
        // −f′ = sin θ touches 1 = 2c/(1+c²) at θ = π/2 for c = 1
        const SpiralReport rep = spiral_analysis(TrigPoly::parse("cos"), 1.0, 1.0);
        REQUIRE(rep.roots.size() == 1);
        CHECK(rep.roots[0].theta0 == doctest::Approx(M_PI / 2).epsilon(1e-6));
        CHECK(rep.roots[0].degenerate);
    }
    SUBCASE("invalid input") {
        CHECK_THROWS_AS(spiral_analysis(TrigPoly{}, 1.0, 1.0), InvalidModel);
        CHECK_THROWS_AS(spiral_analysis(TrigPoly::parse("cos"), -1.0, 1.0), InvalidModel);
    }
    SUBCASE("pipeline on the degree-zero conjugate reproduces the saddle ratio") {
        const TrigPoly f = TrigPoly::parse("2cos");
        const SpiralReport rep = spiral_analysis(f, 1.0, 1.0);
        const auto loc = test::local_at(Model(SpiralConjugate{f, 1.0}), 1.0, 2, M_PI / 6);
        const double th = std::atan2(loc.channel.omega[1], loc.channel.omega[0]);
        CHECK(std::abs(th - M_PI / 6) < 1e-8);
        const double ref = eigen_ratio(rep.roots[0].eig1, rep.roots[0].eig2);
        const double got = eigen_ratio(loc.s.beta[0], loc.s.beta[1]);
        CHECK(std::abs(got / ref - 1) < 1e-3);
    }
}
