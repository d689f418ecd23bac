#include <doctest.h>

#include "support.hpp"

using namespace chanflow;
using chanflow::test::vec;

namespace {

double coeff(const RPoly& g, std::initializer_list<int> a) { return g.coeff(MultiIndex(a)); }

} // namespace

TEST_CASE("channel points: reference solutions") {
    SUBCASE("free particle") {
        const Model m = test::free_model();
        const auto c = find_channel_point(m, 0.5, {vec({0.0, 1.0}), vec({0.0, 0.9}), 0.8});
        CHECK((c.omega - vec({0.0, 1.0})).norm() < 1e-12);
        CHECK((c.xi - vec({0.0, 1.0})).norm() < 1e-10);
        CHECK(c.k == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("Morse cos, E = 2") {
        const Model m = test::morse_cos();
        const auto c = find_channel_point(m, 2.0, default_guess(m, 2.0, 0.0));
        CHECK((c.omega - vec({1.0, 0.0})).norm() < 1e-12);
        CHECK((c.xi - vec({std::sqrt(2.0), 0.0})).norm() < 1e-10);
        CHECK(c.k == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    }
    SUBCASE("metric11, a = 2, E = 0.5") {
        const Model m(MetricExample11{2.0});
        const auto c = find_channel_point(m, 0.5, default_guess(m, 0.5));
        CHECK((c.omega - vec({1.0, 0.0})).norm() < 1e-12);
        CHECK((c.xi - vec({1.0, 0.0})).norm() < 1e-10);
        CHECK(c.k == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("invariants from a perturbed guess") {
        const Model m(MorseSphere::global(TrigPoly::parse("cos + 0.3sin2")));
        ChannelGuess g = default_guess(m, 3.0);
        g.omega = (g.omega + vec({0.02, -0.03})).normalized();
        g.k *= 1.1;
        const auto c = find_channel_point(m, 3.0, g);
        CHECK(std::abs(c.omega.norm() - 1.0) < 1e-12);
        CHECK(c.k > 0);
        CHECK(channel_residual(m, 3.0, c.omega, c.xi, c.k).lpNorm<Eigen::Infinity>() < 1e-10);
    }
    SUBCASE("no solution below the potential maximum") {
        const Model m = test::morse_cos();
        CHECK_THROWS_AS(find_channel_point(m, 0.5, {vec({1.0, 0.0}), vec({0.1, 0.0}), 0.1}), Error);
    }
}

TEST_CASE("channel continuation") {
    SUBCASE("Morse cos: fixed direction, k = sqrt(2(E - 1))") {
        const Model m = test::morse_cos();
        const auto curve = continue_channel(m, 1.5, 3.0, default_guess(m, 1.5, 0.0), 16);
        REQUIRE(curve.points.size() == 17);
        for (const auto& p : curve.points) {
            CHECK((p.omega - vec({1.0, 0.0})).norm() < 1e-10);
            CHECK(p.k == doctest::Approx(std::sqrt(2 * (p.E - 1.0))).epsilon(1e-10));
        }
        for (std::size_t i = 1; i < curve.points.size(); ++i)
            CHECK((curve.points[i].omega - curve.points[i - 1].omega).norm() < 0.2);
    }
    SUBCASE("free particle: k = sqrt(2E)") {
        const Model m = test::free_model();
        const auto curve = continue_channel(m, 0.2, 4.0, default_guess(m, 0.2), 10);
        for (const auto& p : curve.points) CHECK(p.k == doctest::Approx(std::sqrt(2 * p.E)).epsilon(1e-10));
    }
    SUBCASE("crossing the potential value loses the branch") {
        const Model m = test::morse_cos();
        try {
            continue_channel(m, 1.5, 0.5, default_guess(m, 1.5, 0.0), 10);
            FAIL("expected BranchLost");
        } catch (const BranchLost& e) {
            CHECK(e.last_good_energy() >= 1.0);
            CHECK(e.last_good_energy() <= 1.5);
        }
    }
}

TEST_CASE("frames") {
    const Frame f2 = make_frame(vec({1.0, 0.0}));
    CHECK(std::abs(std::abs(f2.basis(1, 0)) - 1.0) < 1e-15);
    CHECK((f2.direction() - vec({1.0, 0.0})).norm() == 0.0);

    const Frame f3 = make_frame(vec({0.0, 0.0, 1.0}));
    CHECK((f3.basis.transpose() * f3.basis - Mat::Identity(3, 3)).norm() < 1e-12);
    CHECK((f3.direction() - vec({0.0, 0.0, 1.0})).norm() < 1e-15);

    // a slowly rotating direction gives a continuously oriented frame
    ChannelCurve curve;
    for (int i = 0; i <= 40; ++i) {
        const double a = 0.1 * i;
        ChannelPoint p;
        p.E = 1.0 + i;
        p.omega = vec({std::cos(a), std::sin(a) * 0.6, std::sin(a) * 0.8});
        p.xi = p.omega;
        p.k = 1.0;
        curve.points.push_back(p);
    }
    const auto frames = build_frame(curve);
    REQUIRE(frames.size() == curve.points.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        CHECK((frames[i].basis.transpose() * frames[i].basis - Mat::Identity(3, 3)).norm() < 1e-12);
        CHECK((frames[i].direction() - curve.points[i].omega).norm() < 1e-12);
        if (i > 0)
            for (int j = 0; j < 2; ++j) CHECK(frames[i].basis.col(j).dot(frames[i - 1].basis.col(j)) > 0);
    }
}

TEST_CASE("implicit solve for mu") {
    SUBCASE("vanishes at the channel point") {
        const auto L = test::local_at(Model(MetricExample11{1.0}), 0.5, 2);
        CHECK(std::abs(solve_mu(L.lm.model, L.channel, L.lm.frame, vec({0.0}), vec({0.0}))) < 1e-15);
    }
    SUBCASE("Morse closed form") {
        const double E = 2.0;
        const auto L = test::local_at(test::morse_cos(), E, 2, 0.0);
        const double k = L.channel.k;
        for (double u : {-0.2, -0.05, 0.1, 0.2})
            for (double eta : {-0.15, 0.0, 0.1}) {
                // ω + u e with e ⊥ ω has polar angle ±atan(u); cos is even so the sign is irrelevant
                const double closed = std::sqrt(2 * E - eta * eta - 2 * std::cos(std::atan(u))) - k;
                CHECK(solve_mu(L.lm.model, L.channel, L.lm.frame, vec({u}), vec({eta})) ==
                      doctest::Approx(closed).epsilon(1e-10));
            }
    }
    SUBCASE("even in the transverse momentum") {
        for (const Model& m : {test::free_model(), test::morse_cos()}) {
            const auto L = test::local_at(m, 2.5, 2, 0.0, false);
            for (double u : {-0.1, 0.2})
                for (double eta : {0.05, 0.2}) {
                    const double a = solve_mu(m, L.channel, L.lm.frame, vec({u}), vec({eta}));
                    const double b = solve_mu(m, L.channel, L.lm.frame, vec({u}), vec({-eta}));
                    CHECK(std::abs(a - b) < 1e-12);
                }
        }
    }
    SUBCASE("metric11 second-order expansion against a dense-grid polynomial fit") {
        const double a = 1.5, E = 0.8, p = std::sqrt(2 * E);
        const auto L = test::local_at(Model(MetricExample11{a}), E, 2);
        // least-squares quartic fit of μ on a small grid
        std::vector<Eigen::RowVectorXd> rows;
        std::vector<double> rhs;
        for (int i = -6; i <= 6; ++i)
            for (int j = -6; j <= 6; ++j) {
                const double u = 5e-3 * i, e = 5e-3 * j;
                Eigen::RowVectorXd r(15);
                int col = 0;
                for (int d = 0; d <= 4; ++d)
                    for (int q = 0; q <= d; ++q) r[col++] = std::pow(u, d - q) * std::pow(e, q);
                rows.push_back(r);
                rhs.push_back(solve_mu(L.lm.model, L.channel, L.lm.frame, vec({u}), vec({e})));
            }
        Mat X(rows.size(), 15);
        Vec y(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) X.row(i) = rows[i], y[i] = rhs[i];
        const Vec c = X.colPivHouseholderQr().solve(y);
        // columns 3, 4, 5 are u², uη, η²
        CHECK(c[3] == doctest::Approx(a * p / 2).epsilon(1e-6));
        CHECK(c[5] == doctest::Approx(-1 / (2 * p)).epsilon(1e-6));
        CHECK(std::abs(c[4]) < 1e-6);
    }
    SUBCASE("outside the neighbourhood of validity") {
        const auto L = test::local_at(test::morse_cos(), 1.2, 2, 0.0);
        CHECK_THROWS_AS(solve_mu(L.lm.model, L.channel, L.lm.frame, vec({0.0}), vec({5.0})), ImplicitSolveFailed);
    }
}

TEST_CASE("Taylor jet of g") {
    SUBCASE("free particle closed form") {
        const double E = 0.7, p = std::sqrt(2 * E);
        const auto L = test::local_at(test::free_model(), E, 6, std::nullopt, false);
        const RPoly& g = L.lm.g_taylor;
        CHECK(coeff(g, {0, 2}) == doctest::Approx(1 / (2 * p)).epsilon(1e-12));
        CHECK(coeff(g, {0, 4}) == doctest::Approx(1 / (8 * p * p * p)).epsilon(1e-12));
        CHECK(coeff(g, {0, 6}) == doctest::Approx(1 / (16 * std::pow(p, 5))).epsilon(1e-12));
        CHECK(std::abs(coeff(g, {2, 0})) < 1e-14);
        CHECK(std::abs(coeff(g, {1, 1})) < 1e-14);
    }
    SUBCASE("constant and linear terms vanish") {
        for (const Model& m : {Model(MetricExample11{2.2}), test::morse_cos(), Model(SpiralConjugate{TrigPoly::parse("2cos"), 1.0})}) {
            const auto L = test::local_at(m, 1.7, 4);
            CHECK(L.lm.g_taylor.max_abs_degree(0) < 1e-8);
            CHECK(L.lm.g_taylor.max_abs_degree(1) < 1e-8);
        }
    }
    SUBCASE("jet agrees with Richardson-extrapolated finite differences") {
        for (const Model& m : {Model(MetricExample11{1.0}), test::morse_asymmetric(0.4),
                               degree_zero_form(Model(Riema3{2.0, -1.0}))}) {
            CAPTURE(m.name());
            const auto L = test::local_at(m, 2.0, 4, 0.0);
            const RPoly fd = taylor_g_fd(L.lm.model, L.channel, L.lm.frame, 4);
            const RPoly& ad = L.lm.g_taylor;
            for (int d = 2; d <= 4; ++d)
                for (const auto& a : monomials(2, d)) CHECK(std::abs(ad.coeff(a) - fd.coeff(a)) < 1e-6);
        }
    }
}

TEST_CASE("Hessian A and matrix B") {
    SUBCASE("Morse: A = diag(V'', 1)/k and B in closed form") {
        const auto L = test::local_at(test::morse_cos(), 2.0, 2, 0.0);
        const double k = std::sqrt(2.0);
        Mat A(2, 2);
        A << -1 / k, 0, 0, 1 / k;
        CHECK((L.lm.A - A).norm() < 1e-8);
        Mat B(2, 2);
        B << -1, 1 / k, 1 / k, 0;
        CHECK((L.lm.B - B).norm() < 1e-8);
        const auto ev = Eigen::EigenSolver<Mat>(L.lm.B).eigenvalues();
        std::vector<double> re{ev[0].real(), ev[1].real()};
        std::sort(re.begin(), re.end());
        CHECK(re[0] == doctest::Approx(-0.5 - 0.5 * std::sqrt(3.0)).epsilon(1e-8));
        CHECK(re[1] == doctest::Approx(-0.5 + 0.5 * std::sqrt(3.0)).epsilon(1e-8));
    }
    SUBCASE("B is reproduced exactly from A") {
        const auto L = test::local_at(Model(MetricExample11{3.0}), 0.9, 2);
        CHECK((L.lm.A - L.lm.A.transpose()).norm() == 0.0);
        Mat J = Mat::Zero(2, 2);
        J(0, 1) = 1;
        J(1, 0) = -1;
        Mat P = Mat::Zero(2, 2);
        P(0, 0) = 1;
        CHECK((L.lm.B - (J * L.lm.A - P)).norm() == 0.0);
    }
    SUBCASE("A = 0") {
        const Mat B = matrix_B(Mat::Zero(4, 4));
        Mat ref = Mat::Zero(4, 4);
        ref(0, 0) = ref(1, 1) = -1;
        CHECK((B - ref).norm() == 0.0);
    }
    SUBCASE("metric11: eigenvalues solve λ² + λ − a = 0") {
        for (double a : {0.5, 1.0, 2.0, 3.0}) {
            const auto L = test::local_at(Model(MetricExample11{a}), 0.5, 2);
            for (const cd& l : L.s.beta) CHECK(std::abs(l * l + l - a) < 1e-10);
        }
    }
}

TEST_CASE("reduced field") {
    const double E = 0.5;
    const auto L = test::local_at(Model(MetricExample11{1.0}), E, 2);
    CHECK(reduced_field(L.lm, vec({0.0, 0.0})).norm() < 1e-15);
    CHECK((reduced_jacobian_fd(L.lm, vec({0.0, 0.0})) - L.lm.B).norm() < 1e-6);
    const double u = 1e-4, eta = -2e-4;
    const Vec F = reduced_field(L.lm, vec({u, eta}));
    CHECK((F - vec({-u + eta, u})).norm() < 1e-10);

    // Jacobian consistency on other families
    for (const Model& m : {test::morse_asymmetric(0.5), Model(SpiralConjugate{TrigPoly::parse("2cos"), 1.0})}) {
        const auto K = test::local_at(m, 1.5, 2, std::get_if<SpiralConjugate>(&m.family()) ? std::nullopt
                                                                                         : std::optional<double>(0.0));
        CHECK((reduced_jacobian_fd(K.lm, Vec::Zero(2)) - K.lm.B).norm() < 1e-6);
    }

    // Taylor field matches the exact field to the truncation order
    const auto T = test::local_at(test::morse_asymmetric(0.5), 2.0, 6, 0.0);
    const auto poly = field_taylor(T.lm.g_taylor, 5);
    for (double r : {0.02, 0.01}) {
        const Vec w = vec({0.6 * r, -0.8 * r});
        const Vec exact = reduced_field(T.lm, w);
        Vec approx(2);
        for (int i = 0; i < 2; ++i) approx[i] = poly[i].evaluate(w);
        CHECK((exact - approx).norm() < 50 * std::pow(r, 6));
    }
}

TEST_CASE("pairing of B eigenvalues over random energies") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        std::vector<std::pair<Model, double>> cases{
            {Model(MetricExample11{0.2 + 3 * U(rng)}), 0.1 + 3 * U(rng)},
            {test::morse_cos(), 1.05 + 4 * U(rng)},
            {degree_zero_form(Model(Riema3{2.0, -1.0})), 0.1 + 3 * U(rng)}};
        for (const auto& [m, E] : cases) {
            const auto L = test::local_at(m, E, 2, std::get_if<MorseSphere>(&m.family()) ? std::optional<double>(0.0)
                                                                                      : std::nullopt);
            const auto pr = check_pairing(L.s);
            CHECK(pr.pass);
            CHECK(pr.max_distance < 1e-6);
        }
    }
}

TEST_CASE("three-dimensional Morse channel") {
    const Model m(MorseSphere::critical(vec({0.0, 0.0, 1.0}), 1.0, vec({-1.0, -2.5})));
    const double E = 3.0, k = 2.0;
    const auto L = test::local_at(m, E, 2);
    CHECK(L.channel.k == doctest::Approx(k).epsilon(1e-10));
    // A = k⁻¹ diag(q, I) in the model's tangent basis; eigenvalues −½ ± ½√(1 − 2q/(E − V))
    const auto& ms = std::get<MorseSphere>(m.family());
    const Mat R = ms.tangent.transpose() * L.lm.frame.transverse();
    Mat A = Mat::Zero(4, 4);
    A.topLeftCorner(2, 2) = R.transpose() * vec({-1.0, -2.5}).asDiagonal() * R / k;
    A(2, 2) = A(3, 3) = 1 / k;
    CHECK((L.lm.A - A).norm() < 1e-8);
    std::vector<double> re;
    for (const cd& l : L.s.beta) re.push_back(l.real());
    std::sort(re.begin(), re.end());
    const double d1 = std::sqrt(1 + 2 * 1.0 / 2), d2 = std::sqrt(1 + 2 * 2.5 / 2);
    const std::vector<double> ref{-0.5 - 0.5 * d2, -0.5 - 0.5 * d1, -0.5 + 0.5 * d1, -0.5 + 0.5 * d2};
    for (int i = 0; i < 4; ++i) CHECK(re[i] == doctest::Approx(ref[i]).epsilon(1e-8));
}
