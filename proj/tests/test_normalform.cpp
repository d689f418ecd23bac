#include <doctest.h>

#include "chanflow/resonance.hpp"
#include "support.hpp"

using namespace chanflow;
using chanflow::test::vec;

namespace {

CPoly random_cpoly(const CPoly::Basis& b, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CPoly p(b);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = cd(u(rng), u(rng));
    return p;
}

CMat diag(std::vector<cd> v) {
    CMat D = CMat::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) D(i, i) = v[i];
    return D;
}

std::vector<CPoly> linear_field(const CMat& D, const CPoly::Basis& b) {
    std::vector<CPoly> G;
    for (int i = 0; i < D.rows(); ++i) {
        CPoly g(b);
        for (int j = 0; j < D.cols(); ++j) g[b->variable(j)] = D(i, j);
        G.push_back(g);
    }
    return G;
}

// order-m part of ∇(Σ c_α γ^α)·(Dγ) computed with polynomial arithmetic
CVec lie_oracle(const CMat& D, int m, const CVec& c) {
    const int N = static_cast<int>(D.rows());
    auto b = MonomialBasis::get(N, m);
    CPoly p(b);
    for (Eigen::Index r = 0; r < c.size(); ++r) p[b->offset(m) + r] = c(r);
    const CPoly L = lie_derivative(p, linear_field(D, b));
    CVec out(c.size());
    for (Eigen::Index r = 0; r < c.size(); ++r) out(r) = L[b->offset(m) + r];
    return out;
}

// dΓ/dτ − β₁Γ at w using the exact reduced field
double decay_defect(const NormalFormGamma& nf, const LocalModel& lm, const Vec& w) {
    const CVec g = to_gamma(nf, w);
    const CVec dg = nf.Tinv * reduced_field(lm, w).cast<cd>();
    cd dG = 0.0;
    for (int k = 0; k < nf.dim; ++k) dG += nf.gamma.derivative(k).evaluate(g) * dg(k);
    return std::abs(dG - nf.beta1 * nf.gamma.evaluate(g));
}

Vec direction(int N, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n;
    Vec v(N);
    for (int i = 0; i < N; ++i) v[i] = n(rng);
    return v.normalized();
}

} // namespace

TEST_CASE("monomial counts") {
    CHECK(monomial_count(2, 3) == 4);
    CHECK(monomial_count(4, 2) == 10);
    CHECK(monomial_count(2, 0) == 1);
    CHECK(monomials(2, 3).size() == 4);
    CHECK(monomials(4, 2).size() == 10);
    // x² precedes xy precedes y²
    const auto m = monomials(2, 2);
    CHECK(m[0] == MultiIndex{2, 0});
    CHECK(m[1] == MultiIndex{1, 1});
    CHECK(m[2] == MultiIndex{0, 2});
    const auto b = MonomialBasis::get(3, 4);
    for (std::size_t i = 0; i < b->size(); ++i) CHECK(b->index(b->exponent(i)) == i);
}

TEST_CASE("polynomial algebra") {
    std::mt19937 rng(4);
    const auto b = MonomialBasis::get(3, 5);
    const CPoly p = random_cpoly(b, rng), q = random_cpoly(b, rng), r = random_cpoly(b, rng);
    const CPoly lhs = (p * q) * r, rhs = p * (q * r);
    for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(std::abs(lhs[i] - rhs[i]) < 1e-12);
    const CPoly dist = p * (q + r) - (p * q + p * r);
    CHECK(dist.max_abs() < 1e-12);

    // products and composition agree with pointwise evaluation when nothing is truncated
    const auto b2 = MonomialBasis::get(2, 6);
    const CPoly a = random_cpoly(b2, rng).truncated(3), c = random_cpoly(b2, rng).truncated(3);
    const CVec x = CVec::Random(2) * 0.7;
    CHECK(std::abs((a * c).evaluate(x) - a.evaluate(x) * c.evaluate(x)) < 1e-12);
    std::vector<CPoly> subs;
    for (int k = 0; k < 2; ++k) {
        CPoly s(b2);
        s[b2->variable(0)] = cd(0.3 + k, -0.2);
        s[b2->variable(1)] = cd(-0.5, 0.1 * k);
        subs.push_back(s);
    }
    const CPoly comp = compose(a, subs);
    CVec y(2);
    for (int k = 0; k < 2; ++k) y(k) = subs[k].evaluate(x);
    CHECK(std::abs(comp.evaluate(x) - a.evaluate(y)) < 1e-12);

    // derivative of a monomial
    CPoly m(b2);
    m.set_coeff({2, 3}, 1.0);
    CHECK(m.derivative(1).coeff({2, 2}) == cd(3.0));
    CHECK(m.derivative(0).coeff({1, 3}) == cd(2.0));
}

TEST_CASE("homological matrix") {
    SUBCASE("diagonal spectrum gives the resonance combinations") {
        const CMat Bt = homological_matrix(diag({-2.0, 1.0}), 2);
        CHECK((Bt - diag({-4.0, -1.0, 2.0})).norm() < 1e-15);
    }
    SUBCASE("identity is m times identity") {
        for (int m = 2; m <= 4; ++m) {
            const CMat Bt = homological_matrix(CMat::Identity(3, 3), m);
            CHECK((Bt - m * CMat::Identity(Bt.rows(), Bt.cols())).norm() < 1e-15);
        }
    }
    SUBCASE("triangular coupling keeps the spectrum") {
        CMat D = diag({-2.0, 1.0});
        D(1, 0) = 0.7;
        const CMat Bt = homological_matrix(D, 2);
        Eigen::ComplexEigenSolver<CMat> es(Bt);
        std::vector<double> ev;
        for (int i = 0; i < 3; ++i) ev.push_back(es.eigenvalues()(i).real());
        std::sort(ev.begin(), ev.end());
        CHECK(ev[0] == doctest::Approx(-4.0));
        CHECK(ev[1] == doctest::Approx(-1.0));
        CHECK(ev[2] == doctest::Approx(2.0));
    }
    SUBCASE("action matches the Lie derivative of the linear field") {
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const int N = 2 + 2 * (trial % 2);
            CMat D(N, N);
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) D(i, j) = cd(u(rng), u(rng));
            for (int m = 2; m <= 4; ++m) {
                const CMat Bt = homological_matrix(D, m);
                CVec c(Bt.cols());
                for (Eigen::Index r = 0; r < c.size(); ++r) c(r) = cd(u(rng), u(rng));
                CHECK((Bt * c - lie_oracle(D, m, c)).norm() < 1e-12 * (1 + c.norm()));
            }
        }
    }
    SUBCASE("diagonal entries are β·α for random spectra") {
        std::mt19937 rng(2);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<cd> beta{cd(u(rng), u(rng)), cd(u(rng), u(rng)), cd(u(rng), 0.0), cd(u(rng), 0.0)};
            const CMat Bt = homological_matrix(diag(beta), 3);
            const auto mons = monomials(4, 3);
            for (std::size_t r = 0; r < mons.size(); ++r) {
                cd s = 0.0;
                for (int k = 0; k < 4; ++k) s += double(mons[r][k]) * beta[k];
                CHECK(std::abs(Bt(r, r) - s) < 1e-12);
            }
            CHECK((Bt - CMat(Bt.diagonal().asDiagonal())).norm() == 0.0);
        }
    }
    CHECK_THROWS_AS(homological_matrix(CMat::Identity(2, 2), 1), std::invalid_argument);
}

TEST_CASE("solve_order") {
    const CMat Bt4 = homological_matrix(diag({-2.0, 1.0}), 4);
    const std::vector<cd> zero(static_cast<std::size_t>(Bt4.rows()), 0.0);
    SUBCASE("zero data gives zero coefficients") {
        const CMat Bt = homological_matrix(diag({-1.5, 0.5}), 3);
        const auto c = solve_order(3, std::vector<cd>(static_cast<std::size_t>(Bt.rows()), 0.0), -1.5, Bt);
        for (const cd& v : c) CHECK(std::abs(v) == 0.0);
    }
    SUBCASE("−2 = 2·(−2) + 2·1 is resonant at order 4") {
        try {
            solve_order(4, zero, -2.0, Bt4);
            FAIL("expected ResonanceDetected");
        } catch (const ResonanceDetected& e) {
            CHECK(e.order() == 4);
        }
    }
    SUBCASE("non-resonant spectrum solves with small residual") {
        const CMat Bt = homological_matrix(diag({-1.5, 0.5}), 4);
        std::vector<cd> d;
        for (Eigen::Index i = 0; i < Bt.rows(); ++i) d.push_back(cd(0.1 * (i + 1), -0.05 * i));
        double res = 1.0;
        const auto c = solve_order(4, d, -1.5, Bt, {}, &res);
        CHECK(res < 1e-12);
        // (B̃ − β₁)c = −β₁ d component-wise on the diagonal
        const auto mons = monomials(2, 4);
        for (std::size_t r = 0; r < mons.size(); ++r) {
            const cd lam = -1.5 * mons[r][0] + 0.5 * mons[r][1];
            CHECK(std::abs((lam + 1.5) * c[r] - 1.5 * d[r]) < 1e-12);
        }
    }
}

TEST_CASE("build_gamma on a linear field returns the coordinate itself") {
    const CMat D = diag({-1.3, 0.3, cd(-0.7, 0.4), cd(-0.7, -0.4)});
    const auto b = MonomialBasis::get(4, 5);
    const NormalFormGamma nf = build_gamma(linear_field(D, b), D, -1.3, 5);
    CHECK(std::abs(nf.gamma.coeff({1, 0, 0, 0}) - 1.0) == 0.0);
    double rest = 0.0;
    for (std::size_t i = 0; i < nf.gamma.size(); ++i)
        if (i != nf.gamma.basis()->variable(0)) rest = std::max(rest, std::abs(nf.gamma[i]));
    CHECK(rest < 1e-14);
    CHECK(nf.post_residual < 1e-14);
}

TEST_CASE("ResonanceDetected exactly when the spectrum is resonant up to m0") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> pick(0, 2);
    const int m0 = 4;
    int resonant = 0, clean = 0;
    for (int trial = 0; trial < 1000 && resonant + clean < 50; ++trial) {
        std::vector<cd> beta{0.0, -u(rng), u(rng), u(rng)};
        if (coin(rng)) {
            // β₁ equals a combination of the others with |α| ≤ m0
            MultiIndex a{0, 1, 0, 0};
            for (int k = 0; k < 1 + pick(rng); ++k) a[1 + pick(rng)] += 1;
            cd s = 0.0;
            for (int k = 1; k < 4; ++k) s += double(a[k]) * beta[k];
            if (s.real() >= -0.05) continue;
            beta[0] = s;
        } else {
            beta[0] = -u(rng);
        }
        ResonanceOptions ro;
        ro.m_max = m0;
        ro.tol = 1e-9;
        const auto hits = detect_resonances(beta, ro);
        // skip borderline spectra that neither detector resolves cleanly
        bool borderline = false;
        for (int m = 2; m <= m0; ++m)
            for (const auto& a : monomials(4, m)) {
                cd s = 0.0;
                for (int k = 0; k < 4; ++k) s += double(a[k]) * beta[k];
                const double dist = std::abs(s - beta[0]);
                if (dist > 1e-9 && dist < 1e-3) borderline = true;
            }
        if (borderline) continue;
        const CMat D = diag(beta);
        const auto b = MonomialBasis::get(4, m0);
        bool threw = false;
        try {
            build_gamma(linear_field(D, b), D, beta[0], m0);
        } catch (const ResonanceDetected& e) {
            threw = true;
            CHECK(e.order() == *minimal_order(hits));
        }
        CHECK(threw == !hits.empty());
        (threw ? resonant : clean)++;
    }
    CHECK(resonant + clean == 50);
    CHECK(resonant >= 10);
    CHECK(clean >= 10);
}

TEST_CASE("field in eigen-coordinates") {
    const auto loc = test::local_at(test::morse_asymmetric(0.4), 2.0, 6, 0.0);
    const int deg = 4;
    const auto G = field_in_gamma(loc.lm, loc.s, deg);
    const int N = loc.lm.dim();
    SUBCASE("linear part is the block-diagonal matrix") {
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                MultiIndex a(static_cast<std::size_t>(N), 0);
                a[j] = 1;
                CHECK(std::abs(G[i].coeff(a) - loc.s.D(i, j)) < 1e-10);
            }
        for (int i = 0; i < N; ++i) CHECK(std::abs(G[i].constant()) < 1e-12);
    }
    SUBCASE("truncation error against the exact reduced field scales with degree + 1") {
        const Vec dir = direction(N, 5);
        double prev = 0.0;
        std::vector<double> ratios;
        for (double r : {0.16, 0.08, 0.04}) {
            const Vec w = r * dir;
            const CVec g = loc.s.Tinv * w.cast<cd>();
            const CVec exact = loc.s.Tinv * reduced_field(loc.lm, w).cast<cd>();
            CVec approx(N);
            for (int i = 0; i < N; ++i) approx(i) = G[i].evaluate(g);
            const double err = (approx - exact).norm();
            if (prev > 0) ratios.push_back(prev / err);
            prev = err;
        }
        CHECK(ratios.back() > 0.85 * std::pow(2.0, deg + 1));
    }
}

TEST_CASE("approximate integral on a model with even-order terms") {
    const auto loc = test::local_at(test::morse_asymmetric(0.4), 2.0, 12, 0.0);
    const int m0 = compute_m0(loc.s);
    CHECK(m0 == 5);
    const NormalFormGamma nf = build_gamma(loc.lm, loc.s, m0);
    CHECK(nf.post_residual < 1e-9);
    for (double r : nf.order_residual) CHECK(r < 1e-10);
    CHECK(std::abs(eval_gamma(nf, Vec::Zero(loc.lm.dim()))) == 0.0);

    // the quadratic correction is present for this model
    double quad = 0.0;
    for (const auto& [a, c] : nf.coefficients(2)) quad = std::max(quad, std::abs(c));
    CHECK(quad > 1e-3);

    // the residual polynomial starts at order m0 + 1
    const CPoly R = residual_decay(nf, loc.lm, loc.s);
    for (int m = 0; m <= m0; ++m) CHECK(R.max_abs_degree(m) < 1e-9);
    CHECK(R.max_abs_degree(m0 + 1) > 1e-6);

    const Vec dir = direction(loc.lm.dim(), 8);
    SUBCASE("Γ − γ₁ is at least quadratic") {
        const auto dev = [&](double r) {
            const Vec w = r * dir;
            return std::abs(eval_gamma(nf, w) - to_gamma(nf, w)(0));
        };
        CHECK(dev(0.02) / dev(0.01) > 0.85 * 4.0);
    }
    SUBCASE("decay defect halves by 2^(m0+1)") {
        const double big = decay_defect(nf, loc.lm, 0.1 * dir), small = decay_defect(nf, loc.lm, 0.05 * dir);
        CHECK(big / small > 0.85 * std::pow(2.0, m0 + 1));
        // log-log slope over a small range of radii
        std::vector<double> rs, ds;
        for (double r = 0.04; r <= 0.16; r *= 1.25) {
            rs.push_back(r);
            ds.push_back(decay_defect(nf, loc.lm, r * dir));
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(rs.size());
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const double x = std::log(rs[i]), y = std::log(ds[i]);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK(slope == doctest::Approx(m0 + 1).epsilon(0.1));
    }
}

TEST_CASE("approximate integral on reference models") {
    SUBCASE("metric11") {
        const auto loc = test::local_at(Model(MetricExample11{1.0}), 0.5, 6);
        const NormalFormGamma nf = build_gamma(loc.lm, loc.s, compute_m0(loc.s));
        CHECK(nf.post_residual < 1e-9);
        CHECK(std::abs(nf.c_l) > 1e-8);
    }
    SUBCASE("Morse") {
        const auto loc = test::local_at(test::morse_cos(), 2.0, 6, 0.0);
        const int m0 = compute_m0(loc.s);
        CHECK(m0 == 5);
        const NormalFormGamma nf = build_gamma(loc.lm, loc.s, m0);
        CHECK(nf.post_residual < 1e-9);
        // symmetric potential: only odd orders survive
        for (int m : {2, 4})
            for (const auto& [a, c] : nf.coefficients(m)) CHECK(std::abs(c) < 1e-10);
    }
}
