#include "chanflow/normalform.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace chanflow {

std::vector<std::pair<MultiIndex, cd>> NormalFormGamma::coefficients(int m) const {
    std::vector<std::pair<MultiIndex, cd>> out;
    if (m > gamma.degree()) return out;
    const auto& B = *gamma.basis();
    for (std::size_t i = B.offset(m); i < B.offset(m + 1); ++i) out.emplace_back(B.exponent(i), gamma[i]);
    return out;
}

std::vector<CPoly> field_in_gamma(const std::vector<RPoly>& field_w, const Spectrum& s) {
    const int N = static_cast<int>(field_w.size());
    if (N == 0 || s.T.rows() != N) throw std::invalid_argument("field_in_gamma: dimension mismatch");
    auto basis = field_w[0].basis();
    // w_k = Σ_j T_kj γ_j
    std::vector<CPoly> subs;
    subs.reserve(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
        CPoly p(basis);
        for (int j = 0; j < N; ++j) p[basis->variable(j)] = s.T(k, j);
        subs.push_back(std::move(p));
    }
    std::vector<CPoly> Fw;
    for (const auto& f : field_w) Fw.push_back(compose(to_complex(f), subs));
    std::vector<CPoly> G;
    for (int i = 0; i < N; ++i) {
        CPoly g(basis);
        for (int k = 0; k < N; ++k)
            if (s.Tinv(i, k) != cd(0)) g += Fw[k] * s.Tinv(i, k);
        G.push_back(std::move(g));
    }
    return G;
}

std::vector<CPoly> field_in_gamma(const LocalModel& lm, const Spectrum& s, int degree) {
    RPoly g = lm.g_taylor;
    if (g.degree() < degree + 1) g = taylor_g(lm.model, lm.channel, lm.frame, degree + 1, lm.options);
    return field_in_gamma(field_taylor(g, degree), s);
}

CMat homological_matrix(const CMat& D, int m) {
    if (m < 2) throw std::invalid_argument("homological_matrix: order must be >= 2");
    const int N = static_cast<int>(D.rows());
    auto B = MonomialBasis::get(N, m);
    const std::size_t off = B->offset(m), n = B->offset(m + 1) - off;
    CMat Bt = CMat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    MultiIndex b;
    for (std::size_t r = 0; r < n; ++r) {
        const MultiIndex& a = B->exponent(off + r);
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                if (D(i, j) == cd(0)) continue;
                if (i != j && a[j] == 0) continue;
                b = a;
                b[i] += 1;
                b[j] -= 1;
                const double w = a[i] + 1 - (i == j ? 1 : 0);
                Bt(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(B->index(b) - off)) += w * D(i, j);
            }
        }
    }
    return Bt;
}

std::vector<cd> solve_order(int m, const std::vector<cd>& d, cd beta1, const CMat& Btilde, const NormalFormOptions& opt,
                            double* residual) {
    const Eigen::Index n = Btilde.rows();
    if (static_cast<Eigen::Index>(d.size()) != n) throw std::invalid_argument("solve_order: size mismatch");
    CMat M = Btilde - beta1 * CMat::Identity(n, n);
    Eigen::BDCSVD<CMat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues()(n - 1);
    const double scale = std::max(Btilde.norm(), 1e-300);
    if (smin < opt.singular_rel * scale)
        throw ResonanceDetected("B~ - beta1 I singular at order " + std::to_string(m) +
                                    " (sigma_min = " + std::to_string(smin) + ")",
                                m);
    CVec rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) rhs(i) = -beta1 * d[static_cast<std::size_t>(i)];
    CVec c = svd.solve(rhs);
    // one step of iterative refinement
    c += svd.solve(rhs - M * c);
    const double res = (M * c - rhs).norm();
    if (residual) *residual = res;
    return {c.data(), c.data() + n};
}

CPoly lie_derivative(const CPoly& p, const std::vector<CPoly>& field) {
    CPoly r(p.basis());
    for (int k = 0; k < p.dim(); ++k) {
        CPoly dk = p.derivative(k);
        if (dk.max_abs() == 0.0) continue;
        r += dk * field[static_cast<std::size_t>(k)];
    }
    return r;
}

namespace {

std::vector<CPoly> rebase_all(const std::vector<CPoly>& f, const CPoly::Basis& b) {
    std::vector<CPoly> out;
    for (const auto& p : f) out.push_back(p.rebased(b));
    return out;
}

void choose_normalisation(NormalFormGamma& nf) {
    const int N = nf.dim, half = N / 2;
    int best = 0;
    double mag = -1.0;
    for (int l = 0; l < half; ++l)
        if (std::abs(nf.base(half + l)) > mag) mag = std::abs(nf.base(half + l)), best = l;
    if (mag >= 1e-8) {
        nf.c_l_from_eta = true;
        nf.l_index = half + best;
    } else {
        mag = -1.0;
        for (int l = 0; l < half; ++l)
            if (std::abs(nf.base(l)) > mag) mag = std::abs(nf.base(l)), best = l;
        nf.c_l_from_eta = false;
        nf.l_index = best;
    }
    nf.c_l = nf.base(nf.l_index);
}

} // namespace

NormalFormGamma build_gamma(const std::vector<CPoly>& field_gamma, const CMat& D, cd beta1, int m0,
                            const NormalFormOptions& opt) {
    if (m0 < 1) throw std::invalid_argument("build_gamma: m0 must be >= 1");
    const int N = static_cast<int>(field_gamma.size());
    auto basis = MonomialBasis::get(N, m0);
    auto G = rebase_all(field_gamma, basis);

    NormalFormGamma nf;
    nf.m0 = m0;
    nf.dim = N;
    nf.beta1 = beta1;
    nf.gamma = CPoly::variable(basis, 0);
    for (int m = 2; m <= m0; ++m) {
        CPoly L = lie_derivative(nf.gamma, G) - beta1 * nf.gamma;
        const std::size_t off = basis->offset(m), n = basis->offset(m + 1) - off;
        std::vector<cd> d(n);
        for (std::size_t r = 0; r < n; ++r) d[r] = L[off + r] / beta1;
        double res = 0.0;
        auto c = solve_order(m, d, beta1, homological_matrix(D, m), opt, &res);
        for (std::size_t r = 0; r < n; ++r) nf.gamma[off + r] = c[r];
        nf.d.push_back(std::move(d));
        nf.order_residual.push_back(res);
    }
    CPoly L = lie_derivative(nf.gamma, G) - beta1 * nf.gamma;
    nf.post_residual = 0.0;
    for (int m = 0; m <= m0; ++m) nf.post_residual = std::max(nf.post_residual, L.max_abs_degree(m));
    return nf;
}

NormalFormGamma build_gamma(const LocalModel& lm, const Spectrum& s, int m0, const NormalFormOptions& opt) {
    auto G = field_in_gamma(lm, s, m0);
    NormalFormGamma nf = build_gamma(G, s.D, s.beta.at(0), m0, opt);
    nf.Tinv = s.Tinv;
    nf.base = s.Tinv.row(0).transpose();
    choose_normalisation(nf);
    return nf;
}

CVec to_gamma(const NormalFormGamma& nf, const Vec& w) { return nf.Tinv * w.cast<cd>(); }

cd eval_gamma(const NormalFormGamma& nf, const Vec& w) {
    const CVec g = to_gamma(nf, w);
    return nf.gamma.evaluate(g);
}

double real_observable(const NormalFormGamma& nf, const Vec& w) { return (eval_gamma(nf, w) / nf.c_l).real(); }

CPoly residual_decay(const NormalFormGamma& nf, const std::vector<CPoly>& field_gamma) {
    if (field_gamma.empty() || field_gamma[0].degree() < nf.m0 + 1)
        throw std::invalid_argument("residual_decay: field degree must be at least m0 + 1");
    auto basis = MonomialBasis::get(nf.dim, 2 * nf.m0);
    auto G = rebase_all(field_gamma, basis);
    CPoly Gam = nf.gamma.rebased(basis);
    CPoly L = lie_derivative(Gam, G) - nf.beta1 * Gam;
    return L.truncated(2 * nf.m0) - L.truncated(nf.m0);
}

CPoly residual_decay(const NormalFormGamma& nf, const LocalModel& lm, const Spectrum& s) {
    return residual_decay(nf, field_in_gamma(lm, s, 2 * nf.m0));
}

} // namespace chanflow
