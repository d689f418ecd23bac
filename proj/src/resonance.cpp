#include "chanflow/resonance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace chanflow {

namespace {

void check_mmax(int m_max) {
    if (m_max < 2 || m_max > 20) throw ConfigError("m_max must lie in [2, 20], got " + std::to_string(m_max));
}

std::vector<int> resolve_targets(const std::vector<int>& t, int N) {
    std::vector<int> out = t;
    if (out.empty())
        for (int i = 0; i < N; ++i) out.push_back(i);
    for (int j : out)
        if (j < 0 || j >= N) throw std::out_of_range("resonance target index out of range");
    return out;
}

} // namespace

std::vector<ResonanceHit> detect_resonances(const std::vector<cd>& beta, const ResonanceOptions& opt) {
    check_mmax(opt.m_max);
    const int N = static_cast<int>(beta.size());
    if (N == 0) return {};
    double count = 0;
    for (int m = 2; m <= opt.m_max; ++m) count += static_cast<double>(monomial_count(N, m));
    if (count > opt.candidate_cap)
        throw CombinatorialBudgetExceeded(std::to_string(count) + " candidate multi-indices exceed cap " +
                                          std::to_string(opt.candidate_cap));

    // suffix bounds of Re / Im over coordinates k >= i
    std::vector<double> re_lo(N + 1), re_hi(N + 1), im_lo(N + 1), im_hi(N + 1);
    re_lo[N] = im_lo[N] = std::numeric_limits<double>::infinity();
    re_hi[N] = im_hi[N] = -std::numeric_limits<double>::infinity();
    for (int i = N - 1; i >= 0; --i) {
        re_lo[i] = std::min(re_lo[i + 1], beta[i].real());
        re_hi[i] = std::max(re_hi[i + 1], beta[i].real());
        im_lo[i] = std::min(im_lo[i + 1], beta[i].imag());
        im_hi[i] = std::max(im_hi[i + 1], beta[i].imag());
    }

    std::vector<ResonanceHit> hits;
    for (int j : resolve_targets(opt.targets, N)) {
        const cd target = beta[j];
        for (int m = 2; m <= opt.m_max; ++m) {
            MultiIndex a(static_cast<std::size_t>(N), 0);
            // descending lex enumeration matches the monomial basis order
            std::function<void(int, int, cd)> rec = [&](int i, int left, cd partial) {
                if (left == 0) {
                    const double r = std::abs(target - partial);
                    if (r < opt.tol) hits.push_back({j, a, m, r});
                    return;
                }
                if (i == N) return;
                const double slack = opt.tol;
                if (target.real() < partial.real() + left * re_lo[i] - slack ||
                    target.real() > partial.real() + left * re_hi[i] + slack ||
                    target.imag() < partial.imag() + left * im_lo[i] - slack ||
                    target.imag() > partial.imag() + left * im_hi[i] + slack)
                    return;
                if (i == N - 1) {
                    a[i] = left;
                    rec(N, 0, partial + static_cast<double>(left) * beta[i]);
                    a[i] = 0;
                    return;
                }
                for (int v = left; v >= 0; --v) {
                    a[i] = v;
                    rec(i + 1, left - v, partial + static_cast<double>(v) * beta[i]);
                }
                a[i] = 0;
            };
            rec(0, m, cd(0.0));
        }
    }
    return hits;
}

std::vector<ResonanceHit> detect_resonances_exact(const std::vector<RationalComplex>& beta, int m_max,
                                                  const std::vector<int>& targets) {
    check_mmax(m_max);
    const int N = static_cast<int>(beta.size());
    std::vector<ResonanceHit> hits;
    for (int j : resolve_targets(targets, N)) {
        for (int m = 2; m <= m_max; ++m) {
            for (const MultiIndex& a : monomials(N, m)) {
                Rational re(0), im(0);
                for (int i = 0; i < N; ++i) {
                    re += beta[i].re * static_cast<long long>(a[i]);
                    im += beta[i].im * static_cast<long long>(a[i]);
                }
                if (re == beta[j].re && im == beta[j].im) hits.push_back({j, a, m, 0.0});
            }
        }
    }
    return hits;
}

std::optional<int> minimal_order(const std::vector<ResonanceHit>& hits, int target) {
    std::optional<int> best;
    for (const auto& h : hits)
        if (h.target_index == target && (!best || h.order < *best)) best = h.order;
    return best;
}

ScanReport scan_resonances(const std::vector<double>& grid, const std::function<std::vector<cd>(double)>& spectrum_at,
                           const ResonanceOptions& opt, int jobs) {
    check_mmax(opt.m_max);
    ScanReport rep;
    rep.points.resize(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            ScanPoint& p = rep.points[i];
            p.value = grid[i];
            try {
                p.beta = spectrum_at(grid[i]);
                p.hits = detect_resonances(p.beta, opt);
                p.min_order = minimal_order(p.hits, opt.targets.empty() ? 0 : opt.targets.front());
                if (opt.targets.empty())
                    for (const auto& h : p.hits)
                        if (!p.min_order || h.order < *p.min_order) p.min_order = h.order;
            } catch (const Error& e) {
                p.error = e.kind();
                p.error_message = e.what();
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(grid.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    bool open = false;
    double lo = 0, hi = 0;
    for (const auto& p : rep.points) {
        const bool clean = p.error.empty() && p.hits.empty();
        if (clean) {
            if (!open) lo = p.value;
            hi = p.value;
            open = true;
        } else if (open) {
            rep.free_windows.emplace_back(lo, hi);
            open = false;
        }
    }
    if (open) rep.free_windows.emplace_back(lo, hi);
    return rep;
}

} // namespace chanflow
