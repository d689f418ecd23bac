#include "chanflow/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chanflow {

namespace {

// ordering key: stable first, then real part, then imaginary part
bool precedes(cd a, cd b) {
    const bool sa = a.real() < 0, sb = b.real() < 0;
    if (sa != sb) return sa;
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

// single-linkage clustering; returns representative (mean) per eigenvalue
std::vector<cd> cluster_representatives(const std::vector<cd>& ev, double tol, std::vector<int>& label) {
    const int N = static_cast<int>(ev.size());
    label.assign(static_cast<std::size_t>(N), -1);
    int next = 0;
    for (int i = 0; i < N; ++i) {
        if (label[i] >= 0) continue;
        label[i] = next;
        std::vector<int> stack{i};
        while (!stack.empty()) {
            int a = stack.back();
            stack.pop_back();
            for (int j = 0; j < N; ++j)
                if (label[j] < 0 && std::abs(ev[a] - ev[j]) < tol) {
                    label[j] = next;
                    stack.push_back(j);
                }
        }
        ++next;
    }
    std::vector<cd> mean(static_cast<std::size_t>(next), 0.0);
    std::vector<int> cnt(static_cast<std::size_t>(next), 0);
    for (int i = 0; i < N; ++i) {
        mean[label[i]] += ev[i];
        cnt[label[i]]++;
    }
    std::vector<cd> rep(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) rep[i] = mean[label[i]] / static_cast<double>(cnt[label[i]]);
    return rep;
}

// swap diagonal entries k, k+1 of upper triangular S by a unitary rotation
void swap_adjacent(CMat& S, CMat& U, int k) {
    const cd t11 = S(k, k), t22 = S(k + 1, k + 1), t12 = S(k, k + 1);
    Eigen::Vector2cd v(t12, t22 - t11);
    const double nv = v.norm();
    if (nv == 0.0) return;
    v /= nv;
    Eigen::Matrix2cd Q;
    Q << v[0], -std::conj(v[1]), v[1], std::conj(v[0]);
    S.middleRows(k, 2) = Q.adjoint() * S.middleRows(k, 2);
    S.middleCols(k, 2) = S.middleCols(k, 2) * Q;
    U.middleCols(k, 2) = U.middleCols(k, 2) * Q;
    S(k + 1, k) = 0.0;
}

// A11 X − X A22 = C with A11, A22 upper triangular and disjoint spectra
CMat triangular_sylvester(const CMat& A11, const CMat& A22, const CMat& C) {
    const int p = static_cast<int>(A11.rows()), q = static_cast<int>(A22.rows());
    CMat X(p, q);
    for (int j = 0; j < q; ++j) {
        CVec rhs = C.col(j);
        for (int i = 0; i < j; ++i) rhs += A22(i, j) * X.col(i);
        CMat M = A11 - A22(j, j) * CMat::Identity(p, p);
        X.col(j) = M.triangularView<Eigen::Upper>().solve(rhs);
    }
    return X;
}

void normalize_column(CMat& T, CMat& D, int j) {
    const int N = static_cast<int>(T.rows());
    const double nrm = T.col(j).norm();
    int big = 0;
    for (int i = 1; i < N; ++i)
        if (std::abs(T(i, j)) > std::abs(T(big, j)) * (1 + 1e-12)) big = i;
    const cd phase = std::abs(T(big, j)) > 0 ? std::conj(T(big, j)) / std::abs(T(big, j)) : cd(1.0);
    const cd s = phase / nrm;
    T.col(j) *= s;
    D.col(j) *= s;
    D.row(j) /= s;
    T(big, j) = std::abs(T(big, j));
}

} // namespace

Spectrum decompose(const Eigen::MatrixXd& B, const DecomposeOptions& opt) { return decompose(CMat(B.cast<cd>()), opt); }

Spectrum decompose(const CMat& B, const DecomposeOptions& opt) {
    const int N = static_cast<int>(B.rows());
    if (N == 0 || B.cols() != N) throw std::invalid_argument("decompose: B must be square and non-empty");
    if (N % 2) throw std::invalid_argument("decompose: B must have even size 2n-2");
    if (!B.allFinite()) throw std::invalid_argument("decompose: non-finite entries");

    Eigen::ComplexSchur<CMat> schur(B);
    if (schur.info() != Eigen::Success) throw DefectiveBeyondTolerance("Schur decomposition failed");
    CMat S = schur.matrixT();
    CMat U = schur.matrixU();

    std::vector<cd> ev(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) ev[i] = S(i, i);
    for (const cd& l : ev)
        if (std::abs(l.real()) < opt.hyper_tol)
            throw HyperbolicityViolated("eigenvalue with |Re| = " + std::to_string(std::abs(l.real())) + " < " +
                                        std::to_string(opt.hyper_tol));

    // clusters that cannot be separated stably are merged by widening the threshold
    const double scale = std::max(1.0, B.norm());
    std::vector<int> start;
    CMat Y;
    for (double tol = opt.cluster_tol;; tol *= 10) {
        if (tol > 1e-3 * scale) throw DefectiveBeyondTolerance("eigenvalue clusters cannot be separated stably");
        CMat St = S, Ut = U;
        std::vector<int> label;
        std::vector<cd> rep = cluster_representatives(ev, tol, label);

        // selection by adjacent swaps; equal representatives keep their relative order
        for (int pos = 0; pos < N; ++pos) {
            int best = pos;
            for (int j = pos + 1; j < N; ++j)
                if (precedes(rep[j], rep[best])) best = j;
            for (int j = best; j > pos; --j) {
                if (rep[j] == rep[j - 1]) continue;
                swap_adjacent(St, Ut, j - 1);
                std::swap(rep[j], rep[j - 1]);
            }
        }

        start.assign(1, 0);
        for (int i = 1; i < N; ++i)
            if (rep[i] != rep[i - 1]) start.push_back(i);
        start.push_back(N);
        const int K = static_cast<int>(start.size()) - 1;

        // block diagonalize the triangular form
        Y = CMat::Identity(N, N);
        bool stable = true;
        for (int c = 0; c < K - 1 && stable; ++c) {
            const int a = start[c], p = start[c + 1] - a, q = N - start[c + 1];
            const CMat X =
                triangular_sylvester(St.block(a, a, p, p), St.block(a + p, a + p, q, q), -St.block(a, a + p, p, q));
            stable = X.allFinite() && X.norm() < opt.separation_max * scale;
            St.block(a, a + p, p, q).setZero();
            Y.block(0, a + p, N, q) += Y.block(0, a, N, p) * X;
        }
        if (!stable) continue;
        S = St;
        U = Ut;
        break;
    }
    const int K = static_cast<int>(start.size()) - 1;
    CMat T = U * Y;

    // reverse each cluster so its nilpotent part is strictly lower triangular
    std::vector<int> cl(static_cast<std::size_t>(N));
    for (int c = 0; c < K; ++c) {
        const int a = start[c], p = start[c + 1] - a;
        for (int i = 0; i < p; ++i) cl[a + i] = c;
        if (p > 1) {
            for (int i = 0; i < p / 2; ++i) T.col(a + i).swap(T.col(a + p - 1 - i));
        }
    }

    Eigen::PartialPivLU<CMat> lu(T);
    CMat D = lu.solve(B * T);
    for (int j = 0; j < N; ++j) normalize_column(T, D, j);

    // rescale basis vectors inside clusters until the nilpotent part is small
    double nil_max = 0.0;
    for (int c = 0; c < K; ++c) {
        const int a = start[c], p = start[c + 1] - a;
        if (p == 1) continue;
        auto nil_norm = [&] {
            double s = 0.0;
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < i; ++j) s += std::norm(D(a + i, a + j));
            return std::sqrt(s);
        };
        for (int it = 0; it < 200 && nil_norm() > opt.nilpotent_max; ++it) {
            for (int i = 0; i < p; ++i) {
                const double s = std::pow(2.0, i);
                T.col(a + i) *= s;
                D.col(a + i) *= s;
                D.row(a + i) /= s;
            }
        }
        nil_max = std::max(nil_max, nil_norm());
        if (nil_norm() > opt.nilpotent_max) throw DefectiveBeyondTolerance("cannot shrink nilpotent part of a Jordan block");
    }

    Spectrum out;
    out.T = T;
    out.Tinv = T.inverse();
    const double cond = T.norm() * out.Tinv.norm();
    if (!std::isfinite(cond) || cond > opt.cond_max)
        throw DefectiveBeyondTolerance("eigenbasis condition number " + std::to_string(cond));
    D = out.Tinv * B * T;

    double off = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (cl[i] != cl[j]) {
                off += std::norm(D(i, j));
                D(i, j) = 0.0;
            } else if (j > i) {
                off += std::norm(D(i, j));
                D(i, j) = 0.0;
            }
    out.block_residual = std::sqrt(off);
    if (out.block_residual > opt.block_tol * std::max(1.0, B.norm()))
        throw DefectiveBeyondTolerance("block diagonalization residual " + std::to_string(out.block_residual));

    out.D = D;
    out.cluster = cl;
    out.nilpotent_norm = nil_max;
    out.beta.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) out.beta[i] = D(i, i);
    for (const cd& l : out.beta) (l.real() < 0 ? out.ns : out.nu)++;
    out.v_row = out.Tinv.row(0).transpose();
    out.lambda_tracked = D(0, 0);
    return out;
}

PairingReport check_pairing(const std::vector<cd>& ev, double tol) {
    PairingReport r;
    for (const cd& l : ev) {
        const cd target = -1.0 - l;
        double best = std::numeric_limits<double>::infinity();
        for (const cd& m : ev) best = std::min(best, std::abs(m - target));
        r.distance.push_back(best);
        r.max_distance = std::max(r.max_distance, best);
    }
    r.pass = !ev.empty() && r.max_distance < tol;
    return r;
}

std::string classify(const Spectrum& s) {
    if (s.ns > 0 && s.nu > 0) return "saddle";
    if (s.nu == 0) return "stable";
    return "unstable";
}

std::vector<TrackedEigen> track_eigenvector(const std::vector<double>& energies, const std::vector<Eigen::MatrixXd>& Bs,
                                            const TrackOptions& opt) {
    if (energies.size() != Bs.size() || Bs.empty()) throw std::invalid_argument("track_eigenvector: grid mismatch");
    std::vector<TrackedEigen> out;
    const Spectrum first = decompose(Bs[0], opt.decompose);
    if (opt.target < 0 || opt.target >= static_cast<int>(first.beta.size()))
        throw std::out_of_range("track_eigenvector: target index");
    cd lam_prev = first.beta[opt.target];
    CVec v_prev;
    int ref = -1;
    for (std::size_t g = 0; g < Bs.size(); ++g) {
        // left eigenvectors are eigenvectors of Bᵀ
        Eigen::ComplexEigenSolver<CMat> es(CMat(Bs[g].transpose().cast<cd>()));
        const CVec ev = es.eigenvalues();
        int pick = 0;
        for (int i = 1; i < ev.size(); ++i)
            if (std::abs(ev[i] - lam_prev) < std::abs(ev[pick] - lam_prev)) pick = i;
        double sep = std::numeric_limits<double>::infinity();
        for (int i = 0; i < ev.size(); ++i)
            if (i != pick) sep = std::min(sep, std::abs(ev[i] - ev[pick]));
        if (sep < opt.collision_tol)
            throw EigenvalueCollision("tracked eigenvalue within " + std::to_string(sep) + " of another at E = " +
                                      std::to_string(energies[g]));
        CVec v = es.eigenvectors().col(pick).normalized();
        if (ref < 0) {
            ref = 0;
            for (int i = 1; i < v.size(); ++i)
                if (std::abs(v[i]) > std::abs(v[ref])) ref = i;
        }
        double overlap = 1.0;
        if (std::abs(v[ref]) > 1e-8) {
            v *= std::conj(v[ref]) / std::abs(v[ref]);
        } else if (v_prev.size()) {
            const cd o = v_prev.dot(v);
            if (std::abs(o) > 0) v *= std::conj(o) / std::abs(o);
        }
        if (v_prev.size()) overlap = std::abs(v_prev.dot(v));
        TrackedEigen te;
        te.E = energies[g];
        te.lambda = ev[pick];
        te.v = v;
        te.overlap = overlap;
        te.separation = sep;
        te.below_minus_one = ev[pick].real() < -1.0;
        out.push_back(te);
        lam_prev = ev[pick];
        v_prev = v;
    }
    return out;
}

int compute_m0(const std::vector<cd>& beta_s) {
    if (beta_s.empty()) throw NoStableDirections("no eigenvalue with negative real part");
    double x = 4.0;
    for (const cd& b : beta_s) {
        if (!(b.real() < 0)) throw NoStableDirections("stable list contains Re >= 0");
        x = std::max(x, (1.0 + b.real()) / (-b.real()));
    }
    // absorb rounding so exact integers count as reached
    return static_cast<int>(std::floor(x + 1e-9 * std::max(1.0, x))) + 1;
}

} // namespace chanflow
