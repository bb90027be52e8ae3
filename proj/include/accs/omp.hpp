#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "accs/modelgen.hpp"
#include "accs/transforms.hpp"

namespace accs {

struct OmpResult {
    SparseSignal signal;        // recovered z on its support
    Eigen::VectorXcd x;         // Psi* z
    bool ridge_regularized = false;
};

/// Orthogonal matching pursuit for the known-calibration multi-coil model
/// y_i = F_Omega(s_i .* Psi* z) with ||z||_0 = n. Atom selection aggregates
/// correlation energy across coils (the support is shared), followed by a
/// joint least-squares fit over all coils on the selected support. Runs
/// exactly n iterations.
inline OmpResult omp_known_calibration(const std::vector<Eigen::VectorXcd>& sensitivities,
                                       const Sparsifier& psi, const SamplingPattern& omega,
                                       const Eigen::MatrixXcd& Y, int n) {
    const int C = static_cast<int>(sensitivities.size());
    if (C < 1) throw std::invalid_argument("omp: need at least one coil");
    const int N = psi.size();
    if (n < 1 || n > N) throw std::invalid_argument("omp: need 1 <= n <= N");
    PartialFourier pf(psi.shape(), omega);
    const int L = pf.L();
    if (Y.rows() != L || Y.cols() != C)
        throw std::invalid_argument("omp: Y must be L x C");
    for (const auto& s : sensitivities)
        if (s.size() != N) throw std::invalid_argument("omp: sensitivity length mismatch");

    // Stacked dictionary columns for the selected atoms: rows are the C
    // coil measurement blocks, one column per atom.
    Eigen::MatrixXcd D(C * L, n);
    std::vector<int> picked;
    picked.reserve(n);
    std::vector<char> used(N, 0);
    Eigen::MatrixXcd R = Y; // residuals per coil
    Eigen::VectorXcd y_stacked(C * L);
    for (int i = 0; i < C; ++i) y_stacked.segment(i * L, L) = Y.col(i);
    Eigen::VectorXcd coeffs;
    OmpResult res;

    for (int step = 0; step < n; ++step) {
        // score_j = sum_i |<r_i, F_Omega(s_i .* psi_j)>|^2, computed for all
        // atoms at once through the adjoint.
        Eigen::VectorXd score = Eigen::VectorXd::Zero(N);
        for (int i = 0; i < C; ++i) {
            const Eigen::VectorXcd u = pf.adjoint(R.col(i));
            const Eigen::VectorXcd corr =
                psi.sparsify(sensitivities[i].conjugate().cwiseProduct(u));
            score += corr.cwiseAbs2();
        }
        int best = -1;
        double best_score = -1.0;
        for (int j = 0; j < N; ++j) {
            if (!used[j] && score(j) > best_score) {
                best_score = score(j);
                best = j;
            }
        }
        used[best] = 1;
        picked.push_back(best);

        Eigen::VectorXcd atom = Eigen::VectorXcd::Zero(N);
        atom(best) = 1.0;
        const Eigen::VectorXcd img = psi.unsparsify(atom);
        for (int i = 0; i < C; ++i)
            D.block(i * L, step, L, 1) = pf.apply(sensitivities[i].cwiseProduct(img));

        const int s = step + 1;
        const auto Ds = D.leftCols(s);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(Ds);
        if (qr.rank() < s) {
            // Rank-deficient selection; fall back to a tiny ridge.
            res.ridge_regularized = true;
            Eigen::MatrixXcd G = Ds.adjoint() * Ds;
            G.diagonal().array() += 1e-12;
            coeffs = G.ldlt().solve(Ds.adjoint() * y_stacked);
        } else {
            coeffs = qr.solve(y_stacked);
        }
        const Eigen::VectorXcd fitted = Ds * coeffs;
        for (int i = 0; i < C; ++i) R.col(i) = Y.col(i) - fitted.segment(i * L, L);
    }

    res.signal.z = Eigen::VectorXcd::Zero(N);
    for (int j = 0; j < n; ++j) res.signal.z(picked[j]) = coeffs(j);
    res.signal.support = picked;
    std::sort(res.signal.support.begin(), res.signal.support.end());
    res.x = psi.unsparsify(res.signal.z);
    return res;
}

} // namespace accs
