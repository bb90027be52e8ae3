#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "accs/rng.hpp"
#include "accs/transforms.hpp"

namespace accs {

/// Best rank-one factorization M ~ sigma * u * v^T  (note: plain transpose,
/// not conjugate transpose), with u and v unit vectors.
struct RankOneFactors {
    double sigma = 0.0;
    Eigen::VectorXcd u;
    Eigen::VectorXcd v;
};

/// Column mean of a lifted matrix reshaped to k x N (column-major).
inline Eigen::MatrixXcd average_reshape(const Eigen::MatrixXcd& X, int k) {
    if (k < 1 || X.rows() % k != 0)
        throw std::invalid_argument("average_reshape: rows not partitioned by k");
    if (X.cols() < 1) throw std::invalid_argument("average_reshape: need C >= 1");
    const Eigen::VectorXcd mean = X.rowwise().mean();
    const int N = static_cast<int>(X.rows()) / k;
    return Eigen::Map<const Eigen::MatrixXcd>(mean.data(), k, N);
}

/// Top singular triple via power iteration on the k x k Gram matrix M M*;
/// 200 iterations or 1e-14 relative change. A zero matrix yields sigma = 0
/// with fixed unit vectors e_1.
inline RankOneFactors best_rank_one(const Eigen::MatrixXcd& M) {
    const int k = static_cast<int>(M.rows());
    const int N = static_cast<int>(M.cols());
    if (k < 1 || N < 1) throw std::invalid_argument("best_rank_one: empty matrix");
    RankOneFactors f;
    if (M.norm() == 0.0) {
        f.u = Eigen::VectorXcd::Zero(k);
        f.u(0) = 1.0;
        f.v = Eigen::VectorXcd::Zero(N);
        f.v(0) = 1.0;
        return f;
    }
    const Eigen::MatrixXcd G = M * M.adjoint();
    auto eng = make_engine(0xbe5712a7);
    Eigen::VectorXcd u = complex_gaussian_vector(k, eng);
    u.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXcd w = G * u;
        const double norm = w.norm();
        if (norm == 0.0) break;
        const double next = std::real(u.dot(w));
        u = w / norm;
        if (it > 0 && std::abs(next - lambda) <= 1e-14 * std::max(next, 1e-300)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    Eigen::VectorXcd w = M.adjoint() * u;
    f.sigma = w.norm();
    f.u = u;
    // M ~ sigma u w^* in SVD form; v^T = w^* gives v = conj(w).
    f.v = f.sigma > 0 ? Eigen::VectorXcd(w.conjugate() / f.sigma)
                      : Eigen::VectorXcd::Zero(N);
    if (f.sigma == 0.0) f.v(0) = 1.0;
    return f;
}

/// Recovered signal in sparse coordinates (z, unit norm, phase-normalized)
/// and image coordinates (x = Psi* z).
struct RecoveredSignal {
    Eigen::VectorXcd z;
    Eigen::VectorXcd x;
    bool used_stacked_fallback = false;
};

namespace detail {

// Deterministic phase convention: rotate so the largest-magnitude entry is
// real positive; ties broken by lowest index.
inline void normalize_phase(Eigen::VectorXcd& v) {
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < v.size(); ++i) {
        const double m = std::abs(v(i));
        if (m > best) {
            best = m;
            arg = i;
        }
    }
    if (best > 0) v *= std::conj(v(arg)) / best;
}

} // namespace detail

/// Signal retrieval from a lifted solution: average the columns, reshape to
/// k x N, take the best rank-one factor and read the signal off its right
/// factor. When the coil average (nearly) cancels, falls back to a two-stage
/// factorization of the stacked k x (N C) unfolding.
inline RecoveredSignal recover_signal(const Eigen::MatrixXcd& X_hat, int k,
                                      const Sparsifier& psi) {
    if (X_hat.norm() == 0.0)
        throw std::invalid_argument("recover_signal: zero input has no signal direction");
    const int C = static_cast<int>(X_hat.cols());
    const int N = static_cast<int>(X_hat.rows()) / k;
    if (N != psi.size())
        throw std::invalid_argument("recover_signal: sparsifier size mismatch");
    RecoveredSignal rec;
    const Eigen::MatrixXcd avg = average_reshape(X_hat, k);
    const double avg_scale = X_hat.norm() / std::sqrt(static_cast<double>(C));
    if (avg.norm() > 1e-8 * avg_scale) {
        rec.z = best_rank_one(avg).v;
    } else {
        rec.used_stacked_fallback = true;
        // The kN x C buffer read column-major is already the k x (N C)
        // unfolding. Its left factor is the dominant coil direction; the
        // per-coil right factors are then refactored for the signal.
        Eigen::Map<const Eigen::MatrixXcd> stacked(X_hat.data(), k, N * C);
        const RankOneFactors first = best_rank_one(stacked);
        Eigen::VectorXcd w = stacked.adjoint() * first.u;
        Eigen::Map<const Eigen::MatrixXcd> per_coil(w.data(), N, C);
        rec.z = best_rank_one(per_coil.conjugate()).u;
    }
    detail::normalize_phase(rec.z);
    rec.x = psi.unsparsify(rec.z);
    return rec;
}

/// min over complex alpha of ||b - alpha a||_2 / ||b||_2, the scale-invariant
/// error for the inherent calibration ambiguity.
inline double aligned_relative_error(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    if (b.norm() == 0.0)
        throw std::invalid_argument("aligned_relative_error: reference vector is zero");
    if (a.size() != b.size())
        throw std::invalid_argument("aligned_relative_error: length mismatch");
    const double a2 = a.squaredNorm();
    if (a2 == 0.0) return 1.0;
    const std::complex<double> alpha = a.dot(b) / a2;
    return (b - alpha * a).norm() / b.norm();
}

} // namespace accs
