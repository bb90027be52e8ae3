#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "accs/liftops.hpp"
#include "accs/rng.hpp"
#include "accs/transforms.hpp"

namespace accs {

enum class BasisKind { haar, poly, sin2d };

inline const char* to_string(BasisKind k) {
    switch (k) {
        case BasisKind::haar: return "haar";
        case BasisKind::poly: return "poly";
        case BasisKind::sin2d: return "sin2d";
    }
    return "?";
}

inline BasisKind basis_kind_from_string(const std::string& s) {
    if (s == "haar") return BasisKind::haar;
    if (s == "poly") return BasisKind::poly;
    if (s == "sin2d") return BasisKind::sin2d;
    throw std::invalid_argument("unknown basis kind: " + s);
}

namespace detail {

// Thin QR with the R diagonal rotated to be real positive, so the result is
// deterministic and (for Gaussian input) exactly Haar distributed.
inline Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& A) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
    Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(A.rows(), A.cols());
    const Eigen::MatrixXcd R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
    for (int j = 0; j < A.cols(); ++j) {
        const std::complex<double> d = R(j, j);
        const double m = std::abs(d);
        if (m > 0) Q.col(j) *= d / m;
    }
    return Q;
}

} // namespace detail

/// Random or structured coil subspace basis B (N x k, orthonormal columns).
///  - haar:  QR orthonormalization of an N x k standard complex Gaussian.
///  - poly:  orthonormalized Vandermonde on [-1,1]; tensor degrees in 2-D,
///           ordered by total degree.
///  - sin2d: the k lowest-frequency DFT atoms (ties broken by flat index).
inline SubspaceBasis gen_subspace_basis(BasisKind kind, const GridShape& shape, int k,
                                        std::uint64_t seed) {
    const int N = shape.size();
    if (k < 1 || k >= N)
        throw std::invalid_argument("gen_subspace_basis: need 1 <= k < N");
    switch (kind) {
        case BasisKind::haar: {
            auto eng = make_engine(seed);
            return SubspaceBasis(detail::orthonormalize(complex_gaussian_matrix(N, k, eng)));
        }
        case BasisKind::poly: {
            Eigen::MatrixXcd V(N, k);
            // Degree pairs (d1, d2) sorted by (d1 + d2, d1); 1-D grids only
            // produce (d, 0).
            std::vector<std::pair<int, int>> degrees;
            for (int d1 = 0; d1 < N; ++d1) {
                const int max_d2 = shape.is_1d() ? 0 : N - 1;
                for (int d2 = 0; d2 <= max_d2; ++d2) degrees.emplace_back(d1, d2);
            }
            std::sort(degrees.begin(), degrees.end(), [](auto a, auto b) {
                const int ta = a.first + a.second, tb = b.first + b.second;
                return ta != tb ? ta < tb : a.first < b.first;
            });
            degrees.resize(k);
            for (int j = 0; j < k; ++j) {
                for (int idx = 0; idx < N; ++idx) {
                    int i1, i2;
                    shape.unflatten(idx, i1, i2);
                    const double t1 = shape.n1 > 1 ? -1.0 + 2.0 * i1 / (shape.n1 - 1) : 0.0;
                    const double t2 = shape.n2 > 1 ? -1.0 + 2.0 * i2 / (shape.n2 - 1) : 0.0;
                    V(idx, j) = std::pow(t1, degrees[j].first) * std::pow(t2, degrees[j].second);
                }
            }
            return SubspaceBasis(detail::orthonormalize(V));
        }
        case BasisKind::sin2d: {
            // Wrapped frequency magnitude; the k smallest atoms, determinism
            // by flat-index tie-break.
            std::vector<int> order(N);
            std::iota(order.begin(), order.end(), 0);
            auto mag2 = [&shape](int idx) {
                int f1, f2;
                shape.unflatten(idx, f1, f2);
                const int w1 = std::min(f1, shape.n1 - f1);
                const int w2 = std::min(f2, shape.n2 - f2);
                return w1 * w1 + w2 * w2;
            };
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                const int ma = mag2(a), mb = mag2(b);
                return ma != mb ? ma < mb : a < b;
            });
            Eigen::MatrixXcd B(N, k);
            const double scale = 1.0 / std::sqrt(static_cast<double>(N));
            for (int j = 0; j < k; ++j) {
                int f1, f2;
                shape.unflatten(order[j], f1, f2);
                for (int idx = 0; idx < N; ++idx) {
                    int x1, x2;
                    shape.unflatten(idx, x1, x2);
                    const double angle = 2.0 * M_PI *
                                         (static_cast<double>(f1) * x1 / shape.n1 +
                                          static_cast<double>(f2) * x2 / shape.n2);
                    B(idx, j) = std::polar(scale, angle);
                }
            }
            return SubspaceBasis(std::move(B));
        }
    }
    throw std::logic_error("gen_subspace_basis: bad kind");
}

enum class CoilModel { basis_columns, complex_sphere };

/// Coil spanning coefficients H (k x C); every column has unit l2 norm.
struct CoilCoefficients {
    Eigen::MatrixXcd H;
    CoilModel model;
};

/// basis_columns picks columns of W uniformly with replacement (default W is
/// the unitary k-point DFT); complex_sphere normalizes standard complex
/// Gaussian vectors.
inline CoilCoefficients gen_coil_coeffs(CoilModel model, int k, int C, std::uint64_t seed,
                                        const Eigen::MatrixXcd* W = nullptr) {
    if (k < 1 || C < 1) throw std::invalid_argument("gen_coil_coeffs: need k, C >= 1");
    auto eng = make_engine(seed);
    Eigen::MatrixXcd H(k, C);
    if (model == CoilModel::complex_sphere) {
        for (int c = 0; c < C; ++c) {
            Eigen::VectorXcd h = complex_gaussian_vector(k, eng);
            while (h.norm() == 0.0) h = complex_gaussian_vector(k, eng);
            H.col(c) = h / h.norm();
        }
    } else {
        Eigen::MatrixXcd basis;
        if (W) {
            if (W->rows() != k || W->cols() != k)
                throw std::invalid_argument("gen_coil_coeffs: W must be k x k");
            basis = *W;
        } else {
            basis.resize(k, k);
            const double scale = 1.0 / std::sqrt(static_cast<double>(k));
            for (int c = 0; c < k; ++c)
                for (int r = 0; r < k; ++r)
                    basis(r, c) = std::polar(scale, -2.0 * M_PI * r * c / k);
        }
        std::uniform_int_distribution<int> pick(0, k - 1);
        for (int c = 0; c < C; ++c) H.col(c) = basis.col(pick(eng));
    }
    return {std::move(H), model};
}

enum class ValueModel { gaussian, unit };

/// Exactly n-sparse signal with support drawn uniformly without replacement.
struct SparseSignal {
    Eigen::VectorXcd z;
    std::vector<int> support; // sorted
};

namespace detail {

// Fisher-Yates prefix: the first `take` entries of a random permutation.
inline std::vector<int> sample_without_replacement(int N, int take, std::mt19937_64& eng) {
    std::vector<int> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 0; i < take; ++i) {
        std::uniform_int_distribution<int> pick(i, N - 1);
        std::swap(perm[i], perm[pick(eng)]);
    }
    perm.resize(take);
    std::sort(perm.begin(), perm.end());
    return perm;
}

} // namespace detail

inline SparseSignal gen_sparse_signal(int N, int n, std::uint64_t seed,
                                      ValueModel values = ValueModel::gaussian) {
    if (n < 1 || n > N) throw std::invalid_argument("gen_sparse_signal: need 1 <= n <= N");
    auto eng = make_engine(seed);
    SparseSignal s;
    s.support = detail::sample_without_replacement(N, n, eng);
    s.z = Eigen::VectorXcd::Zero(N);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    for (int idx : s.support) {
        if (values == ValueModel::gaussian) {
            std::complex<double> v = complex_gaussian(eng);
            while (v == std::complex<double>(0.0, 0.0)) v = complex_gaussian(eng);
            s.z(idx) = v;
        } else {
            s.z(idx) = std::polar(1.0, phase(eng));
        }
    }
    return s;
}

inline SamplingPattern gen_sampling_pattern(int N, int L, std::uint64_t seed) {
    if (L < 1 || L > N) throw std::invalid_argument("gen_sampling_pattern: need 1 <= L <= N");
    auto eng = make_engine(seed);
    return SamplingPattern(detail::sample_without_replacement(N, L, eng), N);
}

/// Measurements Y (L x C) plus the pattern and grid they came from.
/// noise_fro records ||noise||_F realized by add_noise and noise_sigma the
/// per-column bound sigma = ||noise||_F / sqrt(C).
struct MeasurementSet {
    GridShape shape;
    SamplingPattern omega;
    Eigen::MatrixXcd Y;
    double noise_fro = 0.0;
    double noise_sigma = 0.0;
};

/// Direct (non-lifted) synthesis: column i of Y is F_Omega((B h_i) .* (Psi* z)).
inline MeasurementSet synthesize_measurements(const SubspaceBasis& basis,
                                              const Eigen::MatrixXcd& H,
                                              const Eigen::VectorXcd& z, const Sparsifier& psi,
                                              const SamplingPattern& omega) {
    if (H.rows() != basis.k())
        throw std::invalid_argument("synthesize_measurements: H rows must equal k");
    if (z.size() != basis.N() || psi.size() != basis.N())
        throw std::invalid_argument("synthesize_measurements: grid size mismatch");
    PartialFourier pf(psi.shape(), omega);
    const Eigen::VectorXcd x = psi.unsparsify(z);
    const int C = static_cast<int>(H.cols());
    Eigen::MatrixXcd Y(pf.L(), C);
    for (int i = 0; i < C; ++i) {
        const Eigen::VectorXcd coil = basis.matrix() * H.col(i);
        Y.col(i) = pf.apply(coil.cwiseProduct(x));
    }
    return {psi.shape(), omega, std::move(Y), 0.0, 0.0};
}

struct NoiseSpec {
    double ratio = 0.0; // target ||noise||_F / ||Y||_F
    std::uint64_t seed = 0;
};

/// Adds i.i.d. complex Gaussian noise rescaled so that the realized
/// Frobenius ratio equals spec.ratio exactly.
inline MeasurementSet add_noise(const MeasurementSet& ms, const NoiseSpec& spec) {
    if (spec.ratio < 0) throw std::invalid_argument("add_noise: ratio must be >= 0");
    MeasurementSet out = ms;
    if (spec.ratio == 0.0) return out;
    const double y_norm = ms.Y.norm();
    if (y_norm == 0.0)
        throw std::invalid_argument("add_noise: Y is zero, no scale reference for the ratio");
    auto eng = make_engine(spec.seed);
    Eigen::MatrixXcd noise =
        complex_gaussian_matrix(static_cast<int>(ms.Y.rows()), static_cast<int>(ms.Y.cols()), eng);
    noise *= spec.ratio * y_norm / noise.norm();
    out.Y += noise;
    out.noise_fro = spec.ratio * y_norm;
    out.noise_sigma = out.noise_fro / std::sqrt(static_cast<double>(ms.Y.cols()));
    return out;
}

} // namespace accs
