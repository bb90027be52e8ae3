#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "accs/detail/fft.hpp"
#include "accs/grid.hpp"

namespace accs {

enum class SparsifierKind { identity, dct2, dft };

inline const char* to_string(SparsifierKind k) {
    switch (k) {
        case SparsifierKind::identity: return "identity";
        case SparsifierKind::dct2: return "dct2";
        case SparsifierKind::dft: return "dft";
    }
    return "?";
}

inline SparsifierKind sparsifier_kind_from_string(const std::string& s) {
    if (s == "identity") return SparsifierKind::identity;
    if (s == "dct2") return SparsifierKind::dct2;
    if (s == "dft") return SparsifierKind::dft;
    throw std::invalid_argument("unknown sparsifier kind: " + s);
}

/// Orthonormal sparsifying transform Psi on a grid. sparsify computes
/// z = Psi x, unsparsify computes x = Psi* z; both are exact inverses of
/// each other and preserve the l2 norm for the dct2 and dft kinds.
///
/// dct2 is the orthonormal DCT-II, applied separably along both axes of a
/// 2-D grid and to real and imaginary parts independently. dft is the
/// unitary discrete Fourier transform.
class Sparsifier {
public:
    Sparsifier(SparsifierKind kind, const GridShape& shape) : kind_(kind), shape_(shape) {}

    SparsifierKind kind() const { return kind_; }
    const GridShape& shape() const { return shape_; }
    int size() const { return shape_.size(); }

    Eigen::VectorXcd sparsify(const Eigen::VectorXcd& x) const { return transform(x, true); }
    Eigen::VectorXcd unsparsify(const Eigen::VectorXcd& z) const { return transform(z, false); }

private:
    Eigen::VectorXcd transform(const Eigen::VectorXcd& v, bool forward) const {
        const int n = shape_.size();
        if (v.size() != n)
            throw std::invalid_argument("Sparsifier: input length " + std::to_string(v.size()) +
                                        " does not match grid size " + std::to_string(n));
        switch (kind_) {
            case SparsifierKind::identity:
                return v;
            case SparsifierKind::dft: {
                Eigen::VectorXcd out(n);
                detail::FftEngine::instance().dft(
                    shape_, v.data(), out.data(), forward ? FFTW_FORWARD : FFTW_BACKWARD);
                out *= 1.0 / std::sqrt(static_cast<double>(n));
                return out;
            }
            case SparsifierKind::dct2:
                return dct(v, forward);
        }
        throw std::logic_error("Sparsifier: bad kind");
    }

    // Orthonormal DCT-II (forward) / DCT-III (inverse) via FFTW's raw
    // REDFT10 / REDFT01 kinds plus the separable per-axis scaling.
    Eigen::VectorXcd dct(const Eigen::VectorXcd& v, bool forward) const {
        const int n = shape_.size();
        thread_local std::vector<double> in, out;
        in.resize(n);
        out.resize(n);
        Eigen::VectorXcd result(n);
        auto& engine = detail::FftEngine::instance();

        // A 1-D grid gets a rank-1 plan, so the second-axis factor must not
        // be applied.
        const bool both_axes = !shape_.is_1d();
        for (int part = 0; part < 2; ++part) {
            if (forward) {
                for (int i = 0; i < n; ++i)
                    in[i] = part == 0 ? v(i).real() : v(i).imag();
                engine.dct2_raw(shape_, in.data(), out.data());
                for (int i = 0; i < n; ++i) {
                    int i1, i2;
                    shape_.unflatten(i, i1, i2);
                    const double s = fwd_factor(i1, shape_.n1) *
                                     (both_axes ? fwd_factor(i2, shape_.n2) : 1.0);
                    if (part == 0)
                        result(i).real(out[i] * s);
                    else
                        result(i).imag(out[i] * s);
                }
            } else {
                for (int i = 0; i < n; ++i) {
                    int i1, i2;
                    shape_.unflatten(i, i1, i2);
                    const double s = inv_factor(i1, shape_.n1) *
                                     (both_axes ? inv_factor(i2, shape_.n2) : 1.0);
                    in[i] = (part == 0 ? v(i).real() : v(i).imag()) * s;
                }
                engine.dct3_raw(shape_, in.data(), out.data());
                for (int i = 0; i < n; ++i) {
                    if (part == 0)
                        result(i).real(out[i]);
                    else
                        result(i).imag(out[i]);
                }
            }
        }
        return result;
    }

    // REDFT10 returns 2 * sum x_j cos(pi (j+1/2) k / n); the orthonormal
    // coefficient is s_k/2 times that, with s_0 = sqrt(1/n), s_k = sqrt(2/n).
    static double fwd_factor(int k, int n) {
        return k == 0 ? 0.5 / std::sqrt(static_cast<double>(n))
                      : 1.0 / std::sqrt(2.0 * n);
    }
    // REDFT01 computes X_0 + 2 * sum_{k>=1} X_k cos(...); feeding
    // X_k = g_k c_k reproduces the orthonormal synthesis exactly.
    static double inv_factor(int k, int n) {
        return k == 0 ? 1.0 / std::sqrt(static_cast<double>(n))
                      : 1.0 / std::sqrt(2.0 * n);
    }

    SparsifierKind kind_;
    GridShape shape_;
};

/// Subset Omega of frequency-grid indices; strictly sorted, unique, in [0, N).
struct SamplingPattern {
    std::vector<int> indices;

    SamplingPattern() = default;
    SamplingPattern(std::vector<int> idx, int grid_size) : indices(std::move(idx)) {
        if (indices.empty())
            throw std::invalid_argument("SamplingPattern: empty index set");
        std::sort(indices.begin(), indices.end());
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] < 0 || indices[i] >= grid_size)
                throw std::invalid_argument("SamplingPattern: index " +
                                            std::to_string(indices[i]) + " out of range [0, " +
                                            std::to_string(grid_size) + ")");
            if (i > 0 && indices[i] == indices[i - 1])
                throw std::invalid_argument("SamplingPattern: duplicate index " +
                                            std::to_string(indices[i]));
        }
    }

    int count() const { return static_cast<int>(indices.size()); }
};

/// Normalized partial Fourier operator F_Omega: sqrt(N/L) times the unitary
/// DFT restricted to Omega, so that F_Omega F_Omega* = (N/L) I_L.
class PartialFourier {
public:
    PartialFourier(const GridShape& shape, SamplingPattern omega)
        : shape_(shape), omega_(std::move(omega)) {
        if (omega_.count() > shape_.size())
            throw std::invalid_argument("PartialFourier: L exceeds grid size");
    }

    const GridShape& shape() const { return shape_; }
    const SamplingPattern& omega() const { return omega_; }
    int L() const { return omega_.count(); }
    int N() const { return shape_.size(); }

    /// y = F_Omega x; equivalently rows of the unnormalized DFT scaled by 1/sqrt(L).
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
        if (x.size() != shape_.size())
            throw std::invalid_argument("PartialFourier::apply: grid size mismatch");
        thread_local Eigen::VectorXcd freq;
        freq.resize(shape_.size());
        detail::FftEngine::instance().dft(shape_, x.data(), freq.data(), FFTW_FORWARD);
        const double scale = 1.0 / std::sqrt(static_cast<double>(L()));
        Eigen::VectorXcd y(L());
        for (int i = 0; i < L(); ++i) y(i) = freq(omega_.indices[i]) * scale;
        return y;
    }

    /// Conjugate transpose of apply.
    Eigen::VectorXcd adjoint(const Eigen::VectorXcd& y) const {
        if (y.size() != L())
            throw std::invalid_argument("PartialFourier::adjoint: measurement length mismatch");
        thread_local Eigen::VectorXcd freq;
        freq.resize(shape_.size());
        freq.setZero();
        const double scale = 1.0 / std::sqrt(static_cast<double>(L()));
        for (int i = 0; i < L(); ++i) freq(omega_.indices[i]) = y(i) * scale;
        Eigen::VectorXcd out(shape_.size());
        detail::FftEngine::instance().dft(shape_, freq.data(), out.data(), FFTW_BACKWARD);
        return out;
    }

private:
    GridShape shape_;
    SamplingPattern omega_;
};

} // namespace accs
