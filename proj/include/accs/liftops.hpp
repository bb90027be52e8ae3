#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "accs/rng.hpp"
#include "accs/transforms.hpp"

namespace accs {

/// Known subspace holding the sensor profiles: s_i = B h_i with B having
/// orthonormal columns (checked at construction).
class SubspaceBasis {
public:
    explicit SubspaceBasis(Eigen::MatrixXcd B) : B_(std::move(B)) {
        const int N = static_cast<int>(B_.rows());
        const int k = static_cast<int>(B_.cols());
        if (k < 1)
            throw std::invalid_argument("SubspaceBasis: k must be at least 1");
        if (k >= N)
            throw std::invalid_argument("SubspaceBasis: k = " + std::to_string(k) +
                                        " must be smaller than N = " + std::to_string(N));
        const double defect =
            (B_.adjoint() * B_ - Eigen::MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff();
        if (defect > 1e-8)
            throw std::invalid_argument(
                "SubspaceBasis: columns are not orthonormal (defect " + std::to_string(defect) + ")");
    }

    const Eigen::MatrixXcd& matrix() const { return B_; }
    int N() const { return static_cast<int>(B_.rows()); }
    int k() const { return static_cast<int>(B_.cols()); }

private:
    Eigen::MatrixXcd B_;
};

/// Implicit lifted forward map A = F_Omega Phi acting column-wise on
/// kN x C matrices, with Phi row j equal to (conj(q_j) kron b_j)^*.
/// Applications cost O(k N log N) per column; A is never materialized in
/// solver paths.
class LiftedOperator {
public:
    LiftedOperator(SubspaceBasis basis, Sparsifier psi, SamplingPattern omega)
        : basis_(std::move(basis)),
          psi_(std::move(psi)),
          pf_(psi_.shape(), std::move(omega)) {
        if (basis_.N() != psi_.size())
            throw std::invalid_argument("LiftedOperator: basis and sparsifier sizes differ");
    }

    int N() const { return basis_.N(); }
    int k() const { return basis_.k(); }
    int L() const { return pf_.L(); }
    int lifted_dim() const { return k() * N(); }
    const SubspaceBasis& basis() const { return basis_; }
    const Sparsifier& sparsifier() const { return psi_; }
    const PartialFourier& partial_fourier() const { return pf_; }

    /// Phi x for one lifted column, computed as
    /// sum_l B(:,l) .* (Psi* m_l) with m_l row l of the k x N reshape.
    Eigen::VectorXcd phi_apply(const Eigen::VectorXcd& xcol) const {
        if (xcol.size() != lifted_dim())
            throw std::invalid_argument("phi_apply: expected length " +
                                        std::to_string(lifted_dim()) + ", got " +
                                        std::to_string(xcol.size()));
        Eigen::Map<const Eigen::MatrixXcd> M(xcol.data(), k(), N());
        Eigen::VectorXcd g = Eigen::VectorXcd::Zero(N());
        for (int l = 0; l < k(); ++l) {
            const Eigen::VectorXcd row = M.row(l).transpose();
            g.array() += basis_.matrix().col(l).array() * psi_.unsparsify(row).array();
        }
        return g;
    }

    Eigen::VectorXcd apply_column(const Eigen::VectorXcd& xcol) const {
        return pf_.apply(phi_apply(xcol));
    }

    Eigen::VectorXcd adjoint_column(const Eigen::VectorXcd& ycol) const {
        if (ycol.size() != L())
            throw std::invalid_argument("adjoint_column: expected length " +
                                        std::to_string(L()));
        const Eigen::VectorXcd u = pf_.adjoint(ycol);
        Eigen::VectorXcd xcol(lifted_dim());
        Eigen::Map<Eigen::MatrixXcd> M(xcol.data(), k(), N());
        for (int l = 0; l < k(); ++l) {
            const Eigen::VectorXcd w = basis_.matrix().col(l).conjugate().cwiseProduct(u);
            M.row(l) = psi_.sparsify(w).transpose();
        }
        return xcol;
    }

    /// Y = A X, column by column.
    Eigen::MatrixXcd forward(const Eigen::MatrixXcd& X) const {
        if (X.rows() != lifted_dim())
            throw std::invalid_argument("forward: row count mismatch");
        Eigen::MatrixXcd Y(L(), X.cols());
        for (int c = 0; c < X.cols(); ++c) Y.col(c) = apply_column(X.col(c));
        return Y;
    }

    /// X = A* Y, column by column; satisfies <A X, Y> = <X, A* Y>.
    Eigen::MatrixXcd adjoint(const Eigen::MatrixXcd& Y) const {
        if (Y.rows() != L())
            throw std::invalid_argument("adjoint: row count mismatch");
        Eigen::MatrixXcd X(lifted_dim(), Y.cols());
        for (int c = 0; c < Y.cols(); ++c) X.col(c) = adjoint_column(Y.col(c));
        return X;
    }

    /// Exact dense L x kN matrix of A, for oracles and desk-scale
    /// diagnostics only. Guarded at kN <= 4096.
    Eigen::MatrixXcd materialize_dense() const {
        if (lifted_dim() > 4096)
            throw std::invalid_argument("materialize_dense: kN = " +
                                        std::to_string(lifted_dim()) + " exceeds the 4096 guard");
        const int n = N();
        // Dense Psi*: column m is the m-th synthesis atom.
        Eigen::MatrixXcd psi_adj(n, n);
        for (int m = 0; m < n; ++m) {
            Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
            e(m) = 1.0;
            psi_adj.col(m) = psi_.unsparsify(e);
        }
        // Phi(j, m*k + l) = Psi*(j, m) * B(j, l).
        Eigen::MatrixXcd phi(n, lifted_dim());
        for (int m = 0; m < n; ++m)
            for (int l = 0; l < k(); ++l)
                phi.col(m * k() + l) = psi_adj.col(m).cwiseProduct(basis_.matrix().col(l));
        return dense_partial_fourier() * phi;
    }

    /// Dense F_Omega rows built from the DFT definition (independent of the
    /// FFT library), scaled by 1/sqrt(L).
    Eigen::MatrixXcd dense_partial_fourier() const {
        const GridShape& shape = psi_.shape();
        const int n = shape.size();
        Eigen::MatrixXcd F(L(), n);
        const double scale = 1.0 / std::sqrt(static_cast<double>(L()));
        for (int r = 0; r < L(); ++r) {
            int f1, f2;
            shape.unflatten(pf_.omega().indices[r], f1, f2);
            for (int x = 0; x < n; ++x) {
                int x1, x2;
                shape.unflatten(x, x1, x2);
                const double angle = -2.0 * M_PI *
                                     (static_cast<double>(f1) * x1 / shape.n1 +
                                      static_cast<double>(f2) * x2 / shape.n2);
                F(r, x) = std::polar(scale, angle);
            }
        }
        return F;
    }

private:
    SubspaceBasis basis_;
    Sparsifier psi_;
    PartialFourier pf_;
};

/// Power-iteration estimate of ||A||^2 (largest eigenvalue of A*A) times a
/// 1.05 safety factor, used as a FISTA step bound. The start vector is
/// deterministic in the seed so step sizes are reproducible.
inline double operator_norm_estimate(const LiftedOperator& op, int max_iters = 100,
                                     double tol = 1e-6, std::uint64_t seed = 0x0a5e) {
    if (max_iters < 1)
        throw std::invalid_argument("operator_norm_estimate: max_iters must be >= 1");
    auto eng = make_engine(seed);
    Eigen::VectorXcd v = complex_gaussian_vector(op.lifted_dim(), eng);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXcd w = op.adjoint_column(op.apply_column(v));
        const double next = std::real(v.dot(w));
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        if (it > 0 && std::abs(next - lambda) <= tol * std::max(next, 1e-300)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda * 1.05;
}

/// Lifted ground truth X0 = z kron H (kN x C), block j equal to z_j * H.
inline Eigen::MatrixXcd lift_outer(const Eigen::VectorXcd& z, const Eigen::MatrixXcd& H) {
    const int k = static_cast<int>(H.rows());
    const int C = static_cast<int>(H.cols());
    const int N = static_cast<int>(z.size());
    Eigen::MatrixXcd X(k * N, C);
    for (int j = 0; j < N; ++j) X.middleRows(j * k, k) = z(j) * H;
    return X;
}

} // namespace accs
