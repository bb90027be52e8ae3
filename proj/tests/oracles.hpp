#pragma once

// Independent dense oracles used by the tests. These are built straight from
// the defining formulas and never call into the transform engine they check.

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "accs/grid.hpp"

namespace oracle {

// Orthonormal DCT-II matrix: C(p, j) = s_p cos(pi (j + 1/2) p / n).
inline Eigen::MatrixXd dct2_matrix_1d(int n) {
    Eigen::MatrixXd C(n, n);
    for (int p = 0; p < n; ++p) {
        const double s = p == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (int j = 0; j < n; ++j)
            C(p, j) = s * std::cos(M_PI * (j + 0.5) * p / n);
    }
    return C;
}

// Separable 2-D orthonormal DCT-II on column-major flattened grids:
// vec(C1 X C2^T) = (C2 kron C1) vec(X).
inline Eigen::MatrixXd dct2_matrix(const accs::GridShape& shape) {
    const Eigen::MatrixXd C1 = dct2_matrix_1d(shape.n1);
    if (shape.is_1d()) return C1;
    const Eigen::MatrixXd C2 = dct2_matrix_1d(shape.n2);
    Eigen::MatrixXd out(shape.size(), shape.size());
    for (int a = 0; a < shape.n2; ++a)
        for (int b = 0; b < shape.n2; ++b)
            out.block(a * shape.n1, b * shape.n1, shape.n1, shape.n1) = C2(a, b) * C1;
    return out;
}

// Unitary DFT matrix over the (possibly 2-D) grid, column-major indexing.
inline Eigen::MatrixXcd unitary_dft_matrix(const accs::GridShape& shape) {
    const int n = shape.size();
    Eigen::MatrixXcd F(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int f = 0; f < n; ++f) {
        int f1, f2;
        shape.unflatten(f, f1, f2);
        for (int x = 0; x < n; ++x) {
            int x1, x2;
            shape.unflatten(x, x1, x2);
            const double angle = -2.0 * M_PI *
                                 (static_cast<double>(f1) * x1 / shape.n1 +
                                  static_cast<double>(f2) * x2 / shape.n2);
            F(f, x) = std::polar(scale, angle);
        }
    }
    return F;
}

// Rows of the unitary DFT restricted to omega, scaled by sqrt(N/L).
inline Eigen::MatrixXcd partial_fourier_matrix(const accs::GridShape& shape,
                                               const std::vector<int>& omega) {
    const Eigen::MatrixXcd F = unitary_dft_matrix(shape);
    const int L = static_cast<int>(omega.size());
    Eigen::MatrixXcd out(L, shape.size());
    const double scale = std::sqrt(static_cast<double>(shape.size()) / L);
    for (int i = 0; i < L; ++i) out.row(i) = scale * F.row(omega[i]);
    return out;
}

inline double rel_err(const Eigen::MatrixXcd& got, const Eigen::MatrixXcd& want) {
    const double denom = want.norm();
    return denom > 0 ? (got - want).norm() / denom : (got - want).norm();
}

} // namespace oracle
