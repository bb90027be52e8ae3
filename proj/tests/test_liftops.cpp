#include <catch2/catch_amalgamated.hpp>

#include "accs/liftops.hpp"
#include "accs/modelgen.hpp"
#include "oracles.hpp"

using namespace accs;

namespace {

LiftedOperator make_op(const GridShape& shape, int k, int L, SparsifierKind kind,
                       std::uint64_t seed) {
    const int N = shape.size();
    return LiftedOperator(gen_subspace_basis(BasisKind::haar, shape, k, seed_mix(seed, 1)),
                          Sparsifier(kind, shape),
                          gen_sampling_pattern(N, L, seed_mix(seed, 2)));
}

} // namespace

TEST_CASE("phi_apply on a single-atom lifting equals the pointwise product", "[liftops]") {
    GridShape shape(8, 1);
    auto op = make_op(shape, 2, 4, SparsifierKind::dct2, 5);
    auto eng = make_engine(6);
    const Eigen::VectorXcd h = complex_gaussian_vector(2, eng);
    for (int j : {0, 3, 7}) {
        Eigen::VectorXcd z = Eigen::VectorXcd::Zero(8);
        z(j) = 1.0;
        const Eigen::VectorXcd xcol = lift_outer(z, h);
        Eigen::VectorXcd atom = Eigen::VectorXcd::Zero(8);
        atom(j) = 1.0;
        const Eigen::VectorXcd want = op.sparsifier()
                                          .unsparsify(atom)
                                          .cwiseProduct(op.basis().matrix() * h);
        REQUIRE(oracle::rel_err(op.phi_apply(xcol), want) < 1e-12);
    }
    REQUIRE(op.phi_apply(Eigen::VectorXcd::Zero(16)).norm() == 0.0);
}

TEST_CASE("phi_apply matches dense Phi built from the row formula", "[liftops]") {
    GridShape shape(8, 1);
    auto op = make_op(shape, 2, 5, SparsifierKind::dft, 9);
    // Dense Phi: row j, block m entry l is Psi*(j, m) B(j, l).
    Eigen::MatrixXcd psi_adj(8, 8);
    const Eigen::MatrixXcd F = oracle::unitary_dft_matrix(shape);
    psi_adj = F.adjoint();
    Eigen::MatrixXcd phi(8, 16);
    for (int j = 0; j < 8; ++j)
        for (int m = 0; m < 8; ++m)
            for (int l = 0; l < 2; ++l)
                phi(j, m * 2 + l) = psi_adj(j, m) * op.basis().matrix()(j, l);
    auto eng = make_engine(10);
    const Eigen::VectorXcd x = complex_gaussian_vector(16, eng);
    REQUIRE(oracle::rel_err(op.phi_apply(x), phi * x) < 1e-12);
}

TEST_CASE("lifted forward agrees with direct synthesis", "[liftops]") {
    GridShape shape(4, 4);
    const int k = 3, C = 2, L = 9;
    auto basis = gen_subspace_basis(BasisKind::haar, shape, k, 100);
    Sparsifier psi(SparsifierKind::dct2, shape);
    auto omega = gen_sampling_pattern(16, L, 101);
    const auto z = gen_sparse_signal(16, 4, 102);
    const auto H = gen_coil_coeffs(CoilModel::complex_sphere, k, C, 103);
    const auto ms = synthesize_measurements(basis, H.H, z.z, psi, omega);
    LiftedOperator op(basis, psi, omega);
    REQUIRE(oracle::rel_err(op.forward(lift_outer(z.z, H.H)), ms.Y) < 1e-12);
}

TEST_CASE("forward and adjoint match the dense materialization", "[liftops]") {
    GridShape shape(8, 1);
    auto op = make_op(shape, 2, 4, SparsifierKind::dct2, 12);
    const Eigen::MatrixXcd A = op.materialize_dense();
    auto eng = make_engine(13);
    const Eigen::MatrixXcd X = complex_gaussian_matrix(16, 2, eng);
    const Eigen::MatrixXcd Y = complex_gaussian_matrix(4, 2, eng);
    REQUIRE(oracle::rel_err(op.forward(X), A * X) < 1e-12);
    REQUIRE(oracle::rel_err(op.adjoint(Y), A.adjoint() * Y) < 1e-12);
    REQUIRE(op.forward(Eigen::MatrixXcd::Zero(16, 2)).norm() == 0.0);
    REQUIRE(op.adjoint(Eigen::MatrixXcd::Zero(4, 2)).norm() == 0.0);
}

TEST_CASE("adjoint identity holds across shapes and kinds", "[liftops]") {
    auto eng = make_engine(17);
    int instances = 0;
    for (GridShape shape : {GridShape(8, 1), GridShape(16, 1), GridShape(4, 4)}) {
        const int N = shape.size();
        for (int k : {1, 2, 4}) {
            for (auto kind :
                 {SparsifierKind::identity, SparsifierKind::dct2, SparsifierKind::dft}) {
                for (int C : {1, 3}) {
                    const int L = N / 2;
                    auto op = make_op(shape, k, L, kind, eng());
                    const Eigen::MatrixXcd X = complex_gaussian_matrix(k * N, C, eng);
                    const Eigen::MatrixXcd Y = complex_gaussian_matrix(L, C, eng);
                    const auto AX = op.forward(X);
                    const std::complex<double> lhs = (AX.adjoint() * Y).trace();
                    const std::complex<double> rhs = (X.adjoint() * op.adjoint(Y)).trace();
                    REQUIRE(std::abs(lhs - rhs) <= 1e-12 * AX.norm() * Y.norm());
                    ++instances;
                }
            }
        }
    }
    REQUIRE(instances >= 50);
}

TEST_CASE("the k=1 flat-basis lifting collapses to a scaled partial Fourier",
          "[liftops]") {
    // With B the constant unit-norm column and Psi the identity,
    // Phi = diag(B) = I / sqrt(N), so A = F_Omega / sqrt(N).
    GridShape shape(8, 1);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Constant(8, 1, 1.0 / std::sqrt(8.0));
    const std::vector<int> omega{0, 2, 3, 6};
    LiftedOperator op(SubspaceBasis(B), Sparsifier(SparsifierKind::identity, shape),
                      SamplingPattern(omega, 8));
    const Eigen::MatrixXcd want =
        oracle::partial_fourier_matrix(shape, omega) / std::sqrt(8.0);
    REQUIRE(oracle::rel_err(op.materialize_dense(), want) < 1e-12);
}

TEST_CASE("materialized columns equal applications to basis vectors", "[liftops]") {
    GridShape shape(8, 1);
    auto op = make_op(shape, 2, 6, SparsifierKind::dft, 19);
    const Eigen::MatrixXcd A = op.materialize_dense();
    for (int c = 0; c < 16; ++c) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(16);
        e(c) = 1.0;
        REQUIRE(oracle::rel_err(op.apply_column(e), A.col(c)) < 1e-12);
    }
}

TEST_CASE("materialize_dense enforces the kN guard", "[liftops]") {
    GridShape shape(2048, 1);
    auto basis = gen_subspace_basis(BasisKind::sin2d, shape, 3, 0);
    LiftedOperator op(basis, Sparsifier(SparsifierKind::identity, shape),
                      SamplingPattern({0, 1}, 2048));
    REQUIRE_THROWS_AS(op.materialize_dense(), std::invalid_argument);
}

TEST_CASE("operator norm estimate: full sampling of the flat k=1 lifting", "[liftops]") {
    // A A* = I / L there, so ||A||^2 = 1/L exactly.
    GridShape shape(8, 1);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Constant(8, 1, 1.0 / std::sqrt(8.0));
    std::vector<int> omega(8);
    std::iota(omega.begin(), omega.end(), 0);
    LiftedOperator op(SubspaceBasis(B), Sparsifier(SparsifierKind::dft, shape),
                      SamplingPattern(omega, 8));
    const double est = operator_norm_estimate(op);
    REQUIRE(est == Catch::Approx(1.05 / 8.0).epsilon(1e-9));
}

TEST_CASE("operator norm estimate tracks the dense spectral norm", "[liftops]") {
    auto eng = make_engine(29);
    for (int rep = 0; rep < 5; ++rep) {
        GridShape shape(16, 1);
        auto op = make_op(shape, 2, 9, SparsifierKind::dct2, eng());
        const Eigen::MatrixXcd A = op.materialize_dense();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
        const double truth = svd.singularValues()(0) * svd.singularValues()(0);
        const double est = operator_norm_estimate(op, 100, 1e-6, eng());
        REQUIRE(est >= truth * (1.0 - 1e-9));
        REQUIRE(est <= truth * 1.05 * 1.02);
        REQUIRE(est >= truth * 1.05 * 0.98);
    }
}

TEST_CASE("a basis with zero columns is rejected", "[liftops]") {
    REQUIRE_THROWS_AS(SubspaceBasis(Eigen::MatrixXcd(8, 0)), std::invalid_argument);
    REQUIRE_THROWS_AS(SubspaceBasis(Eigen::MatrixXcd::Identity(4, 4)), std::invalid_argument);
    REQUIRE_THROWS_AS(SubspaceBasis(Eigen::MatrixXcd::Ones(8, 2)), std::invalid_argument);
}

TEST_CASE("forward is linear and batches equal per-column application", "[liftops]") {
    GridShape shape(4, 4);
    auto op = make_op(shape, 2, 8, SparsifierKind::dct2, 33);
    auto eng = make_engine(34);
    const Eigen::MatrixXcd X1 = complex_gaussian_matrix(32, 3, eng);
    const Eigen::MatrixXcd X2 = complex_gaussian_matrix(32, 3, eng);
    const std::complex<double> a(0.7, -1.3), b(-2.1, 0.4);
    REQUIRE(oracle::rel_err(op.forward(a * X1 + b * X2),
                            a * op.forward(X1) + b * op.forward(X2)) < 1e-12);
    const Eigen::MatrixXcd Y = op.forward(X1);
    for (int c = 0; c < 3; ++c)
        REQUIRE((Y.col(c) - op.apply_column(X1.col(c))).norm() == 0.0);
}
