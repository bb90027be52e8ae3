#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "accs/liftops.hpp"

namespace accs {

enum class Regularizer { block_l12, column_l2 };
enum class StepMode { power_iteration, fixed };

/// Mixed l1,2 norm: sum over the N row blocks of size k of the Frobenius
/// norm of the k x C block.
inline double block_l12_norm(const Eigen::MatrixXcd& X, int k) {
    if (k < 1 || X.rows() % k != 0)
        throw std::invalid_argument("block_l12_norm: rows not partitioned by k");
    const int nblocks = static_cast<int>(X.rows()) / k;
    double total = 0.0;
    for (int j = 0; j < nblocks; ++j) total += X.middleRows(j * k, k).norm();
    return total;
}

inline double column_l2_sum(const Eigen::MatrixXcd& X) {
    double total = 0.0;
    for (int c = 0; c < X.cols(); ++c) total += X.col(c).norm();
    return total;
}

/// Block soft-thresholding: each k x C block Z_j maps to
/// Z_j (1 - tau / max(||Z_j||_F, tau)), i.e. zero when ||Z_j||_F <= tau.
inline void block_prox_inplace(Eigen::MatrixXcd& Z, int k, double tau) {
    if (tau < 0) throw std::invalid_argument("block_prox: tau must be >= 0");
    if (k < 1 || Z.rows() % k != 0)
        throw std::invalid_argument("block_prox: rows not partitioned by k");
    if (tau == 0.0) return;
    const int nblocks = static_cast<int>(Z.rows()) / k;
    for (int j = 0; j < nblocks; ++j) {
        auto block = Z.middleRows(j * k, k);
        const double norm = block.norm();
        if (norm <= tau)
            block.setZero();
        else
            block *= 1.0 - tau / norm;
    }
}

inline Eigen::MatrixXcd block_prox(const Eigen::MatrixXcd& Z, int k, double tau) {
    Eigen::MatrixXcd out = Z;
    block_prox_inplace(out, k, tau);
    return out;
}

/// Whole-column soft-thresholding, the row-sparsity baseline regularizer.
inline void column_prox_inplace(Eigen::MatrixXcd& Z, double tau) {
    if (tau < 0) throw std::invalid_argument("column_prox: tau must be >= 0");
    if (tau == 0.0) return;
    for (int c = 0; c < Z.cols(); ++c) {
        const double norm = Z.col(c).norm();
        if (norm <= tau)
            Z.col(c).setZero();
        else
            Z.col(c) *= 1.0 - tau / norm;
    }
}

struct SolverConfig {
    // Continuation schedule: lambda_0 = lambda_max_factor * lambda_max(Y),
    // geometric decay to lambda_min_factor * lambda_0 over `stages`.
    double lambda_max_factor = 1.0;
    double lambda_min_factor = 1e-6;
    int stages = 10;
    int max_iters = 500; // per stage
    double rel_change_tol = 1e-10;
    StepMode step_mode = StepMode::power_iteration;
    double fixed_step_norm2 = 0.0; // ||A||^2 bound when step_mode == fixed
    Regularizer regularizer = Regularizer::block_l12;
    std::uint64_t power_seed = 0x0a5e;
    // When positive, continuation stops at the first stage whose residual
    // ||Y - A X||_F falls at or below this value (discrepancy stop for noisy
    // data, emulating the constrained program).
    double target_residual = 0.0;
    // Optional per-iteration observer (iterate index, current X).
    std::function<void(int, const Eigen::MatrixXcd&)> iterate_callback;

    void validate() const {
        if (stages < 1) throw std::invalid_argument("SolverConfig: stages must be >= 1");
        if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
        if (rel_change_tol <= 0)
            throw std::invalid_argument("SolverConfig: rel_change_tol must be > 0");
        if (lambda_max_factor <= 0 || lambda_min_factor <= 0 ||
            lambda_min_factor > lambda_max_factor)
            throw std::invalid_argument("SolverConfig: bad lambda schedule factors");
    }
};

struct SolverResult {
    Eigen::MatrixXcd X_hat;
    std::vector<double> objective_trace; // final stage
    int iterations = 0;                  // summed over stages
    double final_residual = 0.0;         // ||Y - A X_hat||_F
    std::vector<double> lambda_schedule; // realized lambdas
    double step_norm2 = 0.0;             // ||A||^2 bound used
};

namespace detail {

inline double regularizer_value(const Eigen::MatrixXcd& X, int k, Regularizer reg) {
    return reg == Regularizer::block_l12 ? block_l12_norm(X, k) : column_l2_sum(X);
}

inline void prox_inplace(Eigen::MatrixXcd& Z, int k, double tau, Regularizer reg) {
    if (reg == Regularizer::block_l12)
        block_prox_inplace(Z, k, tau);
    else
        column_prox_inplace(Z, tau);
}

} // namespace detail

/// Largest block (or column) norm of A* Y: the smallest lambda that makes
/// X = 0 the minimizer from a zero start.
inline double lambda_max(const LiftedOperator& op, const Eigen::MatrixXcd& Y,
                         Regularizer reg = Regularizer::block_l12) {
    const Eigen::MatrixXcd G = op.adjoint(Y);
    double best = 0.0;
    if (reg == Regularizer::block_l12) {
        for (int j = 0; j < op.N(); ++j)
            best = std::max(best, G.middleRows(j * op.k(), op.k()).norm());
    } else {
        for (int c = 0; c < G.cols(); ++c) best = std::max(best, G.col(c).norm());
    }
    return best;
}

/// FISTA on 0.5 ||Y - A X||_F^2 + lambda * reg(X) with momentum restart:
/// whenever the objective would increase, the step is redone as a plain
/// proximal-gradient step from the previous iterate (which cannot increase
/// it) and the momentum is reset. The objective trace is therefore
/// non-increasing.
inline SolverResult fista(const LiftedOperator& op, const Eigen::MatrixXcd& Y, double lambda,
                          const SolverConfig& cfg, const Eigen::MatrixXcd* warm_start = nullptr,
                          double step_norm2_hint = 0.0) {
    cfg.validate();
    if (lambda < 0) throw std::invalid_argument("fista: lambda must be >= 0");
    if (Y.rows() != op.L()) throw std::invalid_argument("fista: Y row count mismatch");
    if (!Y.allFinite()) throw std::invalid_argument("fista: Y contains non-finite values");

    double step_norm2 = step_norm2_hint;
    if (step_norm2 <= 0.0) {
        step_norm2 = cfg.step_mode == StepMode::fixed
                         ? cfg.fixed_step_norm2
                         : operator_norm_estimate(op, 100, 1e-6, cfg.power_seed);
        if (step_norm2 <= 0.0)
            throw std::invalid_argument("fista: step estimate is not positive");
    }
    const double step = 1.0 / step_norm2;
    const double tau = lambda * step;
    const int k = op.k();
    const int C = static_cast<int>(Y.cols());

    Eigen::MatrixXcd X = warm_start ? *warm_start
                                    : Eigen::MatrixXcd::Zero(op.lifted_dim(), C);
    Eigen::MatrixXcd AX = op.forward(X);
    auto objective = [&](const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& ax) {
        return 0.5 * (Y - ax).squaredNorm() +
               lambda * detail::regularizer_value(x, k, cfg.regularizer);
    };

    SolverResult res;
    res.step_norm2 = step_norm2;
    res.lambda_schedule.push_back(lambda);
    double obj = objective(X, AX);
    res.objective_trace.push_back(obj);

    Eigen::MatrixXcd X_prev = X, AX_prev = AX;
    double t = 1.0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double gamma = (t - 1.0) / t_next;
        // Extrapolated point Z = X + gamma (X - X_prev); A Z follows by
        // linearity from the cached applications.
        Eigen::MatrixXcd Z = X + gamma * (X - X_prev);
        Eigen::MatrixXcd AZ = AX + gamma * (AX - AX_prev);
        Eigen::MatrixXcd X_next = Z - step * op.adjoint(AZ - Y);
        detail::prox_inplace(X_next, k, tau, cfg.regularizer);
        Eigen::MatrixXcd AX_next = op.forward(X_next);
        double obj_next = objective(X_next, AX_next);
        if (obj_next > obj) {
            // Restart: plain proximal-gradient step from X, which cannot
            // increase the objective when the step bound is valid.
            X_next = X - step * op.adjoint(AX - Y);
            detail::prox_inplace(X_next, k, tau, cfg.regularizer);
            AX_next = op.forward(X_next);
            obj_next = objective(X_next, AX_next);
            t = 1.0;
            if (obj_next > obj) {
                // Step bound violated (should not happen with the 1.05
                // safety factor); keep the last iterate and stop.
                ++res.iterations;
                res.objective_trace.push_back(obj);
                if (cfg.iterate_callback) cfg.iterate_callback(it, X);
                break;
            }
        } else {
            t = t_next;
        }
        const double change = (X_next - X).norm();
        const double base = std::max(X.norm(), 1e-300);
        X_prev.swap(X);
        AX_prev.swap(AX);
        X = std::move(X_next);
        AX = std::move(AX_next);
        obj = obj_next;
        res.objective_trace.push_back(obj_next);
        ++res.iterations;
        if (cfg.iterate_callback) cfg.iterate_callback(it, X);
        if (change <= cfg.rel_change_tol * base) break;
    }
    res.final_residual = (Y - AX).norm();
    res.X_hat = std::move(X);
    return res;
}

inline SolverResult fista_l12(const LiftedOperator& op, const Eigen::MatrixXcd& Y, double lambda,
                              SolverConfig cfg = {}) {
    cfg.regularizer = Regularizer::block_l12;
    return fista(op, Y, lambda, cfg);
}

/// Geometric lambda continuation with warm starts; the final stage result is
/// returned (or the first stage meeting cfg.target_residual, when set).
inline SolverResult solve_with_continuation(const LiftedOperator& op, const Eigen::MatrixXcd& Y,
                                            const SolverConfig& cfg) {
    cfg.validate();
    const double lam0 = cfg.lambda_max_factor * lambda_max(op, Y, cfg.regularizer);
    if (lam0 == 0.0) {
        // A* Y = 0: the zero matrix is already optimal for every lambda.
        SolverResult res = fista(op, Y, 0.0, cfg);
        return res;
    }
    const double ratio = cfg.stages > 1
                             ? std::pow(cfg.lambda_min_factor, 1.0 / (cfg.stages - 1))
                             : 1.0;
    const double step_norm2 = cfg.step_mode == StepMode::fixed
                                  ? cfg.fixed_step_norm2
                                  : operator_norm_estimate(op, 100, 1e-6, cfg.power_seed);
    SolverResult result;
    Eigen::MatrixXcd warm = Eigen::MatrixXcd::Zero(op.lifted_dim(), Y.cols());
    std::vector<double> schedule;
    int total_iters = 0;
    double lam = lam0;
    for (int s = 0; s < cfg.stages; ++s, lam *= ratio) {
        result = fista(op, Y, lam, cfg, &warm, step_norm2);
        warm = result.X_hat;
        schedule.push_back(lam);
        total_iters += result.iterations;
        if (cfg.target_residual > 0.0 && result.final_residual <= cfg.target_residual) break;
    }
    result.lambda_schedule = std::move(schedule);
    result.iterations = total_iters;
    return result;
}

/// Baseline minimizing sum_i ||X(:,i)||_2 instead of the block norm; same
/// FISTA loop with the prox applied per whole column.
inline SolverResult column_l2_solve(const LiftedOperator& op, const Eigen::MatrixXcd& Y,
                                    double lambda, SolverConfig cfg = {}) {
    cfg.regularizer = Regularizer::column_l2;
    return fista(op, Y, lambda, cfg);
}

} // namespace accs
