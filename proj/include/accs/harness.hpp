#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "accs/analysis.hpp"
#include "accs/io.hpp"
#include "accs/modelgen.hpp"
#include "accs/omp.hpp"
#include "accs/retrieval.hpp"
#include "accs/solver.hpp"

namespace accs {

namespace detail {

template <typename Fn>
void run_parallel(int njobs, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || njobs <= 1) {
        for (int i = 0; i < njobs; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < njobs; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

inline double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

} // namespace detail

struct SolverSettings {
    double lambda_max_factor = 1.0;
    double lambda_min_factor = 1e-6;
    int stages = 10;
    int max_iters = 500;
    double rel_change_tol = 1e-10;

    SolverConfig to_solver_config() const {
        SolverConfig cfg;
        cfg.lambda_max_factor = lambda_max_factor;
        cfg.lambda_min_factor = lambda_min_factor;
        cfg.stages = stages;
        cfg.max_iters = max_iters;
        cfg.rel_change_tol = rel_change_tol;
        return cfg;
    }

    static SolverSettings from_config(Config& cfg) {
        SolverSettings s;
        s.lambda_max_factor = cfg.get_double("lambda_max_factor", s.lambda_max_factor);
        s.lambda_min_factor = cfg.get_double("lambda_min_factor", s.lambda_min_factor);
        s.stages = static_cast<int>(cfg.get_int("stages", s.stages));
        s.max_iters = static_cast<int>(cfg.get_int("max_iters", s.max_iters));
        s.rel_change_tol = cfg.get_double("rel_change_tol", s.rel_change_tol);
        return s;
    }
};

/// One blind-recovery experiment run.
struct TrialRecord {
    int k = 0, n = 0, C = 0, L = 0, N = 0, trial = 0;
    std::uint64_t seed = 0;
    double lifted_relerr = 0.0;
    double signal_relerr = 0.0;
    bool success = false;
    int iterations = 0;
    double wall_ms = 0.0;
    bool feasible = true;
};

struct CellStats {
    int k = 0, n = 0, C = 0, L = 0, N = 0;
    int trials = 0, successes = 0;
    double success_rate = 0.0;
    double mean_lifted_relerr = 0.0;
    double mean_signal_relerr = 0.0;
    bool feasible = true;
};

namespace detail {

struct TrialSetup {
    GridShape shape;
    SparsifierKind sparsifier;
    const SubspaceBasis* basis; // cached per k
    int k, n, C, L;
    double noise_ratio;
    double success_threshold;
    double noisy_success_factor;
    SolverSettings solver;
    Regularizer regularizer = Regularizer::block_l12;
};

inline TrialRecord run_recovery_trial(const TrialSetup& s, std::uint64_t trial_seed,
                                      int trial_index) {
    TrialRecord rec;
    rec.k = s.k;
    rec.n = s.n;
    rec.C = s.C;
    rec.L = s.L;
    rec.N = s.shape.size();
    rec.trial = trial_index;
    rec.seed = trial_seed;
    const auto t0 = std::chrono::steady_clock::now();

    Sparsifier psi(s.sparsifier, s.shape);
    const auto z = gen_sparse_signal(rec.N, s.n, seed_mix(trial_seed, 1));
    const auto coils = gen_coil_coeffs(CoilModel::complex_sphere, s.k, s.C,
                                       seed_mix(trial_seed, 2));
    const auto omega = gen_sampling_pattern(rec.N, s.L, seed_mix(trial_seed, 3));
    auto ms = synthesize_measurements(*s.basis, coils.H, z.z, psi, omega);
    if (s.noise_ratio > 0.0) ms = add_noise(ms, {s.noise_ratio, seed_mix(trial_seed, 4)});

    LiftedOperator op(*s.basis, psi, omega);
    SolverConfig cfg = s.solver.to_solver_config();
    cfg.regularizer = s.regularizer;
    cfg.power_seed = seed_mix(trial_seed, 5);
    if (s.noise_ratio > 0.0) cfg.target_residual = ms.noise_fro;
    const auto res = solve_with_continuation(op, ms.Y, cfg);
    rec.iterations = res.iterations;

    const Eigen::MatrixXcd X0 = lift_outer(z.z, coils.H);
    rec.lifted_relerr = (res.X_hat - X0).norm() / X0.norm();
    try {
        const auto recsig = recover_signal(res.X_hat, s.k, psi);
        rec.signal_relerr = aligned_relative_error(recsig.x, psi.unsparsify(z.z));
    } catch (const std::invalid_argument&) {
        rec.signal_relerr = 1.0; // zero estimate carries no signal direction
    }
    const double threshold = s.noise_ratio > 0.0
                                 ? s.noisy_success_factor * s.noise_ratio
                                 : s.success_threshold;
    rec.success = rec.lifted_relerr <= threshold;
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    return rec;
}

inline CellStats summarize(const std::vector<TrialRecord>& recs, int first, int count) {
    CellStats c;
    const auto& head = recs[first];
    c.k = head.k;
    c.n = head.n;
    c.C = head.C;
    c.L = head.L;
    c.N = head.N;
    c.trials = count;
    double lift = 0.0, sig = 0.0;
    for (int i = 0; i < count; ++i) {
        const auto& r = recs[first + i];
        c.successes += r.success ? 1 : 0;
        lift += r.lifted_relerr;
        sig += r.signal_relerr;
    }
    c.success_rate = static_cast<double>(c.successes) / count;
    c.mean_lifted_relerr = lift / count;
    c.mean_signal_relerr = sig / count;
    return c;
}

// Bases are fixed per k for a whole experiment (fresh z, H and omega are
// drawn every trial).
inline std::map<int, SubspaceBasis> basis_cache(BasisKind kind, const GridShape& shape,
                                                const std::vector<int>& ks,
                                                std::uint64_t master) {
    std::map<int, SubspaceBasis> cache;
    for (int k : ks)
        if (!cache.count(k))
            cache.emplace(k, gen_subspace_basis(kind, shape, k, seed_mix(master, 0xb0, k)));
    return cache;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Phase transition over the (k, n) grid
// ---------------------------------------------------------------------------

struct PhaseTransitionConfig {
    GridShape shape{256, 1};
    SparsifierKind sparsifier = SparsifierKind::dct2;
    BasisKind basis = BasisKind::haar;
    int k_min = 1, k_max = 15;
    int n_min = 1, n_max = 15;
    std::vector<int> C_values{1, 2, 4};
    int L = 128;
    int trials = 10;
    double noise_ratio = 0.0;
    double success_threshold = 1e-4;
    double noisy_success_factor = 2.0;
    Regularizer regularizer = Regularizer::block_l12;
    SolverSettings solver;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const {
        if (k_min < 1 || k_min > k_max || n_min < 1 || n_min > n_max)
            throw ConfigError("phase transition: empty k or n range");
        if (C_values.empty()) throw ConfigError("phase transition: empty C list");
        if (trials < 1) throw ConfigError("phase transition: trials must be >= 1");
        if (L < 1 || L > shape.size()) throw ConfigError("phase transition: bad L");
    }
};

struct PhaseTransitionResult {
    std::vector<CellStats> cells;

    double rate(int k, int n, int C) const {
        for (const auto& c : cells)
            if (c.k == k && c.n == n && c.C == C) return c.success_rate;
        throw std::out_of_range("no such cell");
    }

    void write_csv(std::ostream& os) const {
        write_csv_row(os, {"k", "n", "C", "L", "N", "trials", "successes", "success_rate",
                           "mean_lifted_relerr", "mean_signal_relerr"});
        for (const auto& c : cells) {
            if (c.feasible)
                write_csv_row(os, {std::to_string(c.k), std::to_string(c.n),
                                   std::to_string(c.C), std::to_string(c.L),
                                   std::to_string(c.N), std::to_string(c.trials),
                                   std::to_string(c.successes), csv_num(c.success_rate),
                                   csv_num(c.mean_lifted_relerr),
                                   csv_num(c.mean_signal_relerr)});
            else
                write_csv_row(os, {std::to_string(c.k), std::to_string(c.n),
                                   std::to_string(c.C), std::to_string(c.L),
                                   std::to_string(c.N), "0", "0", "nan", "nan", "nan"});
        }
    }
};

inline PhaseTransitionResult run_phase_transition(const PhaseTransitionConfig& cfg) {
    cfg.validate();
    const int N = cfg.shape.size();
    std::vector<int> ks;
    for (int k = cfg.k_min; k <= cfg.k_max; ++k)
        if (k < N) ks.push_back(k);
    const auto bases = detail::basis_cache(cfg.basis, cfg.shape, ks, cfg.seed);

    struct Cell {
        int k, n, C;
        bool feasible;
    };
    std::vector<Cell> cells;
    for (int C : cfg.C_values)
        for (int k = cfg.k_min; k <= cfg.k_max; ++k)
            for (int n = cfg.n_min; n <= cfg.n_max; ++n)
                cells.push_back({k, n, C, k < N && n <= N && cfg.L <= N});

    std::vector<TrialRecord> records(cells.size() * cfg.trials);
    std::vector<int> jobs; // flat (cell, trial) indices for feasible cells
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
        if (cells[ci].feasible)
            for (int t = 0; t < cfg.trials; ++t)
                jobs.push_back(static_cast<int>(ci * cfg.trials + t));

    detail::run_parallel(static_cast<int>(jobs.size()), cfg.threads, [&](int j) {
        const int idx = jobs[j];
        const auto& cell = cells[idx / cfg.trials];
        const int trial = idx % cfg.trials;
        detail::TrialSetup setup{cfg.shape,
                                 cfg.sparsifier,
                                 &bases.at(cell.k),
                                 cell.k,
                                 cell.n,
                                 cell.C,
                                 cfg.L,
                                 cfg.noise_ratio,
                                 cfg.success_threshold,
                                 cfg.noisy_success_factor,
                                 cfg.solver,
                                 cfg.regularizer};
        records[idx] = detail::run_recovery_trial(
            setup, seed_mix(cfg.seed, cell.k, cell.n, cell.C, cfg.L, trial), trial);
    });

    PhaseTransitionResult out;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        if (cells[ci].feasible) {
            out.cells.push_back(detail::summarize(records, static_cast<int>(ci * cfg.trials),
                                                  cfg.trials));
        } else {
            CellStats c;
            c.k = cells[ci].k;
            c.n = cells[ci].n;
            c.C = cells[ci].C;
            c.L = cfg.L;
            c.N = N;
            c.feasible = false;
            c.success_rate = detail::nan_value();
            c.mean_lifted_relerr = detail::nan_value();
            c.mean_signal_relerr = detail::nan_value();
            out.cells.push_back(c);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Success rate versus L, sweeping k at fixed n or n at fixed k
// ---------------------------------------------------------------------------

struct LSweepConfig {
    GridShape shape{256, 1};
    SparsifierKind sparsifier = SparsifierKind::dct2;
    BasisKind basis = BasisKind::haar;
    std::string sweep_var = "k"; // "k" or "n"
    int fixed_value = 5;         // the variable not swept
    int sweep_min = 1, sweep_max = 15;
    int L_min = 10, L_max = 200, L_step = 10;
    std::vector<int> C_values{1, 4};
    int trials = 10;
    double noise_ratio = 0.0;
    double success_threshold = 1e-4;
    double noisy_success_factor = 2.0;
    double minimal_rate = 0.9; // rate defining "minimal L"
    SolverSettings solver;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const {
        if (sweep_var != "k" && sweep_var != "n")
            throw ConfigError("l sweep: sweep_var must be `k` or `n`");
        if (sweep_min < 1 || sweep_min > sweep_max) throw ConfigError("l sweep: empty sweep range");
        if (L_min < 1 || L_min > L_max || L_step < 1) throw ConfigError("l sweep: empty L range");
        if (C_values.empty()) throw ConfigError("l sweep: empty C list");
        if (trials < 1) throw ConfigError("l sweep: trials must be >= 1");
    }
};

struct LSweepResult {
    std::string sweep_var;
    std::vector<CellStats> cells;                 // with sweep value in k or n
    struct MinimalL {
        std::string sweep_var;
        int sweep_value = 0;
        int C = 0;
        int minimal_L = -1; // -1: never reached the target rate
    };
    std::vector<MinimalL> minimal;

    void write_csv(std::ostream& os) const {
        write_csv_row(os, {"k", "n", "C", "L", "N", "trials", "successes", "success_rate",
                           "mean_lifted_relerr", "mean_signal_relerr", "sweep_var",
                           "sweep_value"});
        for (const auto& c : cells) {
            const int sweep_value = sweep_var == "k" ? c.k : c.n;
            write_csv_row(os, {std::to_string(c.k), std::to_string(c.n), std::to_string(c.C),
                               std::to_string(c.L), std::to_string(c.N),
                               std::to_string(c.trials), std::to_string(c.successes),
                               c.feasible ? csv_num(c.success_rate) : "nan",
                               c.feasible ? csv_num(c.mean_lifted_relerr) : "nan",
                               c.feasible ? csv_num(c.mean_signal_relerr) : "nan", sweep_var,
                               std::to_string(sweep_value)});
        }
    }

    void write_minimal_csv(std::ostream& os) const {
        write_csv_row(os, {"sweep_var", "sweep_value", "C", "minimal_L"});
        for (const auto& m : minimal)
            write_csv_row(os, {m.sweep_var, std::to_string(m.sweep_value), std::to_string(m.C),
                               m.minimal_L >= 0 ? std::to_string(m.minimal_L) : "nan"});
    }
};

inline LSweepResult run_l_sweep(const LSweepConfig& cfg) {
    cfg.validate();
    const int N = cfg.shape.size();
    std::vector<int> L_values;
    for (int L = cfg.L_min; L <= cfg.L_max; L += cfg.L_step)
        if (L <= N) L_values.push_back(L);
    if (L_values.empty()) throw ConfigError("l sweep: no feasible L values");

    std::vector<int> ks;
    for (int v = cfg.sweep_min; v <= cfg.sweep_max; ++v)
        ks.push_back(cfg.sweep_var == "k" ? v : cfg.fixed_value);
    const auto bases = detail::basis_cache(cfg.basis, cfg.shape, ks, cfg.seed);

    struct Cell {
        int k, n, C, L, sweep_value;
        bool feasible;
    };
    std::vector<Cell> cells;
    for (int C : cfg.C_values)
        for (int v = cfg.sweep_min; v <= cfg.sweep_max; ++v)
            for (int L : L_values) {
                const int k = cfg.sweep_var == "k" ? v : cfg.fixed_value;
                const int n = cfg.sweep_var == "n" ? v : cfg.fixed_value;
                cells.push_back({k, n, C, L, v, k < N && n <= N});
            }

    std::vector<TrialRecord> records(cells.size() * cfg.trials);
    std::vector<int> jobs;
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
        if (cells[ci].feasible)
            for (int t = 0; t < cfg.trials; ++t)
                jobs.push_back(static_cast<int>(ci * cfg.trials + t));

    detail::run_parallel(static_cast<int>(jobs.size()), cfg.threads, [&](int j) {
        const int idx = jobs[j];
        const auto& cell = cells[idx / cfg.trials];
        const int trial = idx % cfg.trials;
        detail::TrialSetup setup{cfg.shape,
                                 cfg.sparsifier,
                                 &bases.at(cell.k),
                                 cell.k,
                                 cell.n,
                                 cell.C,
                                 cell.L,
                                 cfg.noise_ratio,
                                 cfg.success_threshold,
                                 cfg.noisy_success_factor,
                                 cfg.solver,
                                 Regularizer::block_l12};
        records[idx] = detail::run_recovery_trial(
            setup, seed_mix(cfg.seed, cell.k, cell.n, cell.C, cell.L, trial), trial);
    });

    LSweepResult out;
    out.sweep_var = cfg.sweep_var;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        CellStats stats;
        if (cells[ci].feasible) {
            stats = detail::summarize(records, static_cast<int>(ci * cfg.trials), cfg.trials);
        } else {
            stats.k = cells[ci].k;
            stats.n = cells[ci].n;
            stats.C = cells[ci].C;
            stats.L = cells[ci].L;
            stats.N = N;
            stats.feasible = false;
        }
        out.cells.push_back(stats);
    }
    for (int C : cfg.C_values)
        for (int v = cfg.sweep_min; v <= cfg.sweep_max; ++v) {
            LSweepResult::MinimalL m;
            m.sweep_var = cfg.sweep_var;
            m.sweep_value = v;
            m.C = C;
            for (const auto& c : out.cells) {
                const int value = cfg.sweep_var == "k" ? c.k : c.n;
                if (c.C == C && value == v && c.feasible &&
                    c.success_rate >= cfg.minimal_rate) {
                    m.minimal_L = c.L;
                    break; // cells are ordered by increasing L within a sweep value
                }
            }
            out.minimal.push_back(m);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Mean reconstruction error versus L per coil count (known-calibration OMP
// or blind l1,2)
// ---------------------------------------------------------------------------

struct CoilSweepConfig {
    GridShape shape{23, 23};
    SparsifierKind sparsifier = SparsifierKind::dct2;
    BasisKind basis = BasisKind::sin2d;
    int k = 6;
    int n = 32;
    std::vector<int> C_values{2, 4, 6, 8, 12, 16, 24, 36};
    int L_min = 40, L_max = 200, L_step = 8;
    int realizations = 10;
    std::vector<double> noise_ratios{0.0};
    std::string mode = "omp"; // "omp" (known calibration) or "blind"
    SolverSettings solver;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const {
        if (mode != "omp" && mode != "blind")
            throw ConfigError("coil sweep: mode must be `omp` or `blind`");
        if (C_values.empty()) throw ConfigError("coil sweep: empty C list");
        if (noise_ratios.empty()) throw ConfigError("coil sweep: empty noise list");
        if (L_min < 1 || L_min > L_max || L_step < 1)
            throw ConfigError("coil sweep: empty L range");
        if (realizations < 1) throw ConfigError("coil sweep: realizations must be >= 1");
        if (n < 1 || n > shape.size()) throw ConfigError("coil sweep: bad n");
    }
};

struct CoilSweepResult {
    struct Point {
        int C = 0, L = 0;
        double noise_ratio = 0.0;
        double mean_relerr = 0.0;
        double stderr_relerr = 0.0;
    };
    std::vector<Point> points;

    void write_csv(std::ostream& os) const {
        write_csv_row(os, {"C", "L", "noise_ratio", "mean_relerr", "stderr"});
        for (const auto& p : points)
            write_csv_row(os, {std::to_string(p.C), std::to_string(p.L), csv_num(p.noise_ratio),
                               csv_num(p.mean_relerr), csv_num(p.stderr_relerr)});
    }
};

inline CoilSweepResult run_coil_sweep(const CoilSweepConfig& cfg) {
    cfg.validate();
    const int N = cfg.shape.size();
    Sparsifier psi(cfg.sparsifier, cfg.shape);
    const auto basis = gen_subspace_basis(cfg.basis, cfg.shape, cfg.k,
                                          seed_mix(cfg.seed, 0xb0, cfg.k));
    std::vector<int> L_values;
    for (int L = cfg.L_min; L <= cfg.L_max; L += cfg.L_step)
        if (L <= N) L_values.push_back(L);
    if (L_values.empty()) throw ConfigError("coil sweep: no feasible L values");

    struct Job {
        double noise;
        int C, L, realization;
    };
    std::vector<Job> jobs;
    for (double noise : cfg.noise_ratios)
        for (int C : cfg.C_values)
            for (int L : L_values)
                for (int r = 0; r < cfg.realizations; ++r) jobs.push_back({noise, C, L, r});

    std::vector<double> errors(jobs.size());
    detail::run_parallel(static_cast<int>(jobs.size()), cfg.threads, [&](int j) {
        const Job& job = jobs[j];
        // z and omega are shared across coil counts at a given (L,
        // realization); H is drawn per coil count.
        const std::uint64_t pair_seed = seed_mix(cfg.seed, job.L, job.realization);
        const auto z = gen_sparse_signal(N, cfg.n, seed_mix(pair_seed, 1));
        const auto omega = gen_sampling_pattern(N, job.L, seed_mix(pair_seed, 2));
        const auto coils = gen_coil_coeffs(CoilModel::complex_sphere, cfg.k, job.C,
                                           seed_mix(pair_seed, 3, job.C));
        auto ms = synthesize_measurements(basis, coils.H, z.z, psi, omega);
        const std::uint64_t noise_bits = static_cast<std::uint64_t>(job.noise * 1e9);
        if (job.noise > 0.0)
            ms = add_noise(ms, {job.noise, seed_mix(pair_seed, 4, job.C, noise_bits)});
        const Eigen::VectorXcd x0 = psi.unsparsify(z.z);

        if (cfg.mode == "omp") {
            std::vector<Eigen::VectorXcd> sens;
            sens.reserve(job.C);
            for (int i = 0; i < job.C; ++i) sens.push_back(basis.matrix() * coils.H.col(i));
            const auto rec = omp_known_calibration(sens, psi, omega, ms.Y, cfg.n);
            errors[j] = aligned_relative_error(rec.x, x0);
        } else {
            LiftedOperator op(basis, psi, omega);
            SolverConfig scfg = cfg.solver.to_solver_config();
            scfg.power_seed = seed_mix(pair_seed, 5, job.C);
            if (job.noise > 0.0) scfg.target_residual = ms.noise_fro;
            const auto res = solve_with_continuation(op, ms.Y, scfg);
            try {
                const auto rec = recover_signal(res.X_hat, cfg.k, psi);
                errors[j] = aligned_relative_error(rec.x, x0);
            } catch (const std::invalid_argument&) {
                errors[j] = 1.0;
            }
        }
    });

    CoilSweepResult out;
    std::size_t idx = 0;
    for (double noise : cfg.noise_ratios)
        for (int C : cfg.C_values)
            for (int L : L_values) {
                CoilSweepResult::Point p;
                p.C = C;
                p.L = L;
                p.noise_ratio = noise;
                double sum = 0.0, sum2 = 0.0;
                for (int r = 0; r < cfg.realizations; ++r) {
                    const double e = errors[idx++];
                    sum += e;
                    sum2 += e * e;
                }
                const int R = cfg.realizations;
                p.mean_relerr = sum / R;
                const double var =
                    R > 1 ? std::max(0.0, (sum2 - sum * sum / R) / (R - 1)) : 0.0;
                p.stderr_relerr = std::sqrt(var / R);
                out.points.push_back(p);
            }
    return out;
}

// ---------------------------------------------------------------------------
// Single reconstruction from an image (synthetic measurement) or a k-space
// container file
// ---------------------------------------------------------------------------

struct ReconstructConfig {
    std::string input;            // path
    std::string input_kind = "image"; // "image" or "kspace"
    SparsifierKind sparsifier = SparsifierKind::dct2;
    BasisKind basis = BasisKind::sin2d;
    int k = 4;
    int C = 4;
    int L = 0;             // 0: derive from reduction
    double reduction = 2.0; // R = N / L when L is not given
    double noise_ratio = 0.0;
    double lambda_rel = 0.0; // > 0: single fista run at lambda_rel * lambda_max
    SolverSettings solver;
    std::string out_dir = ".";
    std::string save_kspace; // optional ACSK dump of the synthesized data
    std::uint64_t seed = 0;

    void validate() const {
        if (input.empty()) throw ConfigError("reconstruct: missing input path");
        if (input_kind != "image" && input_kind != "kspace")
            throw ConfigError("reconstruct: input_kind must be `image` or `kspace`");
        if (k < 1 || C < 1) throw ConfigError("reconstruct: bad k or C");
        if (L == 0 && reduction < 1.0) throw ConfigError("reconstruct: bad reduction");
    }
};

struct ReconstructResult {
    GridShape shape;
    Eigen::VectorXcd x_hat;
    double relative_error = -1.0; // < 0 when no ground truth is available
    double residual = 0.0;
    double lambda = 0.0;
    int iterations = 0;
    std::string image_path;
    std::string metrics_path;
};

inline ReconstructResult run_reconstruct(const ReconstructConfig& cfg) {
    cfg.validate();
    GridShape shape;
    SamplingPattern omega;
    Eigen::MatrixXcd Y;
    std::optional<SubspaceBasis> basis;
    std::optional<Eigen::VectorXcd> truth;
    int k = cfg.k;
    double target_residual = 0.0;

    if (cfg.input_kind == "image") {
        const PgmImage img = read_pgm(cfg.input);
        shape = img.shape;
        const int N = shape.size();
        const int L = cfg.L > 0 ? cfg.L
                                : std::max(1, static_cast<int>(std::lround(N / cfg.reduction)));
        if (L > N) throw ConfigError("reconstruct: L exceeds the grid size");
        Sparsifier psi(cfg.sparsifier, shape);
        basis = gen_subspace_basis(cfg.basis, shape, k, seed_mix(cfg.seed, 0xb0, k));
        const auto coils = gen_coil_coeffs(CoilModel::complex_sphere, k, cfg.C,
                                           seed_mix(cfg.seed, 1));
        omega = gen_sampling_pattern(N, L, seed_mix(cfg.seed, 2));
        truth = img.values.cast<std::complex<double>>();
        const Eigen::VectorXcd z = psi.sparsify(*truth);
        auto ms = synthesize_measurements(*basis, coils.H, z, psi, omega);
        if (cfg.noise_ratio > 0.0) ms = add_noise(ms, {cfg.noise_ratio, seed_mix(cfg.seed, 3)});
        Y = ms.Y;
        target_residual = ms.noise_fro;
        if (!cfg.save_kspace.empty())
            write_kspace(cfg.save_kspace,
                         {shape, k, omega, Y, std::optional<Eigen::MatrixXcd>(basis->matrix())});
    } else {
        const KSpaceFile ks = read_kspace(cfg.input);
        shape = ks.shape;
        omega = ks.omega;
        Y = ks.Y;
        if (ks.B) {
            basis = SubspaceBasis(*ks.B);
            k = ks.k;
        } else {
            basis = gen_subspace_basis(cfg.basis, shape, k, seed_mix(cfg.seed, 0xb0, k));
        }
        if (cfg.noise_ratio > 0.0)
            target_residual = cfg.noise_ratio * Y.norm();
    }

    Sparsifier psi(cfg.sparsifier, shape);
    LiftedOperator op(*basis, psi, omega);
    SolverConfig scfg = cfg.solver.to_solver_config();
    scfg.power_seed = seed_mix(cfg.seed, 4);
    SolverResult res;
    if (cfg.lambda_rel > 0.0) {
        res = fista_l12(op, Y, cfg.lambda_rel * lambda_max(op, Y), scfg);
    } else {
        scfg.target_residual = target_residual;
        res = solve_with_continuation(op, Y, scfg);
    }

    ReconstructResult out;
    out.shape = shape;
    out.residual = res.final_residual;
    out.lambda = res.lambda_schedule.empty() ? 0.0 : res.lambda_schedule.back();
    out.iterations = res.iterations;
    const auto rec = recover_signal(res.X_hat, k, psi);
    out.x_hat = rec.x;
    if (truth) out.relative_error = aligned_relative_error(rec.x, *truth);

    std::filesystem::create_directories(cfg.out_dir);
    out.image_path = cfg.out_dir + "/recon.pgm";
    write_pgm16(out.image_path, shape, rec.x.cwiseAbs());
    out.metrics_path = cfg.out_dir + "/metrics.txt";
    std::ofstream metrics(out.metrics_path);
    if (!metrics) throw IoError("cannot write " + out.metrics_path);
    metrics.precision(12);
    if (truth) metrics << "relative_error=" << out.relative_error << "\n";
    metrics << "residual=" << out.residual << "\n"
            << "lambda=" << out.lambda << "\n"
            << "iterations=" << out.iterations << "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Certificate diagnostics on generated instances
// ---------------------------------------------------------------------------

struct CertifyConfig {
    GridShape shape{64, 1};
    SparsifierKind sparsifier = SparsifierKind::dct2;
    BasisKind basis = BasisKind::haar;
    int k = 2, n = 3, C = 4, L = 48;
    int instances = 10;
    std::uint64_t seed = 0;

    void validate() const {
        if (instances < 1) throw ConfigError("certify: instances must be >= 1");
        if (k < 1 || k >= shape.size()) throw ConfigError("certify: bad k");
        if (n < 1 || n > shape.size()) throw ConfigError("certify: bad n");
        if (L < 1 || L > shape.size()) throw ConfigError("certify: bad L");
        if (static_cast<long long>(k) * shape.size() > 4096)
            throw ConfigError("certify: kN exceeds the dense 4096 guard");
    }
};

struct CertifyOutcome {
    std::vector<CertificateReport> reports;
    int verdicts_true = 0;
    std::string text; // key=value blocks, one per instance
};

inline CertifyOutcome run_certify(const CertifyConfig& cfg) {
    cfg.validate();
    Sparsifier psi(cfg.sparsifier, cfg.shape);
    const auto basis = gen_subspace_basis(cfg.basis, cfg.shape, cfg.k,
                                          seed_mix(cfg.seed, 0xb0, cfg.k));
    const auto mu = incoherence_constants(basis, psi, cfg.L);
    CertifyOutcome out;
    std::ostringstream os;
    os.precision(12);
    os << "mu_B_sqrtL=" << mu.mu_B_sqrtL << "\n"
       << "mu_B_sqrtN=" << mu.mu_B_sqrtN << "\n"
       << "mu_Psi=" << mu.mu_Psi << "\n";
    for (int i = 0; i < cfg.instances; ++i) {
        const std::uint64_t inst_seed = seed_mix(cfg.seed, 0xce, i);
        const auto z = gen_sparse_signal(cfg.shape.size(), cfg.n, seed_mix(inst_seed, 1));
        const auto coils =
            gen_coil_coeffs(CoilModel::complex_sphere, cfg.k, cfg.C, seed_mix(inst_seed, 2));
        const auto omega =
            gen_sampling_pattern(cfg.shape.size(), cfg.L, seed_mix(inst_seed, 3));
        LiftedOperator op(basis, psi, omega);
        const Eigen::MatrixXcd A = op.materialize_dense();
        os << "\ninstance=" << i << "\nseed=" << inst_seed << "\n";
        try {
            const auto cert = exact_dual_certificate(
                A, cfg.k, z.support, block_sgn(lift_outer(z.z, coils.H), cfg.k));
            out.reports.push_back(cert.report);
            if (cert.report.verdict) ++out.verdicts_true;
            os << format_certificate_report(cert.report);
        } catch (const std::runtime_error& e) {
            CertificateReport rep;
            rep.support_size = cfg.n;
            rep.delta = 1.0;
            rep.rho = std::numeric_limits<double>::infinity();
            out.reports.push_back(rep);
            os << "error=" << e.what() << "\nverdict=false\n";
        }
    }
    out.text = os.str();
    return out;
}

} // namespace accs
