#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "accs/harness.hpp"
#include "oracles.hpp"

using namespace accs;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("accs_harness_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

PhaseTransitionConfig tiny_pt() {
    PhaseTransitionConfig cfg;
    cfg.shape = GridShape(16, 1);
    cfg.k_min = 1;
    cfg.k_max = 2;
    cfg.n_min = 1;
    cfg.n_max = 2;
    cfg.C_values = {1};
    cfg.L = 12;
    cfg.trials = 3;
    cfg.solver.stages = 8;
    cfg.solver.max_iters = 400;
    cfg.seed = 7;
    return cfg;
}

} // namespace

TEST_CASE("tiny phase transition: easy corner succeeds, CSV is stable", "[harness]") {
    const auto cfg = tiny_pt();
    const auto res = run_phase_transition(cfg);
    REQUIRE(res.cells.size() == 4);
    REQUIRE(res.rate(1, 1, 1) == 1.0);

    std::ostringstream a, b;
    res.write_csv(a);
    run_phase_transition(cfg).write_csv(b);
    REQUIRE(a.str() == b.str());
    REQUIRE(a.str().rfind("k,n,C,L,N,trials,successes,success_rate,"
                          "mean_lifted_relerr,mean_signal_relerr\n", 0) == 0);

    // Threads must not change the output.
    auto threaded = cfg;
    threaded.threads = 4;
    std::ostringstream c;
    run_phase_transition(threaded).write_csv(c);
    REQUIRE(a.str() == c.str());
}

TEST_CASE("phase transition flags infeasible cells per row", "[harness]") {
    auto cfg = tiny_pt();
    cfg.shape = GridShape(8, 1);
    cfg.k_min = 7;
    cfg.k_max = 8; // k = 8 is >= N = 8: infeasible
    cfg.n_min = 1;
    cfg.n_max = 1;
    cfg.L = 8;
    const auto res = run_phase_transition(cfg);
    bool saw_infeasible = false;
    std::ostringstream os;
    res.write_csv(os);
    for (const auto& cell : res.cells)
        if (!cell.feasible) saw_infeasible = true;
    REQUIRE(saw_infeasible);
    REQUIRE(os.str().find("nan") != std::string::npos);
}

TEST_CASE("config validation errors", "[harness]") {
    auto cfg = tiny_pt();
    cfg.trials = 0;
    REQUIRE_THROWS_AS(run_phase_transition(cfg), ConfigError);

    LSweepConfig ls;
    ls.L_min = 50;
    ls.L_max = 10;
    REQUIRE_THROWS_AS(run_l_sweep(ls), ConfigError);
    LSweepConfig ls2;
    ls2.sweep_var = "q";
    REQUIRE_THROWS_AS(run_l_sweep(ls2), ConfigError);

    CoilSweepConfig cs;
    cs.mode = "alien";
    REQUIRE_THROWS_AS(run_coil_sweep(cs), ConfigError);
}

TEST_CASE("tiny l sweep emits rates and minimal L", "[harness]") {
    LSweepConfig cfg;
    cfg.shape = GridShape(16, 1);
    cfg.sweep_var = "n";
    cfg.fixed_value = 1; // k = 1
    cfg.sweep_min = 1;
    cfg.sweep_max = 2;
    cfg.L_min = 4;
    cfg.L_max = 16;
    cfg.L_step = 4;
    cfg.C_values = {1};
    cfg.trials = 3;
    cfg.solver.stages = 8;
    cfg.solver.max_iters = 400;
    cfg.seed = 11;
    const auto res = run_l_sweep(cfg);
    REQUIRE(res.cells.size() == 2 * 4);
    REQUIRE(res.minimal.size() == 2);
    // Full sampling recovers everything, so minimal L is defined.
    for (const auto& m : res.minimal) {
        REQUIRE(m.minimal_L > 0);
        REQUIRE(m.minimal_L <= 16);
    }
    // Harder signals cannot need fewer measurements.
    REQUIRE(res.minimal[0].minimal_L <= res.minimal[1].minimal_L);

    std::ostringstream os;
    res.write_csv(os);
    const std::string text = os.str();
    REQUIRE(text.rfind("k,n,C,L,N,trials,successes,success_rate,mean_lifted_relerr,"
                       "mean_signal_relerr,sweep_var,sweep_value\n", 0) == 0);
    std::ostringstream osm;
    res.write_minimal_csv(osm);
    REQUIRE(osm.str().rfind("sweep_var,sweep_value,C,minimal_L\n", 0) == 0);
}

TEST_CASE("tiny OMP coil sweep: error decreases with L and C", "[harness]") {
    CoilSweepConfig cfg;
    cfg.shape = GridShape(5, 5);
    cfg.k = 3;
    cfg.n = 4;
    cfg.C_values = {1, 4};
    cfg.L_min = 8;
    cfg.L_max = 24;
    cfg.L_step = 8;
    cfg.realizations = 4;
    cfg.seed = 3;
    const auto res = run_coil_sweep(cfg);
    REQUIRE(res.points.size() == 2 * 3);
    // Largest L with C = 4 should be essentially exact.
    double best = 1.0;
    for (const auto& p : res.points)
        if (p.C == 4 && p.L == 24) best = p.mean_relerr;
    REQUIRE(best < 1e-8);
    std::ostringstream os;
    res.write_csv(os);
    REQUIRE(os.str().rfind("C,L,noise_ratio,mean_relerr,stderr\n", 0) == 0);
}

TEST_CASE("reconstruct from a synthetic smooth image at full sampling", "[harness]") {
    TempDir dir;
    // DCT-sparse positive test image: a handful of low-frequency atoms on a
    // dominant DC pedestal (16-bit quantization is the only model mismatch).
    GridShape shape(16, 16);
    Sparsifier dct(SparsifierKind::dct2, shape);
    Eigen::VectorXcd z = Eigen::VectorXcd::Zero(shape.size());
    z(shape.flatten(0, 0)) = 10.0;
    z(shape.flatten(1, 0)) = 1.2;
    z(shape.flatten(0, 1)) = -0.9;
    z(shape.flatten(2, 1)) = 0.6;
    z(shape.flatten(1, 2)) = -0.5;
    z(shape.flatten(3, 3)) = 0.4;
    const Eigen::VectorXd img = dct.unsparsify(z).real();
    REQUIRE(img.minCoeff() > 0.0);
    const std::string input = dir.file("truth.pgm");
    write_pgm16(input, shape, img);

    ReconstructConfig cfg;
    cfg.input = input;
    cfg.input_kind = "image";
    cfg.k = 4;
    cfg.C = 4;
    cfg.L = shape.size(); // fully sampled sanity oracle
    cfg.basis = BasisKind::sin2d;
    cfg.out_dir = dir.file("out");
    cfg.save_kspace = dir.file("synth.acsk");
    cfg.seed = 5;
    const auto res = run_reconstruct(cfg);
    REQUIRE(res.relative_error >= 0.0);
    REQUIRE(res.relative_error <= 1e-3);
    REQUIRE(std::filesystem::exists(res.image_path));
    REQUIRE(std::filesystem::exists(res.metrics_path));

    std::ifstream metrics(res.metrics_path);
    std::stringstream buf;
    buf << metrics.rdbuf();
    REQUIRE(buf.str().find("relative_error=") != std::string::npos);
    REQUIRE(buf.str().find("lambda=") != std::string::npos);

    // The dumped container must round-trip into the kspace input path.
    ReconstructConfig back;
    back.input = cfg.save_kspace;
    back.input_kind = "kspace";
    back.sparsifier = SparsifierKind::dct2;
    back.out_dir = dir.file("out2");
    back.seed = 6;
    const auto res2 = run_reconstruct(back);
    REQUIRE(res2.relative_error < 0.0); // no ground truth in the file
    REQUIRE(res2.residual <= 1e-6 * 1e3);
}

TEST_CASE("reconstruct smoke with noise and undersampling", "[harness]") {
    TempDir dir;
    GridShape shape(12, 12);
    Eigen::VectorXd img(shape.size());
    for (int i2 = 0; i2 < 12; ++i2)
        for (int i1 = 0; i1 < 12; ++i1)
            img(shape.flatten(i1, i2)) =
                0.5 + 0.5 * std::cos(M_PI * i1 / 11.0) * std::cos(M_PI * i2 / 11.0);
    const std::string input = dir.file("truth.pgm");
    write_pgm16(input, shape, img);

    ReconstructConfig cfg;
    cfg.input = input;
    cfg.k = 3;
    cfg.C = 4;
    cfg.reduction = 2.0;
    cfg.noise_ratio = 0.05;
    cfg.basis = BasisKind::sin2d;
    cfg.out_dir = dir.file("out");
    cfg.seed = 9;
    const auto res = run_reconstruct(cfg);
    REQUIRE(std::isfinite(res.relative_error));
    REQUIRE(res.relative_error < 1.0);
    REQUIRE(std::filesystem::exists(res.image_path));
}

TEST_CASE("reconstruct input validation", "[harness]") {
    ReconstructConfig cfg;
    REQUIRE_THROWS_AS(run_reconstruct(cfg), ConfigError);
    cfg.input = "/nonexistent/file.pgm";
    REQUIRE_THROWS_AS(run_reconstruct(cfg), IoError);
    cfg.input_kind = "garbage";
    REQUIRE_THROWS_AS(run_reconstruct(cfg), ConfigError);
}

TEST_CASE("certify emits key=value reports and counts verdicts", "[harness]") {
    CertifyConfig cfg;
    cfg.shape = GridShape(32, 1);
    cfg.k = 2;
    cfg.n = 2;
    cfg.C = 3;
    cfg.L = 24;
    cfg.instances = 5;
    cfg.seed = 12;
    const auto out = run_certify(cfg);
    REQUIRE(out.reports.size() == 5);
    REQUIRE(out.text.find("mu_Psi=") != std::string::npos);
    REQUIRE(out.text.find("instance=0") != std::string::npos);
    REQUIRE(out.text.find("rho=") != std::string::npos);
    REQUIRE(out.verdicts_true >= 1);
}
