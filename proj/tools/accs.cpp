// accs: auto-calibrated parallel compressive sensing experiments.
//
// Subcommands drive the experiment runners from a `key = value` config file;
// see README.md for the file formats and available keys.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "accs/harness.hpp"
#include "accs/io.hpp"

namespace {

using namespace accs;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "path to the experiment config file")
        ->required();
    cmd->add_option("--seed", args.seed, "master seed override");
    cmd->add_option("--threads", args.threads, "worker thread count override");
    cmd->add_option("--out", args.out_dir, "output directory override");
}

GridShape shape_from(Config& cfg, int default_n1, int default_n2) {
    return GridShape(static_cast<int>(cfg.get_int("n1", default_n1)),
                     static_cast<int>(cfg.get_int("n2", default_n2)));
}

std::vector<int> int_list(Config& cfg, const std::string& key,
                          const std::vector<long long>& fallback) {
    std::vector<int> out;
    for (long long v : cfg.get_int_list(key, fallback)) out.push_back(static_cast<int>(v));
    return out;
}

void check_experiment_key(Config& cfg, const std::string& expected) {
    const std::string kind = cfg.get_string("experiment", expected);
    if (kind != expected)
        throw ConfigError("config is for experiment `" + kind + "`, but the `" + expected +
                          "` subcommand was invoked");
}

std::string resolve_out_dir(Config& cfg, const CommonArgs& args) {
    std::string dir = cfg.get_string("out_dir", ".");
    if (args.out_dir) dir = *args.out_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    return os;
}

int run_phase_transition_cmd(const CommonArgs& args) {
    Config cfg = Config::from_file(args.config_path);
    check_experiment_key(cfg, "phase_transition");
    PhaseTransitionConfig pt;
    pt.shape = shape_from(cfg, 256, 1);
    pt.sparsifier = sparsifier_kind_from_string(cfg.get_string("sparsifier", "dct2"));
    pt.basis = basis_kind_from_string(cfg.get_string("basis", "haar"));
    pt.k_min = static_cast<int>(cfg.get_int("k_min", 1));
    pt.k_max = static_cast<int>(cfg.get_int("k_max", 15));
    pt.n_min = static_cast<int>(cfg.get_int("n_min", 1));
    pt.n_max = static_cast<int>(cfg.get_int("n_max", 15));
    pt.C_values = int_list(cfg, "C_values", {1, 2, 4});
    pt.L = static_cast<int>(cfg.get_int("L", 128));
    pt.trials = static_cast<int>(cfg.get_int("trials", 10));
    pt.noise_ratio = cfg.get_double("noise_ratio", 0.0);
    pt.success_threshold = cfg.get_double("success_threshold", 1e-4);
    pt.noisy_success_factor = cfg.get_double("noisy_success_factor", 2.0);
    if (cfg.get_string("regularizer", "block_l12") == "column_l2")
        pt.regularizer = Regularizer::column_l2;
    pt.solver = SolverSettings::from_config(cfg);
    pt.seed = cfg.get_uint64("seed", 0);
    pt.threads = static_cast<int>(cfg.get_int("threads", 1));
    const std::string out_dir = resolve_out_dir(cfg, args);
    cfg.finish();
    if (args.seed) pt.seed = *args.seed;
    if (args.threads) pt.threads = *args.threads;

    const auto result = run_phase_transition(pt);
    const std::string csv_path = out_dir + "/phase_transition.csv";
    auto os = open_output(csv_path);
    result.write_csv(os);
    std::cout << "wrote " << csv_path << " (" << result.cells.size() << " cells)\n";
    return 0;
}

int run_l_sweep_cmd(const CommonArgs& args) {
    Config cfg = Config::from_file(args.config_path);
    check_experiment_key(cfg, "l_sweep");
    LSweepConfig ls;
    ls.shape = shape_from(cfg, 256, 1);
    ls.sparsifier = sparsifier_kind_from_string(cfg.get_string("sparsifier", "dct2"));
    ls.basis = basis_kind_from_string(cfg.get_string("basis", "haar"));
    ls.sweep_var = cfg.get_string("sweep_var", "k");
    ls.fixed_value = static_cast<int>(cfg.get_int("fixed_value", 5));
    ls.sweep_min = static_cast<int>(cfg.get_int("sweep_min", 1));
    ls.sweep_max = static_cast<int>(cfg.get_int("sweep_max", 15));
    ls.L_min = static_cast<int>(cfg.get_int("L_min", 10));
    ls.L_max = static_cast<int>(cfg.get_int("L_max", 200));
    ls.L_step = static_cast<int>(cfg.get_int("L_step", 10));
    ls.C_values = int_list(cfg, "C_values", {1, 4});
    ls.trials = static_cast<int>(cfg.get_int("trials", 10));
    ls.noise_ratio = cfg.get_double("noise_ratio", 0.0);
    ls.success_threshold = cfg.get_double("success_threshold", 1e-4);
    ls.noisy_success_factor = cfg.get_double("noisy_success_factor", 2.0);
    ls.minimal_rate = cfg.get_double("minimal_rate", 0.9);
    ls.solver = SolverSettings::from_config(cfg);
    ls.seed = cfg.get_uint64("seed", 0);
    ls.threads = static_cast<int>(cfg.get_int("threads", 1));
    const std::string out_dir = resolve_out_dir(cfg, args);
    cfg.finish();
    if (args.seed) ls.seed = *args.seed;
    if (args.threads) ls.threads = *args.threads;

    const auto result = run_l_sweep(ls);
    const std::string csv_path = out_dir + "/l_sweep.csv";
    auto os = open_output(csv_path);
    result.write_csv(os);
    const std::string min_path = out_dir + "/minimal_l.csv";
    auto osm = open_output(min_path);
    result.write_minimal_csv(osm);
    std::cout << "wrote " << csv_path << " and " << min_path << "\n";
    return 0;
}

int run_coil_sweep_cmd(const CommonArgs& args) {
    Config cfg = Config::from_file(args.config_path);
    check_experiment_key(cfg, "coil_sweep");
    CoilSweepConfig cs;
    cs.shape = shape_from(cfg, 23, 23);
    cs.sparsifier = sparsifier_kind_from_string(cfg.get_string("sparsifier", "dct2"));
    cs.basis = basis_kind_from_string(cfg.get_string("basis", "sin2d"));
    cs.k = static_cast<int>(cfg.get_int("k", 6));
    cs.n = static_cast<int>(cfg.get_int("n", 32));
    cs.C_values = int_list(cfg, "C_values", {2, 4, 6, 8, 12, 16, 24, 36});
    cs.L_min = static_cast<int>(cfg.get_int("L_min", 40));
    cs.L_max = static_cast<int>(cfg.get_int("L_max", 200));
    cs.L_step = static_cast<int>(cfg.get_int("L_step", 8));
    cs.realizations = static_cast<int>(cfg.get_int("realizations", 10));
    cs.noise_ratios = cfg.get_double_list("noise_ratios", {0.0});
    cs.mode = cfg.get_string("mode", "omp");
    cs.solver = SolverSettings::from_config(cfg);
    cs.seed = cfg.get_uint64("seed", 0);
    cs.threads = static_cast<int>(cfg.get_int("threads", 1));
    const std::string out_dir = resolve_out_dir(cfg, args);
    cfg.finish();
    if (args.seed) cs.seed = *args.seed;
    if (args.threads) cs.threads = *args.threads;

    const auto result = run_coil_sweep(cs);
    const std::string csv_path = out_dir + "/coil_sweep.csv";
    auto os = open_output(csv_path);
    result.write_csv(os);
    std::cout << "wrote " << csv_path << " (" << result.points.size() << " points)\n";
    return 0;
}

int run_reconstruct_cmd(const CommonArgs& args) {
    Config cfg = Config::from_file(args.config_path);
    check_experiment_key(cfg, "reconstruct");
    ReconstructConfig rc;
    rc.input = cfg.get_string("input");
    rc.input_kind = cfg.get_string("input_kind", "image");
    rc.sparsifier = sparsifier_kind_from_string(cfg.get_string("sparsifier", "dct2"));
    rc.basis = basis_kind_from_string(cfg.get_string("basis", "sin2d"));
    rc.k = static_cast<int>(cfg.get_int("k", 4));
    rc.C = static_cast<int>(cfg.get_int("C", 4));
    rc.L = static_cast<int>(cfg.get_int("L", 0));
    rc.reduction = cfg.get_double("reduction", 2.0);
    rc.noise_ratio = cfg.get_double("noise_ratio", 0.0);
    rc.lambda_rel = cfg.get_double("lambda_rel", 0.0);
    rc.solver = SolverSettings::from_config(cfg);
    rc.save_kspace = cfg.get_string("save_kspace", "");
    rc.seed = cfg.get_uint64("seed", 0);
    rc.out_dir = resolve_out_dir(cfg, args);
    cfg.finish();
    if (args.seed) rc.seed = *args.seed;

    const auto result = run_reconstruct(rc);
    std::cout << "wrote " << result.image_path << " and " << result.metrics_path << "\n";
    if (result.relative_error >= 0.0)
        std::cout << "relative_error=" << result.relative_error << "\n";
    std::cout << "residual=" << result.residual << " iterations=" << result.iterations
              << "\n";
    return 0;
}

int run_certify_cmd(const CommonArgs& args) {
    Config cfg = Config::from_file(args.config_path);
    check_experiment_key(cfg, "certify");
    CertifyConfig cc;
    cc.shape = shape_from(cfg, 64, 1);
    cc.sparsifier = sparsifier_kind_from_string(cfg.get_string("sparsifier", "dct2"));
    cc.basis = basis_kind_from_string(cfg.get_string("basis", "haar"));
    cc.k = static_cast<int>(cfg.get_int("k", 2));
    cc.n = static_cast<int>(cfg.get_int("n", 3));
    cc.C = static_cast<int>(cfg.get_int("C", 4));
    cc.L = static_cast<int>(cfg.get_int("L", 48));
    cc.instances = static_cast<int>(cfg.get_int("instances", 10));
    cc.seed = cfg.get_uint64("seed", 0);
    const std::string out_dir = resolve_out_dir(cfg, args);
    cfg.finish();
    if (args.seed) cc.seed = *args.seed;

    const auto result = run_certify(cc);
    const std::string path = out_dir + "/certify.txt";
    auto os = open_output(path);
    os << result.text;
    std::cout << "wrote " << path << "\n"
              << "verdict_true=" << result.verdicts_true << "/" << result.reports.size()
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"auto-calibrated parallel compressive sensing experiments"};
    app.require_subcommand(1);

    CommonArgs args;
    int (*runner)(const CommonArgs&) = nullptr;
    auto add = [&](const std::string& name, const std::string& desc,
                   int (*fn)(const CommonArgs&)) {
        auto* cmd = app.add_subcommand(name, desc);
        add_common(cmd, args);
        cmd->callback([&runner, fn] { runner = fn; });
    };
    add("phase-transition", "success-rate grid over (k, n) per coil count",
        run_phase_transition_cmd);
    add("l-sweep", "success rate versus measurement count", run_l_sweep_cmd);
    add("coil-sweep", "reconstruction error versus L per coil count", run_coil_sweep_cmd);
    add("reconstruct", "reconstruct one image from synthetic or file k-space",
        run_reconstruct_cmd);
    add("certify", "dual-certificate diagnostics on generated instances", run_certify_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        return runner(args);
    } catch (const accs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const accs::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
