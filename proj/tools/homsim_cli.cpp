#include "homsim/driver.hpp"
#include "homsim/sampler.hpp"

#include <CLI11.hpp>

#include <clocale>
#include <cstdint>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");

    CLI::App app{
        "Two-photon interference calculator for photon fields emitted by two "
        "remote atomic-ensemble memories"};

    std::string config_path;
    std::string mode_text;
    std::string out_dir;
    std::uint64_t seed = 0;
    int cutoff = 0;
    std::uint64_t trials = 0;
    int threads = 0;

    app.add_option("--config", config_path, "Run configuration file (INI)")
        ->check(CLI::ExistingFile);
    auto* mode_opt = app.add_option(
        "--mode", mode_text, "analytic, fock, montecarlo or compare");
    auto* seed_opt = app.add_option("--seed", seed, "Master seed for sampling");
    auto* out_opt = app.add_option("--out", out_dir, "Output directory");
    auto* cutoff_opt =
        app.add_option("--cutoff", cutoff, "Per-mode photon number cutoff")
            ->check(CLI::Range(2, 16));
    auto* trials_opt = app.add_option("--trials", trials, "Monte Carlo trials")
                           ->check(CLI::PositiveNumber);
    auto* threads_opt = app.add_option("--threads", threads, "Worker threads")
                            ->check(CLI::Range(1, 256));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        // bad flags and unreadable paths are configuration errors; keep
        // --help and --version on exit code 0
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        homsim::RunConfig cfg = config_path.empty()
                                    ? homsim::default_run_config()
                                    : homsim::parse_config_file(config_path);
        if (mode_opt->count()) cfg.mode = homsim::parse_run_mode(mode_text);
        if (seed_opt->count()) cfg.seed = seed;
        if (out_opt->count()) cfg.out_dir = out_dir;
        if (cutoff_opt->count()) cfg.cutoff = cutoff;
        if (trials_opt->count()) cfg.n_trials = trials;
        if (threads_opt->count()) cfg.n_threads = threads;
        homsim::run(cfg);
        return 0;
    } catch (const homsim::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const homsim::NumericRefusal& err) {
        std::cerr << "numeric refusal: " << err.what() << "\n";
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
