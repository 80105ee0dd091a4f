// Command-line entry point: run, bench, verify, synth.

#include "gpfs/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-process few-shot segmentation engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    std::string out_dir = "out";

    auto add_common = [&](CLI::App* sub, bool with_out, bool with_workers) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed, "override the config seed");
        if (with_out) sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        if (with_workers) sub->add_option("--workers", workers, "episode worker threads");
    };
    auto* run = app.add_subcommand("run", "run a shots sweep and write report.json / sweep.csv");
    add_common(run, true, true);
    auto* bench = app.add_subcommand("bench", "time GP preparation and inference");
    add_common(bench, true, false);
    auto* verify = app.add_subcommand("verify", "check the GP against its oracles and invariants");
    add_common(verify, false, false);
    auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
    add_common(synth, true, false);

    CLI11_PARSE(app, argc, argv);

    try {
        gpfs::RunConfig config = config_path.empty() ? gpfs::RunConfig{} : gpfs::load_config(config_path);
        auto* sub = app.get_subcommands().front();
        if (sub->count("--seed") > 0) config.seed = seed;
        if (sub->get_option_no_throw("--workers") != nullptr && sub->count("--workers") > 0) {
            if (workers == 0) throw gpfs::ConfigError("workers", "must be positive");
            config.workers = workers;
        }
        config.validate();

        if (app.got_subcommand(run)) return gpfs::cmd_run(config, out_dir, std::cout);
        if (app.got_subcommand(bench)) return gpfs::cmd_bench(config, out_dir, std::cout);
        if (app.got_subcommand(verify)) return gpfs::cmd_verify(config, std::cout);
        return gpfs::cmd_synth(config, out_dir, std::cout);
    } catch (const gpfs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
