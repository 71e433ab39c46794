// Command-line front end: `run <config.json>` executes an experiment and
// writes its artifacts; `validate <config.json>` prints diagnostics only.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "flocklab/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"flocklab: piecewise-deterministic flocking dynamics laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    int threads = 1;
    double budget_seconds = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--out-dir", out_dir, "override the output directory");
        sub->add_option("--threads", threads, "worker pool size")->check(CLI::PositiveNumber);
        sub->add_option("--budget-seconds", budget_seconds, "wall-clock budget (0 = unlimited)");
    };

    CLI::App* run_cmd = app.add_subcommand("run", "run an experiment");
    add_common(run_cmd);
    CLI::App* validate_cmd = app.add_subcommand("validate", "print config diagnostics");
    add_common(validate_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    flocklab::ExperimentConfig cfg;
    try {
        cfg = flocklab::load_config(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.threads = threads;
    cfg.budget_seconds = budget_seconds;

    if (validate_cmd->parsed()) {
        auto diags = flocklab::validate_config(cfg);
        for (const auto& d : diags) std::printf("%s\n", d.c_str());
        if (diags.empty()) std::printf("ok\n");
        return 0;
    }
    std::string err;
    int code = flocklab::run_experiment(cfg, &err);
    if (code == 0)
        std::printf("done: artifacts in %s\n", cfg.out_dir.c_str());
    else
        std::fprintf(stderr, "run failed (exit %d): %s\n", code, err.c_str());
    return code;
}
