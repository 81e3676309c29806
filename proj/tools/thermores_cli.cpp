#include "thermores/errors.hpp"
#include "thermores/experiments.hpp"
#include "thermores/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

using namespace thermores;

int main(int argc, char** argv) {
    CLI::App app{"heat-diffusion information loss: experiments and reconstruction"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int jobs = 1;
    auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
    run->add_option("--config", config_path, "config file (JSON)")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
    run->add_option("--jobs", jobs, "worker threads for independent realizations")
        ->check(CLI::PositiveNumber);

    std::string dir_a, dir_b;
    auto* cmp = app.add_subcommand("compare", "compare two reconstruction output dirs");
    cmp->add_option("--a", dir_a, "first output directory")->required();
    cmp->add_option("--b", dir_b, "second output directory")->required();

    auto* list = app.add_subcommand("list", "list experiment ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad usage is a config problem
    }

    try {
        if (run->parsed()) {
            auto cfg = experiments::load_config(config_path);
            if (seed_opt->count() > 0) cfg.seed = seed;
            const auto manifest = experiments::run_experiment(cfg, out_dir, jobs);
            std::printf("%s: wrote %zu files to %s\n", cfg.experiment.c_str(),
                        manifest.at("files").size() + 1, out_dir.c_str());
        } else if (cmp->parsed()) {
            const auto rep = experiments::compare_reconstructions(dir_a, dir_b);
            std::fputs(experiments::format_report(rep).c_str(), stdout);
        } else if (list->parsed()) {
            for (const auto& id : experiments::experiment_ids())
                std::printf("%s\n", id.c_str());
        }
    } catch (const config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
