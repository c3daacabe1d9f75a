#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chromacs/config.hpp"
#include "chromacs/errors.hpp"
#include "chromacs/pipeline.hpp"

namespace pl = chromacs::pipeline;

int main(int argc, char** argv) {
    CLI::App app{"chromacs: compressive spectral imaging with chromatic PSFs and coded masks"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    app.add_option("-c,--config", config_path, "INI configuration file");
    app.add_option("--set", overrides, "override a config key (section.key=value), repeatable");
    auto* seed_opt = app.add_option("--seed", seed, "seed for mask generation, noise and oracle instances");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads for the system operator");
    app.fallthrough();

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"scene", "write a deterministic synthetic spectral cube"},
        {"psf", "synthesise the chromatic PSF stack"},
        {"mask", "generate the binary coded masks"},
        {"simulate", "apply the forward model to a cube"},
        {"reconstruct", "recover a cube by l1 minimisation"},
        {"oracle", "check the matrix-free operators against explicit matrices"},
        {"metrics", "compare a reconstruction with ground truth"},
        {"render", "write a PPM/PGM preview of a cube"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : pl::kConfigError;
    }

    chromacs::Config cfg;
    try {
        if (!config_path.empty()) cfg = chromacs::Config::from_file(config_path);
        for (const auto& o : overrides) cfg.apply_override(o);
        if (*seed_opt) {
            const auto s = std::to_string(seed);
            cfg.set("mask.seed", s);
            cfg.set("oracle.seed", s);
            if (!cfg.contains("noise.seed")) cfg.set("noise.seed", s);
        }
        if (*threads_opt) cfg.set("run.threads", std::to_string(threads));
    } catch (const chromacs::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pl::exit_code_for(e.code());
    }

    const auto name = app.get_subcommands().front()->get_name();
    return pl::run_command(name, cfg, std::cout, std::cerr);
}
