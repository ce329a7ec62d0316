#include "vbsim/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Spatial vector-host epidemic simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    int workers = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    app.add_option("--config", config_path, "Run configuration (JSON, schema 1)")->required();
    app.add_option("--workers", workers, "Worker threads for GSA design rows")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Overrides the config seed");
    app.add_option("--out", out_dir, "Output directory (overrides the config)");

    app.add_subcommand("simulate", "Run the configured model and export snapshots");
    app.add_subcommand("equilibrium", "Equilibria, periodic orbit and decay-rate report");
    app.add_subcommand("spectral", "Principal eigenvalue and eigenfunction");
    app.add_subcommand("gsa", "Sobol sensitivity campaign over the configured design");
    app.add_subcommand("transect", "Run the model and export transect series");

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    const vbsim::Command command = *vbsim::parse_command(name);
    vbsim::CommandOptions options;
    options.workers = workers;
    options.seed = seed;
    options.out_dir = out_dir;

    const vbsim::CommandResult result = vbsim::run_command_file(command, config_path, options);
    if (result.exit_code != 0) {
        std::cerr << "vbsim " << name << ": " << result.error << '\n';
        return result.exit_code;
    }
    std::cout << "wrote " << result.artifacts.size() << " artifacts and manifest.json to " << result.out_dir << '\n';
    return 0;
}
