#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "feynprop/cli.hpp"
#include "feynprop/errors.hpp"

int main(int argc, char** argv)
{
    using namespace feynprop;

    CLI::App app{"Perturbative propagators for exponential and delta potentials"};
    std::string command;
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    bool verbose = false;
    app.add_option("command", command, "propagate | converge | residual | oracle-compare")
        ->required()
        ->check(CLI::IsMember({"propagate", "converge", "residual", "oracle-compare"}));
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_path, "output file (overrides output.path; default stdout)");
    auto* seed_opt = app.add_option("--seed", seed, "override quadrature.seed");
    app.add_flag("-v,--verbose", verbose, "progress messages on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        cli::RunConfig cfg = cli::load_config(config_path);
        if (*seed_opt) cfg.quadrature.seed = seed;
        if (!out_path.empty()) cfg.output_path = out_path;

        const auto cmd = cli::parse_command(command);
        if (cfg.output_path.empty()) {
            return cli::run_command(*cmd, cfg, std::cout, std::cerr, {verbose});
        }
        std::ostringstream buf;
        const int rc = cli::run_command(*cmd, cfg, buf, std::cerr, {verbose});
        if (rc != 0) return rc;
        std::ofstream file(cfg.output_path);
        if (!file) throw ConfigError("cannot open output file '" + cfg.output_path + "'");
        file << buf.str();
        if (!file) throw ConfigError("failed writing '" + cfg.output_path + "'");
        if (verbose) std::cerr << "feynprop: wrote " << cfg.output_path << '\n';
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "feynprop: " << e.what() << '\n';
        return 1;
    }
}
