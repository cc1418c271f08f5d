#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace waveapost::cli;

int main(int argc, char** argv) {
    CLI::App app{"Wave equation solver with a posteriori L-infinity(L2) error bounds"};
    app.require_subcommand(1);

    std::string config_path;
    DumpOptions dumps;
    const auto add_dumps = [&dumps](CLI::App* cmd) {
        cmd->add_option_function<std::string>("--dump-mesh", [&dumps](const std::string& p) { dumps.mesh = p; },
                                              "write every mesh used by the run");
        cmd->add_option_function<std::string>("--dump-trajectory",
                                              [&dumps](const std::string& p) { dumps.trajectory = p; },
                                              "write the coefficients of every step");
        cmd->add_option_function<std::string>("--dump-matrix", [&dumps](const std::string& p) { dumps.matrix = p; },
                                              "write mass and stiffness matrices of the initial space");
    };

    auto* run = app.add_subcommand("run", "run one experiment and print its estimator breakdown");
    run->add_option("config", config_path, "configuration file")->required();
    add_dumps(run);

    int levels = 4;
    auto* conv = app.add_subcommand("convergence", "halve h and k over several levels");
    conv->add_option("config", config_path, "configuration file")->required();
    conv->add_option("--levels", levels, "number of levels (>= 2)");

    CheckOptions check_opts;
    auto* check = app.add_subcommand("check", "run the invariant suite");
    check->add_option("--filter", check_opts.filter, "only run checks whose name contains this text");
    check->add_flag("--inject-mu-sign-flip", check_opts.inject_mu_sign_flip,
                    "seed a fault in mu to confirm the suite catches it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    if (*run) return guarded([&] { return cmd_run(parse_config(config_path), dumps, std::cout); }, std::cerr);
    if (*conv)
        return guarded([&] { return cmd_convergence(parse_config(config_path), levels, std::cout, std::cerr); },
                       std::cerr);
    return guarded([&] { return cmd_check(check_opts, std::cout); }, std::cerr);
}
