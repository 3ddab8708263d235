#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qme/cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Sector-resolved exact diagonalisation of QOS relaxation in a long-range XY chain"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    for (const char* name : {"relax", "qme", "spectra", "krylov", "theory"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "JSON run configuration")->required();
        sub->add_option("--out", out, "output directory (overrides output.directory)");
    }
    static const char* help[][2] = {
        {"relax", "asymmetry relaxation curves and Gaussian fits for every (theta_s, theta_b)"},
        {"qme", "Mpemba verdict for the two configured initial conditions"},
        {"spectra", "sector variances and weighted gap histograms for one QOS element"},
        {"krylov", "Lanczos chains and correlators for the charge-mismatch operators"},
        {"theory", "per-m spectral prediction of one QOS element against simulation"},
    };
    for (const auto& h : help) app.get_subcommand(h[0])->description(h[1]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qme::cli::kExitConfigError;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    return qme::cli::run_command(command, config, out, std::cout, std::cerr);
}
