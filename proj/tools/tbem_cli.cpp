#include <CLI11.hpp>

#include "tbem/commands.hpp"

int main(int argc, char **argv)
{
    CLI::App app{"Nonlinear transmission problems for the Laplace equation by boundary integrals"};
    app.require_subcommand(1);

    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool quiet = false;
    std::string tamper;
    app.add_option("--out-dir", out_dir, "Directory for output files");
    app.add_option("--seed", seed, "Seed for randomized checks");
    app.add_flag("--quiet", quiet, "No progress output");
    app.add_option("--tamper", tamper)->group("");

    std::string config;
    std::string command;
    for (const char *name : {"solve", "perturb", "verify", "convergence"}) {
        static const std::map<std::string, std::string> help{
            {"solve", "Solve the unperturbed problem"},
            {"perturb", "Continue the solution along a shape family"},
            {"verify", "Run the oracle and property checks"},
            {"convergence", "Re-solve at N = 16 ... 256 and report probe differences"}};
        CLI::App *sub = app.add_subcommand(name, help.at(name));
        sub->fallthrough();
        sub->add_option("config", config, "Problem configuration file")->required();
        sub->callback([&command, name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : tbem::kExitConfig;
    }

    tbem::RunOptions opts;
    opts.out_dir = out_dir;
    opts.seed = seed;
    opts.quiet = quiet;
    if (!tamper.empty())
        opts.tamper = tamper;
    return tbem::run_command(command, config, opts);
}
