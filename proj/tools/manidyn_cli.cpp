// Command-line front end: scenario-driven simulation, equilibrium solves,
// linearization dumps, verification batteries and geodesic traces.

#include <CLI11.hpp>

#include <iostream>

#include "manidyn/errors.hpp"
#include "manidyn/runner.hpp"

namespace {

struct CommonArgs {
    std::string scenario_path;
    std::string out_dir;
    std::uint32_t seed = 0;
    bool seed_set = false;
    int eps_sweep = 0;
    bool strict = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario_path, "scenario file (text or .json)")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides scenario)");
    cmd->add_option("--seed", args.seed, "random seed (overrides scenario)");
    cmd->add_option("--eps-sweep", args.eps_sweep,
                    "number of halvings in finite-difference sweeps");
    cmd->add_flag("--strict", args.strict, "enforce convergence-slope checks");
}

int run(const CommonArgs& args, manidyn::RunMode mode) {
    manidyn::Scenario s = manidyn::parse_scenario(args.scenario_path);
    if (!args.out_dir.empty()) s.out_dir = args.out_dir;
    if (args.seed != 0) s.seed = args.seed;
    if (args.eps_sweep != 0) s.eps_sweep = args.eps_sweep;
    if (args.strict) s.strict = true;
    manidyn::RunResult r = manidyn::run_scenario(s, mode);
    std::cout << r.report;
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"covariant continuum dynamics on Riemannian manifolds"};
    app.require_subcommand(1);

    CommonArgs args;
    std::map<std::string, manidyn::RunMode> modes = {
        {"simulate", manidyn::RunMode::simulate},
        {"equilibrium", manidyn::RunMode::equilibrium},
        {"linearize", manidyn::RunMode::linearize},
        {"verify", manidyn::RunMode::verify},
        {"geodesic", manidyn::RunMode::geodesic},
    };
    std::map<std::string, CLI::App*> cmds;
    cmds["simulate"] = app.add_subcommand("simulate", "explicit time integration");
    cmds["equilibrium"] = app.add_subcommand("equilibrium", "static solve by Newton steps");
    cmds["linearize"] =
        app.add_subcommand("linearize", "coefficient fields and fd comparison");
    cmds["verify"] = app.add_subcommand("verify", "defect battery for the scenario");
    cmds["geodesic"] = app.add_subcommand("geodesic", "exponential-map traces");
    for (auto& [name, cmd] : cmds) add_common(cmd, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    try {
        for (auto& [name, cmd] : cmds)
            if (cmd->parsed()) return run(args, modes.at(name));
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const manidyn::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const manidyn::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const manidyn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
