// lsh: analysis and simulation CLI for linear stochastic Hamiltonian systems.
//
//   lsh <command> --config <file> [--seed N] [--out <path>]
//
// Commands: stability, invariant, simulate, filter, robust, compose, transfer.
// Exit codes: 0 success, 1 error, 2 sufficient conditions inapplicable,
// 64 usage.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "lsh/dispatch.hpp"

namespace {

constexpr int kUsageExit = 64;

void emit(const lsh::ResultEnvelope& env, const std::string& out_path) {
    const std::string body = env.to_json().dump(2) + "\n";
    if (out_path == "-" || out_path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw lsh::ConfigError("cannot open output file: " + out_path);
    out << body;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"linear stochastic Hamiltonian systems toolkit"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;

    const std::vector<std::string> commands = {"stability", "invariant", "simulate", "filter",
                                               "robust",    "compose",   "transfer"};
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment configuration (JSON)")->required();
        sub->add_option("--out", out_override, "result destination ('-' for stdout)");
        sub->add_option("--seed", seed_override, "override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n" << app.help();
        return kUsageExit;
    }

    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return kUsageExit;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        lsh::ExperimentConfig cfg = lsh::load_config(config_path);
        if (seed_set) cfg.simulation.seed = seed_override;
        const lsh::ResultEnvelope env = lsh::dispatch(command, cfg);
        emit(env, out_override.empty() ? cfg.output.path : out_override);
        return env.exit_code;
    } catch (const lsh::HypothesisNotMet& e) {
        std::cerr << "inapplicable: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
