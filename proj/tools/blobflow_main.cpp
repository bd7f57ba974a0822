// Batch front end for the deterministic-particle diffusion solver.
//
// Subcommands: simulate | convergence | validate | jko | gibbs
// Exit codes: 0 ok, 1 validation failure, 2 config error, 3 runtime failure.

#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "blobflow/io.hpp"
#include "blobflow/runner.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    int threads = 1;
    int seed = -1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "Path to the run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args.out_dir, "Output directory");
    sub->add_option("--threads", args.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", args.seed, "Override the config seed");
}

int dispatch(const CommonArgs& args, const std::function<int(const blob::cli::RunContext&)>& fn) {
    try {
        blob::cli::RunContext ctx;
        ctx.config = blob::cfg::RunConfig::parse_file(args.config_path);
        if (args.seed >= 0) ctx.config.set("seed", std::to_string(args.seed));
        if (const char* env_out = std::getenv("BLOBFLOW_OUT"); env_out && args.out_dir == "out")
            ctx.out_dir = env_out;
        else
            ctx.out_dir = args.out_dir;
        if (ctx.config.has("output.dir") && args.out_dir == "out")
            ctx.out_dir = ctx.config.get_str("output.dir", ctx.out_dir);
        ctx.threads = args.threads;
        return fn(ctx);
    } catch (const blob::invalid_parameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const blob::evaluation_error& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(blob::io::version()) +
                 " - deterministic particle solver for heat and fast diffusion"};
    app.require_subcommand(1);

    std::map<std::string, std::pair<CommonArgs, std::function<int(const blob::cli::RunContext&)>>>
        commands;
    commands["simulate"] = {{}, blob::cli::cmd_simulate};
    commands["convergence"] = {{}, blob::cli::cmd_convergence};
    commands["validate"] = {{}, blob::cli::cmd_validate};
    commands["jko"] = {{}, blob::cli::cmd_jko};
    commands["gibbs"] = {{}, blob::cli::cmd_gibbs};

    const std::map<std::string, std::string> help = {
        {"simulate", "Integrate the particle ODE and emit trajectory/report CSVs"},
        {"convergence", "Self-convergence study across an (N, eps) schedule"},
        {"validate", "Run the kernel/lemma/commutator check battery"},
        {"jko", "Minimizing-movement solve and comparison with the particle ODE"},
        {"gibbs", "Long-horizon sampling run against the Gibbs target"},
    };
    for (auto& [name, entry] : commands) {
        CLI::App* sub = app.add_subcommand(name, help.at(name));
        add_common(sub, entry.first);
    }

    CLI11_PARSE(app, argc, argv);

    for (auto& [name, entry] : commands)
        if (app.got_subcommand(name)) return dispatch(entry.first, entry.second);
    return 2;
}
