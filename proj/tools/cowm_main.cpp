// cowm experiment runner.
//
//   cowm <command> [--config FILE] [--seed N] [--out DIR] [--set key=value ...]
//                  [--workers N]
//
// Commands: verify, bench-continual, bench-rl, ablate, dump-repr.
// Each run writes metrics.csv, report.json and manifest.json to the output
// directory; reruns with an identical manifest are byte-identical.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cowm/runner.hpp"

namespace {

struct CliOptions {
    std::string config_file;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    std::vector<std::string> sets;
    std::size_t workers = 1;
    bool workers_set = false;
};

void add_common(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_file, "JSON config file with flat override keys");
    cmd->add_option("--seed", opt.seed, "Base RNG seed")->each([&](const std::string&) {
        opt.seed_set = true;
    });
    cmd->add_option("--out", opt.out_dir, "Output directory (default runs/<command>)");
    cmd->add_option("--set", opt.sets, "Override key=value (repeatable, beats --config)");
    cmd->add_option("--workers", opt.workers, "Concurrent jobs for grid commands")
        ->each([&](const std::string&) { opt.workers_set = true; });
}

cowm::RunConfig build_run(const std::string& command, const CliOptions& opt) {
    cowm::RunConfig run;
    run.command = command;
    run.seed = 0;
    run.workers = 1;

    if (!opt.config_file.empty()) {
        std::ifstream in(opt.config_file);
        if (!in) throw cowm::ConfigError("cannot open config file " + opt.config_file);
        nlohmann::json j;
        in >> j;
        if (!j.is_object()) throw cowm::ConfigError("config file must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (key == "seed") {
                run.seed = value.get<std::uint64_t>();
            } else if (key == "workers") {
                run.workers = value.get<std::size_t>();
            } else if (key == "out") {
                run.output_dir = value.get<std::string>();
            } else {
                run.overrides[key] =
                    value.is_string() ? value.get<std::string>() : value.dump();
            }
        }
    }
    if (opt.seed_set) run.seed = opt.seed;
    if (opt.workers_set) run.workers = opt.workers;
    if (!opt.out_dir.empty()) run.output_dir = opt.out_dir;

    for (const std::string& kv : opt.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw cowm::ConfigError("--set expects key=value, got '" + kv + "'");
        }
        run.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return run;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"COWM layer experiments: verification, continual and RL benchmarks"};
    app.require_subcommand(1);

    const std::vector<std::string> commands{"verify", "bench-continual", "bench-rl", "ablate",
                                            "dump-repr"};
    std::vector<CliOptions> opts(commands.size());
    for (std::size_t i = 0; i < commands.size(); ++i) {
        add_common(app.add_subcommand(commands[i]), opts[i]);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < commands.size(); ++i) {
            if (app.get_subcommand(commands[i])->parsed()) {
                return cowm::execute(build_run(commands[i], opts[i]));
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
