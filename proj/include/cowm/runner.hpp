#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cowm/continual.hpp"
#include "cowm/rl.hpp"

namespace cowm {

struct RunConfig {
    std::string command;  // verify | bench-continual | bench-rl | ablate | dump-repr
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;  // default runs/<command>
    std::map<std::string, std::string> overrides;  // flat key=value onto module defaults
    std::size_t workers = 1;
};

// Fully materialized parameter set: every known key resolved to a value.
// Unknown override keys are rejected with ConfigError.
std::map<std::string, std::string> resolve_params(const RunConfig& cfg);

struct CheckResult {
    std::string name;
    bool pass;
    std::string detail;
};

// Cross-module invariant suite (projector algebra, preservation theorem,
// BP equivalence, finite differences, k-means monotonicity, ...).
// exactness_ridge feeds the checks that assume an exact gram inverse.
std::vector<CheckResult> run_verify_checks(double exactness_ridge, std::size_t c,
                                           std::size_t k, std::size_t F);

// Runs a command end to end: writes manifest.json, metrics.csv and
// report.json under cfg.output_dir. Returns a process exit status.
int execute(const RunConfig& cfg);

ContinualConfig continual_config_from(const std::map<std::string, std::string>& p,
                                      std::uint64_t seed);
RlConfig rl_config_from(const std::map<std::string, std::string>& p, std::uint64_t seed);

}  // namespace cowm
