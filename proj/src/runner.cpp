#include "cowm/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "cowm/serialize.hpp"

namespace cowm {

namespace {

// Every user-settable key with its default. Commands read the subset they
// need; the manifest materializes all of them.
const std::vector<std::pair<std::string, std::string>>& param_registry() {
    static const std::vector<std::pair<std::string, std::string>> reg = {
        {"c", "2"},
        {"k", "10"},
        {"F", "64"},
        {"ridge", "1e-8"},
        {"lr", "1.0"},
        {"steps", "2000"},
        {"angle", "45"},
        {"spread", "0.1"},
        {"agent", "cowm"},
        {"d_in", "16"},
        {"d_out", "4"},
        {"batch", "32"},
        {"eval_every", "100"},
        {"eval_batch", "256"},
        {"hidden", "64"},
        {"episodes1", "600"},
        {"episodes2", "600"},
        {"eval_episodes", "10"},
        {"lr_actor", "3e-2"},
        {"lr_critic", "1e-1"},
        {"discount", "0.99"},
        {"init_log_std", "-1.0"},
        {"grid_c", "2,3,5"},
        {"grid_k", "2,10,50"},
        {"cell_seeds", "5"},
        {"ablate_rl", "0"},
        {"layer_index", "1"},
        {"num_snapshots", "5"},
    };
    return reg;
}

double to_double(const std::map<std::string, std::string>& p, const std::string& key) {
    const std::string& s = p.at(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("override " + key + ": '" + s + "' is not a number");
    }
}

std::size_t to_count(const std::map<std::string, std::string>& p, const std::string& key) {
    const double v = to_double(p, key);
    if (v < 0 || v != std::floor(v)) {
        throw ConfigError("override " + key + ": '" + p.at(key) + "' is not a count");
    }
    return static_cast<std::size_t>(v);
}

std::vector<std::size_t> to_count_list(const std::map<std::string, std::string>& p,
                                       const std::string& key) {
    std::vector<std::size_t> out;
    std::stringstream ss(p.at(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(static_cast<std::size_t>(std::stoull(item)));
        } catch (const std::exception&) {
            throw ConfigError("override " + key + ": bad list item '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("override " + key + ": empty list");
    return out;
}

NetKind to_kind(const std::map<std::string, std::string>& p) {
    const std::string& s = p.at("agent");
    if (s == "cowm") return NetKind::Cowm;
    if (s == "bp") return NetKind::Bp;
    throw ConfigError("override agent: '" + s + "' is not cowm|bp");
}

std::string timestamp_utc() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RunError("cannot write " + path.string());
    out << text;
}

void write_manifest(const RunConfig& cfg, const std::map<std::string, std::string>& resolved) {
    nlohmann::json j{
        {"command", cfg.command},
        {"seed", cfg.seed},
        {"output_dir", cfg.output_dir.string()},
        {"workers", cfg.workers},
        {"overrides", cfg.overrides},
        {"resolved", resolved},
        {"timestamp", timestamp_utc()},
    };
    write_text(cfg.output_dir / "manifest.json", j.dump(2) + "\n");
}

nlohmann::json report_json(const ForgettingReport& r) {
    return {{"task1_loss_after_task1", r.task1_loss_after_task1},
            {"task1_loss_after_task2", r.task1_loss_after_task2},
            {"task2_loss_final", r.task2_loss_final},
            {"forgetting_ratio", r.forgetting_ratio}};
}

nlohmann::json report_json(const RetentionReport& r) {
    return {{"phase1_return_after_phase1", r.phase1_return_after_phase1},
            {"phase1_return_after_phase2", r.phase1_return_after_phase2},
            {"phase2_return_final", r.phase2_return_final},
            {"retention", r.retention}};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_verify(const RunConfig& cfg, const std::map<std::string, std::string>& p) {
    const double ridge = to_double(p, "ridge");
    const auto checks =
        run_verify_checks(ridge, to_count(p, "c"), to_count(p, "k"), to_count(p, "F"));

    CsvWriter csv(cfg.output_dir / "metrics.csv", {"check", "pass"});
    nlohmann::json jchecks = nlohmann::json::array();
    std::size_t failed = 0;
    for (const CheckResult& c : checks) {
        std::printf("%-4s %-36s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
        csv.row({c.name, c.pass ? "1" : "0"});
        jchecks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        if (!c.pass) ++failed;
    }
    csv.close();
    std::printf("%zu/%zu checks passed\n", checks.size() - failed, checks.size());

    nlohmann::json report{{"checks", jchecks},
                          {"passed", checks.size() - failed},
                          {"failed", failed}};
    write_text(cfg.output_dir / "report.json", report.dump(2) + "\n");
    return failed == 0 ? 0 : 1;
}

int cmd_bench_continual(const RunConfig& cfg, const std::map<std::string, std::string>& p) {
    const ContinualConfig ccfg = continual_config_from(p, cfg.seed);
    CsvWriter csv(cfg.output_dir / "metrics.csv", {"step", "phase", "task1_loss", "task2_loss"});
    const ForgettingReport report = run_sequential(ccfg, &csv);
    csv.close();
    write_text(cfg.output_dir / "report.json", report_json(report).dump(2) + "\n");
    std::printf("forgetting_ratio=%s (task1 %s -> %s)\n",
                format_double(report.forgetting_ratio).c_str(),
                format_double(report.task1_loss_after_task1).c_str(),
                format_double(report.task1_loss_after_task2).c_str());
    return 0;
}

int cmd_bench_rl(const RunConfig& cfg, const std::map<std::string, std::string>& p) {
    const RlConfig rcfg = rl_config_from(p, cfg.seed);
    CsvWriter csv(cfg.output_dir / "metrics.csv",
                  {"agent", "episode", "phase", "return", "actor_loss", "critic_loss"});
    const TwoPhaseReport report = run_two_phase(rcfg, &csv);
    csv.close();
    nlohmann::json j{{"cowm", report_json(report.cowm)}, {"bp", report_json(report.bp)}};
    write_text(cfg.output_dir / "report.json", j.dump(2) + "\n");
    std::printf("retention cowm=%s bp=%s\n", format_double(report.cowm.retention).c_str(),
                format_double(report.bp.retention).c_str());
    return 0;
}

struct AblateJob {
    std::size_t c;
    std::size_t k;
    std::uint64_t seed;
    double forgetting = 0.0;
    double retention = 0.0;
};

int cmd_ablate(const RunConfig& cfg, const std::map<std::string, std::string>& p) {
    const auto grid_c = to_count_list(p, "grid_c");
    const auto grid_k = to_count_list(p, "grid_k");
    const std::size_t cell_seeds = to_count(p, "cell_seeds");
    const bool with_rl = to_count(p, "ablate_rl") != 0;
    for (std::size_t c : grid_c) {
        if (c < 2) throw ConfigError("ablate: grid c values must be >= 2");
    }
    for (std::size_t k : grid_k) {
        if (k < 1) throw ConfigError("ablate: grid k values must be >= 1");
    }

    std::vector<AblateJob> jobs;
    for (std::size_t c : grid_c) {
        for (std::size_t k : grid_k) {
            for (std::size_t s = 0; s < cell_seeds; ++s) {
                jobs.push_back({c, k, cfg.seed + s, 0.0, 0.0});
            }
        }
    }

    const long long njobs = static_cast<long long>(jobs.size());
    const int workers = static_cast<int>(std::max<std::size_t>(cfg.workers, 1));
    std::vector<std::string> job_errors(jobs.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers > 1)
    for (long long i = 0; i < njobs; ++i) {
        AblateJob& job = jobs[i];
        try {
            auto params = p;
            params["c"] = std::to_string(job.c);
            params["k"] = std::to_string(job.k);
            const ContinualConfig ccfg = continual_config_from(params, job.seed);
            job.forgetting = run_sequential(ccfg).forgetting_ratio;
            if (with_rl) {
                const RlConfig rcfg = rl_config_from(params, job.seed);
                job.retention = run_two_phase_single(rcfg, NetKind::Cowm).retention;
            }
        } catch (const std::exception& e) {
            job_errors[i] = e.what();
        }
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!job_errors[i].empty()) {
            throw RunError("ablate cell c=" + std::to_string(jobs[i].c) + " k=" +
                           std::to_string(jobs[i].k) + " seed=" + std::to_string(jobs[i].seed) +
                           ": " + job_errors[i]);
        }
    }

    std::vector<std::string> header{"c", "k", "median_forgetting_ratio"};
    if (with_rl) header.push_back("median_retention");
    CsvWriter csv(cfg.output_dir / "metrics.csv", header);
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t c : grid_c) {
        for (std::size_t k : grid_k) {
            std::vector<double> forgetting, retention;
            for (const AblateJob& job : jobs) {
                if (job.c == c && job.k == k) {
                    forgetting.push_back(job.forgetting);
                    retention.push_back(job.retention);
                }
            }
            std::vector<std::string> row{CsvWriter::cell(c), CsvWriter::cell(k),
                                         CsvWriter::cell(median(forgetting))};
            nlohmann::json cell{{"c", c},
                                {"k", k},
                                {"forgetting_ratios", forgetting},
                                {"median_forgetting_ratio", median(forgetting)}};
            if (with_rl) {
                row.push_back(CsvWriter::cell(median(retention)));
                cell["median_retention"] = median(retention);
            }
            csv.row(row);
            cells.push_back(std::move(cell));
        }
    }
    csv.close();
    write_text(cfg.output_dir / "report.json",
               nlohmann::json{{"cells", cells}}.dump(2) + "\n");
    return 0;
}

int cmd_dump_repr(const RunConfig& cfg, const std::map<std::string, std::string>& p) {
    const RlConfig rcfg = rl_config_from(p, cfg.seed);
    const std::size_t layer_index = to_count(p, "layer_index");
    const std::size_t num_snapshots = to_count(p, "num_snapshots");
    if (num_snapshots < 1) throw ConfigError("dump-repr: num_snapshots must be >= 1");

    ActorCritic agent = make_agent(rcfg, NetKind::Cowm);
    if (layer_index >= agent.actor.depth()) {
        throw ConfigError("dump-repr: layer_index " + std::to_string(layer_index) +
                          " out of range for depth " + std::to_string(agent.actor.depth()));
    }
    const std::size_t repr_dim = agent.actor.layers()[layer_index].d_in();

    std::vector<std::string> header{"stage", "kind", "index"};
    for (std::size_t i = 0; i < repr_dim; ++i) header.push_back("v" + std::to_string(i));
    CsvWriter csv(cfg.output_dir / "metrics.csv", header);

    PointMassEnv env;
    const std::size_t total = rcfg.episodes_phase1 + rcfg.episodes_phase2;
    std::size_t next_stage = 1;

    auto snapshot = [&](std::size_t stage, int eval_phase) {
        // Hidden inputs of the chosen layer over two deterministic episodes.
        env.set_phase(eval_phase);
        std::vector<Vector> states;
        for (std::uint64_t e = 0; e < 2; ++e) {
            const EpisodeTrace tr = collect_episode(env, agent, 0xD0C0 + e, true);
            states.insert(states.end(), tr.states.begin(), tr.states.end());
        }
        Matrix obs(2, states.size());
        for (std::size_t j = 0; j < states.size(); ++j) {
            obs.at(0, j) = states[j][0];
            obs.at(1, j) = states[j][1];
        }
        ForwardCache cache;
        agent.actor.forward(obs, /*training=*/false, &cache);
        const Matrix& repr = cache.inputs[layer_index];
        for (std::size_t j = 0; j < repr.cols(); ++j) {
            std::vector<std::string> row{CsvWriter::cell(stage), "repr", CsvWriter::cell(j)};
            for (std::size_t i = 0; i < repr.rows(); ++i) row.push_back(CsvWriter::cell(repr(i, j)));
            csv.row(row);
        }
        if (const auto& clusters = agent.actor.layers()[layer_index].last_clusters()) {
            for (std::size_t ci = 0; ci < clusters->centers.size(); ++ci) {
                std::vector<std::string> row{CsvWriter::cell(stage), "center",
                                             CsvWriter::cell(ci)};
                for (double v : clusters->centers[ci]) row.push_back(CsvWriter::cell(v));
                csv.row(row);
            }
        }
    };

    for (std::size_t e = 0; e < total; ++e) {
        const int phase = e < rcfg.episodes_phase1 ? 1 : 2;
        env.set_phase(phase);
        const std::uint64_t ep_seed = cfg.seed * 1000003ULL + e * 7919ULL + 1;
        const EpisodeTrace trace = collect_episode(env, agent, ep_seed);
        a2c_update(agent, trace);
        while (next_stage <= num_snapshots &&
               (e + 1) >= (next_stage * total) / num_snapshots) {
            snapshot(next_stage, phase);
            ++next_stage;
        }
    }
    csv.close();

    nlohmann::json report{{"stages", num_snapshots},
                          {"layer_index", layer_index},
                          {"repr_dim", repr_dim},
                          {"cluster_count", rcfg.cowm.cluster_count}};
    write_text(cfg.output_dir / "report.json", report.dump(2) + "\n");
    return 0;
}

}  // namespace

std::map<std::string, std::string> resolve_params(const RunConfig& cfg) {
    std::map<std::string, std::string> resolved;
    for (const auto& [key, value] : param_registry()) resolved[key] = value;
    // verify's exactness checks assume an exact gram inverse unless the
    // caller injects a ridge explicitly.
    if (cfg.command == "verify") resolved["ridge"] = "0";
    for (const auto& [key, value] : cfg.overrides) {
        if (!resolved.count(key)) throw ConfigError("unknown override key '" + key + "'");
        resolved[key] = value;
    }
    return resolved;
}

ContinualConfig continual_config_from(const std::map<std::string, std::string>& p,
                                      std::uint64_t seed) {
    ContinualConfig cfg;
    cfg.kind = to_kind(p);
    cfg.d_in = to_count(p, "d_in");
    cfg.d_out = to_count(p, "d_out");
    cfg.angle_degrees = to_double(p, "angle");
    cfg.spread = to_double(p, "spread");
    cfg.steps_per_phase = to_count(p, "steps");
    cfg.eval_every = to_count(p, "eval_every");
    cfg.eval_batch = to_count(p, "eval_batch");
    cfg.train.lr = to_double(p, "lr");
    cfg.train.batch_size = to_count(p, "batch");
    cfg.train.seed = seed;
    cfg.cowm.cluster_count = to_count(p, "c");
    cfg.cowm.cluster_iters = to_count(p, "k");
    cfg.cowm.buffer_capacity = to_count(p, "F");
    cfg.cowm.ridge = to_double(p, "ridge");
    cfg.cowm.seed = seed;
    return cfg;
}

RlConfig rl_config_from(const std::map<std::string, std::string>& p, std::uint64_t seed) {
    RlConfig cfg;
    cfg.hidden = to_count(p, "hidden");
    cfg.episodes_phase1 = to_count(p, "episodes1");
    cfg.episodes_phase2 = to_count(p, "episodes2");
    cfg.eval_episodes = to_count(p, "eval_episodes");
    cfg.discount = to_double(p, "discount");
    cfg.lr_actor = to_double(p, "lr_actor");
    cfg.lr_critic = to_double(p, "lr_critic");
    cfg.init_log_std = to_double(p, "init_log_std");
    cfg.seed = seed;
    cfg.cowm.cluster_count = to_count(p, "c");
    cfg.cowm.cluster_iters = to_count(p, "k");
    cfg.cowm.buffer_capacity = to_count(p, "F");
    cfg.cowm.ridge = to_double(p, "ridge");
    cfg.cowm.seed = seed;
    return cfg;
}

int execute(const RunConfig& cfg) {
    RunConfig run = cfg;
    if (run.output_dir.empty()) run.output_dir = std::filesystem::path("runs") / run.command;
    std::filesystem::create_directories(run.output_dir);

    const auto resolved = resolve_params(run);
    write_manifest(run, resolved);

    if (run.command == "verify") return cmd_verify(run, resolved);
    if (run.command == "bench-continual") return cmd_bench_continual(run, resolved);
    if (run.command == "bench-rl") return cmd_bench_rl(run, resolved);
    if (run.command == "ablate") return cmd_ablate(run, resolved);
    if (run.command == "dump-repr") return cmd_dump_repr(run, resolved);
    throw ConfigError("unknown command '" + run.command + "'");
}

}  // namespace cowm
