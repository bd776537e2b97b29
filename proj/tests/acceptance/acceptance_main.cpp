// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Usage: cowm_acceptance [N]  (run criterion N, or all when omitted).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cowm/runner.hpp"
#include "cowm/serialize.hpp"

using namespace cowm;
namespace fs = std::filesystem;

namespace {

// Margins pinned from the pre-registered oracle runs before the suite was
// frozen. Continual (seeds 1..9): median ratio cowm 11.90 vs bp 172808, a
// factor of 7e-5; pinned two orders looser. RL (seeds 1..5): median
// retention cowm 0.0609 vs bp 0.0556, gap 0.0053; pinned at 40% of that.
constexpr double kContinualRatioFactor = 0.01;  // cowm median <= factor * bp median
constexpr double kRlRetentionMargin = 0.002;    // cowm median > bp median + margin
constexpr double kAblateSlack = 1e-9;           // "no better" tolerance on medians

struct Outcome {
    bool pass;
    std::string detail;
};

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (double& v : m.values()) v = rng.normal();
    return m;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) { return format_double(v); }

// 1. Exact-preservation theorem: single linear COWM layer, ridge 0,
//    A = task-1 mean direction, 1000 phase-2 updates, |dW^T v| <= 1e-10.
Outcome criterion1() {
    const std::size_t d_in = 16, d_out = 4;
    const auto [task1, task2] = make_task_pair(d_in, d_out, 45.0, 0.1, 7);

    CowmConfig cfg;
    cfg.ridge = 0.0;
    Rng init(7);
    CowmLayer layer(d_in, d_out, cfg, false, init);
    for (int i = 0; i < 4; ++i) layer.buffer().push(task1.mean_direction);
    for (int i = 0; i < 4; ++i) layer.buffer().push(task2.mean_direction);
    layer.refresh_projection(task2.mean_direction);
    if (!layer.preserved()) return {false, "projection did not engage"};

    Vector v = layer.preserved()->column(0);  // A = task-1 mean direction
    for (double& x : v) x *= -1.75;           // arbitrary vector in span(A)
    const Matrix vm = Matrix::from_columns({v});
    const Matrix before = matmul(transpose(layer.weights()), vm);

    for (int step = 0; step < 1000; ++step) {
        auto [x, y] = sample_batch(task2, 32, step + 1);
        const Matrix pred = matmul(transpose(layer.weights()), x);
        const LossResult loss = mse_loss(pred, y);
        layer.apply_update(layer.weight_delta(loss.grad, x, 1.0));
    }
    const Matrix after = matmul(transpose(layer.weights()), vm);
    const double drift = max_abs_diff(before, after);
    return {drift <= 1e-10, "max |dW^T v| = " + fmt(drift) + " (<= 1e-10)"};
}

// 2. BP equivalence: under-filled buffer, 500-step trajectories differ by
//    <= 1e-12 from a plain linear layer on identical seeds.
Outcome criterion2() {
    ContinualConfig base;
    base.steps_per_phase = 250;  // two phases = 500 steps total
    base.train.seed = 11;
    base.cowm.buffer_capacity = 64;
    base.cowm.cluster_count = 65;  // unreachable: projection stays off

    ContinualConfig cowm_cfg = base;
    cowm_cfg.kind = NetKind::Cowm;
    ContinualConfig bp_cfg = base;
    bp_cfg.kind = NetKind::Bp;

    // Identical seeds: identical tasks and batches; trajectories must agree.
    const auto [task1, task2] =
        make_task_pair(base.d_in, base.d_out, base.angle_degrees, base.spread, base.train.seed);

    auto run_traj = [&](const ContinualConfig& cfg) {
        CowmConfig layer_cfg = cfg.cowm;
        layer_cfg.project = cfg.kind == NetKind::Cowm;
        Rng init(cfg.train.seed);
        Mlp net = Mlp::make({cfg.d_in, cfg.d_out}, {Activation::Identity}, layer_cfg, false,
                            init);
        std::vector<Matrix> traj;
        for (std::size_t phase = 0; phase < 2; ++phase) {
            const TaskSpec& task = phase == 0 ? task1 : task2;
            for (std::size_t step = 0; step < cfg.steps_per_phase; ++step) {
                auto [x, y] = sample_batch(task, cfg.train.batch_size,
                                           phase * cfg.steps_per_phase + step + 1);
                ForwardCache cache;
                const Matrix pred = net.forward(x, true, &cache);
                net.backward_and_step(cache, mse_loss(pred, y).grad, cfg.train.lr);
                traj.push_back(net.layers()[0].weights());
            }
        }
        return traj;
    };

    const auto ta = run_traj(cowm_cfg);
    const auto tb = run_traj(bp_cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        worst = std::max(worst, max_abs_diff(ta[i], tb[i]));
    }
    return {worst <= 1e-12,
            "max trajectory diff over " + std::to_string(ta.size()) + " steps = " + fmt(worst) +
                " (<= 1e-12)"};
}

// 3. Projector algebra on 100 random full-rank A (d<=16, s<=4).
Outcome criterion3() {
    Rng rng(13);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t d = 2 + rng.index(15);
        const std::size_t s = 1 + rng.index(std::min<std::size_t>(4, d));
        const Matrix a = random_matrix(d, s, rng);
        const Matrix q = matmul(matmul(a, gram_inverse(a, 0.0)), transpose(a));
        worst = std::max(worst, max_abs_diff(matmul(q, q), q));
        worst = std::max(worst, max_abs_diff(matmul(q, a), a));
    }
    return {worst <= 1e-8, "max ||Q^2-Q|| / ||QA-A|| dev = " + fmt(worst) + " (<= 1e-8)"};
}

// 4. Whole-net analytic gradients vs central differences on 20 random nets.
Outcome criterion4() {
    Rng rng(17);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        CowmConfig cfg;
        cfg.project = false;
        Rng init(200 + t);
        const std::size_t din = 2 + rng.index(3), mid = 3 + rng.index(4),
                          dout = 1 + rng.index(3);
        Mlp net = Mlp::make({din, mid, dout}, {Activation::Tanh, Activation::Identity}, cfg,
                            /*with_bias=*/true, init);
        const Matrix x = random_matrix(din, 4, rng);
        const Matrix y = random_matrix(dout, 4, rng);

        ForwardCache cache;
        const Matrix pred = net.forward(x, true, &cache);
        const auto grads = net.weight_gradients(cache, mse_loss(pred, y).grad);

        const double h = 1e-6;
        for (std::size_t l = 0; l < net.depth(); ++l) {
            Matrix w = net.layers()[l].weights();
            for (std::size_t idx = 0; idx < w.values().size(); ++idx) {
                const double keep = w.values()[idx];
                w.values()[idx] = keep + h;
                net.layers()[l].set_weights(w);
                const double lp = mse_loss(net.forward(x, false), y).loss;
                w.values()[idx] = keep - h;
                net.layers()[l].set_weights(w);
                const double lm = mse_loss(net.forward(x, false), y).loss;
                w.values()[idx] = keep;
                net.layers()[l].set_weights(w);
                const double fd = (lp - lm) / (2.0 * h);
                const double an = grads[l].values()[idx];
                worst = std::max(worst, std::abs(an - fd) /
                                            std::max({std::abs(an), std::abs(fd), 1e-6}));
            }
        }
    }
    return {worst <= 1e-5, "worst rel err = " + fmt(worst) + " (<= 1e-5)"};
}

// 5. Spherical k-means: monotone inertia on 50 seeded sets; c = distinct
//    point count reaches inertia <= 1e-12.
Outcome criterion5() {
    Rng rng(19);
    double worst_rise = 0.0;
    double worst_final = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t d = 2 + rng.index(10);
        const std::size_t n = 4 + rng.index(50);
        std::vector<Vector> pts;
        for (std::size_t i = 0; i < n; ++i) {
            Vector v(d);
            for (double& x : v) x = rng.normal();
            pts.push_back(normalized(v));
        }
        const std::size_t c = 1 + rng.index(std::min<std::size_t>(n, 6));
        const ClusterModel m = spherical_kmeans(pts, c, 10, rng.next_u64());
        for (std::size_t r = 1; r < m.inertia_history.size(); ++r) {
            worst_rise = std::max(worst_rise, m.inertia_history[r] - m.inertia_history[r - 1]);
        }
        const ClusterModel exact = spherical_kmeans(pts, n, 5, rng.next_u64());
        worst_final = std::max(worst_final, exact.inertia);
    }
    const bool pass = worst_rise <= 1e-12 && worst_final <= 1e-12;
    return {pass, "worst inertia rise = " + fmt(worst_rise) + ", worst exact-c inertia = " +
                      fmt(worst_final) + " (both <= 1e-12)"};
}

// 6. Continual ordering at 45 degrees, spread 0.1, 9 seeds: median
//    forgetting ratio of COWM below BP by the pinned factor.
Outcome criterion6() {
    std::vector<double> cowm_ratios, bp_ratios;
    for (std::uint64_t seed = 1; seed <= 9; ++seed) {
        for (NetKind kind : {NetKind::Cowm, NetKind::Bp}) {
            ContinualConfig cfg;
            cfg.kind = kind;
            cfg.train.seed = seed;
            cfg.cowm.seed = seed;
            const double ratio = run_sequential(cfg).forgetting_ratio;
            (kind == NetKind::Cowm ? cowm_ratios : bp_ratios).push_back(ratio);
        }
    }
    const double mc = median(cowm_ratios);
    const double mb = median(bp_ratios);
    const bool pass = mc < mb && mc <= kContinualRatioFactor * mb;
    return {pass, "median ratio cowm = " + fmt(mc) + ", bp = " + fmt(mb) + " (need cowm <= " +
                      fmt(kContinualRatioFactor) + " * bp)"};
}

// 7. RL retention ordering over 5 seeds with the pinned margin.
Outcome criterion7() {
    std::vector<double> cowm_ret, bp_ret;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RlConfig cfg;
        cfg.seed = seed;
        cfg.cowm.seed = seed;
        cowm_ret.push_back(run_two_phase_single(cfg, NetKind::Cowm).retention);
        bp_ret.push_back(run_two_phase_single(cfg, NetKind::Bp).retention);
    }
    const double mc = median(cowm_ret);
    const double mb = median(bp_ret);
    const bool pass = mc > mb + kRlRetentionMargin;
    return {pass, "median retention cowm = " + fmt(mc) + ", bp = " + fmt(mb) +
                      " (need cowm > bp + " + fmt(kRlRetentionMargin) + ")"};
}

// 8. Ablation directions: k=2 is no better than k=10, and c=2 sits inside
//    the best cell's seed band.
Outcome criterion8() {
    const std::vector<std::size_t> grid_c{2, 3, 5};
    const std::vector<std::size_t> grid_k{2, 10, 50};
    const std::size_t seeds = 5;

    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> cells;
    for (std::size_t c : grid_c) {
        for (std::size_t k : grid_k) {
            for (std::uint64_t s = 1; s <= seeds; ++s) {
                ContinualConfig cfg;
                cfg.kind = NetKind::Cowm;
                cfg.cowm.cluster_count = c;
                cfg.cowm.cluster_iters = k;
                cfg.train.seed = s;
                cfg.cowm.seed = s;
                cells[{c, k}].push_back(run_sequential(cfg).forgetting_ratio);
            }
        }
    }

    const double med_k2 = median(cells[{2, 2}]);
    const double med_k10 = median(cells[{2, 10}]);
    const bool k_direction = med_k2 >= med_k10 - kAblateSlack;

    double best_med = 1e300;
    std::pair<std::size_t, std::size_t> best_cell{0, 0};
    for (const auto& [cell, ratios] : cells) {
        const double m = median(ratios);
        if (m < best_med) {
            best_med = m;
            best_cell = cell;
        }
    }
    // Confidence band of the best cell: mean +- 2 sample-std over its seeds
    // (the usual 95% normal band). Oracle run: best cell (c=3,k=10) band hi
    // 18.35 vs c=2 median 16.10.
    const auto& best_ratios = cells[best_cell];
    double mean = 0.0;
    for (double r : best_ratios) mean += r;
    mean /= static_cast<double>(best_ratios.size());
    double var = 0.0;
    for (double r : best_ratios) var += (r - mean) * (r - mean);
    var /= static_cast<double>(best_ratios.size() - 1);
    const double band_hi = mean + 2.0 * std::sqrt(var);
    const bool c2_in_band = med_k10 <= band_hi + kAblateSlack;

    return {k_direction && c2_in_band,
            "median(k=2) = " + fmt(med_k2) + " vs median(k=10) = " + fmt(med_k10) +
                "; best cell c=" + std::to_string(best_cell.first) + ",k=" +
                std::to_string(best_cell.second) + " band hi = " + fmt(band_hi) +
                ", c=2 median = " + fmt(med_k10)};
}

// 9. Determinism: reruns with identical manifests are byte-identical.
Outcome criterion9() {
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const fs::path base = fs::temp_directory_path() / "cowm_acceptance_det";
    fs::remove_all(base);

    auto run_pair = [&](const std::string& tag, const RunConfig& proto) {
        RunConfig a = proto;
        a.output_dir = base / (tag + "_a");
        RunConfig b = proto;
        b.output_dir = base / (tag + "_b");
        if (execute(a) != 0 || execute(b) != 0) return std::string("run failed");
        if (slurp(a.output_dir / "metrics.csv") != slurp(b.output_dir / "metrics.csv")) {
            return std::string("metrics.csv differs for " + tag);
        }
        if (slurp(a.output_dir / "report.json") != slurp(b.output_dir / "report.json")) {
            return std::string("report.json differs for " + tag);
        }
        return std::string();
    };

    RunConfig cont;
    cont.command = "bench-continual";
    cont.seed = 5;
    cont.overrides["steps"] = "400";
    std::string err = run_pair("continual", cont);

    if (err.empty()) {
        RunConfig abl;
        abl.command = "ablate";
        abl.seed = 2;
        abl.workers = 2;
        abl.overrides["grid_c"] = "2,3";
        abl.overrides["grid_k"] = "2,10";
        abl.overrides["cell_seeds"] = "2";
        abl.overrides["steps"] = "150";
        err = run_pair("ablate", abl);
    }
    fs::remove_all(base);
    return {err.empty(), err.empty() ? "bench-continual and ablate reruns byte-identical"
                                     : err};
}

struct Criterion {
    int index;
    const char* name;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "exact_preservation_theorem", criterion1},
        {2, "bp_equivalence", criterion2},
        {3, "projector_algebra", criterion3},
        {4, "gradient_correctness", criterion4},
        {5, "spherical_kmeans", criterion5},
        {6, "continual_forgetting_ordering", criterion6},
        {7, "rl_retention_ordering", criterion7},
        {8, "ablation_direction", criterion8},
        {9, "determinism", criterion9},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    bool all_pass = true;
    for (const Criterion& c : criteria()) {
        if (only != 0 && c.index != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out{false, "exception"};
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion-%d %-32s [%6.2fs] %s\n", out.pass ? "PASS" : "FAIL",
                    c.index, c.name, secs, out.detail.c_str());
        all_pass = all_pass && out.pass;
    }
    return all_pass ? 0 : 1;
}
