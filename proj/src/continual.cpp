#include "cowm/continual.hpp"

#include <cmath>
#include <numbers>

namespace cowm {

namespace {

Vector random_unit(std::size_t d, Rng& rng) {
    Vector v(d);
    for (double& x : v) x = rng.normal();
    return normalized(v);
}

Matrix random_map(std::size_t d_in, std::size_t d_out, Rng& rng) {
    Matrix m(d_in, d_out);
    for (double& v : m.values()) v = rng.normal();
    return m;
}

}  // namespace

std::pair<TaskSpec, TaskSpec> make_task_pair(std::size_t d_in, std::size_t d_out,
                                             double angle_degrees, double spread,
                                             std::uint64_t seed) {
    if (d_in < 2) throw ConfigError("make_task_pair: d_in must be >= 2");
    if (angle_degrees < 0.0 || angle_degrees > 90.0) {
        throw ConfigError("make_task_pair: angle must be in [0, 90] degrees");
    }
    if (spread < 0.0) throw ConfigError("make_task_pair: spread must be non-negative");

    Rng rng = Rng(seed).derive(0x7a5c);
    const Vector u = random_unit(d_in, rng);

    // Orthonormal partner within a random plane containing u.
    Vector w = random_unit(d_in, rng);
    Vector perp = axpy(-dot(w, u), u, w);
    while (norm(perp) < 1e-6) {
        w = random_unit(d_in, rng);
        perp = axpy(-dot(w, u), u, w);
    }
    perp = normalized(perp);

    const double theta = angle_degrees * std::numbers::pi / 180.0;
    Vector v(d_in);
    for (std::size_t i = 0; i < d_in; ++i) {
        v[i] = std::cos(theta) * u[i] + std::sin(theta) * perp[i];
    }

    TaskSpec t1{u, spread, random_map(d_in, d_out, rng), seed * 2 + 1};
    TaskSpec t2{normalized(v), spread, random_map(d_in, d_out, rng), seed * 2 + 2};
    return {std::move(t1), std::move(t2)};
}

std::pair<Matrix, Matrix> sample_batch(const TaskSpec& task, std::size_t b,
                                       std::uint64_t step_seed) {
    if (b < 1) throw ConfigError("sample_batch: batch size must be >= 1");
    const std::size_t d = task.mean_direction.size();
    Rng rng = Rng(task.sample_seed).derive(step_seed);

    Matrix x(d, b);
    for (std::size_t j = 0; j < b; ++j) {
        for (std::size_t i = 0; i < d; ++i) {
            x.at(i, j) = task.mean_direction[i] + task.spread * rng.normal();
        }
    }
    Matrix y = matmul(transpose(task.target_map), x);
    return {std::move(x), std::move(y)};
}

namespace {

Mlp make_net(const ContinualConfig& cfg) {
    CowmConfig layer_cfg = cfg.cowm;
    layer_cfg.project = cfg.kind == NetKind::Cowm;
    Rng init(cfg.train.seed);
    return Mlp::make({cfg.d_in, cfg.d_out}, {Activation::Identity}, layer_cfg,
                     /*with_bias=*/false, init);
}

double eval_loss(Mlp& net, const TaskSpec& task, std::size_t batch) {
    // Fixed eval stream, inference-mode forward.
    auto [x, y] = sample_batch(task, batch, 0xE7A1);
    const Matrix pred = net.forward(x, /*training=*/false);
    return mse_loss(pred, y).loss;
}

}  // namespace

ForgettingReport run_sequential(const ContinualConfig& cfg, CsvWriter* metrics) {
    const auto [task1, task2] = make_task_pair(cfg.d_in, cfg.d_out, cfg.angle_degrees,
                                               cfg.spread, cfg.train.seed);
    return run_sequential_tasks(cfg, task1, task2, metrics);
}

ForgettingReport run_sequential_tasks(const ContinualConfig& cfg, const TaskSpec& first,
                                      const TaskSpec& second, CsvWriter* metrics) {
    Mlp net = make_net(cfg);
    const TaskSpec& task1 = first;
    const TaskSpec& task2 = second;

    auto train_phase = [&](const TaskSpec& task, std::size_t phase) {
        for (std::size_t step = 0; step < cfg.steps_per_phase; ++step) {
            const std::uint64_t step_seed = phase * cfg.steps_per_phase + step + 1;
            auto [x, y] = sample_batch(task, cfg.train.batch_size, step_seed);
            ForwardCache cache;
            const Matrix pred = net.forward(x, /*training=*/true, &cache);
            const LossResult lr = mse_loss(pred, y);
            if (!std::isfinite(lr.loss)) {
                throw RunError("run_sequential: diverged at phase " + std::to_string(phase) +
                               " step " + std::to_string(step));
            }
            net.backward_and_step(cache, lr.grad, cfg.train.lr);
            if (metrics && cfg.eval_every > 0 && (step + 1) % cfg.eval_every == 0) {
                metrics->row({CsvWriter::cell(phase * cfg.steps_per_phase + step + 1),
                              CsvWriter::cell(phase + 1),
                              CsvWriter::cell(eval_loss(net, task1, cfg.eval_batch)),
                              CsvWriter::cell(eval_loss(net, task2, cfg.eval_batch))});
            }
        }
    };

    ForgettingReport report;
    train_phase(task1, 0);
    report.task1_loss_after_task1 = eval_loss(net, task1, cfg.eval_batch);
    train_phase(task2, 1);
    report.task1_loss_after_task2 = eval_loss(net, task1, cfg.eval_batch);
    report.task2_loss_final = eval_loss(net, task2, cfg.eval_batch);
    report.forgetting_ratio =
        report.task1_loss_after_task2 / std::max(report.task1_loss_after_task1, 1e-12);
    return report;
}

}  // namespace cowm
