// Executable invariant suite behind `cowm verify`.

#include <cmath>
#include <sstream>

#include "cowm/kernels.hpp"
#include "cowm/runner.hpp"
#include "cowm/serialize.hpp"

namespace cowm {

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (double& v : m.values()) v = scale * rng.normal();
    return m;
}

Vector random_unit(std::size_t d, Rng& rng) {
    Vector v(d);
    for (double& x : v) x = rng.normal();
    return normalized(v);
}

std::string fmt(double v) { return format_double(v); }

CheckResult check_matmul_associativity() {
    Rng rng(11);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t m = 1 + rng.index(8), k = 1 + rng.index(8), n = 1 + rng.index(8),
                          p = 1 + rng.index(8);
        const Matrix a = random_matrix(m, k, rng), b = random_matrix(k, n, rng),
                     c = random_matrix(n, p, rng);
        const Matrix left = matmul(matmul(a, b), c);
        const Matrix right = matmul(a, matmul(b, c));
        const double scale = std::max({1.0, max_abs(left), max_abs(right)});
        worst = std::max(worst, max_abs_diff(left, right) / scale);
    }
    return {"numerics.matmul_associativity", worst <= 1e-9, "rel err " + fmt(worst)};
}

CheckResult check_projector_idempotent(double ridge) {
    Rng rng(12);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t d = 2 + rng.index(15), s = 1 + rng.index(std::min<std::size_t>(4, d));
        const Matrix a = random_matrix(d, s, rng);
        Matrix q = matmul(matmul(a, gram_inverse(a, ridge)), transpose(a));
        worst = std::max(worst, max_abs_diff(matmul(q, q), q));
        worst = std::max(worst, max_abs_diff(matmul(q, a), a));
    }
    return {"numerics.projector_idempotent", worst <= 1e-8, "max dev " + fmt(worst)};
}

CheckResult check_mean_direction_unit() {
    Rng rng(13);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Matrix x = random_matrix(1 + rng.index(12), 1 + rng.index(12), rng);
        if (auto dir = column_mean_direction(x)) {
            worst = std::max(worst, std::abs(norm(*dir) - 1.0));
        }
    }
    return {"numerics.mean_direction_unit", worst <= 1e-12, "max |norm-1| " + fmt(worst)};
}

CheckResult check_kernels_match() {
    Rng rng(14);
    bool ok = true;
    for (int t = 0; t < 10 && ok; ++t) {
        const std::size_t m = 1 + rng.index(60), k = 1 + rng.index(60), n = 1 + rng.index(60);
        const Matrix a = random_matrix(m, k, rng), b = random_matrix(k, n, rng);
        std::vector<double> serial(m * n), parallel(m * n);
        kernels::matmul_serial(a.values().data(), b.values().data(), serial.data(), m, k, n);
        kernels::matmul_parallel(a.values().data(), b.values().data(), parallel.data(), m, k, n);
        ok = serial == parallel;
    }
    for (int t = 0; t < 10 && ok; ++t) {
        const std::size_t n = 1 + rng.index(300), c = 1 + rng.index(8), d = 2 + rng.index(16);
        std::vector<Vector> pts, ctrs;
        for (std::size_t i = 0; i < n; ++i) pts.push_back(random_unit(d, rng));
        for (std::size_t i = 0; i < c; ++i) ctrs.push_back(random_unit(d, rng));
        std::vector<double> fp(n * d), fc(c * d);
        for (std::size_t i = 0; i < n; ++i)
            std::copy(pts[i].begin(), pts[i].end(), fp.begin() + i * d);
        for (std::size_t i = 0; i < c; ++i)
            std::copy(ctrs[i].begin(), ctrs[i].end(), fc.begin() + i * d);
        std::vector<std::size_t> is(n), ip(n);
        std::vector<double> ss(n), sp(n);
        kernels::assign_serial(fp.data(), n, fc.data(), c, d, is.data(), ss.data());
        kernels::assign_parallel(fp.data(), n, fc.data(), c, d, ip.data(), sp.data());
        ok = is == ip && ss == sp;
    }
    return {"kernels.parallel_matches_serial", ok, ok ? "bit-identical" : "MISMATCH"};
}

CheckResult check_inertia_monotone(std::size_t c, std::size_t k) {
    Rng rng(15);
    bool ok = true;
    double worst_rise = 0.0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t d = 2 + rng.index(8);
        const std::size_t n = std::max<std::size_t>(c, 4 + rng.index(40));
        std::vector<Vector> pts;
        for (std::size_t i = 0; i < n; ++i) pts.push_back(random_unit(d, rng));
        const ClusterModel model = spherical_kmeans(pts, c, k, rng.next_u64());
        for (std::size_t r = 1; r < model.inertia_history.size(); ++r) {
            const double rise = model.inertia_history[r] - model.inertia_history[r - 1];
            worst_rise = std::max(worst_rise, rise);
            if (rise > 1e-12) ok = false;
        }
    }
    return {"clustering.inertia_monotone", ok, "worst rise " + fmt(worst_rise)};
}

CheckResult check_distinct_zero_inertia() {
    Rng rng(16);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        const std::size_t d = 3 + rng.index(6), n = 2 + rng.index(10);
        std::vector<Vector> pts;
        for (std::size_t i = 0; i < n; ++i) pts.push_back(random_unit(d, rng));
        const ClusterModel model = spherical_kmeans(pts, n, 3, rng.next_u64());
        worst = std::max(worst, model.inertia);
    }
    return {"clustering.distinct_zero_inertia", worst <= 1e-12, "max inertia " + fmt(worst)};
}

CheckResult check_exact_preservation(double ridge, std::size_t F) {
    Rng rng(17);
    const std::size_t d = 8, d_out = 3;
    CowmConfig cfg;
    cfg.ridge = ridge;
    cfg.buffer_capacity = std::max<std::size_t>(F, 2);
    CowmLayer layer(d, d_out, cfg, /*with_bias=*/false, rng);

    const Vector kept_dir = random_unit(d, rng);
    Vector other = random_unit(d, rng);
    while (std::abs(dot(kept_dir, other)) > 0.9) other = random_unit(d, rng);
    for (int i = 0; i < 3; ++i) layer.buffer().push(kept_dir);
    for (int i = 0; i < 3; ++i) layer.buffer().push(other);
    layer.refresh_projection(other);  // preserved = cluster center at kept_dir

    if (!layer.preserved()) {
        return {"layer.exact_preservation", false, "projection did not engage"};
    }
    const Vector v = layer.preserved()->column(0);
    Matrix vm = Matrix::from_columns({v});
    const Matrix before = matmul(transpose(layer.weights()), vm);
    for (int step = 0; step < 200; ++step) {
        const Matrix x = random_matrix(d, 4, rng);
        const Matrix g = random_matrix(d_out, 4, rng);
        layer.apply_update(layer.weight_delta(g, x, 0.05));
    }
    const Matrix after = matmul(transpose(layer.weights()), vm);
    const double drift = max_abs_diff(before, after);
    return {"layer.exact_preservation", drift <= 1e-10, "max |dW^T v| " + fmt(drift)};
}

CheckResult check_bp_equivalence(std::size_t F) {
    Rng rng_a(18), rng_b(18);
    CowmConfig cowm_cfg;
    cowm_cfg.buffer_capacity = F;
    cowm_cfg.cluster_count = F + 1;  // buffer can never fill to c: standard BP mode
    CowmConfig plain_cfg;
    plain_cfg.project = false;
    CowmLayer a(6, 2, cowm_cfg, false, rng_a);
    CowmLayer b(6, 2, plain_cfg, false, rng_b);

    Rng data(19);
    double worst = 0.0;
    for (int step = 0; step < 200; ++step) {
        const Matrix x = random_matrix(6, 5, data);
        const Matrix g = random_matrix(2, 5, data);
        a.forward(x, true);
        b.forward(x, true);
        a.apply_update(a.weight_delta(g, x, 0.01));
        b.apply_update(b.weight_delta(g, x, 0.01));
        worst = std::max(worst, max_abs_diff(a.weights(), b.weights()));
    }
    return {"layer.bp_equivalence", worst <= 1e-12, "max traj diff " + fmt(worst)};
}

CheckResult check_forward_purity() {
    Rng rng(20);
    CowmConfig cfg;
    CowmLayer layer(5, 3, cfg, true, rng);
    for (int i = 0; i < 4; ++i) layer.buffer().push(random_unit(5, rng));
    layer.refresh_projection(random_unit(5, rng));
    const nlohmann::json before = to_json(layer);
    for (int i = 0; i < 5; ++i) layer.forward(random_matrix(5, 7, rng), /*training=*/false);
    const bool ok = to_json(layer) == before;
    return {"layer.forward_purity", ok, ok ? "state unchanged" : "STATE MUTATED"};
}

CheckResult check_finite_difference() {
    Rng rng(21);
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
        CowmConfig cfg;
        cfg.project = false;
        Rng init = rng.derive(t);
        Mlp net = Mlp::make({3, 4, 2}, {Activation::Tanh, Activation::Identity}, cfg,
                            /*with_bias=*/true, init);
        const Matrix x = random_matrix(3, 4, rng);
        const Matrix target = random_matrix(2, 4, rng);

        ForwardCache cache;
        const Matrix pred = net.forward(x, true, &cache);
        const auto grads = net.weight_gradients(cache, mse_loss(pred, target).grad);

        const double h = 1e-6;
        for (std::size_t l = 0; l < net.depth(); ++l) {
            Matrix w = net.layers()[l].weights();
            for (std::size_t idx = 0; idx < w.values().size(); ++idx) {
                const double keep = w.values()[idx];
                w.values()[idx] = keep + h;
                net.layers()[l].set_weights(w);
                const double lp = mse_loss(net.forward(x, false), target).loss;
                w.values()[idx] = keep - h;
                net.layers()[l].set_weights(w);
                const double lm = mse_loss(net.forward(x, false), target).loss;
                w.values()[idx] = keep;
                net.layers()[l].set_weights(w);
                const double fd = (lp - lm) / (2.0 * h);
                const double an = grads[l].values()[idx];
                worst = std::max(worst,
                                 std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6}));
            }
        }
    }
    return {"network.finite_difference", worst <= 1e-5, "worst rel err " + fmt(worst)};
}

CheckResult check_theorem_90deg(double ridge) {
    ContinualConfig cfg;
    cfg.kind = NetKind::Cowm;
    cfg.angle_degrees = 90.0;
    cfg.spread = 0.0;
    cfg.steps_per_phase = 300;
    cfg.cowm.ridge = ridge;
    cfg.train.seed = 7;

    Mlp net = [&] {
        CowmConfig layer_cfg = cfg.cowm;
        Rng init(cfg.train.seed);
        return Mlp::make({cfg.d_in, cfg.d_out}, {Activation::Identity}, layer_cfg, false, init);
    }();
    const auto [task1, task2] =
        make_task_pair(cfg.d_in, cfg.d_out, cfg.angle_degrees, cfg.spread, cfg.train.seed);

    auto train = [&](const TaskSpec& task, std::size_t phase) {
        for (std::size_t step = 0; step < cfg.steps_per_phase; ++step) {
            auto [x, y] = sample_batch(task, cfg.train.batch_size,
                                       phase * cfg.steps_per_phase + step + 1);
            ForwardCache cache;
            const Matrix pred = net.forward(x, true, &cache);
            net.backward_and_step(cache, mse_loss(pred, y).grad, cfg.train.lr);
        }
    };
    const auto [ex1, ey1] = sample_batch(task1, 64, 0xE7A1);

    train(task1, 0);
    const Matrix pred_before = net.forward(ex1, false);
    train(task2, 1);
    const Matrix pred_after = net.forward(ex1, false);
    const double drift = max_abs_diff(pred_before, pred_after);
    return {"continual.theorem_90deg", drift <= 1e-9, "max pred drift " + fmt(drift)};
}

CheckResult check_serialize_roundtrip() {
    Rng rng(22);
    CowmConfig cfg;
    cfg.ridge = 1e-8;
    CowmLayer layer(6, 4, cfg, true, rng);
    for (int i = 0; i < 5; ++i) layer.buffer().push(random_unit(6, rng));
    layer.refresh_projection(random_unit(6, rng));
    layer.apply_update(random_matrix(6, 4, rng, 0.1));

    const CowmLayer back = layer_from_json(to_json(layer));
    const bool ok = state_equal(layer, back) &&
                    max_abs_diff(layer.weights(), back.weights()) == 0.0;
    return {"serialize.roundtrip_bitexact", ok, ok ? "bit-faithful" : "MISMATCH"};
}

}  // namespace

std::vector<CheckResult> run_verify_checks(double exactness_ridge, std::size_t c,
                                           std::size_t k, std::size_t F) {
    return {
        check_matmul_associativity(),
        check_projector_idempotent(exactness_ridge),
        check_mean_direction_unit(),
        check_kernels_match(),
        check_inertia_monotone(c, k),
        check_distinct_zero_inertia(),
        check_exact_preservation(exactness_ridge, F),
        check_bp_equivalence(F),
        check_forward_purity(),
        check_finite_difference(),
        check_theorem_90deg(exactness_ridge),
        check_serialize_roundtrip(),
    };
}

}  // namespace cowm
