#include <doctest.h>

#include <cmath>

#include "cowm/rl.hpp"
#include "cowm/serialize.hpp"

using namespace cowm;

namespace {

RlConfig tiny_config(std::uint64_t seed = 0) {
    RlConfig cfg;
    cfg.hidden = 8;
    cfg.episodes_phase1 = 4;
    cfg.episodes_phase2 = 4;
    cfg.eval_episodes = 2;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_SUITE("rl") {

TEST_CASE("reward peaks at the phase targets") {
    PointMassEnv env;
    env.set_phase(1);
    env.reset_to(0.0, 0.0);
    // Zero action: position stays 0, reward stays at the kernel peak.
    const auto r1 = env.step(0.0);
    CHECK(r1.reward == doctest::Approx(1.0).epsilon(1e-12));

    PointMassEnv env2;
    env2.set_phase(2);
    env2.reset_to(0.0, 1.0);
    const auto r2 = env2.step(0.0);
    CHECK(r2.reward == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("phase-1 reward kernel value at position 0.5") {
    PointMassEnv env;
    env.set_phase(1);
    // Land exactly on position 0.5 after one step: v' = v + a*dt with a=0,
    // x' = x + v'*dt. Start at 0.5 with v=0 so x'=0.5.
    env.reset_to(0.5, 0.0);
    const auto r = env.step(0.0);
    CHECK(r.position == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.reward == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("dynamics clip the applied force") {
    PointMassEnv env;
    env.set_phase(1);
    env.reset_to(0.0, 0.0);
    const auto r = env.step(100.0);  // clipped to +1
    CHECK(r.velocity == doctest::Approx(PointMassEnv::kDt).epsilon(1e-12));
}

TEST_CASE("stepping a finished episode is a usage error") {
    PointMassEnv env;
    env.set_phase(1);
    env.reset_to(0.0, 0.0);
    for (std::size_t i = 0; i < PointMassEnv::kEpisodeLen; ++i) env.step(0.0);
    CHECK(env.done());
    CHECK_THROWS_AS(env.step(0.0), UsageError);
    CHECK_THROWS_AS(env.set_phase(3), ConfigError);
}

TEST_CASE("near-deterministic zero actor holds the origin in phase 1") {
    RlConfig cfg = tiny_config();
    cfg.init_log_std = -10.0;  // effectively deterministic
    ActorCritic agent = make_agent(cfg, NetKind::Bp);
    for (CowmLayer& layer : agent.actor.layers()) {
        layer.set_weights(Matrix(layer.d_in(), layer.d_out()));  // zero weights
    }

    PointMassEnv env;
    env.set_phase(1);
    EpisodeTrace trace = collect_episode(env, agent, 1);
    // Oracle: reward 1 per step from (0,0) => return = sum gamma^t.
    // reset() draws a nonzero start, so drive from reset_to instead.
    env.reset_to(0.0, 0.0);
    double ret = 0.0, scale = 1.0;
    while (!env.done()) {
        const auto r = env.step(0.0);
        ret += scale * r.reward;
        scale *= cfg.discount;
    }
    const double geometric = (1.0 - std::pow(cfg.discount, 200.0)) / (1.0 - cfg.discount);
    CHECK(ret == doctest::Approx(geometric).epsilon(1e-9));

    CHECK(trace.length() <= PointMassEnv::kEpisodeLen);
    CHECK(trace.length() == PointMassEnv::kEpisodeLen);
}

TEST_CASE("same seed reproduces the identical trace") {
    RlConfig cfg = tiny_config(3);
    ActorCritic agent = make_agent(cfg, NetKind::Cowm);
    PointMassEnv env;
    env.set_phase(1);
    const EpisodeTrace a = collect_episode(env, agent, 42);
    const EpisodeTrace b = collect_episode(env, agent, 42);
    CHECK(a.actions == b.actions);
    CHECK(a.rewards == b.rewards);
}

TEST_CASE("rewards and returns stay inside the kernel bounds") {
    RlConfig cfg = tiny_config(7);
    ActorCritic agent = make_agent(cfg, NetKind::Cowm);
    PointMassEnv env;
    for (int phase : {1, 2}) {
        env.set_phase(phase);
        const EpisodeTrace tr = collect_episode(env, agent, 11 + phase);
        for (double r : tr.rewards) {
            CHECK(r > 0.0);
            CHECK(r <= 1.0);
        }
        const double bound =
            (1.0 - std::pow(cfg.discount, 200.0)) / (1.0 - cfg.discount);
        const double ret = tr.discounted_return(cfg.discount);
        CHECK(ret > 0.0);
        CHECK(ret <= bound);
    }
}

TEST_CASE("zero-advantage trace leaves actor weights unchanged") {
    RlConfig cfg = tiny_config(5);
    ActorCritic agent = make_agent(cfg, NetKind::Bp);
    // Constant rewards + a critic that is exact for them: V = r/(1-gamma)
    // gives target r + gamma*V = V, so advantages vanish.
    EpisodeTrace trace;
    const double r = 0.5;
    for (int t = 0; t < 6; ++t) {
        trace.states.push_back({0.1 * t, -0.05 * t});
        trace.actions.push_back(0.2);
        trace.rewards.push_back(r);
    }
    trace.final_state = {0.6, -0.3};
    // Make the critic constant-exact: zero weights, bias = V on the head.
    const double v = r / (1.0 - agent.discount);
    for (CowmLayer& layer : agent.critic.layers()) {
        layer.set_weights(Matrix(layer.d_in(), layer.d_out()));
        layer.set_bias(Vector(layer.d_out(), 0.0));
    }
    agent.critic.layers().back().set_bias(Vector{v});

    const nlohmann::json before = to_json(agent.actor);
    a2c_update(agent, trace);
    const Mlp after = mlp_from_json(before);
    for (std::size_t l = 0; l < agent.actor.depth(); ++l) {
        CHECK(max_abs_diff(agent.actor.layers()[l].weights(), after.layers()[l].weights()) <=
              1e-12);
    }
}

TEST_CASE("single-transition trace matches the hand-derived TD update") {
    RlConfig cfg = tiny_config(9);
    cfg.hidden = 4;
    ActorCritic agent = make_agent(cfg, NetKind::Bp);

    EpisodeTrace trace;
    trace.states.push_back({0.4, -0.2});
    trace.actions.push_back(0.7);
    trace.rewards.push_back(0.9);
    trace.final_state = {0.35, -0.25};

    // Hand derivation for one truncated transition:
    //   target = r + gamma*V(s'); adv = target - V(s);
    //   critic loss = 0.5*(V - target)^2; actor loss = -adv * logprob.
    const Matrix s(2, 1, {0.4, -0.2});
    const Matrix sp(2, 1, {0.35, -0.25});
    const double v = agent.critic.forward(s, false)(0, 0);
    const double target = 0.9 + agent.discount * agent.critic.forward(sp, false)(0, 0);
    const double adv = target - v;
    const Matrix mean = agent.actor.forward(s, false);
    const auto lp = gaussian_logprob_grad(mean, agent.log_std, Matrix(1, 1, {0.7}));
    const double expected_actor_loss = -adv * lp.logprob[0];
    const double expected_critic_loss = 0.5 * (v - target) * (v - target);

    const UpdateResult up = a2c_update(agent, trace);
    CHECK(up.actor_loss == doctest::Approx(expected_actor_loss).epsilon(1e-12));
    CHECK(up.critic_loss == doctest::Approx(expected_critic_loss).epsilon(1e-12));
}

TEST_CASE("evaluation never mutates actor buffers") {
    RlConfig cfg = tiny_config(13);
    ActorCritic agent = make_agent(cfg, NetKind::Cowm);
    PointMassEnv env;
    env.set_phase(1);
    for (int e = 0; e < 3; ++e) a2c_update(agent, collect_episode(env, agent, 100 + e));

    const std::string before = to_json(agent.actor).dump();
    evaluate_return(env, agent, 1, 3, 500);
    evaluate_return(env, agent, 2, 3, 600);
    CHECK(to_json(agent.actor).dump() == before);
}

TEST_CASE("zero-episode config returns retention 1") {
    RlConfig cfg = tiny_config(17);
    cfg.episodes_phase1 = 0;
    cfg.episodes_phase2 = 0;
    const RetentionReport r = run_two_phase_single(cfg, NetKind::Cowm);
    CHECK(r.phase1_return_after_phase1 == r.phase1_return_after_phase2);
    CHECK(r.retention == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("actor contains COWM layers, critic stays plain") {
    RlConfig cfg = tiny_config(19);
    ActorCritic agent = make_agent(cfg, NetKind::Cowm);
    bool any_projected = false;
    for (const CowmLayer& l : agent.actor.layers()) any_projected |= l.config().project;
    CHECK(any_projected);
    for (const CowmLayer& l : agent.critic.layers()) CHECK_FALSE(l.config().project);
}

}  // TEST_SUITE
