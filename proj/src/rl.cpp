#include "cowm/rl.hpp"

#include <algorithm>
#include <cmath>

namespace cowm {

void PointMassEnv::set_phase(int phase) {
    if (phase != 1 && phase != 2) throw ConfigError("PointMassEnv: phase must be 1 or 2");
    if (in_episode_) throw UsageError("PointMassEnv: phase change mid-episode");
    phase_ = phase;
}

void PointMassEnv::reset(std::uint64_t episode_seed) {
    Rng rng = Rng(episode_seed).derive(0xE0);
    // Standing episodes start near rest, walking episodes already moving:
    // the two sub-policies then train on distinct state regions, as in the
    // stand/walk decomposition this environment imitates. Both ranges sit
    // inside the informative band of their reward kernel.
    position_ = rng.uniform(0.1, 1.0);
    velocity_ = phase_ == 1 ? rng.uniform(-0.4, 0.4) : rng.uniform(0.6, 1.4);
    steps_ = 0;
    in_episode_ = true;
}

void PointMassEnv::reset_to(double position, double velocity) {
    position_ = position;
    velocity_ = velocity;
    steps_ = 0;
    in_episode_ = true;
}

PointMassEnv::StepResult PointMassEnv::step(double action) {
    if (done()) throw UsageError("PointMassEnv: step after episode end");
    if (!std::isfinite(action)) throw RunError("PointMassEnv: non-finite action");
    const double force = std::clamp(action, -kMaxForce, kMaxForce);
    velocity_ += force * kDt;
    position_ += velocity_ * kDt;
    const double raw = phase_ == 1
                           ? std::exp(-position_ * position_ / 0.25)
                           : std::exp(-(velocity_ - 1.0) * (velocity_ - 1.0) / 0.25);
    // exp underflows to 0 for runaway states; keep the reward strictly positive.
    const double reward = std::max(raw, 1e-300);
    ++steps_;
    const bool finished = done();
    if (finished) in_episode_ = false;
    return {position_, velocity_, reward, finished};
}

double EpisodeTrace::discounted_return(double gamma) const {
    double g = 0.0;
    double scale = 1.0;
    for (double r : rewards) {
        g += scale * r;
        scale *= gamma;
    }
    return g;
}

ActorCritic make_agent(const RlConfig& cfg, NetKind kind) {
    CowmConfig actor_cfg = cfg.cowm;
    actor_cfg.project = kind == NetKind::Cowm;
    CowmConfig critic_cfg = cfg.cowm;
    critic_cfg.project = cfg.cowm_critic && kind == NetKind::Cowm;

    Rng init(cfg.seed);
    Rng actor_rng = init.derive(1);
    Rng critic_rng = init.derive(2);
    const std::vector<std::size_t> actor_dims{2, cfg.hidden, cfg.hidden, 1};
    const std::vector<std::size_t> critic_dims{2, cfg.hidden, cfg.hidden, 1};
    // tanh mean head keeps the policy mean inside the force bound; an
    // unbounded head saturates the clip and loses its corrective gradient.
    const std::vector<Activation> actor_acts{Activation::Tanh, Activation::Tanh,
                                             Activation::Tanh};
    const std::vector<Activation> critic_acts{Activation::Tanh, Activation::Tanh,
                                              Activation::Identity};

    ActorCritic agent{
        Mlp::make(actor_dims, actor_acts, actor_cfg, /*with_bias=*/true, actor_rng),
        Mlp::make(critic_dims, critic_acts, critic_cfg, /*with_bias=*/true, critic_rng),
        Vector{cfg.init_log_std},
        cfg.discount,
        cfg.lr_actor,
        cfg.lr_critic,
    };
    return agent;
}

EpisodeTrace collect_episode(PointMassEnv& env, ActorCritic& agent,
                             std::uint64_t episode_seed, bool deterministic) {
    Rng noise = Rng(episode_seed).derive(0xA0);
    env.reset(episode_seed);

    EpisodeTrace trace;
    trace.states.reserve(PointMassEnv::kEpisodeLen);
    trace.actions.reserve(PointMassEnv::kEpisodeLen);
    trace.rewards.reserve(PointMassEnv::kEpisodeLen);

    while (!env.done()) {
        const Vector state{env.position(), env.velocity()};
        Matrix obs(2, 1, {state[0], state[1]});
        const Matrix mean = agent.actor.forward(obs, /*training=*/false);
        double action = mean(0, 0);
        if (!deterministic) action += std::exp(agent.log_std[0]) * noise.normal();
        if (!std::isfinite(action)) throw RunError("collect_episode: non-finite action");

        const auto res = env.step(action);
        trace.states.push_back(state);
        trace.actions.push_back(action);
        trace.rewards.push_back(res.reward);
    }
    trace.final_state = {env.position(), env.velocity()};
    return trace;
}

UpdateResult a2c_update(ActorCritic& agent, const EpisodeTrace& trace) {
    const std::size_t n = trace.length();
    if (n == 0) throw PreconditionError("a2c_update: empty trace");

    Matrix states(2, n);
    for (std::size_t t = 0; t < n; ++t) {
        states.at(0, t) = trace.states[t][0];
        states.at(1, t) = trace.states[t][1];
    }
    Matrix actions(1, n);
    for (std::size_t t = 0; t < n; ++t) actions.at(0, t) = trace.actions[t];

    // One-step TD targets from the current critic. The episode ends by time
    // limit, not an absorbing state, so the last step bootstraps the critic
    // at the truncation state.
    if (trace.final_state.size() != 2) {
        throw PreconditionError("a2c_update: trace missing final state");
    }
    ForwardCache critic_cache;
    const Matrix values = agent.critic.forward(states, /*training=*/true, &critic_cache);
    const Matrix final_obs(2, 1, {trace.final_state[0], trace.final_state[1]});
    const double final_v = agent.critic.forward(final_obs, /*training=*/false)(0, 0);
    Matrix targets(1, n);
    Matrix advantages(1, n);
    for (std::size_t t = 0; t < n; ++t) {
        const double next_v = t + 1 < n ? values(0, t + 1) : final_v;
        targets.at(0, t) = trace.rewards[t] + agent.discount * next_v;
        advantages.at(0, t) = targets(0, t) - values(0, t);
    }

    // Actor: advantage-weighted log-likelihood ascent through the COWM path.
    ForwardCache actor_cache;
    const Matrix mean = agent.actor.forward(states, /*training=*/true, &actor_cache);
    const GaussianLogProb lp = gaussian_logprob_grad(mean, agent.log_std, actions);

    const double inv_n = 1.0 / static_cast<double>(n);
    double actor_loss = 0.0;
    Matrix actor_grad(1, n);
    double log_std_grad = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        actor_loss -= advantages(0, t) * lp.logprob[t] * inv_n;
        actor_grad.at(0, t) = -advantages(0, t) * lp.dmean(0, t) * inv_n;
        log_std_grad -= advantages(0, t) * lp.dlog_std(0, t) * inv_n;
    }
    const LossResult critic_mse = mse_loss(values, targets);
    if (!std::isfinite(actor_loss) || !std::isfinite(critic_mse.loss)) {
        throw RunError("a2c_update: non-finite loss");
    }

    agent.actor.backward_and_step(actor_cache, actor_grad, agent.lr_actor);
    agent.log_std[0] = std::clamp(agent.log_std[0] - agent.lr_actor * log_std_grad, -10.0, 2.0);
    agent.critic.backward_and_step(critic_cache, critic_mse.grad, agent.lr_critic);

    return {actor_loss, critic_mse.loss};
}

double evaluate_return(PointMassEnv& env, ActorCritic& agent, int phase,
                       std::size_t eval_episodes, std::uint64_t seed_base) {
    env.set_phase(phase);
    double total = 0.0;
    for (std::size_t e = 0; e < eval_episodes; ++e) {
        const EpisodeTrace trace =
            collect_episode(env, agent, seed_base + e, /*deterministic=*/true);
        total += trace.discounted_return(agent.discount);
    }
    return total / static_cast<double>(eval_episodes);
}

RetentionReport run_two_phase_single(const RlConfig& cfg, NetKind kind, CsvWriter* metrics,
                                     const char* agent_label) {
    ActorCritic agent = make_agent(cfg, kind);
    PointMassEnv env;
    const std::string label = agent_label ? agent_label
                              : kind == NetKind::Cowm ? "cowm"
                                                      : "bp";
    constexpr std::uint64_t kEvalSeedBase = 0x5EED0000ULL;

    auto train = [&](int phase, std::size_t episodes, std::size_t episode_offset) {
        env.set_phase(phase);
        for (std::size_t e = 0; e < episodes; ++e) {
            const std::uint64_t ep_seed =
                cfg.seed * 1000003ULL + (episode_offset + e) * 7919ULL + 1;
            const EpisodeTrace trace = collect_episode(env, agent, ep_seed);
            const UpdateResult up = a2c_update(agent, trace);
            if (metrics) {
                metrics->row({label, CsvWriter::cell(episode_offset + e + 1),
                              CsvWriter::cell(static_cast<std::size_t>(phase)),
                              CsvWriter::cell(trace.discounted_return(agent.discount)),
                              CsvWriter::cell(up.actor_loss), CsvWriter::cell(up.critic_loss)});
            }
        }
    };

    RetentionReport report;
    train(1, cfg.episodes_phase1, 0);
    report.phase1_return_after_phase1 =
        evaluate_return(env, agent, 1, cfg.eval_episodes, kEvalSeedBase);
    train(2, cfg.episodes_phase2, cfg.episodes_phase1);
    report.phase1_return_after_phase2 =
        evaluate_return(env, agent, 1, cfg.eval_episodes, kEvalSeedBase);
    report.phase2_return_final =
        evaluate_return(env, agent, 2, cfg.eval_episodes, kEvalSeedBase);
    report.retention = report.phase1_return_after_phase2 /
                       std::max(report.phase1_return_after_phase1, 1e-12);
    return report;
}

TwoPhaseReport run_two_phase(const RlConfig& cfg, CsvWriter* metrics) {
    TwoPhaseReport report;
    report.cowm = run_two_phase_single(cfg, NetKind::Cowm, metrics);
    report.bp = run_two_phase_single(cfg, NetKind::Bp, metrics);
    return report;
}

}  // namespace cowm
