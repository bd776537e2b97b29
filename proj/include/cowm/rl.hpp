#pragma once

#include <cstdint>
#include <vector>

#include "cowm/network.hpp"
#include "cowm/record.hpp"

namespace cowm {

// 1-D point mass with phase-dependent reward: phase 1 rewards standing at
// the origin, phase 2 rewards moving at unit velocity. The observation is
// (position, velocity); the phase is deliberately not observable.
class PointMassEnv {
public:
    static constexpr double kDt = 0.05;
    static constexpr double kMaxForce = 1.0;
    static constexpr std::size_t kEpisodeLen = 200;

    struct StepResult {
        double position;
        double velocity;
        double reward;
        bool done;
    };

    void set_phase(int phase);  // 1 or 2; only between episodes
    int phase() const { return phase_; }

    // Draws the initial state from U(0.2,1.0) x U(-0.1,0.1).
    void reset(std::uint64_t episode_seed);
    void reset_to(double position, double velocity);

    StepResult step(double action);  // UsageError when already done

    double position() const { return position_; }
    double velocity() const { return velocity_; }
    bool done() const { return steps_ >= kEpisodeLen; }

private:
    double position_ = 0.0;
    double velocity_ = 0.0;
    std::size_t steps_ = kEpisodeLen;  // "done" until reset
    int phase_ = 1;
    bool in_episode_ = false;
};

struct EpisodeTrace {
    std::vector<Vector> states;   // (position, velocity) per step
    std::vector<double> actions;  // sampled pre-clip actions
    std::vector<double> rewards;
    Vector final_state;  // state after the last step (time-limit truncation)

    std::size_t length() const { return rewards.size(); }
    double discounted_return(double gamma) const;
};

struct ActorCritic {
    Mlp actor;    // COWM (or plain) layers, Gaussian mean head
    Mlp critic;   // plain layers, scalar value head
    Vector log_std;  // state-independent, one per action dim
    double discount = 0.99;
    double lr_actor = 3e-2;
    double lr_critic = 1e-1;
};

struct RlConfig {
    std::size_t hidden = 64;
    std::size_t episodes_phase1 = 600;
    std::size_t episodes_phase2 = 600;
    std::size_t eval_episodes = 10;
    double discount = 0.99;
    double lr_actor = 3e-2;
    double lr_critic = 1e-1;
    double init_log_std = -1.0;
    std::uint64_t seed = 0;
    CowmConfig cowm;
    bool cowm_critic = false;  // experimentation override; default off
};

ActorCritic make_agent(const RlConfig& cfg, NetKind kind);

// Rolls one episode with Gaussian exploration noise (inference-mode
// forwards; no buffer mutation). deterministic=true takes the mean action.
EpisodeTrace collect_episode(PointMassEnv& env, ActorCritic& agent,
                             std::uint64_t episode_seed, bool deterministic = false);

// One-step TD advantage actor-critic update over a whole episode batch.
// The actor's training-mode forward feeds the direction buffers.
struct UpdateResult {
    double actor_loss;
    double critic_loss;
};
UpdateResult a2c_update(ActorCritic& agent, const EpisodeTrace& trace);

// Mean deterministic discounted return over eval_episodes fixed seeds.
double evaluate_return(PointMassEnv& env, ActorCritic& agent, int phase,
                       std::size_t eval_episodes, std::uint64_t seed_base);

struct RetentionReport {
    double phase1_return_after_phase1 = 0.0;
    double phase1_return_after_phase2 = 0.0;
    double phase2_return_final = 0.0;
    double retention = 0.0;
};

struct TwoPhaseReport {
    RetentionReport cowm;
    RetentionReport bp;
};

// Trains both agent kinds through the stand-then-walk phases. Optional CSV
// gets one row per training episode (agent, episode, phase, return,
// actor_loss, critic_loss).
TwoPhaseReport run_two_phase(const RlConfig& cfg, CsvWriter* metrics = nullptr);
RetentionReport run_two_phase_single(const RlConfig& cfg, NetKind kind,
                                     CsvWriter* metrics = nullptr,
                                     const char* agent_label = nullptr);

}  // namespace cowm
