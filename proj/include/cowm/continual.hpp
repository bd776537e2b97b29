#pragma once

#include <cstdint>
#include <utility>

#include "cowm/network.hpp"
#include "cowm/record.hpp"

namespace cowm {

// Linear regression task: inputs scatter around a unit mean direction,
// targets are an exact linear map of the inputs.
struct TaskSpec {
    Vector mean_direction;  // unit
    double spread = 0.0;
    Matrix target_map;  // d_in x d_out, y = M^T x
    std::uint64_t sample_seed = 0;
};

// Two tasks whose mean directions subtend exactly angle_degrees, with
// independent random target maps.
std::pair<TaskSpec, TaskSpec> make_task_pair(std::size_t d_in, std::size_t d_out,
                                             double angle_degrees, double spread,
                                             std::uint64_t seed);

// Batch of b columns x = mean + spread*noise, y = target_map^T x.
// Deterministic per (task, step_seed).
std::pair<Matrix, Matrix> sample_batch(const TaskSpec& task, std::size_t b,
                                       std::uint64_t step_seed);

struct ContinualConfig {
    NetKind kind = NetKind::Cowm;
    std::size_t d_in = 16;
    std::size_t d_out = 4;
    double angle_degrees = 45.0;
    double spread = 0.1;
    std::size_t steps_per_phase = 2000;
    std::size_t eval_every = 100;
    std::size_t eval_batch = 256;
    TrainConfig train;
    CowmConfig cowm;
};

struct ForgettingReport {
    double task1_loss_after_task1 = 0.0;
    double task1_loss_after_task2 = 0.0;
    double task2_loss_final = 0.0;
    double forgetting_ratio = 0.0;  // task1_after_task2 / max(task1_after_task1, 1e-12)
};

// Phase 1 trains on task 1 only, phase 2 on task 2 only; losses evaluated
// with training-mode disabled. Optional CSV gets one row per eval interval
// (step, phase, task1_loss, task2_loss). Throws RunError on divergence.
ForgettingReport run_sequential(const ContinualConfig& cfg, CsvWriter* metrics = nullptr);

// Same loop with explicit tasks; "task1" in the report means `first`.
ForgettingReport run_sequential_tasks(const ContinualConfig& cfg, const TaskSpec& first,
                                      const TaskSpec& second, CsvWriter* metrics = nullptr);

}  // namespace cowm
