#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace paft {

/// Hyperparameters of one training run. epochs_T = 0 is a permitted no-op.
struct TrainPlan {
    size_t epochs_T = 3;
    size_t steps_per_prompt_K = 4;
    double learning_rate = 0.003;
    uint64_t seed = 0;
    bool shuffle_data = true;
    size_t batch_size = 1;

    void validate() const;
};

/// One scheduled step: which prompt is active at (epoch, step).
struct ScheduleEvent {
    size_t epoch = 0;
    size_t step = 0;
    std::string prompt_id;
};

/// Dynamic prompt schedule: a prompt is sampled uniformly at each epoch
/// start; the step counter k increments after every step and a fresh prompt
/// is sampled whenever k mod K == 0, taking effect from the next step. The
/// sampler consumes a dedicated "prompt" stream derived from plan.seed, so
/// it never perturbs data shuffling. Covers all plan.epochs_T epochs.
std::vector<ScheduleEvent> build_schedule(const TrainPlan& plan,
                                          const std::vector<std::string>& prompt_ids,
                                          size_t steps_per_epoch);

} // namespace paft
