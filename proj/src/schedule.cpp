#include "paft/schedule.hpp"

#include "paft/error.hpp"
#include "paft/rng.hpp"

namespace paft {

void TrainPlan::validate() const {
    if (steps_per_prompt_K < 1) raise(ErrorCode::invalid_argument, "K must be >= 1");
    if (!(learning_rate > 0.0)) raise(ErrorCode::invalid_argument, "learning rate must be > 0");
    if (batch_size < 1) raise(ErrorCode::invalid_argument, "batch size must be >= 1");
}

std::vector<ScheduleEvent> build_schedule(const TrainPlan& plan,
                                          const std::vector<std::string>& prompt_ids,
                                          size_t steps_per_epoch) {
    plan.validate();
    if (prompt_ids.empty()) raise(ErrorCode::empty_prompt_set, "no prompt ids to schedule");
    if (steps_per_epoch < 1) raise(ErrorCode::invalid_argument, "steps_per_epoch must be >= 1");

    Rng prompt_stream = derive_stream(plan.seed, "prompt");
    auto sample = [&]() -> const std::string& {
        return prompt_ids[prompt_stream.next_index(prompt_ids.size())];
    };

    std::vector<ScheduleEvent> events;
    events.reserve(plan.epochs_T * steps_per_epoch);
    for (size_t epoch = 0; epoch < plan.epochs_T; ++epoch) {
        std::string current = sample();
        size_t k = 0;
        for (size_t step = 0; step < steps_per_epoch; ++step) {
            events.push_back({epoch, step, current});
            ++k;
            if (k % plan.steps_per_prompt_K == 0) {
                // Drawn even when this is the epoch's last step, keeping the
                // stream position independent of steps_per_epoch mod K.
                current = sample();
            }
        }
    }
    return events;
}

} // namespace paft
