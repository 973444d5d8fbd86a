#pragma once

#include <string>
#include <vector>

#include "paft/prompt.hpp"
#include "paft/schedule.hpp"
#include "paft/task.hpp"
#include "paft/trainable.hpp"

namespace paft {

struct TrainStepRecord {
    size_t epoch = 0;
    size_t step = 0;
    std::string prompt_id;
    double loss = 0.0;
};

struct TrainTrace {
    std::vector<TrainStepRecord> records;
    std::string param_digest;
};

/// Dynamic-prompt training: every batch is rendered with the prompt the
/// schedule assigns to its step, parameters carry across epoch boundaries,
/// and the trace records every update. Data visitation order comes from a
/// "data" stream derived from plan.seed (per-epoch reshuffle when
/// plan.shuffle_data), independent of the prompt stream.
TrainTrace train_paft(const TrainPlan& plan, const std::vector<TaskInstance>& dataset,
                      const PromptSet& prompts, const TaskSchema& schema,
                      TrainableModel& model);

/// Identical loop with one template held constant throughout.
TrainTrace train_fixed(const TrainPlan& plan, const std::vector<TaskInstance>& dataset,
                       const PromptTemplate& tmpl, const TaskSchema& schema,
                       TrainableModel& model);

/// Trace file: one JSON object per step plus a final {"param_digest"} line.
void save_trace(const TrainTrace& trace, const std::string& path);
TrainTrace load_trace(const std::string& path);

namespace detail {
/// Epoch-major data visitation order (indices into the dataset).
std::vector<size_t> data_order(const TrainPlan& plan, size_t dataset_size);
} // namespace detail

} // namespace paft
