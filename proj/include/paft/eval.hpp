#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paft/prompt.hpp"
#include "paft/task.hpp"
#include "paft/trainable.hpp"

namespace paft {

struct PromptEvalRow {
    std::string prompt_id;
    uint64_t n_correct = 0;
    uint64_t n_total = 0;
    double accuracy = 0.0; // exactly n_correct / n_total
};

/// Per-prompt accuracy rows plus the summary metric suite: mean, sample
/// standard deviation (n-1; 0 for a single row), fraction of rows at or
/// above top_threshold, worst row, and optionally the adversarial-set mean.
struct EvalReport {
    std::vector<PromptEvalRow> rows;
    double mean = 0.0;
    double stddev = 0.0;
    double top_threshold = 0.85;
    double top_fraction = 0.0;
    double min_accuracy = 0.0;
    std::optional<double> conditional_accuracy;
};

/// Summary fields from rows; rows are sorted by prompt_id in the result.
EvalReport summarize(std::vector<PromptEvalRow> rows, double top_threshold);

/// Predicts every dataset instance under every prompt.
EvalReport evaluate_prompt_set(const TrainableModel& model,
                               const std::vector<TaskInstance>& dataset,
                               const std::vector<PromptTemplate>& prompts,
                               const TaskSchema& schema, double top_threshold);

/// Mean of per-prompt accuracies over an adversarial prompt set (macro
/// average, matching how the clean mean is defined over prompts).
double conditional_accuracy(const TrainableModel& model,
                            const std::vector<TaskInstance>& dataset,
                            const std::vector<PromptTemplate>& adversarial_prompts,
                            const TaskSchema& schema);

/// Formats a double with 12 significant digits (the CSV contract).
std::string format_g12(double v);

void write_report(const EvalReport& report, const std::string& path);
EvalReport read_report(const std::string& path);
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// CSV projection (prompt_id, accuracy), one row per prompt plus a header.
void write_report_csv(const EvalReport& report, const std::string& path);

} // namespace paft
