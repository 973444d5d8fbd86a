#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paft/eval.hpp"
#include "paft/prompt.hpp"
#include "paft/schedule.hpp"
#include "paft/toy_model.hpp"
#include "paft/train.hpp"

namespace paft {

/// Effective settings of one pipeline run. Everything that influences an
/// output file is in here, so the config hash can address run directories.
struct RunConfig {
    std::string family = "pattern2";
    std::string train_dataset_path; // optional; synthesized when empty
    std::string eval_dataset_path;  // optional; synthesized when empty
    std::string prompt_set_path;
    TrainPlan plan;
    size_t n_train = 500;
    size_t n_eval = 200;
    size_t dim = size_t{1} << 14;
    std::vector<int> ngram_sizes = {1, 2, 3};
    int depth = 1;
    size_t hidden = 16;
    OptRule rule = OptRule::sgd;
    double weight_decay = 0.0;
    double top_threshold = 0.85;
    std::string out_dir = "runs";
    bool offline = false; // true forbids all network use; no endpoint, no network anyway

    /// Applies "key=value" settings; unknown keys or bad values throw
    /// InvalidArgument.
    void apply(const std::map<std::string, std::string>& kv);
    std::map<std::string, std::string> to_kv() const;
};

/// Flat key=value file, one pair per line, '#' comments.
std::map<std::string, std::string> parse_config_file(const std::string& path);

uint64_t config_hash(const RunConfig& config);
std::string run_dir_for(const RunConfig& config);

/// Per-seed-index run seed; independent of grid cell or prompt count so
/// sweeps compare paired runs.
uint64_t run_seed_for(uint64_t base_seed, size_t seed_index);

std::vector<TaskInstance> train_data_for(const RunConfig& config, uint64_t run_seed);
std::vector<TaskInstance> eval_data_for(const RunConfig& config, uint64_t run_seed);
TextClassifier make_model(const RunConfig& config, const TaskSchema& schema, uint64_t run_seed);

/// Uniform draw from the train split; the per-seed stand-in for a
/// human-picked fixed prompt.
const PromptTemplate& choose_fixed_template(const PromptSet& prompts, uint64_t run_seed);

struct TrainEvalOutcome {
    EvalReport report;
    TrainTrace trace;
};

/// Trains on the given templates (dynamic sampling when fixed == nullptr,
/// otherwise the single fixed template) and evaluates on eval_templates.
TrainEvalOutcome train_and_eval(const RunConfig& config, const PromptSet& prompts,
                                const std::vector<PromptTemplate>& train_templates,
                                const PromptTemplate* fixed,
                                const std::vector<PromptTemplate>& eval_templates,
                                uint64_t run_seed);

struct AblationGrid {
    std::vector<size_t> k_values;
    std::vector<size_t> t_values;
    size_t n_seeds = 3;

    void validate() const;
};

struct AblationCell {
    size_t k = 0;
    size_t t = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> seed_means;
    std::vector<double> seed_stds;
};

/// One dynamic-training run per (K, T, seed); each cell reports the
/// across-prompt mean and std on the unseen test split, averaged over seeds.
std::vector<AblationCell> run_ablation(const RunConfig& config, const PromptSet& prompts,
                                       const AblationGrid& grid);

void write_ablation_csv(const std::vector<AblationCell>& cells, const std::string& path);
void write_ablation_markdown(const std::vector<AblationCell>& cells, const std::string& path);

struct ScalingRow {
    size_t n_prompts = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> seed_means;
    std::vector<double> seed_stds;
};

/// Subsamples n training prompts per seed, trains dynamically, evaluates on
/// the fixed test split. prompt_counts must be strictly ascending.
std::vector<ScalingRow> run_scaling(const RunConfig& config, const PromptSet& prompts,
                                    const std::vector<size_t>& prompt_counts, size_t n_seeds);

void write_scaling_csv(const std::vector<ScalingRow>& rows, const std::string& path);
void write_scaling_json(const std::vector<ScalingRow>& rows, const std::string& path);

struct ReportBundle {
    std::vector<std::string> names;
    std::vector<EvalReport> reports;
};

ReportBundle load_report_bundle(const std::vector<std::string>& paths);
void write_bundle_json(const ReportBundle& bundle, const std::string& path);
ReportBundle read_bundle_json(const std::string& path);
void write_bundle_markdown(const ReportBundle& bundle, const std::string& path);
void write_bundle_csv(const ReportBundle& bundle, const std::string& path);

} // namespace paft
