#include "paft/experiments.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "paft/error.hpp"
#include "paft/hash.hpp"
#include "paft/rng.hpp"
#include "paft/stats.hpp"

namespace paft {

namespace {

std::string trimmed(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        raise(ErrorCode::invalid_argument, "bad integer for '" + key + "': " + value);
    }
}

double parse_f64(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        raise(ErrorCode::invalid_argument, "bad number for '" + key + "': " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    raise(ErrorCode::invalid_argument, "bad boolean for '" + key + "': " + value);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(static_cast<int>(parse_u64(key, trimmed(item))));
    }
    if (out.empty()) raise(ErrorCode::invalid_argument, "empty list for '" + key + "'");
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

} // namespace

void RunConfig::apply(const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "family") family = value;
        else if (key == "train_dataset") train_dataset_path = value;
        else if (key == "eval_dataset") eval_dataset_path = value;
        else if (key == "prompts") prompt_set_path = value;
        else if (key == "epochs") plan.epochs_T = parse_u64(key, value);
        else if (key == "k") plan.steps_per_prompt_K = parse_u64(key, value);
        else if (key == "lr") plan.learning_rate = parse_f64(key, value);
        else if (key == "seed") plan.seed = parse_u64(key, value);
        else if (key == "shuffle") plan.shuffle_data = parse_bool(key, value);
        else if (key == "batch") plan.batch_size = parse_u64(key, value);
        else if (key == "n_train") n_train = parse_u64(key, value);
        else if (key == "n_eval") n_eval = parse_u64(key, value);
        else if (key == "dim") dim = parse_u64(key, value);
        else if (key == "ngram_sizes") ngram_sizes = parse_int_list(key, value);
        else if (key == "depth") depth = static_cast<int>(parse_u64(key, value));
        else if (key == "hidden") hidden = parse_u64(key, value);
        else if (key == "optimizer") {
            if (value == "sgd") rule = OptRule::sgd;
            else if (value == "adamw") rule = OptRule::adamw;
            else raise(ErrorCode::invalid_argument, "optimizer must be sgd or adamw");
        }
        else if (key == "weight_decay") weight_decay = parse_f64(key, value);
        else if (key == "top_threshold") top_threshold = parse_f64(key, value);
        else if (key == "out_dir") out_dir = value;
        else if (key == "offline") offline = parse_bool(key, value);
        else raise(ErrorCode::invalid_argument, "unknown config key '" + key + "'");
    }
}

std::map<std::string, std::string> RunConfig::to_kv() const {
    std::map<std::string, std::string> kv;
    kv["family"] = family;
    kv["train_dataset"] = train_dataset_path;
    kv["eval_dataset"] = eval_dataset_path;
    kv["prompts"] = prompt_set_path;
    kv["epochs"] = std::to_string(plan.epochs_T);
    kv["k"] = std::to_string(plan.steps_per_prompt_K);
    kv["lr"] = format_g12(plan.learning_rate);
    kv["seed"] = std::to_string(plan.seed);
    kv["shuffle"] = plan.shuffle_data ? "true" : "false";
    kv["batch"] = std::to_string(plan.batch_size);
    kv["n_train"] = std::to_string(n_train);
    kv["n_eval"] = std::to_string(n_eval);
    kv["dim"] = std::to_string(dim);
    kv["ngram_sizes"] = join_ints(ngram_sizes);
    kv["depth"] = std::to_string(depth);
    kv["hidden"] = std::to_string(hidden);
    kv["optimizer"] = rule == OptRule::sgd ? "sgd" : "adamw";
    kv["weight_decay"] = format_g12(weight_decay);
    kv["top_threshold"] = format_g12(top_threshold);
    kv["out_dir"] = out_dir;
    kv["offline"] = offline ? "true" : "false";
    return kv;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io_error, "cannot open '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trimmed(line);
        if (t.empty() || t[0] == '#') continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos) {
            raise(ErrorCode::parse_error,
                  "config line " + std::to_string(line_no) + " is not key=value");
        }
        kv[trimmed(t.substr(0, eq))] = trimmed(t.substr(eq + 1));
    }
    return kv;
}

uint64_t config_hash(const RunConfig& config) {
    std::string canon;
    for (const auto& [key, value] : config.to_kv()) {
        canon += key + "=" + value + "\n";
    }
    return fnv1a64(canon);
}

std::string run_dir_for(const RunConfig& config) {
    return config.out_dir + "/run-" + hex64(config_hash(config));
}

uint64_t run_seed_for(uint64_t base_seed, size_t seed_index) {
    return base_seed ^ fnv1a64("run/" + std::to_string(seed_index));
}

std::vector<TaskInstance> train_data_for(const RunConfig& config, uint64_t run_seed) {
    if (!config.train_dataset_path.empty()) {
        return load_dataset(config.train_dataset_path, family_schema(config.family));
    }
    return synth_dataset(config.family, config.n_train, run_seed ^ fnv1a64("train-data"));
}

std::vector<TaskInstance> eval_data_for(const RunConfig& config, uint64_t run_seed) {
    if (!config.eval_dataset_path.empty()) {
        return load_dataset(config.eval_dataset_path, family_schema(config.family));
    }
    return synth_dataset(config.family, config.n_eval, run_seed ^ fnv1a64("eval-data"));
}

TextClassifier make_model(const RunConfig& config, const TaskSchema& schema, uint64_t run_seed) {
    ClassifierConfig cc;
    cc.dim = config.dim;
    cc.ngram_sizes = config.ngram_sizes;
    cc.labels = schema.label_space;
    cc.depth = config.depth;
    cc.hidden = config.hidden;
    cc.rule = config.rule;
    cc.weight_decay = config.weight_decay;
    return TextClassifier(cc, run_seed ^ fnv1a64("model"));
}

const PromptTemplate& choose_fixed_template(const PromptSet& prompts, uint64_t run_seed) {
    const auto train = prompts.with_split(Split::train);
    if (train.empty()) raise(ErrorCode::empty_prompt_set, "no templates in train split");
    Rng rng = derive_stream(run_seed, "fixed-choice");
    return *train[rng.next_index(train.size())];
}

TrainEvalOutcome train_and_eval(const RunConfig& config, const PromptSet& prompts,
                                const std::vector<PromptTemplate>& train_templates,
                                const PromptTemplate* fixed,
                                const std::vector<PromptTemplate>& eval_templates,
                                uint64_t run_seed) {
    const TaskSchema& schema = family_schema(config.family);
    const std::vector<TaskInstance> train_data = train_data_for(config, run_seed);
    const std::vector<TaskInstance> eval_data = eval_data_for(config, run_seed);

    TextClassifier model = make_model(config, schema, run_seed);
    TrainPlan plan = config.plan;
    plan.seed = run_seed ^ fnv1a64("streams");

    TrainEvalOutcome out;
    if (fixed != nullptr) {
        out.trace = train_fixed(plan, train_data, *fixed, schema, model);
    } else {
        PromptSet train_set;
        train_set.schema_id = prompts.schema_id;
        train_set.partition_seed = prompts.partition_seed;
        for (const auto& t : train_templates) {
            PromptTemplate copy = t;
            copy.split = Split::train;
            train_set.templates.push_back(std::move(copy));
        }
        out.trace = train_paft(plan, train_data, train_set, schema, model);
    }
    out.report = evaluate_prompt_set(model, eval_data, eval_templates, schema,
                                     config.top_threshold);
    return out;
}

void AblationGrid::validate() const {
    if (k_values.empty() || t_values.empty()) raise(ErrorCode::invalid_grid, "empty grid axis");
    if (n_seeds < 1) raise(ErrorCode::invalid_grid, "need >= 1 seed");
    for (size_t k : k_values) {
        if (k < 1) raise(ErrorCode::invalid_grid, "K values must be >= 1");
    }
    for (size_t t : t_values) {
        if (t < 1) raise(ErrorCode::invalid_grid, "T values must be >= 1");
    }
}

namespace {

std::vector<PromptTemplate> split_copy(const PromptSet& prompts, Split split) {
    std::vector<PromptTemplate> out;
    for (const auto* t : prompts.with_split(split)) out.push_back(*t);
    return out;
}

} // namespace

std::vector<AblationCell> run_ablation(const RunConfig& config, const PromptSet& prompts,
                                       const AblationGrid& grid) {
    grid.validate();
    const std::vector<PromptTemplate> train_templates = split_copy(prompts, Split::train);
    const std::vector<PromptTemplate> test_templates = split_copy(prompts, Split::test);
    if (train_templates.empty()) raise(ErrorCode::empty_prompt_set, "no train templates");
    if (test_templates.empty()) raise(ErrorCode::empty_prompt_set, "no test templates");

    std::vector<AblationCell> cells;
    for (size_t k : grid.k_values) {
        for (size_t t : grid.t_values) {
            AblationCell cell;
            cell.k = k;
            cell.t = t;
            for (size_t s = 0; s < grid.n_seeds; ++s) {
                RunConfig cfg = config;
                cfg.plan.steps_per_prompt_K = k;
                cfg.plan.epochs_T = t;
                try {
                    const TrainEvalOutcome run =
                        train_and_eval(cfg, prompts, train_templates, nullptr, test_templates,
                                       run_seed_for(config.plan.seed, s));
                    cell.seed_means.push_back(run.report.mean);
                    cell.seed_stds.push_back(run.report.stddev);
                } catch (const Error& e) {
                    throw Error(e.code(), std::string(e.what()) + " (cell K=" +
                                              std::to_string(k) + ", T=" + std::to_string(t) +
                                              ", seed " + std::to_string(s) + ")");
                }
            }
            cell.mean = stats::mean(cell.seed_means);
            cell.stddev = stats::mean(cell.seed_stds);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

void write_ablation_csv(const std::vector<AblationCell>& cells, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << "K,T,mean,std\n";
    for (const auto& c : cells) {
        out << c.k << "," << c.t << "," << format_g12(c.mean) << "," << format_g12(c.stddev)
            << "\n";
    }
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

void write_ablation_markdown(const std::vector<AblationCell>& cells, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << "| K and T | Accuracy |\n|---|---|\n";
    for (const auto& c : cells) {
        out << "| K = " << c.k << ", T = " << c.t << " | " << format_g12(c.mean) << " (± "
            << format_g12(c.stddev) << ") |\n";
    }
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

std::vector<ScalingRow> run_scaling(const RunConfig& config, const PromptSet& prompts,
                                    const std::vector<size_t>& prompt_counts, size_t n_seeds) {
    if (prompt_counts.empty()) raise(ErrorCode::invalid_argument, "no prompt counts");
    if (n_seeds < 1) raise(ErrorCode::invalid_argument, "need >= 1 seed");
    std::set<size_t> distinct(prompt_counts.begin(), prompt_counts.end());
    if (distinct.size() != prompt_counts.size()) {
        raise(ErrorCode::invalid_argument, "duplicate prompt counts");
    }
    if (!std::is_sorted(prompt_counts.begin(), prompt_counts.end())) {
        raise(ErrorCode::invalid_argument, "prompt counts must ascend");
    }

    const std::vector<PromptTemplate> train_templates = split_copy(prompts, Split::train);
    const std::vector<PromptTemplate> test_templates = split_copy(prompts, Split::test);
    if (train_templates.empty()) raise(ErrorCode::empty_prompt_set, "no train templates");
    if (test_templates.empty()) raise(ErrorCode::empty_prompt_set, "no test templates");
    for (size_t n : prompt_counts) {
        if (n < 1 || n > train_templates.size()) {
            raise(ErrorCode::invalid_size, "prompt count " + std::to_string(n) +
                                               " outside [1, " +
                                               std::to_string(train_templates.size()) + "]");
        }
    }

    std::vector<ScalingRow> rows;
    for (size_t n : prompt_counts) {
        ScalingRow row;
        row.n_prompts = n;
        for (size_t s = 0; s < n_seeds; ++s) {
            const uint64_t run_seed = run_seed_for(config.plan.seed, s);
            Rng rng = derive_stream(run_seed, "scale-subsample/" + std::to_string(n));
            std::vector<size_t> idx(train_templates.size());
            std::iota(idx.begin(), idx.end(), size_t{0});
            rng.shuffle(idx);
            std::vector<PromptTemplate> subset;
            subset.reserve(n);
            for (size_t i = 0; i < n; ++i) subset.push_back(train_templates[idx[i]]);

            const TrainEvalOutcome run =
                train_and_eval(config, prompts, subset, nullptr, test_templates, run_seed);
            row.seed_means.push_back(run.report.mean);
            row.seed_stds.push_back(run.report.stddev);
        }
        row.mean = stats::mean(row.seed_means);
        row.stddev = stats::mean(row.seed_stds);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_scaling_csv(const std::vector<ScalingRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << "n_prompts,mean,std\n";
    for (const auto& r : rows) {
        out << r.n_prompts << "," << format_g12(r.mean) << "," << format_g12(r.stddev) << "\n";
    }
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

void write_scaling_json(const std::vector<ScalingRow>& rows, const std::string& path) {
    nlohmann::ordered_json j;
    j["format"] = "scaling/1";
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        j["rows"].push_back({{"n_prompts", r.n_prompts},
                             {"mean", r.mean},
                             {"std", r.stddev},
                             {"seed_means", r.seed_means},
                             {"seed_stds", r.seed_stds}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

ReportBundle load_report_bundle(const std::vector<std::string>& paths) {
    ReportBundle bundle;
    for (const auto& path : paths) {
        bundle.names.push_back(std::filesystem::path(path).stem().string());
        bundle.reports.push_back(read_report(path));
    }
    return bundle;
}

void write_bundle_json(const ReportBundle& bundle, const std::string& path) {
    nlohmann::ordered_json j;
    j["format"] = "reportbundle/1";
    j["reports"] = nlohmann::ordered_json::array();
    for (size_t i = 0; i < bundle.reports.size(); ++i) {
        nlohmann::ordered_json entry;
        entry["name"] = bundle.names[i];
        entry["report"] = nlohmann::ordered_json::parse(report_to_json(bundle.reports[i]));
        j["reports"].push_back(std::move(entry));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

ReportBundle read_bundle_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::io_error, "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
        if (j.at("format").get<std::string>() != "reportbundle/1") {
            raise(ErrorCode::parse_error, "unsupported bundle format");
        }
        ReportBundle bundle;
        for (const auto& entry : j.at("reports")) {
            bundle.names.push_back(entry.at("name").get<std::string>());
            bundle.reports.push_back(report_from_json(entry.at("report").dump()));
        }
        return bundle;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::parse_error, std::string("bundle JSON: ") + e.what());
    }
}

void write_bundle_markdown(const ReportBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << "| Metric |";
    for (const auto& name : bundle.names) out << " " << name << " |";
    out << "\n|---|";
    for (size_t i = 0; i < bundle.names.size(); ++i) out << "---|";
    out << "\n";

    auto row = [&](const std::string& label, auto getter) {
        out << "| " << label << " |";
        for (const auto& r : bundle.reports) out << " " << getter(r) << " |";
        out << "\n";
    };
    row("Mean", [](const EvalReport& r) { return format_g12(r.mean); });
    row("Std", [](const EvalReport& r) { return format_g12(r.stddev); });
    row("Top", [](const EvalReport& r) { return format_g12(r.top_fraction); });
    row("Min", [](const EvalReport& r) { return format_g12(r.min_accuracy); });
    row("Con", [](const EvalReport& r) {
        return r.conditional_accuracy ? format_g12(*r.conditional_accuracy) : std::string("-");
    });
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

void write_bundle_csv(const ReportBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    out << "name,mean,std,top_fraction,min_accuracy,conditional_accuracy\n";
    for (size_t i = 0; i < bundle.reports.size(); ++i) {
        const EvalReport& r = bundle.reports[i];
        out << bundle.names[i] << "," << format_g12(r.mean) << "," << format_g12(r.stddev) << ","
            << format_g12(r.top_fraction) << "," << format_g12(r.min_accuracy) << ","
            << (r.conditional_accuracy ? format_g12(*r.conditional_accuracy) : "") << "\n";
    }
    if (!out) raise(ErrorCode::io_error, "write failed for '" + path + "'");
}

} // namespace paft
